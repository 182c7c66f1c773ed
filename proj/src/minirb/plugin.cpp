#include <cmath>
#include <set>

#include "polyvm/frontend/codegen.hpp"
#include "polyvm/frontend/support.hpp"
#include "polyvm/frontend/text.hpp"
#include "polyvm/kernel/interpreter.hpp"
#include "polyvm/minirb/minirb.hpp"
#include "polyvm/runtime.hpp"

namespace polyvm::minirb {

using namespace frontend;
using kernel::BuiltinCall;
using kernel::BuiltinResult;

kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options) {
    auto module = parse(source, options.predeclared);
    CodegenOptions cg;
    cg.language = self;
    cg.root_name = "<main>";
    cg.source = source;
    cg.implicit_return = true;
    cg.top_level_methods = options.methods;
    return generate(module, cg);
}

namespace {

/// Leading integer of `s` the way String#to_i reads it; 0 when none.
BigInt leading_int(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    bool negative = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) negative = s[i++] == '-';
    BigInt n = 0;
    for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '_'); ++i) {
        if (s[i] != '_') n = n * 10 + (s[i] - '0');
    }
    return negative ? BigInt(-n) : n;
}

double leading_float(std::string_view s) {
    std::string text(s);
    return std::strtod(text.c_str(), nullptr);
}

class MiniRb final : public LanguagePlugin {
public:
    PluginDescriptor descriptor() const override { return {"minirb", "MiniRb", ".mrb", required_capabilities()}; }

    kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options) const override {
        return minirb::compile(source, self, options);
    }

    std::vector<Token> tokenize(std::string_view source) const override { return minirb::tokenize(source); }

    std::string display(const Value& value, const Runtime& rt) const override {
        std::set<const List*> seen;
        return show(value, rt, seen);
    }

    std::string to_text(const Value& value, const Runtime& rt) const override {
        if (value.is_text()) return value.as_text();
        if (value.is_nil()) return "";
        if (value.is_object()) {
            const auto ref = value.as_object();
            const auto& obj = rt.objects().at(ref.lang, ref.handle);
            if (const auto* exc = std::get_if<ExceptionObject>(&obj)) return exc->message;
            if (const auto* cls = std::get_if<ClassObject>(&obj)) return cls->name;
        }
        return display(value, rt);
    }

    bool truthy(const Value& v) const override {
        if (v.is_nil()) return false;
        if (v.is_bool()) return v.as_bool();
        return true;
    }

    std::string type_name(const Value& v, const Runtime& rt) const override {
        switch (v.kind()) {
        case ValueKind::Nil: return "NilClass";
        case ValueKind::Bool: return v.as_bool() ? "TrueClass" : "FalseClass";
        case ValueKind::Int: return "Integer";
        case ValueKind::Float: return "Float";
        case ValueKind::Text: return "String";
        case ValueKind::List: return "Array";
        case ValueKind::Foreign: return rt.class_name_of(v);
        case ValueKind::Object: break;
        }
        const auto ref = v.as_object();
        const auto& obj = rt.objects().at(ref.lang, ref.handle);
        if (std::holds_alternative<ClassObject>(obj)) return "Class";
        if (std::holds_alternative<FunctionObject>(obj) || std::holds_alternative<BoundMethod>(obj) ||
            std::holds_alternative<BuiltinObject>(obj)) {
            return "Method";
        }
        if (std::holds_alternative<IteratorObject>(obj)) return "Enumerator";
        if (const auto* box = std::get_if<BoxObject>(&obj)) return type_name(box->value, rt);
        return rt.class_name_of(v);
    }

    std::string_view root_name() const override { return "<main>"; }
    std::string_view initializer_name() const override { return "initialize"; }
    bool implicit_self_calls() const override { return true; }

    ExceptionValue error(ErrorKind kind, const std::vector<std::string>& a) const override {
        auto arg = [&](std::size_t i) { return i < a.size() ? a[i] : std::string(); };
        auto make = [](std::string cls, std::string msg) { return ExceptionValue{std::move(cls), std::move(msg), {}}; };
        auto no_method = [&](const std::string& selector, const std::string& type) {
            return make("NoMethodError", "undefined method '" + selector + "' for an instance of " + type);
        };
        switch (kind) {
        case ErrorKind::UndefinedName: return make("NameError", "undefined local variable or method '" + arg(0) + "'");
        case ErrorKind::NoSuchMethod:
        case ErrorKind::NoSuchAttribute: return no_method(arg(1), arg(0));
        case ErrorKind::Arity:
            return make("ArgumentError", "wrong number of arguments (given " + arg(2) + ", expected " + arg(1) + ")");
        case ErrorKind::OperandTypes:
            return make("TypeError", "unsupported operand types for " + arg(0) + ": " + arg(1) + " and " + arg(2));
        case ErrorKind::UnaryOperandType: return no_method(arg(0) + "@", arg(1));
        case ErrorKind::Comparison: return make("ArgumentError", "comparison of " + arg(1) + " with " + arg(2) + " failed");
        case ErrorKind::NotCallable: return no_method("call", arg(0));
        case ErrorKind::NotIterable: return no_method("each", arg(0));
        case ErrorKind::IndexOutOfRange: return make("IndexError", "index " + arg(1) + " outside of " + arg(0) + " bounds");
        case ErrorKind::IndexType: return make("TypeError", "no implicit conversion into Integer");
        case ErrorKind::NotSubscriptable: return no_method("[]", arg(0));
        case ErrorKind::IntegerDivision: return make("ZeroDivisionError", "integer division by zero");
        case ErrorKind::IntegerModulo: return make("ZeroDivisionError", "integer modulo by zero");
        case ErrorKind::FloatDivision: return make("ZeroDivisionError", "float division by zero");
        case ErrorKind::BadRaise: return make("TypeError", "exception class/object expected");
        case ErrorKind::ValueError: return make("ArgumentError", arg(0));
        }
        return make("RuntimeError", "internal error");
    }

    ExceptionValue exception_for_raised(const Value& value, const Runtime&) const override {
        if (value.is_text()) return ExceptionValue{"RuntimeError", value.as_text(), {}};
        return error(ErrorKind::BadRaise, {});
    }

    std::vector<std::string> exception_classes() const override {
        return {"StandardError", "RuntimeError",  "ArgumentError", "TypeError", "ZeroDivisionError",
                "IndexError",    "NameError",     "NoMethodError", "KeyError"};
    }

    std::vector<std::shared_ptr<const kernel::Builtin>> builtins() const override {
        const MiniRb& self = *this;
        std::vector<std::shared_ptr<const kernel::Builtin>> out;
        out.push_back(builtin("puts", [&self](BuiltinCall& call) -> BuiltinResult {
            auto& rt = call.context.runtime;
            if (call.args.empty()) call.context.transcript += "\n";
            for (const auto& arg : call.args) self.puts_value(arg, rt, call.context.transcript);
            return Value::nil();
        }));
        out.push_back(builtin("print", [&self](BuiltinCall& call) -> BuiltinResult {
            for (const auto& arg : call.args) call.context.transcript += self.to_text(arg, call.context.runtime);
            return Value::nil();
        }));
        out.push_back(builtin("sleep", [&self](BuiltinCall& call) -> BuiltinResult {
            auto r = sleep_until(self, call);
            if (auto* err = std::get_if<ExceptionValue>(&r)) return *err;
            return kernel::BlockUntil{std::get<kernel::Clock::time_point>(r)};
        }));
        return out;
    }

    std::optional<BuiltinResult> call_primitive_method(BuiltinCall& call, const Value& receiver,
                                                       std::string_view selector) const override {
        auto& rt = call.context.runtime;
        auto arity = [&](std::size_t min, std::size_t max) { return check_arity(*this, selector, call, min, max); };
        auto result = [](auto v) { return std::optional<BuiltinResult>(BuiltinResult{std::move(v)}); };

        if (receiver.is_object()) {
            const auto ref = receiver.as_object();
            if (const auto* exc = std::get_if<ExceptionObject>(&rt.objects().at(ref.lang, ref.handle))) {
                if (selector == "message" || selector == "to_s") {
                    if (auto err = arity(0, 0)) return result(*err);
                    return result(Value::text(exc->message));
                }
            }
        }
        if (selector == "to_s") {
            if (auto err = arity(0, 0)) return result(*err);
            return result(Value::text(to_text(receiver, rt)));
        }
        if (selector == "inspect") {
            if (auto err = arity(0, 0)) return result(*err);
            return result(Value::text(display(receiver, rt)));
        }
        if (selector == "nil?") {
            if (auto err = arity(0, 0)) return result(*err);
            return result(Value::boolean(receiver.is_nil()));
        }

        if (receiver.is_text()) {
            const auto& s = receiver.as_text();
            if (selector == "split") {
                if (auto err = arity(0, 1)) return result(*err);
                std::optional<std::string> sep;
                if (!call.args.empty()) {
                    if (!call.args[0].is_text()) return result(ExceptionValue{"TypeError", "wrong argument type", {}});
                    if (call.args[0].as_text() != " ") sep = call.args[0].as_text();
                }
                auto parts = split_text(s, sep);
                while (!parts.empty() && parts.back().as_text().empty()) parts.pop_back();
                return result(Value::list(std::move(parts)));
            }
            if (selector == "downcase") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::text(lower_ascii(s)));
            }
            if (selector == "upcase") {
                if (auto err = arity(0, 0)) return result(*err);
                std::string up = s;
                for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                return result(Value::text(std::move(up)));
            }
            if (selector == "strip") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::text(strip_whitespace(s)));
            }
            if (selector == "length" || selector == "size") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::integer(static_cast<std::int64_t>(utf8::length(s))));
            }
            if (selector == "empty?") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::boolean(s.empty()));
            }
            if (selector == "to_i") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::integer(leading_int(s)));
            }
            if (selector == "to_f") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::real(leading_float(s)));
            }
            return std::nullopt;
        }

        if (receiver.is_list()) {
            auto& items = *receiver.as_list();
            if (selector == "push") {
                for (const auto& a : call.args) items.push_back(a);
                return result(receiver);
            }
            if (selector == "pop") {
                if (auto err = arity(0, 0)) return result(*err);
                if (items.empty()) return result(Value::nil());
                Value last = items.back();
                items.pop_back();
                return result(std::move(last));
            }
            if (selector == "size" || selector == "length") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::integer(static_cast<std::int64_t>(items.size())));
            }
            if (selector == "first" || selector == "last") {
                if (auto err = arity(0, 0)) return result(*err);
                if (items.empty()) return result(Value::nil());
                return result(selector == "first" ? items.front() : items.back());
            }
            if (selector == "empty?") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::boolean(items.empty()));
            }
            if (selector == "include?") {
                if (auto err = arity(1, 1)) return result(*err);
                for (const auto& item : items) {
                    if (kernel::values_equal(item, call.args[0])) return result(Value::boolean(true));
                }
                return result(Value::boolean(false));
            }
            if (selector == "join") {
                if (auto err = arity(0, 1)) return result(*err);
                std::string sep = call.args.empty() ? std::string() : to_text(call.args[0], rt);
                std::string out;
                for (std::size_t i = 0; i < items.size(); ++i) {
                    if (i) out += sep;
                    out += to_text(items[i], rt);
                }
                return result(Value::text(std::move(out)));
            }
            return std::nullopt;
        }

        if (receiver.is_number()) {
            if (selector == "to_i") {
                if (auto err = arity(0, 0)) return result(*err);
                if (receiver.is_int()) return result(receiver);
                if (!std::isfinite(receiver.as_float())) {
                    return result(ExceptionValue{"FloatDomainError", format_float(receiver.as_float(), FloatStyle::Ruby), {}});
                }
                return result(Value::integer(BigInt(std::trunc(receiver.as_float()))));
            }
            if (selector == "to_f") {
                if (auto err = arity(0, 0)) return result(*err);
                return result(Value::real(receiver.to_double()));
            }
            if (selector == "abs") {
                if (auto err = arity(0, 0)) return result(*err);
                if (receiver.is_int()) return result(Value::integer(abs(receiver.as_int())));
                return result(Value::real(std::fabs(receiver.as_float())));
            }
        }
        return std::nullopt;
    }

private:
    void puts_value(const Value& v, const Runtime& rt, std::string& out) const {
        if (v.is_list()) {
            if (v.as_list()->empty()) out += "\n";
            for (const auto& item : *v.as_list()) puts_value(item, rt, out);
            return;
        }
        auto text = to_text(v, rt);
        out += text;
        if (text.empty() || text.back() != '\n') out += "\n";
    }

    std::string show(const Value& v, const Runtime& rt, std::set<const List*>& seen) const {
        switch (v.kind()) {
        case ValueKind::Nil: return "nil";
        case ValueKind::Bool: return v.as_bool() ? "true" : "false";
        case ValueKind::Int: return v.as_int().str();
        case ValueKind::Float: return format_float(v.as_float(), FloatStyle::Ruby);
        case ValueKind::Text: return quote_text(v.as_text(), '"');
        case ValueKind::List: {
            const auto* items = v.as_list().get();
            if (seen.contains(items)) return "[...]";
            seen.insert(items);
            std::string out = "[";
            for (std::size_t i = 0; i < items->size(); ++i) {
                if (i) out += ", ";
                out += show((*items)[i], rt, seen);
            }
            seen.erase(items);
            return out + "]";
        }
        case ValueKind::Foreign: {
            const auto ref = v.as_foreign();
            return "#<foreign " + rt.language_name(ref.lang) + " " + rt.class_name_of(v) + ">";
        }
        case ValueKind::Object: break;
        }
        const auto ref = v.as_object();
        const auto& obj = rt.objects().at(ref.lang, ref.handle);
        if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
            // Ruby-style inspect with instance variables; cycles print as #<Name ...>
            static thread_local std::set<const InstanceObject*> showing;
            std::string out = "#<" + std::get<ClassObject>(rt.objects().at(ref.lang, inst->class_handle)).name;
            if (showing.contains(inst)) return out + " ...>";
            showing.insert(inst);
            const char* sep = " ";
            for (const auto& [name, value] : inst->slots.entries()) {
                out += sep + name + "=" + show(value, rt, seen);
                sep = ", ";
            }
            showing.erase(inst);
            return out + ">";
        }
        if (const auto* cls = std::get_if<ClassObject>(&obj)) return cls->name;
        if (const auto* fn = std::get_if<FunctionObject>(&obj)) return "#<Method: " + fn->code->name + ">";
        if (const auto* bm = std::get_if<BoundMethod>(&obj)) {
            const auto& fn = std::get<FunctionObject>(rt.objects().at(ref.lang, bm->function));
            return "#<Method: " + rt.class_name_of(bm->receiver) + "#" + fn.code->name + ">";
        }
        if (const auto* b = std::get_if<BuiltinObject>(&obj)) return "#<Method: " + b->builtin->name + ">";
        if (const auto* exc = std::get_if<ExceptionObject>(&obj)) return "#<" + exc->class_name + ": " + exc->message + ">";
        if (const auto* box = std::get_if<BoxObject>(&obj)) return show(box->value, rt, seen);
        return "#<Enumerator>";
    }
};

}  // namespace

std::unique_ptr<LanguagePlugin> make_plugin() { return std::make_unique<MiniRb>(); }

}  // namespace polyvm::minirb
