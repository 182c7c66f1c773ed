#include <set>

#include "polyvm/frontend/codegen.hpp"
#include "polyvm/frontend/support.hpp"
#include "polyvm/frontend/text.hpp"
#include "polyvm/minipy/minipy.hpp"
#include "polyvm/runtime.hpp"

namespace polyvm::minipy {

using namespace frontend;
using kernel::BuiltinCall;
using kernel::BuiltinResult;

kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options) {
    auto module = parse(source);
    CodegenOptions cg;
    cg.language = self;
    cg.root_name = "<string>";
    cg.source = source;
    cg.methods_bind_self = true;
    cg.top_level_methods = options.methods;
    return generate(module, cg);
}

namespace {

class MiniPy final : public LanguagePlugin {
public:
    PluginDescriptor descriptor() const override {
        return {"minipy", "MiniPy", ".mpy", required_capabilities()};
    }

    kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options) const override {
        return minipy::compile(source, self, options);
    }

    std::vector<Token> tokenize(std::string_view source) const override { return minipy::tokenize(source); }

    std::string display(const Value& value, const Runtime& rt) const override {
        std::set<const List*> seen;
        return show(value, rt, seen);
    }

    std::string to_text(const Value& value, const Runtime& rt) const override {
        if (value.is_text()) return value.as_text();
        if (value.is_object()) {
            const auto ref = value.as_object();
            if (const auto* exc = std::get_if<ExceptionObject>(&rt.objects().at(ref.lang, ref.handle))) {
                return exc->message;
            }
        }
        return display(value, rt);
    }

    bool truthy(const Value& v) const override {
        switch (v.kind()) {
        case ValueKind::Nil: return false;
        case ValueKind::Bool: return v.as_bool();
        case ValueKind::Int: return v.as_int() != 0;
        case ValueKind::Float: return v.as_float() != 0.0;
        case ValueKind::Text: return !v.as_text().empty();
        case ValueKind::List: return !v.as_list()->empty();
        default: return true;
        }
    }

    std::string type_name(const Value& v, const Runtime& rt) const override {
        switch (v.kind()) {
        case ValueKind::Nil: return "NoneType";
        case ValueKind::Bool: return "bool";
        case ValueKind::Int: return "int";
        case ValueKind::Float: return "float";
        case ValueKind::Text: return "str";
        case ValueKind::List: return "list";
        case ValueKind::Foreign: return rt.class_name_of(v);
        case ValueKind::Object: break;
        }
        const auto ref = v.as_object();
        const auto& obj = rt.objects().at(ref.lang, ref.handle);
        if (std::holds_alternative<ClassObject>(obj)) return "type";
        if (std::holds_alternative<FunctionObject>(obj)) return "function";
        if (std::holds_alternative<BoundMethod>(obj)) return "method";
        if (std::holds_alternative<BuiltinObject>(obj)) return "builtin_function_or_method";
        if (std::holds_alternative<IteratorObject>(obj)) return "iterator";
        if (const auto* box = std::get_if<BoxObject>(&obj)) return type_name(box->value, rt);
        return rt.class_name_of(v);
    }

    std::string_view root_name() const override { return "<string>"; }
    std::string_view initializer_name() const override { return "__init__"; }
    bool implicit_self_calls() const override { return false; }

    ExceptionValue error(ErrorKind kind, const std::vector<std::string>& a) const override {
        auto arg = [&](std::size_t i) { return i < a.size() ? a[i] : std::string(); };
        auto make = [](std::string cls, std::string msg) { return ExceptionValue{std::move(cls), std::move(msg), {}}; };
        switch (kind) {
        case ErrorKind::UndefinedName: return make("NameError", "name '" + arg(0) + "' is not defined");
        case ErrorKind::NoSuchMethod:
        case ErrorKind::NoSuchAttribute:
            return make("AttributeError", "'" + arg(0) + "' object has no attribute '" + arg(1) + "'");
        case ErrorKind::Arity:
            return make("TypeError", arg(0) + "() takes " + arg(1) + " positional argument" +
                                         (arg(1) == "1" ? "" : "s") + " but " + arg(2) +
                                         (arg(2) == "1" ? " was" : " were") + " given");
        case ErrorKind::OperandTypes:
            return make("TypeError",
                        "unsupported operand type(s) for " + arg(0) + ": '" + arg(1) + "' and '" + arg(2) + "'");
        case ErrorKind::UnaryOperandType: return make("TypeError", "bad operand type for unary " + arg(0) + ": '" + arg(1) + "'");
        case ErrorKind::Comparison:
            return make("TypeError",
                        "'" + arg(0) + "' not supported between instances of '" + arg(1) + "' and '" + arg(2) + "'");
        case ErrorKind::NotCallable: return make("TypeError", "'" + arg(0) + "' object is not callable");
        case ErrorKind::NotIterable: return make("TypeError", "'" + arg(0) + "' object is not iterable");
        case ErrorKind::IndexOutOfRange:
            if (arg(2) == "store") return make("IndexError", arg(0) + " assignment index out of range");
            return make("IndexError", (arg(0) == "str" ? "string" : arg(0)) + " index out of range");
        case ErrorKind::IndexType: return make("TypeError", arg(0) + " indices must be integers");
        case ErrorKind::NotSubscriptable: return make("TypeError", "'" + arg(0) + "' object is not subscriptable");
        case ErrorKind::IntegerDivision: return make("ZeroDivisionError", "integer division by zero");
        case ErrorKind::IntegerModulo: return make("ZeroDivisionError", "integer modulo by zero");
        case ErrorKind::FloatDivision: return make("ZeroDivisionError", "float division by zero");
        case ErrorKind::BadRaise: return make("TypeError", "exceptions must derive from BaseException");
        case ErrorKind::ValueError: return make("ValueError", arg(0));
        }
        return make("RuntimeError", "internal error");
    }

    ExceptionValue exception_for_raised(const Value&, const Runtime&) const override {
        return error(ErrorKind::BadRaise, {});
    }

    std::vector<std::string> exception_classes() const override {
        return {"Exception",  "ValueError", "TypeError",    "ZeroDivisionError", "IndexError",
                "NameError",  "AttributeError", "RuntimeError", "KeyError",   "AssertionError"};
    }

    std::vector<std::shared_ptr<const kernel::Builtin>> builtins() const override {
        const LanguagePlugin& self = *this;
        std::vector<std::shared_ptr<const kernel::Builtin>> out;
        out.push_back(builtin("print", [&self](BuiltinCall& call) -> BuiltinResult {
            std::string line;
            for (std::size_t i = 0; i < call.args.size(); ++i) {
                if (i) line += ' ';
                line += self.to_text(call.args[i], call.context.runtime);
            }
            call.context.transcript += line + "\n";
            return Value::nil();
        }));
        out.push_back(builtin("len", [&self](BuiltinCall& call) -> BuiltinResult {
            if (auto err = check_arity(self, "len", call, 1, 1)) return *err;
            const auto& v = call.args[0];
            if (v.is_text()) return Value::integer(static_cast<std::int64_t>(utf8::length(v.as_text())));
            if (v.is_list()) return Value::integer(static_cast<std::int64_t>(v.as_list()->size()));
            return ExceptionValue{"TypeError",
                                  "object of type '" + self.type_name(v, call.context.runtime) + "' has no len()", {}};
        }));
        out.push_back(builtin("range", [&self](BuiltinCall& call) -> BuiltinResult {
            if (auto err = check_arity(self, "range", call, 1, 2)) return *err;
            for (const auto& a : call.args) {
                if (!a.is_int()) {
                    return ExceptionValue{"TypeError",
                                          "'" + self.type_name(a, call.context.runtime) +
                                              "' object cannot be interpreted as an integer",
                                          {}};
                }
            }
            BigInt lo = call.args.size() == 2 ? call.args[0].as_int() : BigInt(0);
            BigInt hi = call.args.back().as_int();
            List items;
            for (BigInt i = lo; i < hi; ++i) items.push_back(Value::integer(i));
            return Value::list(std::move(items));
        }));
        out.push_back(builtin("str", [&self](BuiltinCall& call) -> BuiltinResult {
            if (auto err = check_arity(self, "str", call, 0, 1)) return *err;
            if (call.args.empty()) return Value::text("");
            return Value::text(self.to_text(call.args[0], call.context.runtime));
        }));
        out.push_back(builtin("int", [&self](BuiltinCall& call) -> BuiltinResult {
            if (auto err = check_arity(self, "int", call, 0, 1)) return *err;
            if (call.args.empty()) return Value::integer(0);
            const auto& v = call.args[0];
            if (v.is_int()) return v;
            if (v.is_bool()) return Value::integer(v.as_bool() ? 1 : 0);
            if (v.is_float()) {
                if (!std::isfinite(v.as_float())) {
                    return self.error(ErrorKind::ValueError, {"cannot convert float to integer"});
                }
                return Value::integer(BigInt(std::trunc(v.as_float())));
            }
            if (v.is_text()) {
                if (auto n = parse_int(v.as_text())) return Value::integer(*n);
                return self.error(ErrorKind::ValueError,
                                  {"invalid literal for int() with base 10: " + quote_text(v.as_text(), '\'')});
            }
            return ExceptionValue{"TypeError",
                                  "int() argument must be a string or a number, not '" +
                                      self.type_name(v, call.context.runtime) + "'",
                                  {}};
        }));
        out.push_back(builtin("float", [&self](BuiltinCall& call) -> BuiltinResult {
            if (auto err = check_arity(self, "float", call, 0, 1)) return *err;
            if (call.args.empty()) return Value::real(0.0);
            const auto& v = call.args[0];
            if (v.is_number()) return Value::real(v.to_double());
            if (v.is_bool()) return Value::real(v.as_bool() ? 1.0 : 0.0);
            if (v.is_text()) {
                if (auto d = parse_float(v.as_text())) return Value::real(*d);
                return self.error(ErrorKind::ValueError,
                                  {"could not convert string to float: " + quote_text(v.as_text(), '\'')});
            }
            return ExceptionValue{"TypeError",
                                  "float() argument must be a string or a number, not '" +
                                      self.type_name(v, call.context.runtime) + "'",
                                  {}};
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
        auto arity = [&](std::size_t min, std::size_t max) { return check_arity(*this, selector, call, min, max); };
        if (receiver.is_text()) {
            const auto& s = receiver.as_text();
            if (selector == "split") {
                if (auto err = arity(0, 1)) return BuiltinResult{*err};
                std::optional<std::string> sep;
                if (!call.args.empty() && !call.args[0].is_nil()) {
                    if (!call.args[0].is_text()) {
                        return BuiltinResult{ExceptionValue{"TypeError", "must be str or None", {}}};
                    }
                    sep = call.args[0].as_text();
                    if (sep->empty()) return BuiltinResult{error(ErrorKind::ValueError, {"empty separator"})};
                }
                return BuiltinResult{Value::list(split_text(s, sep))};
            }
            if (selector == "lower") {
                if (auto err = arity(0, 0)) return BuiltinResult{*err};
                return BuiltinResult{Value::text(lower_ascii(s))};
            }
            if (selector == "strip") {
                if (auto err = arity(0, 0)) return BuiltinResult{*err};
                return BuiltinResult{Value::text(strip_whitespace(s))};
            }
            return std::nullopt;
        }
        if (receiver.is_list()) {
            auto& items = *receiver.as_list();
            if (selector == "append") {
                if (auto err = arity(1, 1)) return BuiltinResult{*err};
                items.push_back(call.args[0]);
                return BuiltinResult{Value::nil()};
            }
            if (selector == "pop") {
                if (auto err = arity(0, 0)) return BuiltinResult{*err};
                if (items.empty()) return BuiltinResult{ExceptionValue{"IndexError", "pop from empty list", {}}};
                Value last = items.back();
                items.pop_back();
                return BuiltinResult{std::move(last)};
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

private:
    std::string show(const Value& v, const Runtime& rt, std::set<const List*>& seen) const {
        switch (v.kind()) {
        case ValueKind::Nil: return "None";
        case ValueKind::Bool: return v.as_bool() ? "True" : "False";
        case ValueKind::Int: return v.as_int().str();
        case ValueKind::Float: return format_float(v.as_float(), FloatStyle::Python);
        case ValueKind::Text: return quote_text(v.as_text(), '\'');
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
            return "<foreign " + rt.language_name(ref.lang) + " " + rt.class_name_of(v) + ">";
        }
        case ValueKind::Object: break;
        }
        const auto ref = v.as_object();
        const auto& obj = rt.objects().at(ref.lang, ref.handle);
        if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
            return "<" + std::get<ClassObject>(rt.objects().at(ref.lang, inst->class_handle)).name + " object>";
        }
        if (const auto* cls = std::get_if<ClassObject>(&obj)) return "<class '" + cls->name + "'>";
        if (const auto* fn = std::get_if<FunctionObject>(&obj)) return "<function " + fn->code->name + ">";
        if (const auto* bm = std::get_if<BoundMethod>(&obj)) {
            const auto& fn = std::get<FunctionObject>(rt.objects().at(ref.lang, bm->function));
            return "<bound method " + rt.class_name_of(bm->receiver) + "." + fn.code->name + ">";
        }
        if (const auto* b = std::get_if<BuiltinObject>(&obj)) return "<built-in function " + b->builtin->name + ">";
        if (const auto* exc = std::get_if<ExceptionObject>(&obj)) {
            return exc->class_name + "(" + quote_text(exc->message, '\'') + ")";
        }
        if (const auto* box = std::get_if<BoxObject>(&obj)) return show(box->value, rt, seen);
        return "<iterator>";
    }
};

}  // namespace

std::unique_ptr<LanguagePlugin> make_plugin() { return std::make_unique<MiniPy>(); }

}  // namespace polyvm::minipy
