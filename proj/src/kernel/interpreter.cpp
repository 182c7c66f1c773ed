#include "polyvm/kernel/interpreter.hpp"

#include <cmath>
#include <limits>

#include "polyvm/runtime.hpp"

namespace polyvm::kernel {

namespace {

using Outcome = std::variant<Value, ExceptionValue>;

ExceptionValue make_error(const Runtime& rt, LangId lang, ErrorKind kind, std::vector<std::string> args) {
    return rt.plugin(lang).error(kind, args);
}

std::string type_of(const Runtime& rt, LangId lang, const Value& v) { return rt.plugin(lang).type_name(v, rt); }

/// Re-homes an object reference for code running in `target`.
Value relocate(const Value& v, LangId target) {
    if (v.is_object() && v.as_object().lang != target) {
        return Value::foreign(ForeignRef{v.as_object().lang, v.as_object().handle});
    }
    if (v.is_foreign() && v.as_foreign().lang == target) {
        return Value::object(ObjectRef{v.as_foreign().lang, v.as_foreign().handle});
    }
    return v;
}

bool is_function(const Runtime& rt, const Value& v) {
    if (!v.is_object()) return false;
    return std::holds_alternative<FunctionObject>(rt.objects().at(v.as_object().lang, v.as_object().handle));
}

BuiltinResult finish_foreign(Runtime& rt, BuiltinResult result, LangId owner, LangId caller) {
    if (auto* v = std::get_if<Value>(&result)) return rt.convert(*v, owner, caller);
    if (auto* frame = std::get_if<Frame>(&result)) frame->convert_result_to = caller;
    return result;
}

std::vector<Value> convert_args(Runtime& rt, std::span<const Value> args, LangId from, LangId to) {
    std::vector<Value> out;
    out.reserve(args.size());
    for (const auto& a : args) out.push_back(rt.convert(a, from, to));
    return out;
}

BuiltinResult activate(ExecutionContext& ctx, LangId lang, HeapHandle fn_handle, std::optional<Value> receiver,
                       std::span<const Value> args) {
    auto& rt = ctx.runtime;
    const auto& fn = std::get<FunctionObject>(rt.objects().at(lang, fn_handle));
    const auto& code = fn.code;
    const bool self_param = receiver && code->binds_self_param;
    const std::size_t offset = self_param ? 1 : 0;
    const std::size_t expected = code->params.size() >= offset ? code->params.size() - offset : 0;
    if (args.size() != expected) {
        return make_error(rt, lang, ErrorKind::Arity,
                          {code->name, std::to_string(expected), std::to_string(args.size())});
    }
    std::vector<std::pair<std::string, Value>> bindings;
    bindings.reserve(code->params.size());
    if (self_param) bindings.emplace_back(code->params[0], *receiver);
    for (std::size_t i = 0; i < args.size(); ++i) bindings.emplace_back(code->params[i + offset], args[i]);
    Frame frame = make_frame(code, std::move(bindings), fn.globals);
    frame.self_object = std::move(receiver);
    frame.function = ObjectRef{lang, fn_handle};
    return frame;
}

BuiltinResult instantiate(ExecutionContext& ctx, LangId lang, HeapHandle class_handle, std::span<const Value> args) {
    auto& rt = ctx.runtime;
    const auto& plugin = rt.plugin(lang);
    {
        const auto& cls = std::get<ClassObject>(rt.objects().at(lang, class_handle));
        if (cls.exception_class) {
            std::string message = args.empty() ? std::string() : plugin.to_text(args[0], rt);
            auto ref = rt.objects().allocate(lang, ExceptionObject{cls.name, std::move(message)});
            return Value::object(ref);
        }
        const auto* init = cls.members.find(plugin.initializer_name());
        if ((!init || !is_function(rt, *init)) && !args.empty()) {
            return make_error(rt, lang, ErrorKind::Arity, {cls.name, "0", std::to_string(args.size())});
        }
    }
    InstanceObject instance;
    instance.class_handle = class_handle;
    std::optional<HeapHandle> init_handle;
    {
        const auto& cls = std::get<ClassObject>(rt.objects().at(lang, class_handle));
        for (const auto& [name, value] : cls.members.entries()) {
            if (!is_function(rt, value)) instance.slots.set(name, value);
        }
        if (const auto* init = cls.members.find(plugin.initializer_name()); init && is_function(rt, *init)) {
            init_handle = init->as_object().handle;
        }
    }
    auto self = Value::object(rt.objects().allocate(lang, std::move(instance)));
    if (!init_handle) return self;
    auto result = activate(ctx, lang, *init_handle, self, args);
    if (auto* frame = std::get_if<Frame>(&result)) frame->return_mode = ReturnMode::Constructor;
    return result;
}

BuiltinResult call_owned(ExecutionContext& ctx, const FrameStack& frames, ObjectRef ref, std::span<const Value> args) {
    auto& rt = ctx.runtime;
    auto& obj = rt.objects().at(ref.lang, ref.handle);
    if (std::holds_alternative<FunctionObject>(obj)) return activate(ctx, ref.lang, ref.handle, std::nullopt, args);
    if (const auto* bound = std::get_if<BoundMethod>(&obj)) {
        auto receiver = bound->receiver;
        return activate(ctx, ref.lang, bound->function, receiver, args);
    }
    if (const auto* builtin = std::get_if<BuiltinObject>(&obj)) {
        auto fn = builtin->builtin;
        BuiltinCall call{ctx, frames, ref.lang, args};
        return fn->fn(call);
    }
    if (std::holds_alternative<ClassObject>(obj)) return instantiate(ctx, ref.lang, ref.handle, args);
    return make_error(rt, ref.lang, ErrorKind::NotCallable, {type_of(rt, ref.lang, Value::object(ref))});
}

BuiltinResult invoke_owned(ExecutionContext& ctx, const FrameStack& frames, ObjectRef ref, std::string_view selector,
                           std::span<const Value> args) {
    auto& rt = ctx.runtime;
    const auto self = Value::object(ref);
    auto no_method = [&] {
        return make_error(rt, ref.lang, ErrorKind::NoSuchMethod, {rt.class_name_of(self), std::string(selector)});
    };
    auto& obj = rt.objects().at(ref.lang, ref.handle);
    if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
        if (const auto* slot = inst->slots.find(selector)) {
            auto callee = *slot;
            return call_value(ctx, frames, callee, args, ref.lang);
        }
        const auto& cls = std::get<ClassObject>(rt.objects().at(ref.lang, inst->class_handle));
        if (const auto* member = cls.members.find(selector)) {
            if (is_function(rt, *member)) return activate(ctx, ref.lang, member->as_object().handle, self, args);
            auto callee = *member;
            return call_value(ctx, frames, callee, args, ref.lang);
        }
        return no_method();
    }
    if (std::holds_alternative<ClassObject>(obj)) {
        if (selector == "new") return instantiate(ctx, ref.lang, ref.handle, args);
        return no_method();
    }
    BuiltinCall call{ctx, frames, ref.lang, args};
    if (const auto* box = std::get_if<BoxObject>(&obj)) {
        auto boxed = box->value;
        if (auto r = rt.plugin(ref.lang).call_primitive_method(call, boxed, selector)) return std::move(*r);
        return no_method();
    }
    if (auto r = rt.plugin(ref.lang).call_primitive_method(call, self, selector)) return std::move(*r);
    if (selector == "call") return call_owned(ctx, frames, ref, args);
    return no_method();
}

Outcome get_attribute(Runtime& rt, const Value& target, const std::string& name, LangId caller) {
    if (!target.is_ref()) {
        return make_error(rt, caller, ErrorKind::NoSuchAttribute, {type_of(rt, caller, target), name});
    }
    auto [owner, handle] = rt.resolve(target);
    auto& obj = rt.objects().at(owner, handle);
    std::optional<Value> found;
    if (const auto* inst = std::get_if<InstanceObject>(&obj)) {
        if (const auto* slot = inst->slots.find(name)) {
            found = *slot;
        } else {
            const auto& cls = std::get<ClassObject>(rt.objects().at(owner, inst->class_handle));
            if (const auto* member = cls.members.find(name)) {
                if (is_function(rt, *member)) {
                    auto bound = BoundMethod{Value::object(ObjectRef{owner, handle}), member->as_object().handle};
                    found = Value::object(rt.objects().allocate(owner, std::move(bound)));
                } else {
                    found = *member;
                }
            }
        }
    } else if (const auto* cls = std::get_if<ClassObject>(&obj)) {
        if (const auto* member = cls->members.find(name)) found = *member;
    } else if (const auto* exc = std::get_if<ExceptionObject>(&obj)) {
        if (name == "message") found = Value::text(exc->message);
    }
    if (!found) {
        return make_error(rt, caller, ErrorKind::NoSuchAttribute, {rt.class_name_of(target), name});
    }
    return rt.convert(*found, owner, caller);
}

std::optional<ExceptionValue> set_attribute(Runtime& rt, const Value& target, const std::string& name,
                                            const Value& value, LangId caller) {
    if (target.is_ref()) {
        auto [owner, handle] = rt.resolve(target);
        if (auto* inst = std::get_if<InstanceObject>(&rt.objects().at(owner, handle))) {
            auto converted = rt.convert(value, caller, owner);
            std::get<InstanceObject>(rt.objects().at(owner, handle)).slots.set(name, std::move(converted));
            (void)inst;
            return std::nullopt;
        }
        return make_error(rt, caller, ErrorKind::NoSuchAttribute, {rt.class_name_of(target), name});
    }
    return make_error(rt, caller, ErrorKind::NoSuchAttribute, {type_of(rt, caller, target), name});
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

BigInt floor_mod(const BigInt& a, const BigInt& b) {
    BigInt r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

Outcome arithmetic(const Runtime& rt, LangId lang, BinaryOp op, const Value& a, const Value& b) {
    auto type_error = [&] {
        return make_error(rt, lang, ErrorKind::OperandTypes,
                          {std::string(binary_op_symbol(op)), type_of(rt, lang, a), type_of(rt, lang, b)});
    };
    if (op == BinaryOp::Add) {
        if (a.is_text() && b.is_text()) return Value::text(a.as_text() + b.as_text());
        if (a.is_list() && b.is_list()) {
            List items = *a.as_list();
            items.insert(items.end(), b.as_list()->begin(), b.as_list()->end());
            return Value::list(std::move(items));
        }
    }
    if (!a.is_number() || !b.is_number()) return type_error();
    const bool ints = a.is_int() && b.is_int();
    switch (op) {
    case BinaryOp::Add: return ints ? Value::integer(a.as_int() + b.as_int()) : Value::real(a.to_double() + b.to_double());
    case BinaryOp::Sub: return ints ? Value::integer(a.as_int() - b.as_int()) : Value::real(a.to_double() - b.to_double());
    case BinaryOp::Mul: return ints ? Value::integer(a.as_int() * b.as_int()) : Value::real(a.to_double() * b.to_double());
    case BinaryOp::IntDiv:
        if (ints) {
            if (b.as_int() == 0) return make_error(rt, lang, ErrorKind::IntegerDivision, {});
            return Value::integer(floor_div(a.as_int(), b.as_int()));
        }
        [[fallthrough]];
    case BinaryOp::Div:
        if (b.to_double() == 0.0) {
            return make_error(rt, lang, ints ? ErrorKind::IntegerDivision : ErrorKind::FloatDivision, {});
        }
        return Value::real(a.to_double() / b.to_double());
    case BinaryOp::Mod:
        if (ints) {
            if (b.as_int() == 0) return make_error(rt, lang, ErrorKind::IntegerModulo, {});
            return Value::integer(floor_mod(a.as_int(), b.as_int()));
        } else {
            const double y = b.to_double();
            if (y == 0.0) return make_error(rt, lang, ErrorKind::FloatDivision, {});
            double r = std::fmod(a.to_double(), y);
            if (r != 0.0 && ((r < 0) != (y < 0))) r += y;
            return Value::real(r);
        }
    }
    return type_error();
}

Outcome compare(const Runtime& rt, LangId lang, CompareOp op, const Value& a, const Value& b) {
    if (op == CompareOp::Eq) return Value::boolean(values_equal(a, b));
    if (op == CompareOp::Ne) return Value::boolean(!values_equal(a, b));
    int order = 0;
    if (a.is_int() && b.is_int()) {
        order = a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    } else if (a.is_number() && b.is_number()) {
        const double x = a.to_double();
        const double y = b.to_double();
        order = x < y ? -1 : (x > y ? 1 : 0);
    } else if (a.is_text() && b.is_text()) {
        int c = a.as_text().compare(b.as_text());
        order = c < 0 ? -1 : (c > 0 ? 1 : 0);
    } else {
        return make_error(rt, lang, ErrorKind::Comparison,
                          {std::string(compare_op_symbol(op)), type_of(rt, lang, a), type_of(rt, lang, b)});
    }
    switch (op) {
    case CompareOp::Lt: return Value::boolean(order < 0);
    case CompareOp::Le: return Value::boolean(order <= 0);
    case CompareOp::Gt: return Value::boolean(order > 0);
    case CompareOp::Ge: return Value::boolean(order >= 0);
    default: break;
    }
    return Value::boolean(false);
}

std::optional<std::int64_t> small_index(const Value& v) {
    if (!v.is_int()) return std::nullopt;
    if (v.as_int() > BigInt(std::numeric_limits<std::int64_t>::max()) ||
        v.as_int() < BigInt(std::numeric_limits<std::int64_t>::min())) {
        return std::numeric_limits<std::int64_t>::max();
    }
    return v.as_int().convert_to<std::int64_t>();
}

Outcome index_value(const Runtime& rt, LangId lang, const Value& target, const Value& index) {
    if (!target.is_list() && !target.is_text()) {
        return make_error(rt, lang, ErrorKind::NotSubscriptable, {type_of(rt, lang, target)});
    }
    auto i = small_index(index);
    if (!i) return make_error(rt, lang, ErrorKind::IndexType, {type_of(rt, lang, target)});
    auto out_of_range = [&] {
        return make_error(rt, lang, ErrorKind::IndexOutOfRange, {type_of(rt, lang, target), index.as_int().str()});
    };
    if (target.is_list()) {
        const auto& items = *target.as_list();
        std::int64_t n = static_cast<std::int64_t>(items.size());
        std::int64_t k = *i < 0 ? *i + n : *i;
        if (k < 0 || k >= n) return out_of_range();
        return items[static_cast<std::size_t>(k)];
    }
    auto chars = utf8::code_points(target.as_text());
    std::int64_t n = static_cast<std::int64_t>(chars.size());
    std::int64_t k = *i < 0 ? *i + n : *i;
    if (k < 0 || k >= n) return out_of_range();
    return Value::text(chars[static_cast<std::size_t>(k)]);
}

std::optional<ExceptionValue> set_index(const Runtime& rt, LangId lang, const Value& target, const Value& index,
                                        const Value& value) {
    if (!target.is_list()) return make_error(rt, lang, ErrorKind::NotSubscriptable, {type_of(rt, lang, target)});
    auto i = small_index(index);
    if (!i) return make_error(rt, lang, ErrorKind::IndexType, {type_of(rt, lang, target)});
    auto& items = *target.as_list();
    std::int64_t n = static_cast<std::int64_t>(items.size());
    std::int64_t k = *i < 0 ? *i + n : *i;
    if (k < 0 || k >= n) {
        return make_error(rt, lang, ErrorKind::IndexOutOfRange,
                          {type_of(rt, lang, target), index.as_int().str(), "store"});
    }
    items[static_cast<std::size_t>(k)] = value;
    return std::nullopt;
}

Outcome load_name(Runtime& rt, const Frame& f, const std::string& name) {
    if (const auto* v = f.locals->find(name)) return *v;
    if (f.globals != f.locals) {
        if (const auto* v = f.globals->find(name)) return *v;
    }
    if (name == "self" && f.self_object) return *f.self_object;
    if (const auto* v = rt.builtin(f.language, name)) return *v;
    const auto& plugin = rt.plugin(f.language);
    if (plugin.implicit_self_calls() && f.self_object && f.self_object->is_object()) {
        auto self = f.self_object->as_object();
        if (const auto* inst = std::get_if<InstanceObject>(&rt.objects().at(self.lang, self.handle))) {
            const auto& cls = std::get<ClassObject>(rt.objects().at(self.lang, inst->class_handle));
            if (const auto* member = cls.members.find(name); member && is_function(rt, *member)) {
                auto bound = BoundMethod{*f.self_object, member->as_object().handle};
                return Value::object(rt.objects().allocate(self.lang, std::move(bound)));
            }
        }
    }
    return make_error(rt, f.language, ErrorKind::UndefinedName, {name});
}

Value pop(Frame& f) {
    if (f.stack.empty()) throw InternalFault(f.code->name + ": operand stack underflow at " + std::to_string(f.ip));
    Value v = std::move(f.stack.back());
    f.stack.pop_back();
    return v;
}

void require_depth(const Frame& f, std::size_t n) {
    if (f.stack.size() < n) {
        throw InternalFault(f.code->name + ": operand stack underflow at " + std::to_string(f.ip));
    }
}

void enter_handler(Runtime& rt, FrameStack& frames, std::size_t fi, std::size_t hi, const ExceptionValue& exc) {
    frames.resize(fi + 1);
    auto& f = frames[fi];
    const auto block = f.handlers[hi];
    f.handlers.resize(hi);
    f.stack.resize(std::min(block.stack_depth, f.stack.size()));
    f.stack.push_back(exc.payload ? relocate(*exc.payload, f.language) : Value::nil());
    f.ip = block.handler_ip;
    (void)rt;
}

}  // namespace

Frame make_frame(CodePtr code, std::vector<std::pair<std::string, Value>> bindings, ScopePtr globals) {
    Frame frame;
    frame.language = code->language;
    frame.locals = std::make_shared<NameTable>();
    for (const auto& [name, value] : bindings) frame.locals->set(name, value);
    frame.globals = globals ? std::move(globals) : frame.locals;
    frame.arguments = std::move(bindings);
    frame.code = std::move(code);
    return frame;
}

bool values_equal(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
        if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
        return a.to_double() == b.to_double();
    }
    if (a.is_ref() && b.is_ref()) {
        auto ra = a.is_object() ? std::pair{a.as_object().lang, a.as_object().handle}
                                : std::pair{a.as_foreign().lang, a.as_foreign().handle};
        auto rb = b.is_object() ? std::pair{b.as_object().lang, b.as_object().handle}
                                : std::pair{b.as_foreign().lang, b.as_foreign().handle};
        return ra == rb;
    }
    if (a.kind() != b.kind()) return false;
    if (a.is_list()) {
        const auto& x = *a.as_list();
        const auto& y = *b.as_list();
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!values_equal(x[i], y[i])) return false;
        }
        return true;
    }
    return a == b;
}

BuiltinResult call_value(ExecutionContext& ctx, const FrameStack& frames, const Value& callee,
                         std::span<const Value> args, LangId caller) {
    auto& rt = ctx.runtime;
    if (!callee.is_ref()) return make_error(rt, caller, ErrorKind::NotCallable, {type_of(rt, caller, callee)});
    auto [owner, handle] = rt.resolve(callee);
    if (owner == caller) return call_owned(ctx, frames, ObjectRef{owner, handle}, args);
    auto converted = convert_args(rt, args, caller, owner);
    auto result = call_owned(ctx, frames, ObjectRef{owner, handle}, converted);
    return finish_foreign(rt, std::move(result), owner, caller);
}

BuiltinResult invoke_method(ExecutionContext& ctx, const FrameStack& frames, const Value& receiver,
                            std::string_view selector, std::span<const Value> args, LangId caller) {
    auto& rt = ctx.runtime;
    if (receiver.is_ref()) {
        auto [owner, handle] = rt.resolve(receiver);
        if (owner == caller) return invoke_owned(ctx, frames, ObjectRef{owner, handle}, selector, args);
        auto converted = convert_args(rt, args, caller, owner);
        auto result = invoke_owned(ctx, frames, ObjectRef{owner, handle}, selector, converted);
        return finish_foreign(rt, std::move(result), owner, caller);
    }
    BuiltinCall call{ctx, frames, caller, args};
    if (auto r = rt.plugin(caller).call_primitive_method(call, receiver, selector)) return std::move(*r);
    return make_error(rt, caller, ErrorKind::NoSuchMethod, {type_of(rt, caller, receiver), std::string(selector)});
}

std::optional<HandlerLocation> find_handler(const FrameStack& frames, std::string_view class_name) {
    for (std::size_t fi = frames.size(); fi-- > 0;) {
        const auto& handlers = frames[fi].handlers;
        for (std::size_t hi = handlers.size(); hi-- > 0;) {
            if (handlers[hi].catches(class_name)) return HandlerLocation{fi, hi, handlers[hi].handler_ip};
        }
    }
    return std::nullopt;
}

RaiseResult raise_exception(ExecutionContext& ctx, FrameStack& frames, ExceptionValue exception) {
    const auto target = find_handler(frames, exception.class_name);
    if (!target && !ctx.force_unwind) return Trapped{std::move(exception)};
    if (target) ctx.force_unwind = false;
    for (std::size_t fi = frames.size(); fi-- > 0;) {
        const auto& handlers = frames[fi].handlers;
        for (std::size_t hi = handlers.size(); hi-- > 0;) {
            const bool is_target = target && target->frame == fi && target->handler == hi;
            if (is_target || handlers[hi].kind == HandlerKind::Ensure) {
                const auto ip = handlers[hi].handler_ip;
                enter_handler(ctx.runtime, frames, fi, hi, exception);
                return Unwound{fi, ip};
            }
        }
    }
    frames.clear();
    return Failed{std::move(exception)};
}

StepResult step(ExecutionContext& ctx, FrameStack& frames, std::uint64_t budget) {
    if (frames.empty()) throw InternalFault("step called on an empty frame stack");
    auto& rt = ctx.runtime;
    std::uint64_t executed = 0;
    while (executed < budget) {
        Frame& f = frames.back();
        const CodeUnit& code = *f.code;
        if (f.ip >= code.instructions.size()) {
            throw InternalFault(code.name + ": instruction pointer ran off the end");
        }
        const Instruction ins = code.instructions[f.ip];
        ++executed;

        std::optional<ExceptionValue> raised;
        std::optional<BuiltinResult> pending;
        std::size_t consumed_operands = 0;

        switch (ins.op) {
        case Op::PushConst:
            f.stack.push_back(code.constants[static_cast<std::size_t>(ins.a)]);
            ++f.ip;
            break;
        case Op::Load: {
            auto r = load_name(rt, f, code.names[static_cast<std::size_t>(ins.a)]);
            if (auto* v = std::get_if<Value>(&r)) {
                f.stack.push_back(std::move(*v));
                ++f.ip;
            } else {
                raised = std::get<ExceptionValue>(std::move(r));
            }
            break;
        }
        case Op::Store:
            f.locals->set(code.names[static_cast<std::size_t>(ins.a)], pop(f));
            ++f.ip;
            break;
        case Op::LoadSlot: {
            require_depth(f, 1);
            auto r = get_attribute(rt, f.stack.back(), code.names[static_cast<std::size_t>(ins.a)], f.language);
            if (auto* v = std::get_if<Value>(&r)) {
                f.stack.back() = std::move(*v);
                ++f.ip;
            } else {
                raised = std::get<ExceptionValue>(std::move(r));
            }
            break;
        }
        case Op::StoreSlot: {
            require_depth(f, 2);
            const auto n = f.stack.size();
            raised = set_attribute(rt, f.stack[n - 2], code.names[static_cast<std::size_t>(ins.a)], f.stack[n - 1],
                                   f.language);
            if (!raised) {
                f.stack.resize(n - 2);
                ++f.ip;
            }
            break;
        }
        case Op::Call:
        case Op::NewInstance: {
            const auto argc = static_cast<std::size_t>(ins.a);
            require_depth(f, argc + 1);
            const auto n = f.stack.size();
            std::span<const Value> args(f.stack.data() + (n - argc), argc);
            pending = call_value(ctx, frames, f.stack[n - argc - 1], args, f.language);
            consumed_operands = argc + 1;
            break;
        }
        case Op::Invoke: {
            const auto argc = static_cast<std::size_t>(ins.b);
            require_depth(f, argc + 1);
            const auto n = f.stack.size();
            std::span<const Value> args(f.stack.data() + (n - argc), argc);
            pending = invoke_method(ctx, frames, f.stack[n - argc - 1], code.names[static_cast<std::size_t>(ins.a)],
                                    args, f.language);
            consumed_operands = argc + 1;
            break;
        }
        case Op::Return: {
            Value result = f.stack.empty() ? Value::nil() : std::move(f.stack.back());
            Frame done = std::move(frames.back());
            frames.pop_back();
            if (done.return_mode == ReturnMode::Constructor && done.self_object) result = *done.self_object;
            if (done.convert_result_to) result = rt.convert(result, done.language, *done.convert_result_to);
            if (frames.empty()) return StepResult{Completed{std::move(result)}, executed};
            frames.back().stack.push_back(std::move(result));
            break;
        }
        case Op::Jump: f.ip = static_cast<std::size_t>(ins.a); break;
        case Op::JumpIfFalse: {
            const bool truth = rt.plugin(f.language).truthy(pop(f));
            f.ip = truth ? f.ip + 1 : static_cast<std::size_t>(ins.a);
            break;
        }
        case Op::Binary: {
            require_depth(f, 2);
            const auto n = f.stack.size();
            auto r = arithmetic(rt, f.language, static_cast<BinaryOp>(ins.a), f.stack[n - 2], f.stack[n - 1]);
            if (auto* v = std::get_if<Value>(&r)) {
                f.stack.resize(n - 2);
                f.stack.push_back(std::move(*v));
                ++f.ip;
            } else {
                raised = std::get<ExceptionValue>(std::move(r));
            }
            break;
        }
        case Op::Compare: {
            require_depth(f, 2);
            const auto n = f.stack.size();
            auto r = compare(rt, f.language, static_cast<CompareOp>(ins.a), f.stack[n - 2], f.stack[n - 1]);
            if (auto* v = std::get_if<Value>(&r)) {
                f.stack.resize(n - 2);
                f.stack.push_back(std::move(*v));
                ++f.ip;
            } else {
                raised = std::get<ExceptionValue>(std::move(r));
            }
            break;
        }
        case Op::Unary: {
            require_depth(f, 1);
            auto& top = f.stack.back();
            if (static_cast<UnaryOp>(ins.a) == UnaryOp::Not) {
                top = Value::boolean(!rt.plugin(f.language).truthy(top));
                ++f.ip;
            } else if (top.is_int()) {
                top = Value::integer(-top.as_int());
                ++f.ip;
            } else if (top.is_float()) {
                top = Value::real(-top.as_float());
                ++f.ip;
            } else {
                raised = make_error(rt, f.language, ErrorKind::UnaryOperandType, {"-", type_of(rt, f.language, top)});
            }
            break;
        }
        case Op::BuildList: {
            const auto count = static_cast<std::size_t>(ins.a);
            require_depth(f, count);
            List items(std::make_move_iterator(f.stack.end() - static_cast<std::ptrdiff_t>(count)),
                       std::make_move_iterator(f.stack.end()));
            f.stack.resize(f.stack.size() - count);
            f.stack.push_back(Value::list(std::move(items)));
            ++f.ip;
            break;
        }
        case Op::Index: {
            require_depth(f, 2);
            const auto n = f.stack.size();
            auto r = index_value(rt, f.language, f.stack[n - 2], f.stack[n - 1]);
            if (auto* v = std::get_if<Value>(&r)) {
                f.stack.resize(n - 2);
                f.stack.push_back(std::move(*v));
                ++f.ip;
            } else {
                raised = std::get<ExceptionValue>(std::move(r));
            }
            break;
        }
        case Op::SetIndex: {
            require_depth(f, 3);
            const auto n = f.stack.size();
            raised = set_index(rt, f.language, f.stack[n - 3], f.stack[n - 2], f.stack[n - 1]);
            if (!raised) {
                f.stack.resize(n - 3);
                ++f.ip;
            }
            break;
        }
        case Op::MakeFunction: {
            FunctionObject fn{code.children[static_cast<std::size_t>(ins.a)], f.globals};
            f.stack.push_back(Value::object(rt.objects().allocate(f.language, std::move(fn))));
            ++f.ip;
            break;
        }
        case Op::MakeClass: {
            const auto members = static_cast<std::size_t>(ins.b);
            require_depth(f, members * 2);
            ClassObject cls;
            cls.name = code.names[static_cast<std::size_t>(ins.a)];
            const auto base = f.stack.size() - members * 2;
            for (std::size_t i = 0; i < members; ++i) {
                const auto& key = f.stack[base + 2 * i];
                if (!key.is_text()) throw InternalFault(code.name + ": class member name is not text");
                cls.members.set(key.as_text(), f.stack[base + 2 * i + 1]);
            }
            f.stack.resize(base);
            f.stack.push_back(Value::object(rt.objects().allocate(f.language, std::move(cls))));
            ++f.ip;
            break;
        }
        case Op::SetupHandler: {
            HandlerBlock block;
            block.handler_ip = static_cast<std::size_t>(ins.a);
            if (ins.b >= 0) block.class_name = code.names[static_cast<std::size_t>(ins.b)];
            block.kind = static_cast<HandlerKind>(ins.c);
            block.stack_depth = f.stack.size();
            f.handlers.push_back(std::move(block));
            ++f.ip;
            break;
        }
        case Op::PopHandler:
            if (f.handlers.empty()) throw InternalFault(code.name + ": handler stack underflow");
            f.handlers.pop_back();
            ++f.ip;
            break;
        case Op::Raise: {
            require_depth(f, 1);
            if (ins.a < 0) {
                raised = rt.exception_from_value(f.stack.back(), f.language);
            } else {
                raised = ExceptionValue{code.names[static_cast<std::size_t>(ins.a)],
                                        rt.plugin(f.language).to_text(f.stack.back(), rt), std::nullopt};
            }
            break;
        }
        case Op::Pop:
            pop(f);
            ++f.ip;
            break;
        case Op::Dup:
            require_depth(f, 1);
            f.stack.push_back(f.stack.back());
            ++f.ip;
            break;
        case Op::IterNew: {
            require_depth(f, 1);
            auto& top = f.stack.back();
            if (top.is_list() || top.is_text()) {
                top = Value::object(rt.objects().allocate(f.language, IteratorObject{top, 0}));
                ++f.ip;
            } else {
                raised = make_error(rt, f.language, ErrorKind::NotIterable, {type_of(rt, f.language, top)});
            }
            break;
        }
        case Op::IterNext: {
            require_depth(f, 1);
            const auto ref = f.stack.back().as_object();
            auto& it = std::get<IteratorObject>(rt.objects().at(ref.lang, ref.handle));
            std::optional<Value> item;
            if (it.iterable.is_list()) {
                const auto& items = *it.iterable.as_list();
                if (it.position < items.size()) item = items[it.position++];
            } else {
                const auto& s = it.iterable.as_text();
                if (it.position < s.size()) {
                    auto cp = utf8::code_points(std::string_view(s).substr(it.position, 4)).front();
                    it.position += cp.size();
                    item = Value::text(std::move(cp));
                }
            }
            if (item) {
                f.stack.push_back(std::move(*item));
                ++f.ip;
            } else {
                f.stack.pop_back();
                f.ip = static_cast<std::size_t>(ins.a);
            }
            break;
        }
        }

        if (pending) {
            auto result = std::move(*pending);
            if (auto* exc = std::get_if<ExceptionValue>(&result)) {
                raised = std::move(*exc);
            } else {
                Frame& caller = frames.back();
                caller.stack.resize(caller.stack.size() - consumed_operands);
                ++caller.ip;
                if (auto* v = std::get_if<Value>(&result)) {
                    caller.stack.push_back(std::move(*v));
                } else if (auto* frame = std::get_if<Frame>(&result)) {
                    frames.push_back(std::move(*frame));
                } else {
                    caller.stack.push_back(Value::nil());
                    return StepResult{Blocked{std::get<BlockUntil>(result).wake}, executed};
                }
            }
        }

        if (raised) {
            auto exception = rt.materialize(frames.back().language, std::move(*raised));
            auto r = raise_exception(ctx, frames, std::move(exception));
            if (auto* t = std::get_if<Trapped>(&r)) return StepResult{std::move(*t), executed};
            if (auto* failed = std::get_if<Failed>(&r)) return StepResult{std::move(*failed), executed};
        }
    }
    return StepResult{Yielded{}, executed};
}

}  // namespace polyvm::kernel
