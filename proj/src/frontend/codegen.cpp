#include "polyvm/frontend/codegen.hpp"

#include <deque>

#include "polyvm/errors.hpp"

namespace polyvm::frontend {

using kernel::BinaryOp;
using kernel::CodeKind;
using kernel::CodeUnit;
using kernel::HandlerKind;
using kernel::Instruction;
using kernel::Op;

std::string slice_lines(std::string_view source, int first, int last) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        auto nl = source.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(source.substr(pos));
            break;
        }
        lines.push_back(source.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (first < 1) first = 1;
    if (last > static_cast<int>(lines.size())) last = static_cast<int>(lines.size());
    if (first > last) return {};
    auto head = lines[static_cast<std::size_t>(first - 1)];
    auto indent = head.substr(0, head.find_first_not_of(" \t"));
    if (indent.size() == head.size()) indent = {};
    std::string out;
    for (int i = first; i <= last; ++i) {
        auto line = lines[static_cast<std::size_t>(i - 1)];
        if (line.substr(0, indent.size()) == indent) line.remove_prefix(indent.size());
        out.append(line);
        if (i != last) out.push_back('\n');
    }
    return out;
}

namespace {

struct Control {
    enum Kind { While, For, Rescue, Ensure } kind;
    /// Rescue: number of handler blocks the region installed.
    int handlers = 0;
    const Block* finally_body = nullptr;
    std::size_t continue_target = 0;
    std::vector<std::size_t> break_jumps;
};

class Generator {
public:
    Generator(const CodegenOptions& options, std::shared_ptr<CodeUnit> unit, int line_base, bool in_function,
              bool in_method)
        : options_(options), unit_(std::move(unit)), line_base_(line_base), in_function_(in_function),
          in_method_(in_method) {}

    void module_body(const Block& body, int last_line) {
        body_with_result(body, options_.implicit_return, last_line);
    }

    void function_body(const Block& body, int last_line) {
        body_with_result(body, options_.implicit_return, last_line);
    }

private:
    void body_with_result(const Block& body, bool trailing_value, int last_line) {
        const bool module = !in_function_;
        for (std::size_t i = 0; i < body.size(); ++i) {
            const auto& s = *body[i];
            const bool last = i + 1 == body.size();
            if (last && trailing_value) {
                tail(s);
            } else if (last && module && s.kind == StmtKind::Expr) {
                expr(*s.value);
                emit(Op::Return, s.end_line);
                return;
            } else {
                stmt(s);
            }
        }
        const int line = body.empty() ? last_line : body.back()->end_line;
        emit(Op::PushConst, line, constant(Value::nil()));
        emit(Op::Return, line);
    }

    std::size_t emit(Op op, int line, std::int32_t a = 0, std::int32_t b = 0, std::int32_t c = 0) {
        unit_->instructions.push_back(Instruction{op, a, b, c});
        unit_->lines.push_back(std::max(1, line - line_base_ + 1));
        return unit_->instructions.size() - 1;
    }

    std::size_t here() const { return unit_->instructions.size(); }
    void patch(std::size_t at, std::size_t target) { unit_->instructions[at].a = static_cast<std::int32_t>(target); }

    std::int32_t name(const std::string& n) {
        for (std::size_t i = 0; i < unit_->names.size(); ++i) {
            if (unit_->names[i] == n) return static_cast<std::int32_t>(i);
        }
        unit_->names.push_back(n);
        return static_cast<std::int32_t>(unit_->names.size() - 1);
    }

    std::int32_t constant(const Value& v) {
        for (std::size_t i = 0; i < unit_->constants.size(); ++i) {
            const auto& c = unit_->constants[i];
            if (c.kind() == v.kind() && c == v) return static_cast<std::int32_t>(i);
        }
        unit_->constants.push_back(v);
        return static_cast<std::int32_t>(unit_->constants.size() - 1);
    }

    [[noreturn]] static void fail(int line, int column, const std::string& message) {
        throw CompileError(line, column, message);
    }

    // -- statements ---------------------------------------------------------

    void block(const Block& body, bool tail_value = false) {
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (tail_value && i + 1 == body.size()) {
                tail(*body[i]);
            } else {
                stmt(*body[i]);
            }
        }
    }

    /// A statement whose value is the result of the enclosing body: trailing
    /// expressions return, branches of `if` and `begin` propagate the rule.
    void tail(const Stmt& s) {
        switch (s.kind) {
        case StmtKind::Expr:
            expr(*s.value);
            leave(0, s.end_line);
            emit(Op::Return, s.end_line);
            break;
        case StmtKind::If: if_stmt(s, true); break;
        case StmtKind::Try: try_stmt(s, true); break;
        default: stmt(s);
        }
    }

    void if_stmt(const Stmt& s, bool tail_value) {
        expr(*s.value);
        auto to_else = emit(Op::JumpIfFalse, s.line);
        block(s.body, tail_value);
        if (s.orelse.empty()) {
            patch(to_else, here());
        } else {
            auto to_end = emit(Op::Jump, s.body.empty() ? s.line : s.body.back()->end_line);
            patch(to_else, here());
            block(s.orelse, tail_value);
            patch(to_end, here());
        }
    }

    void stmt(const Stmt& s) {
        switch (s.kind) {
        case StmtKind::Expr:
            expr(*s.value);
            emit(Op::Pop, s.line);
            break;
        case StmtKind::Assign: assign(*s.target, *s.value, s.line); break;
        case StmtKind::AugAssign: aug_assign(s); break;
        case StmtKind::If: if_stmt(s, false); break;
        case StmtKind::While: {
            const auto head = here();
            expr(*s.value);
            auto exit = emit(Op::JumpIfFalse, s.line);
            controls_.push_back(Control{Control::While, 0, nullptr, head, {}});
            block(s.body);
            emit(Op::Jump, s.end_line, static_cast<std::int32_t>(head));
            patch(exit, here());
            for (auto j : controls_.back().break_jumps) patch(j, here());
            controls_.pop_back();
            break;
        }
        case StmtKind::For: {
            expr(*s.value);
            emit(Op::IterNew, s.line);
            const auto head = emit(Op::IterNext, s.line);
            emit(Op::Store, s.line, name(s.name));
            controls_.push_back(Control{Control::For, 0, nullptr, head, {}});
            block(s.body);
            emit(Op::Jump, s.end_line, static_cast<std::int32_t>(head));
            patch(head, here());
            for (auto j : controls_.back().break_jumps) patch(j, here());
            controls_.pop_back();
            break;
        }
        case StmtKind::FuncDef:
            emit(Op::MakeFunction, s.line, function(s, options_.top_level_methods && !in_function_));
            emit(Op::Store, s.line, name(s.name));
            break;
        case StmtKind::ClassDef: class_def(s); break;
        case StmtKind::Try: try_stmt(s, false); break;
        case StmtKind::Raise:
            if (!s.name.empty()) {
                if (s.value) {
                    expr(*s.value);
                } else {
                    emit(Op::PushConst, s.line, constant(Value::text(s.name)));
                }
                emit(Op::Raise, s.line, name(s.name));
            } else if (s.value) {
                expr(*s.value);
                emit(Op::Raise, s.line, -1);
            } else {
                emit(Op::PushConst, s.line, constant(Value::text("unhandled exception")));
                emit(Op::Raise, s.line, name("RuntimeError"));
            }
            break;
        case StmtKind::Return: {
            if (!in_function_) fail(s.line, s.column, "'return' outside function");
            if (s.value) {
                expr(*s.value);
            } else {
                emit(Op::PushConst, s.line, constant(Value::nil()));
            }
            leave(0, s.line);
            emit(Op::Return, s.line);
            break;
        }
        case StmtKind::Break:
        case StmtKind::Continue: {
            const bool is_break = s.kind == StmtKind::Break;
            std::size_t loop = controls_.size();
            while (loop-- > 0) {
                if (controls_[loop].kind == Control::While || controls_[loop].kind == Control::For) break;
            }
            if (loop == static_cast<std::size_t>(-1)) {
                fail(s.line, s.column, is_break ? "'break' outside loop" : "'continue' not properly in loop");
            }
            leave(loop + 1, s.line);
            if (is_break) {
                if (controls_[loop].kind == Control::For) emit(Op::Pop, s.line);
                auto j = emit(Op::Jump, s.line);
                controls_[loop].break_jumps.push_back(j);
            } else {
                emit(Op::Jump, s.line, static_cast<std::int32_t>(controls_[loop].continue_target));
            }
            break;
        }
        case StmtKind::Pass: break;
        }
    }

    /// Emits the handler pops and inlined finally bodies for leaving every
    /// control region at positions >= `floor`.
    void leave(std::size_t floor, int line) {
        for (std::size_t i = controls_.size(); i-- > floor;) {
            auto& c = controls_[i];
            if (c.kind == Control::Rescue) {
                for (int k = 0; k < c.handlers; ++k) emit(Op::PopHandler, line);
            } else if (c.kind == Control::Ensure) {
                emit(Op::PopHandler, line);
                const Block* body = c.finally_body;
                std::deque<Control> removed(std::make_move_iterator(controls_.begin() + static_cast<std::ptrdiff_t>(i)),
                                            std::make_move_iterator(controls_.end()));
                controls_.resize(i);
                block(*body);
                for (auto& r : removed) controls_.push_back(std::move(r));
            }
        }
    }

    void try_stmt(const Stmt& s, bool tail_value) {
        std::size_t ensure_setup = 0;
        const bool has_finally = s.finally_body.has_value();
        if (has_finally) {
            ensure_setup = emit(Op::SetupHandler, s.line, 0, -1, static_cast<std::int32_t>(HandlerKind::Ensure));
            controls_.push_back(Control{Control::Ensure, 1, &*s.finally_body, 0, {}});
        }
        const auto n = s.clauses.size();
        std::vector<std::size_t> setups(n);
        for (std::size_t k = n; k-- > 0;) {
            const auto& clause = s.clauses[k];
            const std::int32_t cls = clause.class_name ? name(*clause.class_name) : -1;
            setups[k] = emit(Op::SetupHandler, s.line, 0, cls, static_cast<std::int32_t>(HandlerKind::Rescue));
        }
        if (n > 0) controls_.push_back(Control{Control::Rescue, static_cast<int>(n), nullptr, 0, {}});
        block(s.body, tail_value);
        const int body_end = s.body.empty() ? s.line : s.body.back()->end_line;
        if (n > 0) {
            controls_.pop_back();
            for (std::size_t k = 0; k < n; ++k) emit(Op::PopHandler, body_end);
        }
        std::vector<std::size_t> to_after;
        if (n > 0) to_after.push_back(emit(Op::Jump, body_end));
        for (std::size_t k = 0; k < n; ++k) {
            const auto& clause = s.clauses[k];
            patch(setups[k], here());
            for (std::size_t p = 0; p < n - 1 - k; ++p) emit(Op::PopHandler, clause.line);
            if (clause.bind_name) {
                emit(Op::Store, clause.line, name(*clause.bind_name));
            } else {
                emit(Op::Pop, clause.line);
            }
            block(clause.body, tail_value);
            to_after.push_back(emit(Op::Jump, clause.body.empty() ? clause.line : clause.body.back()->end_line));
        }
        for (auto j : to_after) patch(j, here());
        if (has_finally) {
            controls_.pop_back();
            emit(Op::PopHandler, s.end_line);
            block(*s.finally_body);
            auto to_end = emit(Op::Jump, s.end_line);
            patch(ensure_setup, here());
            block(*s.finally_body);
            emit(Op::Raise, s.end_line, -1);
            patch(to_end, here());
        }
    }

    void class_def(const Stmt& s) {
        if (in_function_) fail(s.line, s.column, "class definitions are only allowed at top level");
        std::int32_t members = 0;
        for (const auto& m : s.body) {
            switch (m->kind) {
            case StmtKind::FuncDef:
                emit(Op::PushConst, m->line, constant(Value::text(m->name)));
                emit(Op::MakeFunction, m->line, function(*m, true));
                ++members;
                break;
            case StmtKind::Assign:
                if (m->target->kind != ExprKind::Name) fail(m->line, m->column, "invalid class member");
                emit(Op::PushConst, m->line, constant(Value::text(m->target->name)));
                expr(*m->value);
                ++members;
                break;
            case StmtKind::Pass: break;
            default: fail(m->line, m->column, "only definitions and assignments are allowed in a class body");
            }
        }
        emit(Op::MakeClass, s.line, name(s.name), members);
        emit(Op::Store, s.line, name(s.name));
    }

    std::int32_t function(const Stmt& def, bool method) {
        auto child = std::make_shared<CodeUnit>();
        child->name = def.name;
        child->params = def.params;
        child->language = options_.language;
        child->kind = method ? CodeKind::Method : CodeKind::Function;
        child->binds_self_param = method && options_.methods_bind_self;
        if (child->binds_self_param && child->params.empty()) {
            fail(def.line, def.column, "method '" + def.name + "' needs a receiver parameter");
        }
        const int base = def.line;
        // Lines of `options_.source` are absolute; the slice starts at the def.
        child->source = slice_lines(options_.source, def.line, def.end_line);
        Generator inner(options_, child, base, true, method);
        inner.function_body(def.body, def.end_line);
        unit_->children.push_back(child);
        return static_cast<std::int32_t>(unit_->children.size() - 1);
    }

    // -- assignment ---------------------------------------------------------

    void self_ref(int line) {
        if (!in_method_ && !options_.top_level_methods) fail(line, 1, "instance variable used outside of a method");
        emit(Op::Load, line, name("self"));
    }

    void assign(const Expr& target, const Expr& value, int line) {
        switch (target.kind) {
        case ExprKind::Name:
            expr(value);
            emit(Op::Store, line, name(target.name));
            break;
        case ExprKind::IVar:
            self_ref(line);
            expr(value);
            emit(Op::StoreSlot, line, name(target.name));
            break;
        case ExprKind::Attribute:
            expr(*target.object);
            expr(value);
            emit(Op::StoreSlot, line, name(target.name));
            break;
        case ExprKind::Index:
            expr(*target.object);
            expr(*target.right);
            expr(value);
            emit(Op::SetIndex, line);
            break;
        default: fail(target.line, target.column, "cannot assign to expression");
        }
    }

    static bool pure(const Expr& e) {
        return e.kind == ExprKind::Name || e.kind == ExprKind::Literal || e.kind == ExprKind::Self ||
               e.kind == ExprKind::IVar;
    }

    void aug_assign(const Stmt& s) {
        const auto& t = *s.target;
        const auto op = static_cast<std::int32_t>(s.aug_op);
        switch (t.kind) {
        case ExprKind::Name:
            emit(Op::Load, s.line, name(t.name));
            expr(*s.value);
            emit(Op::Binary, s.line, op);
            emit(Op::Store, s.line, name(t.name));
            break;
        case ExprKind::IVar:
            self_ref(s.line);
            emit(Op::Dup, s.line);
            emit(Op::LoadSlot, s.line, name(t.name));
            expr(*s.value);
            emit(Op::Binary, s.line, op);
            emit(Op::StoreSlot, s.line, name(t.name));
            break;
        case ExprKind::Attribute:
            expr(*t.object);
            emit(Op::Dup, s.line);
            emit(Op::LoadSlot, s.line, name(t.name));
            expr(*s.value);
            emit(Op::Binary, s.line, op);
            emit(Op::StoreSlot, s.line, name(t.name));
            break;
        case ExprKind::Index:
            if (!pure(*t.object) || !pure(*t.right)) {
                fail(s.line, s.column, "augmented assignment target is too complex");
            }
            expr(*t.object);
            expr(*t.right);
            expr(*t.object);
            expr(*t.right);
            emit(Op::Index, s.line);
            expr(*s.value);
            emit(Op::Binary, s.line, op);
            emit(Op::SetIndex, s.line);
            break;
        default: fail(t.line, t.column, "cannot assign to expression");
        }
    }

    // -- expressions --------------------------------------------------------

    void args(const std::vector<ExprPtr>& list) {
        for (const auto& a : list) expr(*a);
    }

    void expr(const Expr& e) {
        const int line = e.line;
        switch (e.kind) {
        case ExprKind::Literal: emit(Op::PushConst, line, constant(e.literal)); break;
        case ExprKind::Name: emit(Op::Load, line, name(e.name)); break;
        case ExprKind::Self: emit(Op::Load, line, name("self")); break;
        case ExprKind::IVar:
            self_ref(line);
            emit(Op::LoadSlot, line, name(e.name));
            break;
        case ExprKind::Attribute:
            expr(*e.object);
            emit(Op::LoadSlot, line, name(e.name));
            break;
        case ExprKind::Index:
            expr(*e.object);
            expr(*e.right);
            emit(Op::Index, line);
            break;
        case ExprKind::Call:
            expr(*e.object);
            args(e.args);
            emit(Op::Call, line, static_cast<std::int32_t>(e.args.size()));
            break;
        case ExprKind::MethodCall:
            expr(*e.object);
            args(e.args);
            emit(Op::Invoke, line, name(e.name), static_cast<std::int32_t>(e.args.size()));
            break;
        case ExprKind::New:
            expr(*e.object);
            args(e.args);
            emit(Op::NewInstance, line, static_cast<std::int32_t>(e.args.size()));
            break;
        case ExprKind::Binary:
            expr(*e.object);
            expr(*e.right);
            emit(Op::Binary, line, static_cast<std::int32_t>(e.binary_op));
            break;
        case ExprKind::Compare:
            expr(*e.object);
            expr(*e.right);
            emit(Op::Compare, line, static_cast<std::int32_t>(e.compare_op));
            break;
        case ExprKind::Unary:
            expr(*e.object);
            emit(Op::Unary, line, static_cast<std::int32_t>(kernel::UnaryOp::Neg));
            break;
        case ExprKind::Not:
            expr(*e.object);
            emit(Op::Unary, line, static_cast<std::int32_t>(kernel::UnaryOp::Not));
            break;
        case ExprKind::And: {
            expr(*e.object);
            emit(Op::Dup, line);
            auto skip = emit(Op::JumpIfFalse, line);
            emit(Op::Pop, line);
            expr(*e.right);
            patch(skip, here());
            break;
        }
        case ExprKind::Or: {
            expr(*e.object);
            emit(Op::Dup, line);
            auto to_right = emit(Op::JumpIfFalse, line);
            auto to_end = emit(Op::Jump, line);
            patch(to_right, here());
            emit(Op::Pop, line);
            expr(*e.right);
            patch(to_end, here());
            break;
        }
        case ExprKind::ListLit:
            args(e.args);
            emit(Op::BuildList, line, static_cast<std::int32_t>(e.args.size()));
            break;
        }
    }

    const CodegenOptions& options_;
    std::shared_ptr<CodeUnit> unit_;
    int line_base_;
    bool in_function_;
    bool in_method_;
    std::vector<Control> controls_;
};

}  // namespace

kernel::CodePtr generate(const Module& module, const CodegenOptions& options) {
    auto unit = std::make_shared<CodeUnit>();
    unit->name = options.root_name;
    unit->language = options.language;
    unit->kind = CodeKind::Module;
    unit->source = std::string(options.source);
    int last_line = 1;
    for (char c : options.source) last_line += c == '\n';
    Generator gen(options, unit, 1, false, options.top_level_methods);
    gen.module_body(module.body, last_line);
    kernel::validate(*unit);
    return unit;
}

}  // namespace polyvm::frontend
