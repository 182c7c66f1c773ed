#include "reference.hpp"

#include <map>
#include <sstream>

#include "polyvm/service/wire.hpp"

namespace polyvm::testing::reference {

std::string language_id(Lang lang) { return lang == Lang::Py ? "minipy" : "minirb"; }

// ---------------------------------------------------------------- generator

namespace {

struct Binding {
    std::string name;
    Type type;
    bool frozen = false;  // loop variables, counters, iterated lists
};

using Scope = std::vector<Binding>;

struct Context {
    bool in_function = false;
    bool lists_frozen = false;  // inside a for over a list variable
    int loops = 0;
    std::size_t callable = 0;  // functions visible from here
};

ExprP make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
StmtP make(Stmt s) { return std::make_shared<const Stmt>(std::move(s)); }

class Generator {
public:
    Generator(Lang lang, std::mt19937_64& rng) : lang_(lang), rng_(rng) {}

    Program program() {
        Program p;
        p.lang = lang_;
        const int nfun = pick(0, 2);
        for (int i = 0; i < nfun; ++i) {
            Function f;
            f.name = "f" + std::to_string(i);
            Scope scope;
            for (int k = pick(0, 2); k > 0; --k) {
                f.params.push_back("p" + std::to_string(fresh_++));
                scope.push_back({f.params.back(), Type::Int});
            }
            Context ctx{true, false, 0, functions_.size()};
            f.body = block(2, scope, ctx, 0);
            f.result = int_expr(2, scope, ctx);
            functions_.push_back(f);
        }
        p.functions = functions_;
        Scope scope;
        Context ctx{false, false, 0, functions_.size()};
        p.body = block(3, scope, ctx, 1);
        p.result = expr(any_type(), 2, scope, ctx);
        return p;
    }

private:
    Lang lang_;
    std::mt19937_64& rng_;
    int fresh_ = 0;
    std::vector<Function> functions_;

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    Type any_type() { return static_cast<Type>(pick(0, 3)); }

    std::vector<const Binding*> vars(const Scope& scope, Type t) const {
        std::vector<const Binding*> out;
        for (const auto& b : scope) {
            if (b.type == t) out.push_back(&b);
        }
        return out;
    }
    const Binding* some_var(const Scope& scope, Type t) {
        auto vs = vars(scope, t);
        if (vs.empty()) return nullptr;
        return vs[pick(0, static_cast<int>(vs.size()) - 1)];
    }

    ExprP var(const std::string& name) { return make(Expr{Expr::Var, {}, name}); }

    ExprP int_literal() {
        Expr e{Expr::Int};
        if (chance(0.08)) {
            std::string digits = std::to_string(pick(1, 9));
            for (int i = pick(15, 30); i > 0; --i) digits += static_cast<char>('0' + pick(0, 9));
            e.number = BigInt(digits);
            if (chance(0.3)) e.number = -e.number;
        } else {
            e.number = pick(-20, 40);
        }
        return make(e);
    }

    ExprP str_literal() {
        static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";
        std::string s;
        for (int i = pick(0, 6); i > 0; --i) s += alphabet[pick(0, static_cast<int>(alphabet.size()) - 1)];
        return make(Expr{Expr::Str, {}, s});
    }

    ExprP int_atom(const Scope& scope) {
        if (auto v = some_var(scope, Type::Int); v && chance(0.5)) return var(v->name);
        return make(Expr{Expr::Int, pick(-3, 5)});
    }

    ExprP divisor(int depth, const Scope& scope, const Context& ctx) {
        const int roll = pick(0, 99);
        if (roll < 4) return make(Expr{Expr::Int, 0});
        if (roll < 30) return int_expr(depth - 1, scope, ctx);
        int d = pick(1, 7);
        return make(Expr{Expr::Int, chance(0.3) ? -d : d});
    }

    ExprP int_expr(int depth, const Scope& scope, const Context& ctx) {
        for (;;) {
            switch (pick(0, depth > 0 ? 7 : 1)) {
                case 0: return int_literal();
                case 1:
                    if (auto v = some_var(scope, Type::Int)) return var(v->name);
                    break;
                case 2:
                case 3: {
                    static const char* ops[] = {"+", "-", "*", "%", "/"};
                    std::string op = ops[pick(0, lang_ == Lang::Rb ? 4 : 3)];
                    auto lhs = int_expr(depth - 1, scope, ctx);
                    auto rhs = (op == "%" || op == "/") ? divisor(depth, scope, ctx) : int_expr(depth - 1, scope, ctx);
                    return make(Expr{Expr::Arith, {}, op, false, {lhs, rhs}});
                }
                case 4:
                    return make(Expr{Expr::Len, {}, {}, false,
                                     {chance(0.5) ? str_expr(depth - 1, scope, ctx) : list_expr(depth - 1, scope, ctx)}});
                case 5:
                    if (auto v = some_var(scope, Type::IntList)) {
                        ExprP index = chance(0.7) ? make(Expr{Expr::Int, pick(-3, 4)}) : int_expr(depth - 1, scope, ctx);
                        return make(Expr{Expr::Index, {}, {}, false, {var(v->name), index}});
                    }
                    break;
                case 6:
                case 7:
                    if (ctx.callable > 0) {
                        const auto& f = functions_[pick(0, static_cast<int>(ctx.callable) - 1)];
                        Expr e{Expr::Call, {}, f.name};
                        for (std::size_t i = 0; i < f.params.size(); ++i) e.kids.push_back(int_expr(depth - 1, scope, ctx));
                        return make(e);
                    }
                    break;
            }
        }
    }

    ExprP str_expr(int depth, const Scope& scope, const Context& ctx) {
        for (;;) {
            switch (pick(0, depth > 0 ? 3 : 1)) {
                case 0: return str_literal();
                case 1:
                    if (auto v = some_var(scope, Type::Str)) return var(v->name);
                    break;
                case 2:
                    return make(Expr{Expr::Concat, {}, {}, false,
                                     {str_expr(depth - 1, scope, ctx), str_expr(depth - 1, scope, ctx)}});
                case 3: return make(Expr{Expr::ToStr, {}, {}, false, {int_expr(depth - 1, scope, ctx)}});
            }
        }
    }

    ExprP bool_expr(int depth, const Scope& scope, const Context& ctx) {
        for (;;) {
            switch (pick(0, depth > 0 ? 5 : 1)) {
                case 0: return make(Expr{Expr::Bool, {}, {}, chance(0.5)});
                case 1:
                    if (auto v = some_var(scope, Type::Bool)) return var(v->name);
                    break;
                case 2:
                case 3: {
                    static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
                    return make(Expr{Expr::Compare, {}, ops[pick(0, 5)], false,
                                     {int_expr(depth - 1, scope, ctx), int_expr(depth - 1, scope, ctx)}});
                }
                case 4:
                    if (chance(0.3)) {
                        return make(Expr{Expr::Compare, {}, chance(0.5) ? "==" : "!=", false,
                                         {str_expr(depth - 1, scope, ctx), str_expr(depth - 1, scope, ctx)}});
                    }
                    return make(Expr{Expr::Logic, {}, chance(0.5) ? "and" : "or", false,
                                     {bool_expr(depth - 1, scope, ctx), bool_expr(depth - 1, scope, ctx)}});
                case 5: return make(Expr{Expr::Not, {}, {}, false, {bool_expr(depth - 1, scope, ctx)}});
            }
        }
    }

    ExprP list_literal(int depth, const Scope& scope, const Context& ctx) {
        Expr e{Expr::List};
        for (int i = pick(0, 4); i > 0; --i) e.kids.push_back(depth > 0 ? int_expr(depth - 1, scope, ctx) : int_literal());
        return make(e);
    }

    ExprP list_expr(int depth, const Scope& scope, const Context& ctx) {
        if (auto v = some_var(scope, Type::IntList); v && chance(0.6)) return var(v->name);
        return list_literal(depth, scope, ctx);
    }

    ExprP expr(Type t, int depth, const Scope& scope, const Context& ctx) {
        switch (t) {
            case Type::Int: return int_expr(depth, scope, ctx);
            case Type::Str: return str_expr(depth, scope, ctx);
            case Type::Bool: return bool_expr(depth, scope, ctx);
            case Type::IntList: return list_expr(depth, scope, ctx);
        }
        return nullptr;
    }

    Block block(int depth, Scope& scope, const Context& ctx, int min_len) {
        Block out;
        const int n = std::max(min_len, pick(1, depth >= 3 ? 6 : 3));
        for (int i = 0; i < n; ++i) out.push_back(statement(depth, scope, ctx));
        return out;
    }

    // nested blocks see the enclosing scope but their new names die with them
    Block nested(int depth, const Scope& scope, const Context& ctx) {
        Scope inner = scope;
        return block(depth, inner, ctx, 1);
    }

    StmtP statement(int depth, Scope& scope, const Context& ctx) {
        for (;;) {
            const int roll = pick(0, depth > 0 ? 99 : 59);
            if (roll < 25) {
                Stmt s{Stmt::Assign};
                std::vector<const Binding*> targets;
                for (const auto& b : scope) {
                    if (!b.frozen) targets.push_back(&b);
                }
                if (!targets.empty() && chance(0.4)) {
                    const auto* b = targets[pick(0, static_cast<int>(targets.size()) - 1)];
                    s.name = b->name;
                    s.exprs.push_back(expr(b->type, 2, scope, ctx));
                } else {
                    const Type t = any_type();
                    s.name = "v" + std::to_string(fresh_++);
                    s.exprs.push_back(expr(t, 2, scope, ctx));
                    scope.push_back({s.name, t});
                }
                return make(s);
            }
            if (roll < 42) return make(Stmt{Stmt::Print, {}, {expr(any_type(), 2, scope, ctx)}});
            if (roll < 50) {
                if (ctx.lists_frozen) continue;
                if (auto v = some_var(scope, Type::IntList)) return make(Stmt{Stmt::Append, v->name, {int_expr(1, scope, ctx)}});
                continue;
            }
            if (roll < 56) {
                if (ctx.lists_frozen) continue;
                if (auto v = some_var(scope, Type::IntList)) {
                    ExprP index = chance(0.7) ? make(Expr{Expr::Int, pick(-3, 4)}) : int_atom(scope);
                    return make(Stmt{Stmt::SetIndex, v->name, {index, int_atom(scope)}});
                }
                continue;
            }
            if (roll < 58) {
                // rare, and mostly reached under a condition
                if (!chance(0.3)) continue;
                return make(Stmt{Stmt::Raise, {}, {str_literal()}});
            }
            if (roll < 60) continue;
            if (roll < 72) {
                Stmt s{Stmt::If, {}, {bool_expr(2, scope, ctx)}};
                s.body = nested(depth - 1, scope, ctx);
                if (chance(0.5)) s.orelse = nested(depth - 1, scope, ctx);
                return make(s);
            }
            if (roll < 80) {
                if (ctx.loops >= 2) continue;
                Stmt s{Stmt::While, "c" + std::to_string(fresh_++)};
                s.count = pick(0, 3);
                Scope inner = scope;
                inner.push_back({s.name, Type::Int, true});
                Context c = ctx;
                ++c.loops;
                s.body = block(depth - 1, inner, c, 1);
                return make(s);
            }
            if (roll < 90) {
                if (ctx.loops >= 2) continue;
                Stmt s{Stmt::For, "x" + std::to_string(fresh_++)};
                Scope inner = scope;
                Context c = ctx;
                ++c.loops;
                const auto* lv = some_var(scope, Type::IntList);
                if (lv && chance(0.5)) {
                    s.exprs.push_back(var(lv->name));
                    c.lists_frozen = true;
                } else {
                    Expr lit{Expr::List};
                    for (int i = pick(0, 4); i > 0; --i) lit.kids.push_back(make(Expr{Expr::Int, pick(-9, 20)}));
                    s.exprs.push_back(make(lit));
                }
                inner.push_back({s.name, Type::Int, true});
                s.body = block(depth - 1, inner, c, 1);
                return make(s);
            }
            Stmt s{Stmt::Try, chance(0.6) ? "ZeroDivisionError" : "IndexError"};
            s.body = nested(depth - 1, scope, ctx);
            s.orelse = nested(depth - 1, scope, ctx);
            return make(s);
        }
    }
};

// ---------------------------------------------------------------- rendering

class Renderer {
public:
    explicit Renderer(Lang lang) : lang_(lang), unit_(lang == Lang::Py ? 4 : 2) {}

    std::string program(const Program& p) {
        for (const auto& f : p.functions) function(f);
        block(p.body, 0);
        line(0, expr(*p.result));
        return out_.str();
    }

private:
    Lang lang_;
    int unit_;
    std::ostringstream out_;

    bool py() const { return lang_ == Lang::Py; }

    void line(int indent, const std::string& text) { out_ << std::string(indent * unit_, ' ') << text << "\n"; }

    void function(const Function& f) {
        std::string params;
        for (std::size_t i = 0; i < f.params.size(); ++i) params += (i ? ", " : "") + f.params[i];
        line(0, "def " + f.name + "(" + params + ")" + (py() ? ":" : ""));
        block(f.body, 1);
        line(1, py() ? "return " + expr(*f.result) : expr(*f.result));
        if (!py()) line(0, "end");
    }

    void block(const Block& b, int indent) {
        for (const auto& s : b) statement(*s, indent);
    }

    void statement(const Stmt& s, int indent) {
        switch (s.kind) {
            case Stmt::Assign: line(indent, s.name + " = " + expr(*s.exprs[0])); break;
            case Stmt::Print: line(indent, (py() ? "print(" : "puts(") + expr(*s.exprs[0]) + ")"); break;
            case Stmt::Append: line(indent, s.name + (py() ? ".append(" : ".push(") + expr(*s.exprs[0]) + ")"); break;
            case Stmt::SetIndex:
                line(indent, s.name + "[" + expr(*s.exprs[0]) + "] = " + expr(*s.exprs[1]));
                break;
            case Stmt::Raise:
                line(indent, py() ? "raise ValueError(" + quote(s.exprs[0]->text) + ")"
                                  : "raise ArgumentError, " + quote(s.exprs[0]->text));
                break;
            case Stmt::If:
                line(indent, "if " + expr(*s.exprs[0]) + (py() ? ":" : ""));
                block(s.body, indent + 1);
                if (!s.orelse.empty()) {
                    line(indent, py() ? "else:" : "else");
                    block(s.orelse, indent + 1);
                }
                if (!py()) line(indent, "end");
                break;
            case Stmt::While:
                line(indent, s.name + " = 0");
                line(indent, "while " + s.name + " < " + std::to_string(s.count) + (py() ? ":" : ""));
                block(s.body, indent + 1);
                line(indent + 1, s.name + " = " + s.name + " + 1");
                if (!py()) line(indent, "end");
                break;
            case Stmt::For:
                line(indent, "for " + s.name + " in " + expr(*s.exprs[0]) + (py() ? ":" : ""));
                block(s.body, indent + 1);
                if (!py()) line(indent, "end");
                break;
            case Stmt::Try:
                line(indent, py() ? "try:" : "begin");
                block(s.body, indent + 1);
                line(indent, py() ? "except " + s.name + ":" : "rescue " + s.name);
                block(s.orelse, indent + 1);
                if (!py()) line(indent, "end");
                break;
        }
    }

    static std::string quote(const std::string& s) { return "\"" + s + "\""; }

    std::string expr(const Expr& e) {
        switch (e.kind) {
            case Expr::Int: return e.number < 0 ? "(" + e.number.str() + ")" : e.number.str();
            case Expr::Str: return quote(e.text);
            case Expr::Bool: return py() ? (e.flag ? "True" : "False") : (e.flag ? "true" : "false");
            case Expr::List: {
                std::string s = "[";
                for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + expr(*e.kids[i]);
                return s + "]";
            }
            case Expr::Var: return e.text;
            case Expr::Arith:
            case Expr::Compare: return "(" + expr(*e.kids[0]) + " " + e.text + " " + expr(*e.kids[1]) + ")";
            case Expr::Concat: return "(" + expr(*e.kids[0]) + " + " + expr(*e.kids[1]) + ")";
            case Expr::Logic: {
                const std::string op = py() ? e.text : (e.text == "and" ? "&&" : "||");
                return "(" + expr(*e.kids[0]) + " " + op + " " + expr(*e.kids[1]) + ")";
            }
            case Expr::Not: return py() ? "(not " + expr(*e.kids[0]) + ")" : "(!" + expr(*e.kids[0]) + ")";
            case Expr::Len: return py() ? "len(" + expr(*e.kids[0]) + ")" : "(" + expr(*e.kids[0]) + ").length";
            case Expr::ToStr: return py() ? "str(" + expr(*e.kids[0]) + ")" : "(" + expr(*e.kids[0]) + ").to_s";
            case Expr::Index: return expr(*e.kids[0]) + "[" + expr(*e.kids[1]) + "]";
            case Expr::Call: {
                std::string s = e.text + "(";
                for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + expr(*e.kids[i]);
                return s + ")";
            }
        }
        return {};
    }
};

// ---------------------------------------------------------------- oracle

struct Raised {
    std::string cls;
    std::string message;
};

struct Caught {
    Raised raised;
};

BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;  // truncates
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

BigInt floor_mod(const BigInt& a, const BigInt& b) {
    BigInt r = a % b;  // sign of a
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

class Evaluator {
public:
    explicit Evaluator(const Program& p) : p_(p) {
        for (const auto& f : p.functions) functions_[f.name] = &f;
    }

    Outcome run() {
        Outcome out;
        std::map<std::string, Value> env;
        try {
            exec(p_.body, env);
            out.value = eval(*p_.result, env);
        } catch (const Caught& c) {
            out.exception_class = c.raised.cls;
            out.exception_message = c.raised.message;
        }
        out.transcript = transcript_;
        return out;
    }

private:
    const Program& p_;
    std::map<std::string, const Function*> functions_;
    std::string transcript_;

    bool py() const { return p_.lang == Lang::Py; }

    [[noreturn]] void raise(std::string cls, std::string message) { throw Caught{{std::move(cls), std::move(message)}}; }

    std::string show(const Value& v) const {
        if (v.is_bool()) return py() ? (v.as_bool() ? "True" : "False") : (v.as_bool() ? "true" : "false");
        if (v.is_int()) return v.as_int().str();
        if (v.is_text()) return v.as_text();
        std::string s = "[";
        const auto& items = *v.as_list();
        for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i].as_int().str();
        return s + "]";
    }

    void print(const Value& v) {
        if (!py() && v.is_list()) {
            const auto& items = *v.as_list();
            if (items.empty()) transcript_ += "\n";
            for (const auto& item : items) transcript_ += item.as_int().str() + "\n";
            return;
        }
        transcript_ += show(v) + "\n";
    }

    std::size_t checked_index(const Value& list, const BigInt& index, bool store) {
        const BigInt size = static_cast<long>(list.as_list()->size());
        BigInt i = index < 0 ? index + size : index;
        if (i < 0 || i >= size) {
            if (py()) raise("IndexError", store ? "list assignment index out of range" : "list index out of range");
            raise("IndexError", "index " + index.str() + " outside of Array bounds");
        }
        return static_cast<std::size_t>(i.convert_to<long>());
    }

    Value eval(const Expr& e, std::map<std::string, Value>& env) {
        switch (e.kind) {
            case Expr::Int: return Value::integer(e.number);
            case Expr::Str: return Value::text(e.text);
            case Expr::Bool: return Value::boolean(e.flag);
            case Expr::List: {
                List items;
                for (const auto& k : e.kids) items.push_back(eval(*k, env));
                return Value::list(std::move(items));
            }
            case Expr::Var: return env.at(e.text);
            case Expr::Arith: {
                const BigInt a = eval(*e.kids[0], env).as_int();
                const BigInt b = eval(*e.kids[1], env).as_int();
                if (e.text == "+") return Value::integer(a + b);
                if (e.text == "-") return Value::integer(a - b);
                if (e.text == "*") return Value::integer(a * b);
                if (b == 0) raise("ZeroDivisionError", e.text == "%" ? "integer modulo by zero" : "integer division by zero");
                return Value::integer(e.text == "%" ? floor_mod(a, b) : floor_div(a, b));
            }
            case Expr::Compare: {
                const Value a = eval(*e.kids[0], env);
                const Value b = eval(*e.kids[1], env);
                if (a.is_text()) return Value::boolean((a.as_text() == b.as_text()) == (e.text == "=="));
                const BigInt& x = a.as_int();
                const BigInt& y = b.as_int();
                if (e.text == "<") return Value::boolean(x < y);
                if (e.text == "<=") return Value::boolean(x <= y);
                if (e.text == ">") return Value::boolean(x > y);
                if (e.text == ">=") return Value::boolean(x >= y);
                if (e.text == "==") return Value::boolean(x == y);
                return Value::boolean(x != y);
            }
            case Expr::Logic: {
                const bool a = eval(*e.kids[0], env).as_bool();
                if (e.text == "and" ? !a : a) return Value::boolean(a);
                return Value::boolean(eval(*e.kids[1], env).as_bool());
            }
            case Expr::Not: return Value::boolean(!eval(*e.kids[0], env).as_bool());
            case Expr::Len: {
                const Value v = eval(*e.kids[0], env);
                return Value::integer(static_cast<std::int64_t>(v.is_text() ? v.as_text().size() : v.as_list()->size()));
            }
            case Expr::ToStr: return Value::text(eval(*e.kids[0], env).as_int().str());
            case Expr::Concat: return Value::text(eval(*e.kids[0], env).as_text() + eval(*e.kids[1], env).as_text());
            case Expr::Index: {
                const Value list = eval(*e.kids[0], env);
                const BigInt index = eval(*e.kids[1], env).as_int();
                return (*list.as_list())[checked_index(list, index, false)];
            }
            case Expr::Call: {
                const Function& f = *functions_.at(e.text);
                std::map<std::string, Value> locals;
                for (std::size_t i = 0; i < e.kids.size(); ++i) locals[f.params[i]] = eval(*e.kids[i], env);
                exec(f.body, locals);
                return eval(*f.result, locals);
            }
        }
        return Value::nil();
    }

    void exec(const Block& b, std::map<std::string, Value>& env) {
        for (const auto& s : b) exec(*s, env);
    }

    void exec(const Stmt& s, std::map<std::string, Value>& env) {
        switch (s.kind) {
            case Stmt::Assign: env[s.name] = eval(*s.exprs[0], env); break;
            case Stmt::Print: print(eval(*s.exprs[0], env)); break;
            case Stmt::Append: {
                const Value list = env.at(s.name);
                Value item = eval(*s.exprs[0], env);
                list.as_list()->push_back(std::move(item));
                break;
            }
            case Stmt::SetIndex: {
                const Value list = env.at(s.name);
                const BigInt index = eval(*s.exprs[0], env).as_int();
                Value item = eval(*s.exprs[1], env);
                (*list.as_list())[checked_index(list, index, true)] = std::move(item);
                break;
            }
            case Stmt::Raise:
                raise(py() ? "ValueError" : "ArgumentError", s.exprs[0]->text);
            case Stmt::If:
                if (eval(*s.exprs[0], env).as_bool()) {
                    exec(s.body, env);
                } else {
                    exec(s.orelse, env);
                }
                break;
            case Stmt::While:
                for (int i = 0; i < s.count; ++i) {
                    env[s.name] = Value::integer(i);
                    exec(s.body, env);
                }
                env[s.name] = Value::integer(s.count);
                break;
            case Stmt::For: {
                const Value list = eval(*s.exprs[0], env);
                const List items = *list.as_list();  // bodies never mutate it
                for (const auto& item : items) {
                    env[s.name] = item;
                    exec(s.body, env);
                }
                break;
            }
            case Stmt::Try:
                try {
                    exec(s.body, env);
                } catch (const Caught& c) {
                    if (c.raised.cls != s.name) throw;
                    exec(s.orelse, env);
                }
                break;
        }
    }
};

}  // namespace

Program generate(Lang lang, std::mt19937_64& rng) { return Generator(lang, rng).program(); }

std::string render(const Program& program) { return Renderer(program.lang).program(program); }

Outcome evaluate(const Program& program) { return Evaluator(program).run(); }

bool operator==(const Outcome& a, const Outcome& b) {
    if (a.exception_class != b.exception_class || a.exception_message != b.exception_message) return false;
    if (a.transcript != b.transcript) return false;
    return a.exception_class || a.value == b.value;
}

std::string Outcome::describe() const {
    std::ostringstream out;
    if (exception_class) {
        out << "raised " << *exception_class << ": " << exception_message.value_or("");
    } else {
        out << "value " << debug_string(value);
    }
    out << " | output " << service::json(transcript).dump();
    return out.str();
}

Outcome run_on_vm(vm::Vm& machine, const std::string& language, const std::string& source) {
    const auto pid = machine.spawn(language, source);
    for (int guard = 0; guard < 100; ++guard) {
        const auto state = machine.run_until_settled(pid);
        if (state == vm::State::Terminated) break;
        if (state == vm::State::Suspended) {
            machine.unwind(pid);
            continue;
        }
        throw std::runtime_error("process stuck in state " + std::string(vm::state_name(state)));
    }
    const auto& p = machine.process(pid);
    if (!p.result) throw std::runtime_error("process never terminated");
    Outcome out;
    out.transcript = p.transcript;
    if (p.result->exception) {
        out.exception_class = p.result->exception->class_name;
        out.exception_message = p.result->exception->message;
    } else {
        out.value = p.result->value;
    }
    return out;
}

Corpus make_corpus(std::uint64_t seed, int count) {
    Corpus c;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < count; ++i) {
        c.programs.push_back(generate(i % 2 == 0 ? Lang::Py : Lang::Rb, rng));
        c.sources.push_back(render(c.programs.back()));
    }
    return c;
}

Report compare_with_vm(const Corpus& corpus, std::int64_t quantum) {
    Report report;
    vm::Vm machine;
    machine.set_budget(quantum);
    for (std::size_t i = 0; i < corpus.programs.size(); ++i) {
        const auto& program = corpus.programs[i];
        const auto expected = evaluate(program);
        ++report.programs;
        if (expected.exception_class) ++report.raising;
        std::string problem;
        try {
            const auto actual = run_on_vm(machine, language_id(program.lang), corpus.sources[i]);
            if (!(actual == expected)) {
                problem = "expected " + expected.describe() + "\n  actual " + actual.describe();
            }
        } catch (const std::exception& e) {
            problem = std::string("error: ") + e.what();
        }
        if (!problem.empty()) {
            report.mismatches.push_back("program " + std::to_string(i) + " (" + language_id(program.lang) + ")\n" +
                                        corpus.sources[i] + "  " + problem);
        }
    }
    return report;
}

}  // namespace polyvm::testing::reference
