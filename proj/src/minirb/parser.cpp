#include <algorithm>
#include <set>

#include "polyvm/errors.hpp"
#include "polyvm/frontend/text.hpp"
#include "polyvm/minirb/minirb.hpp"

namespace polyvm::minirb {

using namespace frontend;
using kernel::BinaryOp;
using kernel::CompareOp;

namespace {

using Scope = std::set<std::string>;

std::string single_quoted(std::string_view body) {
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '\\' && i + 1 < body.size() && (body[i + 1] == '\\' || body[i + 1] == '\'')) ++i;
        out += body[i];
    }
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, std::vector<Scope>& scopes) : scopes_(scopes) {
        for (auto& t : tokens) {
            if (t.kind != TokenKind::Comment) tokens_.push_back(std::move(t));
        }
    }

    Module module() {
        Module m;
        m.body = body({});
        if (!at(TokenKind::End)) unexpected();
        return m;
    }

    /// A complete expression spanning the whole token stream.
    ExprPtr lone_expression() {
        skip_terminators();
        auto e = expression();
        skip_terminators();
        if (!at(TokenKind::End)) unexpected();
        return e;
    }

private:
    // -- token helpers -------------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
    bool at(TokenKind kind) const { return peek().kind == kind; }
    bool at(TokenKind kind, std::string_view lexeme) const { return at(kind) && peek().lexeme == lexeme; }
    bool at_keyword(std::string_view k) const { return at(TokenKind::Keyword, k); }
    bool at_punct(std::string_view p) const { return at(TokenKind::Punctuation, p); }
    bool at_op(std::string_view o) const { return at(TokenKind::Operator, o); }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (t.kind == TokenKind::Error) fail(t, "invalid syntax near '" + t.lexeme + "'");
        if (pos_ + 1 < tokens_.size()) ++pos_;
        if (t.kind != TokenKind::End && t.kind != TokenKind::Newline) last_line_ = t.line;
        return t;
    }

    [[noreturn]] static void fail(const Token& t, const std::string& message) {
        throw SyntaxError(t.line, t.start + 1, message);
    }

    [[noreturn]] void unexpected() const {
        const auto& t = peek();
        if (t.kind == TokenKind::Error) fail(t, "invalid syntax near '" + t.lexeme + "'");
        if (t.kind == TokenKind::End) fail(t, "unexpected end of input");
        if (t.kind == TokenKind::Newline) fail(t, "unexpected end of line");
        fail(t, "unexpected '" + t.lexeme + "'");
    }

    const Token& expect(TokenKind kind, std::string_view lexeme = {}) {
        if (!at(kind) || (!lexeme.empty() && peek().lexeme != lexeme)) {
            if (at(TokenKind::Error)) unexpected();
            if (!lexeme.empty()) fail(peek(), "expected '" + std::string(lexeme) + "'");
            unexpected();
        }
        return advance();
    }

    bool at_terminator() const {
        return at(TokenKind::Newline) || at(TokenKind::End) || at_punct(";");
    }

    void skip_terminators() {
        while (at(TokenKind::Newline) || at_punct(";")) advance();
    }

    bool local(const std::string& name) const { return scopes_.back().contains(name); }
    void declare(const std::string& name) { scopes_.back().insert(name); }

    // -- statements ----------------------------------------------------------

    static bool is_stop(const Token& t, std::initializer_list<std::string_view> stops) {
        if (t.kind != TokenKind::Keyword) return false;
        return std::find(stops.begin(), stops.end(), t.lexeme) != stops.end();
    }

    Block body(std::initializer_list<std::string_view> stops) {
        Block out;
        while (true) {
            skip_terminators();
            if (at(TokenKind::End)) {
                if (stops.size() != 0) fail(peek(), "unexpected end of input, expecting 'end'");
                return out;
            }
            if (is_stop(peek(), stops)) return out;
            out.push_back(statement());
            if (!at_terminator() && !is_stop(peek(), {"end", "else", "elsif", "rescue", "ensure"})) unexpected();
        }
    }

    StmtPtr make(StmtKind kind, const Token& t) { return std::make_unique<Stmt>(kind, t.line, t.start + 1); }

    StmtPtr finish(StmtPtr s) {
        s->end_line = last_line_;
        return s;
    }

    StmtPtr statement() {
        const Token t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "def") return def_stmt();
            if (t.lexeme == "class") return class_stmt();
            if (t.lexeme == "if") return if_stmt();
            if (t.lexeme == "while") return while_stmt();
            if (t.lexeme == "for") return for_stmt();
            if (t.lexeme == "begin") return begin_stmt();
        }
        auto s = simple();
        while (at_keyword("if")) {
            const Token& m = advance();
            auto wrapped = make(StmtKind::If, m);
            wrapped->line = s->line;
            wrapped->column = s->column;
            wrapped->value = expression();
            wrapped->body.push_back(std::move(s));
            s = finish(std::move(wrapped));
        }
        return s;
    }

    StmtPtr simple() {
        const Token t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "break") return finish(make(StmtKind::Break, advance()));
            if (t.lexeme == "next") return finish(make(StmtKind::Continue, advance()));
            if (t.lexeme == "return") {
                auto s = make(StmtKind::Return, advance());
                if (!at_terminator() && !at_keyword("if") && !is_stop(peek(), {"end"})) s->value = expression();
                return finish(std::move(s));
            }
            if (t.lexeme == "raise") return raise_stmt();
        }
        auto e = expression();
        if (at_op("=")) {
            advance();
            auto target = as_target(std::move(e));
            auto s = make(StmtKind::Assign, t);
            s->value = expression();
            if (target->kind == ExprKind::Name) declare(target->name);
            s->target = std::move(target);
            return finish(std::move(s));
        }
        static const std::pair<std::string_view, BinaryOp> aug[] = {{"+=", BinaryOp::Add},
                                                                    {"-=", BinaryOp::Sub},
                                                                    {"*=", BinaryOp::Mul},
                                                                    {"/=", BinaryOp::IntDiv},
                                                                    {"%=", BinaryOp::Mod}};
        for (const auto& [lexeme, op] : aug) {
            if (at_op(lexeme)) {
                advance();
                auto s = make(StmtKind::AugAssign, t);
                s->aug_op = op;
                s->target = as_target(std::move(e));
                s->value = expression();
                return finish(std::move(s));
            }
        }
        auto s = make(StmtKind::Expr, t);
        s->value = std::move(e);
        return finish(std::move(s));
    }

    /// Reinterprets a parsed expression as an assignment target. A bare
    /// identifier parses as a call when it is not yet a local.
    ExprPtr as_target(ExprPtr e) {
        if (e->kind == ExprKind::Call && e->args.empty() && e->object->kind == ExprKind::Name && !called_with_parens_) {
            return std::move(e->object);
        }
        if (e->kind == ExprKind::MethodCall && e->args.empty()) {
            e->kind = ExprKind::Attribute;
            return e;
        }
        if (e->kind == ExprKind::Name || e->kind == ExprKind::IVar || e->kind == ExprKind::Index) return e;
        throw SyntaxError(e->line, e->column, "cannot assign to expression");
    }

    StmtPtr raise_stmt() {
        auto s = make(StmtKind::Raise, advance());
        if (at_terminator() || at_keyword("if") || is_stop(peek(), {"end"})) return finish(std::move(s));
        if (at(TokenKind::Constant) && (peek(1).kind == TokenKind::Newline || peek(1).kind == TokenKind::End ||
                                        (peek(1).kind == TokenKind::Punctuation &&
                                         (peek(1).lexeme == "," || peek(1).lexeme == ";")) ||
                                        (peek(1).kind == TokenKind::Keyword &&
                                         (peek(1).lexeme == "if" || peek(1).lexeme == "end")))) {
            s->name = advance().lexeme;
            if (at_punct(",")) {
                advance();
                s->value = expression();
            }
            return finish(std::move(s));
        }
        s->value = expression();
        return finish(std::move(s));
    }

    void optional_keyword(std::string_view k) {
        if (at_keyword(k)) advance();
    }

    StmtPtr if_stmt() {
        auto s = make(StmtKind::If, advance());
        s->value = expression();
        optional_keyword("then");
        s->body = body({"elsif", "else", "end"});
        if (at_keyword("elsif")) {
            auto nested = if_tail();
            s->orelse.push_back(std::move(nested));
            return finish(std::move(s));
        }
        if (at_keyword("else")) {
            advance();
            s->orelse = body({"end"});
        }
        expect(TokenKind::Keyword, "end");
        return finish(std::move(s));
    }

    /// `elsif` chain; consumes the closing `end` of the whole statement.
    StmtPtr if_tail() {
        auto s = make(StmtKind::If, advance());
        s->value = expression();
        optional_keyword("then");
        s->body = body({"elsif", "else", "end"});
        if (at_keyword("elsif")) {
            s->orelse.push_back(if_tail());
            return finish(std::move(s));
        }
        if (at_keyword("else")) {
            advance();
            s->orelse = body({"end"});
        }
        expect(TokenKind::Keyword, "end");
        return finish(std::move(s));
    }

    StmtPtr while_stmt() {
        auto s = make(StmtKind::While, advance());
        s->value = expression();
        optional_keyword("do");
        s->body = body({"end"});
        expect(TokenKind::Keyword, "end");
        return finish(std::move(s));
    }

    StmtPtr for_stmt() {
        auto s = make(StmtKind::For, advance());
        s->name = expect(TokenKind::Identifier).lexeme;
        declare(s->name);
        expect(TokenKind::Keyword, "in");
        s->value = expression();
        optional_keyword("do");
        s->body = body({"end"});
        expect(TokenKind::Keyword, "end");
        return finish(std::move(s));
    }

    /// Parses rescue/ensure clauses after a body and the closing `end`.
    void handlers(Stmt& s) {
        while (at_keyword("rescue")) {
            const auto& t = advance();
            ExceptClause clause;
            clause.line = t.line;
            if (at(TokenKind::Constant)) {
                clause.class_name = advance().lexeme;
                if (at_punct(",")) fail(peek(), "rescue with several classes is not supported");
            }
            if (at_op("=>")) {
                advance();
                clause.bind_name = expect(TokenKind::Identifier).lexeme;
                declare(*clause.bind_name);
            }
            optional_keyword("then");
            clause.body = body({"rescue", "ensure", "end"});
            s.clauses.push_back(std::move(clause));
        }
        if (at_keyword("ensure")) {
            advance();
            s.finally_body = body({"end"});
        }
        expect(TokenKind::Keyword, "end");
    }

    StmtPtr begin_stmt() {
        auto s = make(StmtKind::Try, advance());
        s->body = body({"rescue", "ensure", "end"});
        if (!at_keyword("rescue") && !at_keyword("ensure")) {
            // A plain begin/end block.
            expect(TokenKind::Keyword, "end");
            s->finally_body = Block{};
            return finish(std::move(s));
        }
        handlers(*s);
        return finish(std::move(s));
    }

    StmtPtr def_stmt() {
        auto s = make(StmtKind::FuncDef, advance());
        const auto& name = peek();
        if (name.kind != TokenKind::Identifier && name.kind != TokenKind::Constant) unexpected();
        s->name = advance().lexeme;
        scopes_.emplace_back();
        auto param = [&] {
            auto p = expect(TokenKind::Identifier).lexeme;
            if (local(p)) fail(peek(), "duplicated argument name");
            declare(p);
            s->params.push_back(std::move(p));
        };
        if (at_punct("(")) {
            advance();
            while (!at_punct(")")) {
                param();
                if (!at_punct(",")) break;
                advance();
            }
            expect(TokenKind::Punctuation, ")");
        } else if (at(TokenKind::Identifier)) {
            param();
            while (at_punct(",")) {
                advance();
                param();
            }
        }
        auto inner = body({"rescue", "ensure", "end"});
        if (at_keyword("rescue") || at_keyword("ensure")) {
            auto wrapper = make(StmtKind::Try, peek());
            wrapper->line = inner.empty() ? s->line : inner.front()->line;
            wrapper->body = std::move(inner);
            handlers(*wrapper);
            wrapper->end_line = last_line_;
            s->body.push_back(std::move(wrapper));
        } else {
            s->body = std::move(inner);
            expect(TokenKind::Keyword, "end");
        }
        scopes_.pop_back();
        return finish(std::move(s));
    }

    StmtPtr class_stmt() {
        auto s = make(StmtKind::ClassDef, advance());
        s->name = expect(TokenKind::Constant).lexeme;
        scopes_.emplace_back();
        while (true) {
            skip_terminators();
            if (at_keyword("end")) break;
            if (!at_keyword("def")) fail(peek(), "only method definitions are allowed in a class body");
            s->body.push_back(def_stmt());
        }
        expect(TokenKind::Keyword, "end");
        scopes_.pop_back();
        return finish(std::move(s));
    }

    // -- expressions ---------------------------------------------------------

    ExprPtr node(ExprKind kind, const Token& t) { return std::make_unique<Expr>(kind, t.line, t.start + 1); }

    ExprPtr expression() { return binary(0); }

    struct Infix {
        int power;
        ExprKind kind;
        BinaryOp op = BinaryOp::Add;
        CompareOp cmp = CompareOp::Eq;
    };

    std::optional<Infix> infix() const {
        const auto& t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "or") return Infix{1, ExprKind::Or};
            if (t.lexeme == "and") return Infix{1, ExprKind::And};
            return std::nullopt;
        }
        if (t.kind != TokenKind::Operator) return std::nullopt;
        const auto& l = t.lexeme;
        if (l == "||") return Infix{3, ExprKind::Or};
        if (l == "&&") return Infix{4, ExprKind::And};
        if (l == "==") return Infix{5, ExprKind::Compare, BinaryOp::Add, CompareOp::Eq};
        if (l == "!=") return Infix{5, ExprKind::Compare, BinaryOp::Add, CompareOp::Ne};
        if (l == "<") return Infix{6, ExprKind::Compare, BinaryOp::Add, CompareOp::Lt};
        if (l == "<=") return Infix{6, ExprKind::Compare, BinaryOp::Add, CompareOp::Le};
        if (l == ">") return Infix{6, ExprKind::Compare, BinaryOp::Add, CompareOp::Gt};
        if (l == ">=") return Infix{6, ExprKind::Compare, BinaryOp::Add, CompareOp::Ge};
        if (l == "+") return Infix{7, ExprKind::Binary, BinaryOp::Add};
        if (l == "-") return Infix{7, ExprKind::Binary, BinaryOp::Sub};
        if (l == "*") return Infix{8, ExprKind::Binary, BinaryOp::Mul};
        if (l == "/") return Infix{8, ExprKind::Binary, BinaryOp::IntDiv};
        if (l == "%") return Infix{8, ExprKind::Binary, BinaryOp::Mod};
        return std::nullopt;
    }

    ExprPtr binary(int min_power) {
        auto left = prefix();
        while (true) {
            auto op = infix();
            if (!op || op->power <= min_power) break;
            const Token t = advance();
            skip_newlines_after_operator();
            auto e = node(op->kind, t);
            e->binary_op = op->op;
            e->compare_op = op->cmp;
            e->object = std::move(left);
            e->right = binary(op->power);
            left = std::move(e);
        }
        return left;
    }

    void skip_newlines_after_operator() {
        while (at(TokenKind::Newline)) advance();
    }

    ExprPtr prefix() {
        if (at_keyword("not")) {
            auto e = node(ExprKind::Not, advance());
            e->object = binary(2);
            return e;
        }
        if (at_op("!")) {
            auto e = node(ExprKind::Not, advance());
            e->object = binary(8);
            return e;
        }
        if (at_op("-")) {
            auto e = node(ExprKind::Unary, advance());
            e->object = binary(8);
            return e;
        }
        return postfix(primary());
    }

    bool adjacent(const Token& a, const Token& b) const { return a.line == b.line && a.end == b.start; }

    /// Whether `next`, following `name` on the same line with a space in
    /// between, starts the argument list of a parenthesis-free call.
    bool starts_command_argument(const Token& name, const Token& next, const Token& after) const {
        if (next.line != name.line || next.start <= name.end) return false;
        switch (next.kind) {
        case TokenKind::Number:
        case TokenKind::Text:
        case TokenKind::IVar:
        case TokenKind::Constant:
        case TokenKind::Identifier: return true;
        case TokenKind::Keyword:
            return next.lexeme == "nil" || next.lexeme == "true" || next.lexeme == "false" || next.lexeme == "self" ||
                   next.lexeme == "not";
        case TokenKind::Punctuation: return next.lexeme == "[" || next.lexeme == "(";
        case TokenKind::Operator: return (next.lexeme == "-" || next.lexeme == "!") && adjacent(next, after);
        default: return false;
        }
    }

    std::vector<ExprPtr> command_arguments() {
        std::vector<ExprPtr> args;
        args.push_back(expression());
        while (at_punct(",")) {
            advance();
            skip_newlines_after_operator();
            args.push_back(expression());
        }
        return args;
    }

    std::vector<ExprPtr> paren_arguments(std::string_view close) {
        std::vector<ExprPtr> items;
        while (!at_punct(close)) {
            items.push_back(expression());
            if (!at_punct(",")) break;
            advance();
        }
        expect(TokenKind::Punctuation, close);
        return items;
    }

    ExprPtr call_of(const Token& t, ExprPtr callee, std::vector<ExprPtr> args) {
        auto call = node(ExprKind::Call, t);
        call->object = std::move(callee);
        call->args = std::move(args);
        return call;
    }

    ExprPtr postfix(ExprPtr e) {
        while (true) {
            if (at_punct(".")) {
                const Token dot = advance();
                skip_newlines_after_operator();
                const Token name = peek();
                if (name.kind != TokenKind::Identifier && name.kind != TokenKind::Constant &&
                    name.kind != TokenKind::Keyword) {
                    unexpected();
                }
                advance();
                std::vector<ExprPtr> args;
                if (at_punct("(") && adjacent(name, peek())) {
                    advance();
                    args = paren_arguments(")");
                } else if (starts_command_argument(name, peek(), peek(1))) {
                    args = command_arguments();
                }
                auto call = node(name.lexeme == "new" ? ExprKind::New : ExprKind::MethodCall, dot);
                call->name = name.lexeme;
                call->object = std::move(e);
                call->args = std::move(args);
                e = std::move(call);
            } else if (at_punct("[")) {
                const Token t = advance();
                auto index = node(ExprKind::Index, t);
                index->object = std::move(e);
                index->right = expression();
                expect(TokenKind::Punctuation, "]");
                e = std::move(index);
            } else {
                return e;
            }
        }
    }

    ExprPtr identifier() {
        const Token t = advance();
        called_with_parens_ = false;
        auto name = node(ExprKind::Name, t);
        name->name = t.lexeme;
        if (at_punct("(") && adjacent(t, peek())) {
            advance();
            auto args = paren_arguments(")");
            called_with_parens_ = true;
            return call_of(t, std::move(name), std::move(args));
        }
        if (local(t.lexeme)) return name;
        if (starts_command_argument(t, peek(), peek(1))) return call_of(t, std::move(name), command_arguments());
        return call_of(t, std::move(name), {});
    }

    ExprPtr primary() {
        const Token t = peek();
        switch (t.kind) {
        case TokenKind::Number: {
            advance();
            auto e = node(ExprKind::Literal, t);
            std::string digits;
            for (char c : t.lexeme) {
                if (c != '_') digits += c;
            }
            if (digits.find_first_of(".eE") != std::string::npos) {
                e->literal = Value::real(std::strtod(digits.c_str(), nullptr));
            } else {
                e->literal = Value::integer(BigInt(digits));
            }
            return e;
        }
        case TokenKind::Text: {
            advance();
            auto inner = std::string_view(t.lexeme).substr(1, t.lexeme.size() - 2);
            if (t.lexeme.front() == '\'') {
                auto e = node(ExprKind::Literal, t);
                e->literal = Value::text(single_quoted(inner));
                return e;
            }
            return interpolated(t, inner);
        }
        case TokenKind::IVar: {
            advance();
            auto e = node(ExprKind::IVar, t);
            e->name = t.lexeme;
            return e;
        }
        case TokenKind::Constant: {
            advance();
            auto e = node(ExprKind::Name, t);
            e->name = t.lexeme;
            return e;
        }
        case TokenKind::Identifier: return identifier();
        case TokenKind::Keyword:
            if (t.lexeme == "nil" || t.lexeme == "true" || t.lexeme == "false") {
                advance();
                auto e = node(ExprKind::Literal, t);
                e->literal = t.lexeme == "nil" ? Value::nil() : Value::boolean(t.lexeme == "true");
                return e;
            }
            if (t.lexeme == "self") {
                advance();
                return node(ExprKind::Self, t);
            }
            break;
        case TokenKind::Punctuation:
            if (t.lexeme == "(") {
                advance();
                auto e = expression();
                expect(TokenKind::Punctuation, ")");
                return e;
            }
            if (t.lexeme == "[") {
                advance();
                auto e = node(ExprKind::ListLit, t);
                e->args = paren_arguments("]");
                return e;
            }
            break;
        default: break;
        }
        unexpected();
    }

    /// Double-quoted text with `#{...}` segments, lowered to concatenation
    /// of `to_s` results.
    ExprPtr interpolated(const Token& t, std::string_view body) {
        std::vector<ExprPtr> parts;
        std::string pending;
        std::size_t i = 0;
        auto flush = [&] {
            auto e = node(ExprKind::Literal, t);
            e->literal = Value::text(unescape(pending));
            parts.push_back(std::move(e));
            pending.clear();
        };
        while (i < body.size()) {
            if (body[i] == '\\' && i + 1 < body.size()) {
                pending += body.substr(i, 2);
                i += 2;
                continue;
            }
            if (body[i] == '#' && i + 1 < body.size() && body[i + 1] == '{') {
                const auto close = body.find('}', i + 2);
                if (close == std::string_view::npos) fail(t, "unterminated string interpolation");
                if (!pending.empty()) flush();
                auto tokens = tokenize(body.substr(i + 2, close - i - 2));
                for (auto& tok : tokens) {
                    tok.line = t.line;
                    tok.start += t.start + 1 + static_cast<int>(i) + 2;
                    tok.end += t.start + 1 + static_cast<int>(i) + 2;
                }
                Parser sub(std::move(tokens), scopes_);
                auto value = sub.lone_expression();
                auto to_s = node(ExprKind::MethodCall, t);
                to_s->name = "to_s";
                to_s->object = std::move(value);
                parts.push_back(std::move(to_s));
                i = close + 1;
                continue;
            }
            pending += body[i++];
        }
        if (!pending.empty() || parts.empty()) flush();
        ExprPtr result = std::move(parts.front());
        for (std::size_t k = 1; k < parts.size(); ++k) {
            auto add = node(ExprKind::Binary, t);
            add->binary_op = BinaryOp::Add;
            add->object = std::move(result);
            add->right = std::move(parts[k]);
            result = std::move(add);
        }
        return result;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int last_line_ = 1;
    std::vector<Scope>& scopes_;
    bool called_with_parens_ = false;
};

}  // namespace

Module parse(std::string_view source, const std::vector<std::string>& predeclared) {
    std::vector<Scope> scopes(1);
    for (const auto& name : predeclared) scopes.front().insert(name);
    return Parser(tokenize(source), scopes).module();
}

}  // namespace polyvm::minirb
