#include <cstdlib>

#include "polyvm/errors.hpp"
#include "polyvm/frontend/text.hpp"
#include "polyvm/minipy/minipy.hpp"

namespace polyvm::minipy {

using namespace frontend;
using kernel::BinaryOp;
using kernel::CompareOp;

namespace {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) {
        for (auto& t : tokens) {
            if (t.kind != TokenKind::Comment) tokens_.push_back(std::move(t));
        }
    }

    Module module() {
        Module m;
        while (!at(TokenKind::End)) {
            if (accept(TokenKind::Newline)) continue;
            if (at(TokenKind::Indent)) fail(peek(), "unexpected indent");
            m.body.push_back(statement());
        }
        return m;
    }

private:
    // -- token helpers -------------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        const auto i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    bool at(TokenKind kind) const { return peek().kind == kind; }
    bool at(TokenKind kind, std::string_view lexeme) const { return at(kind) && peek().lexeme == lexeme; }
    bool at_keyword(std::string_view k) const { return at(TokenKind::Keyword, k); }
    bool at_punct(std::string_view p) const { return at(TokenKind::Punctuation, p); }
    bool at_op(std::string_view o) const { return at(TokenKind::Operator, o); }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (t.kind == TokenKind::Error) fail(t, "invalid syntax near '" + t.lexeme + "'");
        if (pos_ + 1 < tokens_.size()) ++pos_;
        if (!t.synthetic() && t.kind != TokenKind::Newline) last_line_ = t.line;
        return t;
    }

    bool accept(TokenKind kind) {
        if (!at(kind)) return false;
        advance();
        return true;
    }

    [[noreturn]] static void fail(const Token& t, const std::string& message) {
        throw SyntaxError(t.line, t.start + 1, message);
    }

    [[noreturn]] void unexpected() const {
        const auto& t = peek();
        if (t.kind == TokenKind::Error) fail(t, "invalid syntax near '" + t.lexeme + "'");
        if (t.kind == TokenKind::End) fail(t, "unexpected end of input");
        if (t.kind == TokenKind::Newline) fail(t, "unexpected end of line");
        if (t.kind == TokenKind::Indent) fail(t, "unexpected indent");
        if (t.kind == TokenKind::Dedent) fail(t, "unexpected dedent");
        fail(t, "unexpected '" + t.lexeme + "'");
    }

    const Token& expect(TokenKind kind, std::string_view lexeme = {}) {
        if (!at(kind) || (!lexeme.empty() && peek().lexeme != lexeme)) {
            if (!lexeme.empty()) {
                const auto& t = peek();
                if (t.kind == TokenKind::Error) unexpected();
                fail(t, "expected '" + std::string(lexeme) + "'");
            }
            unexpected();
        }
        return advance();
    }

    std::string identifier() { return expect(TokenKind::Identifier).lexeme; }

    // -- statements ----------------------------------------------------------

    StmtPtr statement() {
        const auto& t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "if") return if_stmt();
            if (t.lexeme == "while") return while_stmt();
            if (t.lexeme == "for") return for_stmt();
            if (t.lexeme == "def") return def_stmt();
            if (t.lexeme == "class") return class_stmt();
            if (t.lexeme == "try") return try_stmt();
        }
        auto s = simple();
        if (!accept(TokenKind::Newline)) {
            if (!at(TokenKind::End)) unexpected();
        }
        return s;
    }

    StmtPtr make(StmtKind kind, const Token& t) { return std::make_unique<Stmt>(kind, t.line, t.start + 1); }

    StmtPtr simple() {
        const Token t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "pass") return finish(make(StmtKind::Pass, advance()));
            if (t.lexeme == "break") return finish(make(StmtKind::Break, advance()));
            if (t.lexeme == "continue") return finish(make(StmtKind::Continue, advance()));
            if (t.lexeme == "return") {
                auto s = make(StmtKind::Return, advance());
                if (!at(TokenKind::Newline) && !at(TokenKind::End)) s->value = expression();
                return finish(std::move(s));
            }
            if (t.lexeme == "raise") {
                auto s = make(StmtKind::Raise, advance());
                s->value = expression();
                return finish(std::move(s));
            }
        }
        auto e = expression();
        if (at_op("=")) {
            advance();
            check_target(*e);
            auto s = make(StmtKind::Assign, t);
            s->target = std::move(e);
            s->value = expression();
            return finish(std::move(s));
        }
        static const std::pair<std::string_view, BinaryOp> aug[] = {
            {"+=", BinaryOp::Add}, {"-=", BinaryOp::Sub}, {"*=", BinaryOp::Mul},
            {"/=", BinaryOp::Div}, {"%=", BinaryOp::Mod}};
        for (const auto& [lexeme, op] : aug) {
            if (at_op(lexeme)) {
                advance();
                check_target(*e);
                auto s = make(StmtKind::AugAssign, t);
                s->aug_op = op;
                s->target = std::move(e);
                s->value = expression();
                return finish(std::move(s));
            }
        }
        auto s = make(StmtKind::Expr, t);
        s->value = std::move(e);
        return finish(std::move(s));
    }

    StmtPtr finish(StmtPtr s) {
        s->end_line = last_line_;
        return s;
    }

    void check_target(const Expr& e) const {
        if (e.kind != ExprKind::Name && e.kind != ExprKind::Attribute && e.kind != ExprKind::Index) {
            throw SyntaxError(e.line, e.column, "cannot assign to expression");
        }
    }

    Block suite() {
        expect(TokenKind::Punctuation, ":");
        Block body;
        if (!at(TokenKind::Newline)) {
            body.push_back(simple());
            if (!accept(TokenKind::Newline) && !at(TokenKind::End)) unexpected();
            return body;
        }
        advance();
        while (accept(TokenKind::Newline)) {
        }
        if (!at(TokenKind::Indent)) fail(peek(), "expected an indented block");
        advance();
        while (!at(TokenKind::Dedent) && !at(TokenKind::End)) {
            if (accept(TokenKind::Newline)) continue;
            if (at(TokenKind::Indent)) fail(peek(), "unexpected indent");
            body.push_back(statement());
        }
        accept(TokenKind::Dedent);
        return body;
    }

    StmtPtr if_stmt() {
        auto s = make(StmtKind::If, advance());
        s->value = expression();
        s->body = suite();
        if (at_keyword("elif")) {
            s->orelse.push_back(if_stmt());
        } else if (at_keyword("else")) {
            advance();
            s->orelse = suite();
        }
        return finish(std::move(s));
    }

    StmtPtr while_stmt() {
        auto s = make(StmtKind::While, advance());
        s->value = expression();
        s->body = suite();
        return finish(std::move(s));
    }

    StmtPtr for_stmt() {
        auto s = make(StmtKind::For, advance());
        s->name = identifier();
        expect(TokenKind::Keyword, "in");
        s->value = expression();
        s->body = suite();
        return finish(std::move(s));
    }

    StmtPtr def_stmt() {
        auto s = make(StmtKind::FuncDef, advance());
        s->name = identifier();
        expect(TokenKind::Punctuation, "(");
        if (!at_punct(")")) {
            do {
                if (at_punct(")")) break;
                auto p = identifier();
                for (const auto& q : s->params) {
                    if (q == p) fail(peek(), "duplicate argument '" + p + "' in function definition");
                }
                s->params.push_back(std::move(p));
            } while (at_punct(",") && (advance(), true));
        }
        expect(TokenKind::Punctuation, ")");
        s->body = suite();
        return finish(std::move(s));
    }

    StmtPtr class_stmt() {
        auto s = make(StmtKind::ClassDef, advance());
        s->name = identifier();
        if (at_punct("(")) {
            advance();
            expect(TokenKind::Punctuation, ")");
        }
        s->body = suite();
        return finish(std::move(s));
    }

    StmtPtr try_stmt() {
        auto s = make(StmtKind::Try, advance());
        s->body = suite();
        while (at_keyword("except")) {
            const auto& t = advance();
            if (!s->clauses.empty() && !s->clauses.back().class_name) fail(t, "default 'except:' must be last");
            ExceptClause clause;
            clause.line = t.line;
            if (!at_punct(":")) {
                clause.class_name = identifier();
                if (at_keyword("as")) {
                    advance();
                    clause.bind_name = identifier();
                }
            }
            clause.body = suite();
            s->clauses.push_back(std::move(clause));
        }
        if (at_keyword("finally")) {
            advance();
            s->finally_body = suite();
        }
        if (s->clauses.empty() && !s->finally_body) fail(peek(), "expected 'except' or 'finally' block");
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
            if (t.lexeme == "and") return Infix{2, ExprKind::And};
            return std::nullopt;
        }
        if (t.kind != TokenKind::Operator) return std::nullopt;
        const auto& l = t.lexeme;
        if (l == "==") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Eq};
        if (l == "!=") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Ne};
        if (l == "<") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Lt};
        if (l == "<=") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Le};
        if (l == ">") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Gt};
        if (l == ">=") return Infix{4, ExprKind::Compare, BinaryOp::Add, CompareOp::Ge};
        if (l == "+") return Infix{5, ExprKind::Binary, BinaryOp::Add};
        if (l == "-") return Infix{5, ExprKind::Binary, BinaryOp::Sub};
        if (l == "*") return Infix{6, ExprKind::Binary, BinaryOp::Mul};
        if (l == "/") return Infix{6, ExprKind::Binary, BinaryOp::Div};
        if (l == "%") return Infix{6, ExprKind::Binary, BinaryOp::Mod};
        return std::nullopt;
    }

    ExprPtr binary(int min_power) {
        auto left = prefix();
        while (true) {
            auto op = infix();
            if (!op || op->power <= min_power) break;
            const Token t = advance();
            auto e = node(op->kind, t);
            e->binary_op = op->op;
            e->compare_op = op->cmp;
            e->object = std::move(left);
            e->right = binary(op->power);
            if (op->kind == ExprKind::Compare) {
                if (auto next = infix(); next && next->kind == ExprKind::Compare) {
                    fail(peek(), "chained comparisons are not supported");
                }
            }
            left = std::move(e);
        }
        return left;
    }

    ExprPtr prefix() {
        if (at_keyword("not")) {
            auto e = node(ExprKind::Not, advance());
            e->object = binary(3);
            return e;
        }
        if (at_op("-")) {
            auto e = node(ExprKind::Unary, advance());
            e->object = binary(6);
            return e;
        }
        return postfix(primary());
    }

    ExprPtr postfix(ExprPtr e) {
        while (true) {
            if (at_punct("(")) {
                const Token t = advance();
                auto call = node(ExprKind::Call, t);
                call->line = e->line;
                call->column = e->column;
                call->object = std::move(e);
                call->args = arguments(")");
                e = std::move(call);
            } else if (at_punct(".")) {
                const Token t = advance();
                auto name = identifier();
                if (at_punct("(")) {
                    advance();
                    auto call = node(ExprKind::MethodCall, t);
                    call->name = std::move(name);
                    call->object = std::move(e);
                    call->args = arguments(")");
                    e = std::move(call);
                } else {
                    auto attr = node(ExprKind::Attribute, t);
                    attr->name = std::move(name);
                    attr->object = std::move(e);
                    e = std::move(attr);
                }
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

    /// Comma-separated expressions up to `close`; the opener is consumed.
    std::vector<ExprPtr> arguments(std::string_view close) {
        std::vector<ExprPtr> items;
        while (!at_punct(close)) {
            items.push_back(expression());
            if (!at_punct(",")) break;
            advance();
        }
        expect(TokenKind::Punctuation, close);
        return items;
    }

    ExprPtr primary() {
        const Token t = peek();
        switch (t.kind) {
        case TokenKind::Number: {
            advance();
            auto e = node(ExprKind::Literal, t);
            if (t.lexeme.find_first_of(".eE") != std::string::npos) {
                e->literal = Value::real(std::strtod(t.lexeme.c_str(), nullptr));
            } else {
                e->literal = Value::integer(BigInt(t.lexeme));
            }
            return e;
        }
        case TokenKind::Text: {
            advance();
            auto e = node(ExprKind::Literal, t);
            e->literal = Value::text(unescape(std::string_view(t.lexeme).substr(1, t.lexeme.size() - 2)));
            return e;
        }
        case TokenKind::Identifier: {
            advance();
            auto e = node(ExprKind::Name, t);
            e->name = t.lexeme;
            return e;
        }
        case TokenKind::Keyword:
            if (t.lexeme == "True" || t.lexeme == "False" || t.lexeme == "None") {
                advance();
                auto e = node(ExprKind::Literal, t);
                e->literal = t.lexeme == "None" ? Value::nil() : Value::boolean(t.lexeme == "True");
                return e;
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
                e->args = arguments("]");
                return e;
            }
            break;
        default: break;
        }
        unexpected();
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int last_line_ = 1;
};

}  // namespace

Module parse(std::string_view source) { return Parser(tokenize(source)).module(); }

}  // namespace polyvm::minipy
