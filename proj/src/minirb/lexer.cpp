#include <array>
#include <cctype>

#include "polyvm/minirb/minirb.hpp"

namespace polyvm::minirb {

namespace {

constexpr std::array kKeywords{"and",  "begin", "break", "class", "def",   "do",     "else",   "elsif",
                               "end",  "ensure", "false", "for",  "if",    "in",     "next",   "nil",
                               "not",  "or",    "raise", "rescue", "return", "self", "then",  "true",
                               "while"};

bool is_keyword(std::string_view word) {
    for (auto k : kKeywords) {
        if (word == k) return true;
    }
    return false;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::size_t pos = 0;
        int line = 1;
        while (pos < src_.size()) {
            auto nl = src_.find('\n', pos);
            const bool has_nl = nl != std::string_view::npos;
            if (!has_nl) nl = src_.size();
            auto text = src_.substr(pos, nl - pos);
            if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
            scan_line(text, line, has_nl);
            pos = nl + 1;
            ++line;
        }
        const int eof_line = std::max(1, !src_.empty() && src_.back() == '\n' ? line - 1 : line);
        tokens_.push_back(Token{TokenKind::End, "", eof_line, 0, 0});
        return std::move(tokens_);
    }

private:
    void push(TokenKind kind, std::string lexeme, int line, std::size_t start, std::size_t end) {
        tokens_.push_back(Token{kind, std::move(lexeme), line, static_cast<int>(start), static_cast<int>(end)});
        if (kind != TokenKind::Comment) seen_token_ = true;
    }

    /// A line break ends the statement unless the expression obviously
    /// continues (open bracket, trailing operator or comma).
    bool continues() const {
        if (depth_ > 0) return true;
        if (!seen_token_) return true;
        const auto& t = tokens_[last_index()];
        if (t.kind == TokenKind::Newline) return true;
        if (t.kind == TokenKind::Operator) return true;
        if (t.kind == TokenKind::Punctuation && (t.lexeme == "," || t.lexeme == "." || t.lexeme == ";")) return true;
        return false;
    }

    std::size_t last_index() const {
        for (std::size_t i = tokens_.size(); i-- > 0;) {
            if (tokens_[i].kind != TokenKind::Comment) return i;
        }
        return 0;
    }

    void newline(std::string_view text, int line, bool has_nl) {
        if (continues()) return;
        const auto col = text.size();
        push(TokenKind::Newline, has_nl ? "\n" : "", line, col, has_nl ? col + 1 : col);
    }

    void scan_line(std::string_view text, int line, bool has_nl) {
        std::size_t i = 0;
        while (i < text.size()) {
            const char c = text[i];
            const auto start = i;
            if (c == ' ' || c == '\t') {
                ++i;
                continue;
            }
            if (c == '#') {
                push(TokenKind::Comment, std::string(text.substr(i)), line, start, text.size());
                break;
            }
            if (c == '@') {
                ++i;
                if (i >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
                    return error(text, line, start, has_nl);
                }
                while (i < text.size() && ident_char(text[i])) ++i;
                push(TokenKind::IVar, std::string(text.substr(start, i - start)), line, start, i);
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (i < text.size() && ident_char(text[i])) ++i;
                if (i < text.size() && (text[i] == '?' || text[i] == '!') &&
                    (i + 1 >= text.size() || text[i + 1] != '=')) {
                    ++i;
                }
                auto word = std::string(text.substr(start, i - start));
                TokenKind kind = TokenKind::Identifier;
                if (is_keyword(word)) {
                    kind = TokenKind::Keyword;
                } else if (std::isupper(static_cast<unsigned char>(c))) {
                    kind = TokenKind::Constant;
                }
                push(kind, std::move(word), line, start, i);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                if (!number(text, i, line)) return error(text, line, start, has_nl);
                continue;
            }
            if (c == '"' || c == '\'') {
                if (!string(text, i, line)) return error(text, line, start, has_nl);
                continue;
            }
            static constexpr std::array two{"==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "=>"};
            bool matched = false;
            for (auto op : two) {
                if (text.substr(i, 2) == op) {
                    push(TokenKind::Operator, op, line, start, start + 2);
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (std::string_view("+-*/%<>=!").find(c) != std::string_view::npos) {
                push(TokenKind::Operator, std::string(1, c), line, start, start + 1);
                ++i;
                continue;
            }
            if (std::string_view("()[],.;").find(c) != std::string_view::npos) {
                if (c == '(' || c == '[') ++depth_;
                if ((c == ')' || c == ']') && depth_ > 0) --depth_;
                push(TokenKind::Punctuation, std::string(1, c), line, start, start + 1);
                ++i;
                continue;
            }
            return error(text, line, start, has_nl);
        }
        newline(text, line, has_nl);
    }

    void error(std::string_view text, int line, std::size_t start, bool has_nl) {
        push(TokenKind::Error, std::string(text.substr(start)), line, start, text.size());
        depth_ = 0;
        newline(text, line, has_nl);
    }

    bool number(std::string_view text, std::size_t& i, int line) {
        const auto start = i;
        auto digits = [&] {
            while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                                       (text[i] == '_' && i + 1 < text.size() &&
                                        std::isdigit(static_cast<unsigned char>(text[i + 1]))))) {
                ++i;
            }
        };
        digits();
        if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            ++i;
            digits();
        }
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            auto j = i + 1;
            if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
            if (j >= text.size() || !std::isdigit(static_cast<unsigned char>(text[j]))) return false;
            i = j;
            digits();
        }
        if (i < text.size() && ident_char(text[i])) return false;
        push(TokenKind::Number, std::string(text.substr(start, i - start)), line, start, i);
        return true;
    }

    bool string(std::string_view text, std::size_t& i, int line) {
        const auto start = i;
        const char quote = text[i++];
        while (i < text.size() && text[i] != quote) {
            if (text[i] == '\\') ++i;
            ++i;
        }
        if (i >= text.size()) return false;
        ++i;
        push(TokenKind::Text, std::string(text.substr(start, i - start)), line, start, i);
        return true;
    }

    std::string_view src_;
    std::vector<Token> tokens_;
    bool seen_token_ = false;
    int depth_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace polyvm::minirb
