#include <array>
#include <cctype>

#include "polyvm/minipy/minipy.hpp"

namespace polyvm::minipy {

namespace {

constexpr std::array kKeywords{"False", "None",   "True",  "and",  "as",    "break", "class",
                               "continue", "def", "elif",  "else", "except", "finally", "for",
                               "if",    "in",     "not",   "or",   "pass",  "raise", "return",
                               "try",   "while"};

bool is_keyword(std::string_view word) {
    for (auto k : kKeywords) {
        if (word == k) return true;
    }
    return false;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
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
        const int last = line > 1 && !src_.empty() && src_.back() == '\n' ? line - 1 : line;
        const int eof_line = src_.empty() ? 1 : last;
        if (!logical_open_.empty() || depth_ > 0) {
            // Unclosed bracket at end of input: close the logical line anyway.
            push(TokenKind::Newline, "", eof_line, 0, 0);
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "", eof_line, 0, 0);
        }
        push(TokenKind::End, "", eof_line, 0, 0);
        return std::move(tokens_);
    }

private:
    void push(TokenKind kind, std::string lexeme, int line, int start, int end) {
        tokens_.push_back(Token{kind, std::move(lexeme), line, start, end});
    }

    void scan_line(std::string_view text, int line, bool has_nl) {
        std::size_t i = 0;
        const bool continuation = depth_ > 0;
        if (!continuation) {
            int width = 0;
            while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) {
                width += text[i] == '\t' ? 4 : 1;
                ++i;
            }
            if (i == text.size()) return;  // blank line
            if (text[i] == '#') {
                push(TokenKind::Comment, std::string(text.substr(i)), line, static_cast<int>(i),
                     static_cast<int>(text.size()));
                newline(text, line, has_nl);
                return;
            }
            if (width > indents_.back()) {
                indents_.push_back(width);
                push(TokenKind::Indent, "", line, 0, 0);
            } else {
                while (width < indents_.back()) {
                    indents_.pop_back();
                    push(TokenKind::Dedent, "", line, 0, 0);
                }
                if (width != indents_.back()) {
                    error(text, line, 0);
                    newline(text, line, has_nl);
                    return;
                }
            }
            logical_open_ = "x";
        }
        while (i < text.size()) {
            const char c = text[i];
            const auto start = static_cast<int>(i);
            if (c == ' ' || c == '\t') {
                ++i;
                continue;
            }
            if (c == '#') {
                push(TokenKind::Comment, std::string(text.substr(i)), line, start, static_cast<int>(text.size()));
                break;
            }
            if (ident_start(c)) {
                while (i < text.size() && ident_char(text[i])) ++i;
                auto word = std::string(text.substr(static_cast<std::size_t>(start), i - static_cast<std::size_t>(start)));
                push(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, word, line, start,
                     static_cast<int>(i));
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
                if (!number(text, i, line)) return finish_error(text, line, start, has_nl);
                continue;
            }
            if (c == '"' || c == '\'') {
                if (!string(text, i, line)) return finish_error(text, line, start, has_nl);
                continue;
            }
            static constexpr std::array two{"==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%="};
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
            if (std::string_view("+-*/%<>=").find(c) != std::string_view::npos) {
                push(TokenKind::Operator, std::string(1, c), line, start, start + 1);
                ++i;
                continue;
            }
            if (std::string_view("()[],:.").find(c) != std::string_view::npos) {
                if (c == '(' || c == '[') ++depth_;
                if ((c == ')' || c == ']') && depth_ > 0) --depth_;
                push(TokenKind::Punctuation, std::string(1, c), line, start, start + 1);
                ++i;
                continue;
            }
            return finish_error(text, line, start, has_nl);
        }
        if (depth_ == 0) newline(text, line, has_nl);
    }

    void finish_error(std::string_view text, int line, int start, bool has_nl) {
        error(text, line, start);
        depth_ = 0;
        newline(text, line, has_nl);
    }

    void error(std::string_view text, int line, int start) {
        push(TokenKind::Error, std::string(text.substr(static_cast<std::size_t>(start))), line, start,
             static_cast<int>(text.size()));
    }

    void newline(std::string_view text, int line, bool has_nl) {
        const auto col = static_cast<int>(text.size());
        push(TokenKind::Newline, has_nl ? "\n" : "", line, col, has_nl ? col + 1 : col);
        logical_open_.clear();
    }

    bool number(std::string_view text, std::size_t& i, int line) {
        const auto start = i;
        bool is_float = false;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i < text.size() && text[i] == '.') {
            is_float = true;
            ++i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            auto j = i + 1;
            if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
            if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                is_float = true;
                i = j;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            } else {
                return false;
            }
        }
        if (i < text.size() && (ident_char(text[i]) || text[i] == '.')) return false;
        (void)is_float;
        push(TokenKind::Number, std::string(text.substr(start, i - start)), line, static_cast<int>(start),
             static_cast<int>(i));
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
        push(TokenKind::Text, std::string(text.substr(start, i - start)), line, static_cast<int>(start),
             static_cast<int>(i));
        return true;
    }

    std::string_view src_;
    std::vector<Token> tokens_;
    std::vector<int> indents_{0};
    int depth_ = 0;
    std::string logical_open_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace polyvm::minipy
