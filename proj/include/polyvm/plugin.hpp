#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "polyvm/errors.hpp"
#include "polyvm/kernel/builtin.hpp"
#include "polyvm/kernel/isa.hpp"
#include "polyvm/value.hpp"

namespace polyvm {

class Runtime;

/// The capability set every plugin must declare.
inline const std::set<std::string>& required_capabilities() {
    static const std::set<std::string> caps{"compile", "step", "display", "tokenize", "reflect", "invoke"};
    return caps;
}

struct PluginDescriptor {
    std::string id;
    std::string display_name;
    std::string file_extension;
    std::set<std::string> capabilities;
};

/// Boundary conversion rules.
struct ConversionPolicy {
    bool auto_convert = true;
    bool deep_lists = true;
    friend bool operator==(const ConversionPolicy&, const ConversionPolicy&) = default;
};

/// Reflective view of one object as the inspector shows it.
struct MopView {
    std::string class_name;
    std::string display;
    std::vector<std::pair<std::string, Value>> slots;
};

enum class TokenKind : std::uint8_t {
    Keyword,
    Identifier,
    IVar,
    Constant,
    Number,
    Text,
    Operator,
    Punctuation,
    Comment,
    Indent,
    Dedent,
    Newline,
    Error,
    End,
};

std::string_view token_kind_name(TokenKind kind);

/// A lexical token. `line` is 1-based, columns are 0-based with `end`
/// exclusive (byte offsets within the line).
struct Token {
    TokenKind kind;
    std::string lexeme;
    int line = 1;
    int start = 0;
    int end = 0;

    bool synthetic() const {
        return kind == TokenKind::Indent || kind == TokenKind::Dedent || kind == TokenKind::End ||
               (kind == TokenKind::Newline && start == end);
    }
};

struct CompileOptions {
    /// Names bound before the code runs (process bindings, REPL scope,
    /// debugger frame locals). Languages that resolve bare identifiers
    /// statically need them.
    std::vector<std::string> predeclared;
    /// Compile top-level definitions as methods (recompiling a method body
    /// for frame restart).
    bool methods = false;
};

/// Conditions the kernel raises as guest exceptions; each language decides
/// the class name and wording.
enum class ErrorKind {
    UndefinedName,     // {name}
    NoSuchMethod,      // {type, selector}
    NoSuchAttribute,   // {type, name}
    Arity,             // {function, expected, given}
    OperandTypes,      // {op, left type, right type}
    UnaryOperandType,  // {op, type}
    Comparison,        // {op, left type, right type}
    NotCallable,       // {type}
    NotIterable,       // {type}
    IndexOutOfRange,   // {type, index[, "store"]}
    IndexType,         // {type}
    NotSubscriptable,  // {type}
    IntegerDivision,   // {}
    IntegerModulo,     // {}
    FloatDivision,     // {}
    BadRaise,          // {type}
    ValueError,        // {message}
};

/// The contract a guest language implements. The kernel (`step`) is shared;
/// a plugin supplies front end, display, builtins and surface semantics.
class LanguagePlugin {
public:
    virtual ~LanguagePlugin() = default;

    virtual PluginDescriptor descriptor() const = 0;

    /// Throws SyntaxError / CompileError.
    virtual kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options) const = 0;
    virtual std::vector<Token> tokenize(std::string_view source) const = 0;

    /// Canonical display (printIt, inspector title).
    virtual std::string display(const Value& value, const Runtime& runtime) const = 0;
    /// Conversion used by str()/to_s and transcript output.
    virtual std::string to_text(const Value& value, const Runtime& runtime) const = 0;
    virtual bool truthy(const Value& value) const = 0;
    /// Language-facing type name used in error messages ("int", "Integer").
    virtual std::string type_name(const Value& value, const Runtime& runtime) const = 0;

    /// Name shown for top-level code units.
    virtual std::string_view root_name() const = 0;
    virtual std::string_view initializer_name() const = 0;
    /// Bare calls fall back to methods of the current receiver.
    virtual bool implicit_self_calls() const = 0;

    virtual ExceptionValue error(ErrorKind kind, const std::vector<std::string>& args) const = 0;
    /// Exception for `raise <value>` where value is not an exception object.
    virtual ExceptionValue exception_for_raised(const Value& value, const Runtime& runtime) const = 0;

    virtual std::vector<std::shared_ptr<const kernel::Builtin>> builtins() const = 0;
    /// Names installed as built-in exception classes.
    virtual std::vector<std::string> exception_classes() const = 0;

    /// Methods on primitive receivers (Text, List, numbers, exceptions).
    /// Returns nullopt when the selector is unknown for this receiver.
    virtual std::optional<kernel::BuiltinResult> call_primitive_method(kernel::BuiltinCall& call,
                                                                       const Value& receiver,
                                                                       std::string_view selector) const = 0;
};

/// Neutral class names used for non-object values ("Int", "Text", ...).
std::string_view neutral_class_name(const Value& value);

}  // namespace polyvm
