#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "polyvm/value.hpp"

/// Formatting and parsing helpers both guest languages share.
namespace polyvm::frontend {

enum class FloatStyle { Python, Ruby };

/// Shortest round-trip representation with the language's exponent rules.
std::string format_float(double value, FloatStyle style);

/// `text` inside `quote` characters with backslash escapes.
std::string quote_text(std::string_view text, char quote);

/// Parses a decimal integer literal with optional sign and surrounding
/// whitespace.
std::optional<BigInt> parse_int(std::string_view text);
std::optional<double> parse_float(std::string_view text);

/// Splits on runs of whitespace (no separator) or on every occurrence of
/// `separator`.
List split_text(std::string_view text, const std::optional<std::string>& separator);

/// Resolves backslash escapes of a quoted literal's body.
std::string unescape(std::string_view body);

std::string lower_ascii(std::string_view text);
std::string strip_whitespace(std::string_view text);

}  // namespace polyvm::frontend
