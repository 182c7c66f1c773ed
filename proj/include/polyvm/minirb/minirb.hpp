#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "polyvm/frontend/ast.hpp"
#include "polyvm/plugin.hpp"

/// MiniRb: a keyword-delimited subset of Ruby.
namespace polyvm::minirb {

/// Never throws; malformed input becomes Error tokens (at most one per line).
std::vector<Token> tokenize(std::string_view source);

/// Throws SyntaxError at the first problem. Bare identifiers that are not
/// known locals (assigned earlier, parameters, or `predeclared`) parse as
/// zero-argument calls.
frontend::Module parse(std::string_view source, const std::vector<std::string>& predeclared = {});

kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options);

std::unique_ptr<LanguagePlugin> make_plugin();

}  // namespace polyvm::minirb
