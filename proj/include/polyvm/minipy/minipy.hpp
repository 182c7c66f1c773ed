#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "polyvm/frontend/ast.hpp"
#include "polyvm/plugin.hpp"

/// MiniPy: an indentation-structured subset of Python.
namespace polyvm::minipy {

/// Never throws; malformed input becomes Error tokens (at most one per line).
std::vector<Token> tokenize(std::string_view source);

/// Throws SyntaxError at the first problem.
frontend::Module parse(std::string_view source);

kernel::CodePtr compile(std::string_view source, LangId self, const CompileOptions& options);

std::unique_ptr<LanguagePlugin> make_plugin();

}  // namespace polyvm::minipy
