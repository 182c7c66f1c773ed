#pragma once

#include <string>
#include <string_view>

#include "polyvm/frontend/ast.hpp"
#include "polyvm/kernel/isa.hpp"

namespace polyvm::frontend {

struct CodegenOptions {
    LangId language;
    std::string root_name;
    /// Full source text; function units keep the slice they were defined by.
    std::string_view source;
    /// Methods take the receiver as an explicit first parameter.
    bool methods_bind_self = false;
    /// A function body's trailing expression statement is its result.
    bool implicit_return = false;
    /// Top-level definitions are methods.
    bool top_level_methods = false;
};

/// Lowers a parsed module to a code unit. Throws CompileError for
/// constructs that are syntactically fine but cannot be compiled (a `break`
/// outside a loop, `return` at top level, ...).
kernel::CodePtr generate(const Module& module, const CodegenOptions& options);

/// Lines [first, last] of `source`, dedented by the indentation of `first`.
std::string slice_lines(std::string_view source, int first, int last);

}  // namespace polyvm::frontend
