#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyvm/kernel/interpreter.hpp"
#include "polyvm/runtime.hpp"

namespace polyvm::bridge {

/// Guest exception class for source handed to xeval that does not compile.
inline constexpr std::string_view kForeignCompileError = "ForeignCompileError";
/// Local name the argument of xeval and the previous pipeline value are bound to.
inline constexpr std::string_view kArgumentName = "it";

/// Installs the `xeval(language, source[, argument])` builtin in every language.
void install(Runtime& runtime);

/// The xeval builtin itself. Returns a frame for the target language; the
/// interpreter pushes it onto the calling process's stack.
kernel::BuiltinResult xeval(kernel::BuiltinCall& call);

/// Host-side message send to an object of any language, on a scratch stack.
/// Arguments and result cross the boundary under `policy`.
/// Throws NoSuchMethod, StaleHandle or EvaluationError.
Value cross_invoke(Runtime& runtime, std::string& transcript, const Value& target, std::string_view selector,
                   std::span<const Value> args, LangId caller, const ConversionPolicy& policy);

struct PipelineCell {
    std::string language;
    std::string source;
};

class PipelineFormatError : public VmError {
public:
    PipelineFormatError(int line, const std::string& message)
        : VmError("bad_params", "line " + std::to_string(line) + ": " + message) {}
};

/// Cells separated by `--- <language>` lines. Text before the first
/// separator is a header and ignored.
std::vector<PipelineCell> parse_pipeline(std::string_view text);

}  // namespace polyvm::bridge
