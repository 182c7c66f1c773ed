#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polyvm/kernel/interpreter.hpp"

namespace polyvm::kernel {

/// One frame as debugging tools see it.
struct FrameView {
    LangId language;
    std::string language_name;
    std::string display_name;
    int line = 1;
    std::string source;
    std::vector<std::pair<std::string, Value>> locals;
    /// Synthetic context entries shown next to the locals.
    std::vector<std::pair<std::string, std::string>> pseudo_entries;
};

/// Top frame first. Frames below the top report the line of the call they
/// are waiting on.
std::vector<FrameView> stack_view(const Runtime& runtime, const FrameStack& frames);

/// Replaces the frame at `index` (counted from the bottom) with a fresh
/// activation, discarding every frame above it without running their Ensure
/// blocks. With `new_source`, the code is recompiled in the frame's language
/// and the function object is patched so later calls use it too.
/// Throws BadIndex, CompileError or ArityChanged; on error nothing changes.
void restart_frame(Runtime& runtime, FrameStack& frames, std::size_t index,
                   const std::optional<std::string>& new_source);

/// Runs a frame stack until it completes, with an instruction ceiling.
/// Sleep requests are ignored. Throws EvaluationError when a guest
/// exception escapes.
Value run_to_completion(ExecutionContext& context, FrameStack& frames, std::uint64_t limit);

inline constexpr std::uint64_t kEvaluationLimit = 50'000'000;

/// Evaluates `source` against the locals, globals and receiver of the frame
/// at `index` (counted from the bottom) on a scratch stack. Writes to locals
/// persist; a raise reports EvaluationError and leaves `frames` untouched.
Value evaluate_in_frame(ExecutionContext& context, const FrameStack& frames, std::size_t index,
                        std::string_view source);

/// Deterministic textual image of a frame stack; equal strings mean equal
/// stacks.
std::string snapshot(const FrameStack& frames);

}  // namespace polyvm::kernel
