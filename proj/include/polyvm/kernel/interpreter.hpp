#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "polyvm/kernel/builtin.hpp"
#include "polyvm/kernel/frame.hpp"

namespace polyvm::kernel {

struct Yielded {};
struct Completed {
    Value value;
};
/// The process ended with an exception, after the debugger proceeded past it.
struct Failed {
    ExceptionValue exception;
};
/// Unhandled exception. The frame stack is exactly as it was when the raising
/// instruction started.
struct Trapped {
    ExceptionValue exception;
};
struct Blocked {
    Clock::time_point wake;
};

using StepOutcome = std::variant<Yielded, Completed, Failed, Trapped, Blocked>;

struct StepResult {
    StepOutcome outcome;
    /// Instructions dispatched, including one that raised.
    std::uint64_t executed = 0;
};

/// Runs at most `budget` instructions of the top frames. Re-entering after
/// Yielded or Blocked continues at the saved instruction index.
StepResult step(ExecutionContext& context, FrameStack& frames, std::uint64_t budget);

struct HandlerLocation {
    /// Frame position counted from the bottom (0 = root).
    std::size_t frame = 0;
    /// Position in that frame's handler stack.
    std::size_t handler = 0;
    std::size_t handler_ip = 0;
};

/// Innermost Rescue block that catches `class_name`. Ensure blocks are not handlers.
std::optional<HandlerLocation> find_handler(const FrameStack& frames, std::string_view class_name);

struct Unwound {
    std::size_t frame = 0;
    std::size_t handler_ip = 0;
};

using RaiseResult = std::variant<Unwound, Trapped, Failed>;

/// Decides, before touching the stack, whether a handler exists. With a
/// handler, unwinds to the innermost Ensure block or the handler itself
/// (whichever comes first) and enters it with the exception pushed.
/// Without one, the stack is left untouched and the result is Trapped; in
/// force-unwind mode Ensure blocks are entered instead and the result is
/// Failed once none are left.
RaiseResult raise_exception(ExecutionContext& context, FrameStack& frames, ExceptionValue exception);

/// Values equal under guest `==` semantics (Int 1 == Float 1.0, lists element-wise).
bool values_equal(const Value& a, const Value& b);

/// Calls a callable value from `caller`. Converts arguments and result when
/// the callee belongs to another language.
BuiltinResult call_value(ExecutionContext& context, const FrameStack& frames, const Value& callee,
                         std::span<const Value> args, LangId caller);

/// Sends `selector` to `receiver` from `caller`.
BuiltinResult invoke_method(ExecutionContext& context, const FrameStack& frames, const Value& receiver,
                            std::string_view selector, std::span<const Value> args, LangId caller);

}  // namespace polyvm::kernel
