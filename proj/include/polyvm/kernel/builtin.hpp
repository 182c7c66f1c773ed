#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "polyvm/errors.hpp"
#include "polyvm/kernel/frame.hpp"

namespace polyvm {
class Runtime;
}

namespace polyvm::kernel {

using Clock = std::chrono::steady_clock;

/// Per-process state the interpreter needs beyond the frame stack.
struct ExecutionContext {
    Runtime& runtime;
    std::string& transcript;
    Clock::time_point now = Clock::now();
    /// Set after the debugger proceeds past an unhandled exception: raises
    /// without a handler unwind through Ensure blocks instead of trapping.
    bool force_unwind = false;
};

struct BlockUntil {
    Clock::time_point wake;
};

/// What a builtin asks the interpreter to do. A builtin must not touch the
/// frame stack itself; raising leaves every frame untouched.
using BuiltinResult = std::variant<Value, Frame, ExceptionValue, BlockUntil>;

struct BuiltinCall {
    ExecutionContext& context;
    const FrameStack& frames;
    /// Language of the calling frame.
    LangId caller;
    std::span<const Value> args;
};

struct Builtin {
    std::string name;
    std::function<BuiltinResult(BuiltinCall&)> fn;
};

}  // namespace polyvm::kernel
