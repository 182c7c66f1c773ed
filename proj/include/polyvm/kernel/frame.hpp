#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyvm/kernel/isa.hpp"
#include "polyvm/object_space.hpp"

namespace polyvm::kernel {

/// One entry of a frame's handler stack, pushed by SETUP_HANDLER.
struct HandlerBlock {
    std::size_t handler_ip = 0;
    /// Exact class name to match; empty means catch-all.
    std::optional<std::string> class_name;
    HandlerKind kind = HandlerKind::Rescue;
    /// Operand stack depth when the block was entered; restored on entry to
    /// the handler.
    std::size_t stack_depth = 0;

    bool catches(std::string_view exception_class) const {
        // the guest languages have no exception hierarchy beyond their root classes
        return kind == HandlerKind::Rescue && (!class_name || *class_name == exception_class ||
                                               *class_name == "Exception" || *class_name == "StandardError");
    }
};

enum class ReturnMode : std::uint8_t {
    Value,
    /// Initializer activation: the caller receives self, not the return value.
    Constructor,
};

/// One activation. Frames live on an explicit stack owned by a process; the
/// interpreter never recurses on the host stack.
struct Frame {
    CodePtr code;
    std::size_t ip = 0;
    ScopePtr locals;
    /// Module scope the code was defined in. Identical to `locals` for a root frame.
    ScopePtr globals;
    std::vector<Value> stack;
    std::vector<HandlerBlock> handlers;
    std::optional<Value> self_object;
    LangId language;

    /// Bindings at activation time, reused when the frame is restarted.
    std::vector<std::pair<std::string, Value>> arguments;
    /// The function object this frame activates (absent for root code).
    std::optional<ObjectRef> function;
    ReturnMode return_mode = ReturnMode::Value;
    /// Set on the bottom frame of a nested foreign activation: the return
    /// value is converted toward this language.
    std::optional<LangId> convert_result_to;

    int line() const { return code->line_at(ip); }
};

using FrameStack = std::vector<Frame>;

/// Fresh activation of `code` with the given bindings; root code gets one
/// scope serving as both locals and globals unless `globals` is supplied.
Frame make_frame(CodePtr code, std::vector<std::pair<std::string, Value>> bindings, ScopePtr globals = nullptr);

}  // namespace polyvm::kernel
