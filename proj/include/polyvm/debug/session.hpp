#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyvm/vm/vm.hpp"

namespace polyvm::debug {

using SessionId = std::uint64_t;

struct DebugSession {
    SessionId id = 0;
    vm::DebugEvent event;
    /// Counted from the top of the stack.
    std::size_t selected_frame = 0;
    bool open = true;
    /// The exception is gone once a frame was restarted; proceed then resumes.
    bool restarted = false;

    bool steppable() const { return event.kind == vm::DebugEvent::Kind::UserInterrupt || restarted; }
};

struct InspectView {
    std::string class_name;
    std::string display;
    std::vector<std::pair<std::string, Value>> slots;
    std::string viewer_language;
};

/// Works for every value: references go through the MOP, everything else
/// gets a neutral class name and, for lists, one slot per element.
InspectView inspect_value(const Runtime& runtime, const Value& value, LangId viewer);

struct ProceedOutcome {
    /// Present when the process ended during proceed (exception unwound to
    /// the bottom with no Ensure block left to run).
    std::optional<vm::Termination> termination;
};

/// One session per trapped process. Must be used on the VM lane.
class SessionManager {
public:
    explicit SessionManager(vm::Vm& vm);
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    DebugSession& on_trap(const vm::DebugEvent& event);

    const DebugSession& session(SessionId id) const;
    std::optional<SessionId> session_for(vm::Pid pid) const;
    std::vector<SessionId> open_sessions() const;

    std::vector<kernel::FrameView> stack(SessionId id) const;
    kernel::FrameView frame(SessionId id, std::size_t index) const;

    ProceedOutcome proceed(SessionId id);
    std::vector<kernel::FrameView> restart(SessionId id, std::size_t index, const std::optional<std::string>& source);
    std::vector<kernel::FrameView> step_over(SessionId id);
    Value eval_in_frame(SessionId id, std::size_t index, std::string_view source);

    /// Called for every new session.
    std::function<void(const DebugSession&)> on_session;

    /// Instruction ceiling for one step_over.
    static constexpr std::uint64_t kStepLimit = 10'000'000;

private:
    DebugSession& open(SessionId id);
    std::size_t bottom_index(const DebugSession& s, std::size_t index) const;
    void refresh(DebugSession& s);

    vm::Vm& vm_;
    std::map<SessionId, DebugSession> sessions_;
    SessionId next_id_ = 1;
    std::size_t listener_ = 0;
};

}  // namespace polyvm::debug
