#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "polyvm/kernel/introspection.hpp"
#include "polyvm/runtime.hpp"

namespace polyvm::vm {

using Pid = std::uint64_t;
using kernel::Clock;
using Bindings = std::vector<std::pair<std::string, Value>>;

inline constexpr std::uint64_t kDefaultQuantum = 10'000;

enum class State { Runnable, Running, Suspended, Blocked, Terminated };
std::string_view state_name(State state);

struct DebugEvent {
    enum class Kind { UnhandledException, UserInterrupt };
    Kind kind = Kind::UserInterrupt;
    Pid pid = 0;
    std::optional<ExceptionValue> exception;
    /// Top frame first, captured when the process stopped.
    std::vector<kernel::FrameView> stack;
    std::string title;
};

DebugEvent make_event(const Runtime& runtime, Pid pid, const kernel::FrameStack& frames,
                      std::optional<ExceptionValue> exception);

struct Termination {
    Value value;
    std::optional<ExceptionValue> exception;
    bool failed() const { return exception.has_value(); }
};

struct GreenProcess {
    Pid id = 0;
    LangId language;
    State state = State::Runnable;
    std::optional<DebugEvent> event;
    std::optional<Clock::time_point> wake;
    std::optional<Termination> result;
    kernel::FrameStack frames;
    std::uint64_t consumed = 0;
    /// Scheduling slices this process has been given.
    std::uint64_t quanta = 0;
    std::string transcript;
    bool force_unwind = false;

    int current_line() const { return frames.empty() ? 0 : frames.back().line(); }
};

struct Finished {
    Pid pid = 0;
    Termination result;
};

using VmEvent = std::variant<DebugEvent, Finished>;

struct TickReport {
    std::optional<Pid> ran;
    std::optional<kernel::StepOutcome> outcome;
    std::uint64_t executed = 0;
    std::size_t commands = 0;
    bool idle() const { return !ran; }
};

/// Registers MiniPy, MiniRb and the cross-language builtins.
void install_standard_languages(Runtime& runtime);

/// Green processes plus the round-robin scheduler. Everything except
/// `post` and `total_executed` belongs to the VM lane.
class Vm {
public:
    using Command = std::function<void(Vm&)>;
    using Listener = std::function<void(const VmEvent&)>;

    explicit Vm(std::uint64_t quantum = kDefaultQuantum);
    Vm(const Vm&) = delete;
    Vm& operator=(const Vm&) = delete;

    Runtime& runtime() { return runtime_; }
    const Runtime& runtime() const { return runtime_; }

    /// Throws UnknownLanguage or CompileError.
    Pid spawn(std::string_view language, std::string_view source, const Bindings& bindings = {});
    Pid spawn_code(kernel::CodePtr code, const Bindings& bindings = {});
    Pid spawn_frame(kernel::Frame frame);

    TickReport tick();
    kernel::StepOutcome run_quantum(Pid pid);

    /// Throws NotInterruptible.
    DebugEvent interrupt(Pid pid);
    /// Suspended -> Runnable (or back to Blocked while its sleep is pending).
    void resume(Pid pid);
    /// Unwinds a trapped process through its Ensure blocks. Returns the
    /// termination when nothing was left to run.
    std::optional<Termination> unwind(Pid pid);
    /// Runs up to `limit` instructions of a suspended process in place.
    /// Traps replace the process event without publishing a new one.
    kernel::StepResult step_suspended(Pid pid, std::uint64_t limit);

    /// Throws InvalidBudget. Returns the previous quantum.
    std::uint64_t set_budget(std::int64_t quantum);
    std::uint64_t budget() const { return quantum_; }

    GreenProcess& process(Pid pid);
    const GreenProcess& process(Pid pid) const;
    bool has_process(Pid pid) const { return processes_.contains(pid); }
    std::vector<Pid> pids() const;

    std::size_t subscribe(Listener listener);
    void unsubscribe(std::size_t token);

    /// Thread-safe.
    void post(Command command);
    std::size_t drain();
    bool has_commands() const;

    void set_clock(std::function<Clock::time_point()> clock) { clock_ = std::move(clock); }
    Clock::time_point now() const { return clock_ ? clock_() : Clock::now(); }
    std::optional<Clock::time_point> next_wake() const;
    bool has_runnable() const;

    /// Ticks until `pid` is Terminated or Suspended. With `sleep` the call
    /// waits for pending sleeps, otherwise it returns when nothing can run.
    State run_until_settled(Pid pid, bool sleep = true);

    /// Instructions executed by every process so far. Thread-safe.
    std::uint64_t total_executed() const { return total_executed_.load(); }

private:
    kernel::StepResult execute(GreenProcess& p, std::uint64_t limit);
    void settle(GreenProcess& p, const kernel::StepOutcome& outcome, bool publish_traps);
    void terminate(GreenProcess& p, Termination result);
    void publish(const VmEvent& event);
    void wake_sleepers();

    Runtime runtime_;
    std::map<Pid, GreenProcess> processes_;
    Pid next_pid_ = 1;
    Pid last_ran_ = 0;
    std::uint64_t quantum_;
    std::function<Clock::time_point()> clock_;
    std::map<std::size_t, Listener> listeners_;
    std::size_t next_listener_ = 1;

    mutable std::mutex commands_mutex_;
    std::deque<Command> commands_;
    std::atomic<std::uint64_t> total_executed_{0};
};

}  // namespace polyvm::vm
