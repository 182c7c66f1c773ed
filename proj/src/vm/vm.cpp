#include "polyvm/vm/vm.hpp"

#include <thread>

#include "polyvm/bridge/bridge.hpp"
#include "polyvm/minipy/minipy.hpp"
#include "polyvm/minirb/minirb.hpp"

namespace polyvm::vm {

std::string_view state_name(State state) {
    switch (state) {
    case State::Runnable: return "runnable";
    case State::Running: return "running";
    case State::Suspended: return "suspended";
    case State::Blocked: return "blocked";
    case State::Terminated: return "terminated";
    }
    return "?";
}

DebugEvent make_event(const Runtime& runtime, Pid pid, const kernel::FrameStack& frames,
                      std::optional<ExceptionValue> exception) {
    DebugEvent event;
    event.pid = pid;
    event.stack = kernel::stack_view(runtime, frames);
    if (exception) {
        event.kind = DebugEvent::Kind::UnhandledException;
        event.title = exception->title();
        event.exception = std::move(exception);
    } else {
        event.kind = DebugEvent::Kind::UserInterrupt;
        event.title = "User Interrupt";
    }
    return event;
}

void install_standard_languages(Runtime& runtime) {
    runtime.register_plugin(minipy::make_plugin());
    runtime.register_plugin(minirb::make_plugin());
    bridge::install(runtime);
}

Vm::Vm(std::uint64_t quantum) : quantum_(quantum) {
    if (quantum < 1) throw InvalidBudget();
    install_standard_languages(runtime_);
}

Pid Vm::spawn(std::string_view language, std::string_view source, const Bindings& bindings) {
    const auto lang = runtime_.language(language);
    CompileOptions options;
    for (const auto& [name, value] : bindings) options.predeclared.push_back(name);
    return spawn_code(runtime_.plugin(lang).compile(source, lang, options), bindings);
}

Pid Vm::spawn_code(kernel::CodePtr code, const Bindings& bindings) {
    return spawn_frame(kernel::make_frame(std::move(code), bindings));
}

Pid Vm::spawn_frame(kernel::Frame frame) {
    GreenProcess p;
    p.id = next_pid_++;
    p.language = frame.language;
    p.frames.push_back(std::move(frame));
    const auto id = p.id;
    processes_.emplace(id, std::move(p));
    return id;
}

GreenProcess& Vm::process(Pid pid) {
    auto it = processes_.find(pid);
    if (it == processes_.end()) throw UnknownProcess(pid);
    return it->second;
}

const GreenProcess& Vm::process(Pid pid) const {
    auto it = processes_.find(pid);
    if (it == processes_.end()) throw UnknownProcess(pid);
    return it->second;
}

std::vector<Pid> Vm::pids() const {
    std::vector<Pid> out;
    for (const auto& [pid, p] : processes_) out.push_back(pid);
    return out;
}

std::size_t Vm::subscribe(Listener listener) {
    const auto token = next_listener_++;
    listeners_.emplace(token, std::move(listener));
    return token;
}

void Vm::unsubscribe(std::size_t token) { listeners_.erase(token); }

void Vm::publish(const VmEvent& event) {
    // listeners may subscribe or unsubscribe while being notified
    std::vector<std::size_t> tokens;
    for (const auto& [token, l] : listeners_) tokens.push_back(token);
    for (auto token : tokens) {
        auto it = listeners_.find(token);
        if (it == listeners_.end()) continue;
        auto listener = it->second;
        listener(event);
    }
}

void Vm::post(Command command) {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back(std::move(command));
}

bool Vm::has_commands() const {
    std::lock_guard lock(commands_mutex_);
    return !commands_.empty();
}

std::size_t Vm::drain() {
    std::deque<Command> batch;
    {
        std::lock_guard lock(commands_mutex_);
        batch.swap(commands_);
    }
    for (auto& command : batch) command(*this);
    return batch.size();
}

std::uint64_t Vm::set_budget(std::int64_t quantum) {
    if (quantum < 1) throw InvalidBudget();
    const auto previous = quantum_;
    quantum_ = static_cast<std::uint64_t>(quantum);
    return previous;
}

void Vm::wake_sleepers() {
    const auto t = now();
    for (auto& [pid, p] : processes_) {
        if (p.state == State::Blocked && (!p.wake || *p.wake <= t)) {
            p.state = State::Runnable;
            p.wake.reset();
        }
    }
}

bool Vm::has_runnable() const {
    for (const auto& [pid, p] : processes_) {
        if (p.state == State::Runnable) return true;
    }
    return false;
}

std::optional<Clock::time_point> Vm::next_wake() const {
    std::optional<Clock::time_point> best;
    for (const auto& [pid, p] : processes_) {
        if (p.state == State::Blocked && p.wake && (!best || *p.wake < *best)) best = p.wake;
    }
    return best;
}

TickReport Vm::tick() {
    TickReport report;
    report.commands = drain();
    wake_sleepers();
    if (processes_.empty()) return report;

    // round robin: first runnable pid after the last one that ran, wrapping
    auto it = processes_.upper_bound(last_ran_);
    for (std::size_t n = 0; n < processes_.size(); ++n) {
        if (it == processes_.end()) it = processes_.begin();
        if (it->second.state == State::Runnable) break;
        ++it;
    }
    if (it == processes_.end() || it->second.state != State::Runnable) return report;

    const auto pid = it->first;
    const auto before = it->second.consumed;
    report.ran = pid;
    report.outcome = run_quantum(pid);
    report.executed = process(pid).consumed - before;
    return report;
}

kernel::StepResult Vm::execute(GreenProcess& p, std::uint64_t limit) {
    kernel::ExecutionContext ctx{runtime_, p.transcript, now(), p.force_unwind};
    auto result = kernel::step(ctx, p.frames, limit);
    p.force_unwind = ctx.force_unwind;
    p.consumed += result.executed;
    total_executed_.fetch_add(result.executed);
    return result;
}

kernel::StepOutcome Vm::run_quantum(Pid pid) {
    auto& p = process(pid);
    if (p.state != State::Runnable) throw NotRunnable("process " + std::to_string(pid) + " is not runnable");
    last_ran_ = pid;
    p.state = State::Running;
    ++p.quanta;
    kernel::StepResult result;
    try {
        result = execute(p, quantum_);
    } catch (...) {
        p.state = State::Runnable;
        throw;
    }
    settle(p, result.outcome, true);
    return result.outcome;
}

void Vm::terminate(GreenProcess& p, Termination result) {
    p.state = State::Terminated;
    p.event.reset();
    p.wake.reset();
    p.frames.clear();
    p.result = result;
    publish(Finished{p.id, std::move(result)});
}

void Vm::settle(GreenProcess& p, const kernel::StepOutcome& outcome, bool publish_traps) {
    if (std::holds_alternative<kernel::Yielded>(outcome)) {
        if (p.state == State::Running) p.state = State::Runnable;
    } else if (const auto* done = std::get_if<kernel::Completed>(&outcome)) {
        terminate(p, Termination{done->value, std::nullopt});
    } else if (const auto* failed = std::get_if<kernel::Failed>(&outcome)) {
        terminate(p, Termination{failed->exception.payload.value_or(Value::nil()), failed->exception});
    } else if (const auto* trapped = std::get_if<kernel::Trapped>(&outcome)) {
        p.state = State::Suspended;
        p.event = make_event(runtime_, p.id, p.frames, trapped->exception);
        if (publish_traps) publish(*p.event);
    } else if (const auto* blocked = std::get_if<kernel::Blocked>(&outcome)) {
        p.wake = blocked->wake;
        if (p.state == State::Running) p.state = State::Blocked;
    }
}

DebugEvent Vm::interrupt(Pid pid) {
    auto& p = process(pid);
    if (p.state != State::Runnable && p.state != State::Blocked) {
        throw NotInterruptible("process " + std::to_string(pid) + " is " + std::string(state_name(p.state)));
    }
    p.state = State::Suspended;
    p.event = make_event(runtime_, pid, p.frames, std::nullopt);
    auto event = *p.event;
    publish(event);
    return event;
}

void Vm::resume(Pid pid) {
    auto& p = process(pid);
    if (p.state != State::Suspended) throw NotRunnable("process " + std::to_string(pid) + " is not suspended");
    p.event.reset();
    p.state = p.wake && *p.wake > now() ? State::Blocked : State::Runnable;
}

std::optional<Termination> Vm::unwind(Pid pid) {
    auto& p = process(pid);
    if (p.state != State::Suspended || !p.event || !p.event->exception) {
        throw NotRunnable("process " + std::to_string(pid) + " has no pending exception");
    }
    auto exception = *p.event->exception;
    p.event.reset();
    kernel::ExecutionContext ctx{runtime_, p.transcript, now(), true};
    auto r = kernel::raise_exception(ctx, p.frames, exception);
    p.force_unwind = ctx.force_unwind;
    if (auto* failed = std::get_if<kernel::Failed>(&r)) {
        terminate(p, Termination{failed->exception.payload.value_or(Value::nil()), failed->exception});
        return p.result;
    }
    p.state = State::Runnable;
    return std::nullopt;
}

kernel::StepResult Vm::step_suspended(Pid pid, std::uint64_t limit) {
    auto& p = process(pid);
    if (p.state != State::Suspended) throw NotRunnable("process " + std::to_string(pid) + " is not suspended");
    auto result = execute(p, limit);
    settle(p, result.outcome, false);
    return result;
}

State Vm::run_until_settled(Pid pid, bool sleep) {
    while (true) {
        const auto& p = process(pid);
        if (p.state == State::Terminated || p.state == State::Suspended) return p.state;
        if (!has_runnable() && !has_commands()) {
            auto wake = next_wake();
            if (!wake) return p.state;
            if (*wake > now()) {
                if (!sleep || clock_) return p.state;
                std::this_thread::sleep_until(*wake);
            }
        }
        tick();
    }
}

}  // namespace polyvm::vm
