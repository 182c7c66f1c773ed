#include "polyvm/debug/session.hpp"

#include "polyvm/kernel/introspection.hpp"

namespace polyvm::debug {

InspectView inspect_value(const Runtime& runtime, const Value& value, LangId viewer) {
    InspectView view;
    view.viewer_language = runtime.language_name(viewer);
    if (value.is_ref()) {
        auto [lang, handle] = runtime.resolve(value);
        if (!runtime.objects().heap(lang).valid(handle)) throw StaleHandle();
        auto mop = runtime.mop_reflect(value);
        view.class_name = std::move(mop.class_name);
        view.display = std::move(mop.display);
        view.slots = std::move(mop.slots);
        return view;
    }
    view.class_name = std::string(neutral_class_name(value));
    view.display = runtime.mop_display(value, viewer);
    if (value.is_list()) {
        const auto& items = *value.as_list();
        for (std::size_t i = 0; i < items.size(); ++i) view.slots.emplace_back(std::to_string(i), items[i]);
    }
    return view;
}

SessionManager::SessionManager(vm::Vm& vm) : vm_(vm) {
    listener_ = vm_.subscribe([this](const vm::VmEvent& event) {
        if (const auto* trap = std::get_if<vm::DebugEvent>(&event)) {
            on_trap(*trap);
        } else if (const auto* done = std::get_if<vm::Finished>(&event)) {
            if (auto id = session_for(done->pid)) sessions_.at(*id).open = false;
        }
    });
}

SessionManager::~SessionManager() { vm_.unsubscribe(listener_); }

DebugSession& SessionManager::on_trap(const vm::DebugEvent& event) {
    const auto id = next_id_++;
    auto& s = sessions_[id];
    s.id = id;
    s.event = event;
    if (on_session) on_session(s);
    return s;
}

const DebugSession& SessionManager::session(SessionId id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession(id);
    return it->second;
}

DebugSession& SessionManager::open(SessionId id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession(id);
    if (!it->second.open) throw SessionClosed();
    return it->second;
}

std::optional<SessionId> SessionManager::session_for(vm::Pid pid) const {
    for (auto it = sessions_.rbegin(); it != sessions_.rend(); ++it) {
        if (it->second.open && it->second.event.pid == pid) return it->first;
    }
    return std::nullopt;
}

std::vector<SessionId> SessionManager::open_sessions() const {
    std::vector<SessionId> out;
    for (const auto& [id, s] : sessions_) {
        if (s.open) out.push_back(id);
    }
    return out;
}

std::size_t SessionManager::bottom_index(const DebugSession& s, std::size_t index) const {
    const auto& frames = vm_.process(s.event.pid).frames;
    if (index >= frames.size()) throw BadIndex(index);
    return frames.size() - 1 - index;
}

void SessionManager::refresh(DebugSession& s) {
    s.event.stack = kernel::stack_view(vm_.runtime(), vm_.process(s.event.pid).frames);
}

std::vector<kernel::FrameView> SessionManager::stack(SessionId id) const {
    const auto& s = session(id);
    if (!s.open) return s.event.stack;
    return kernel::stack_view(vm_.runtime(), vm_.process(s.event.pid).frames);
}

kernel::FrameView SessionManager::frame(SessionId id, std::size_t index) const {
    auto views = stack(id);
    if (index >= views.size()) throw BadIndex(index);
    return views[index];
}

ProceedOutcome SessionManager::proceed(SessionId id) {
    auto& s = open(id);
    s.open = false;
    ProceedOutcome out;
    if (s.event.kind == vm::DebugEvent::Kind::UnhandledException && !s.restarted) {
        out.termination = vm_.unwind(s.event.pid);
    } else {
        vm_.resume(s.event.pid);
    }
    return out;
}

std::vector<kernel::FrameView> SessionManager::restart(SessionId id, std::size_t index,
                                                       const std::optional<std::string>& source) {
    auto& s = open(id);
    auto& p = vm_.process(s.event.pid);
    kernel::restart_frame(vm_.runtime(), p.frames, bottom_index(s, index), source);
    p.force_unwind = false;
    if (p.event) p.event->exception.reset();
    s.restarted = true;
    s.selected_frame = 0;
    refresh(s);
    return s.event.stack;
}

std::vector<kernel::FrameView> SessionManager::step_over(SessionId id) {
    auto& s = open(id);
    if (!s.steppable()) throw NotSteppable();
    const auto pid = s.event.pid;
    auto& frames = vm_.process(pid).frames;
    const auto depth = frames.size() - s.selected_frame;
    const auto start_line = frames[depth - 1].line();

    for (std::uint64_t n = 0; n < kStepLimit; ++n) {
        auto r = vm_.step_suspended(pid, 1);
        const auto& p = vm_.process(pid);
        if (p.state == vm::State::Terminated) {
            s.open = false;
            s.event.stack.clear();
            return {};
        }
        if (std::holds_alternative<kernel::Trapped>(r.outcome)) {
            s.event = *p.event;
            s.restarted = false;
            s.selected_frame = 0;
            return s.event.stack;
        }
        if (p.frames.size() < depth) {
            s.selected_frame = 0;
            break;
        }
        if (p.frames.size() == depth && p.frames[depth - 1].line() != start_line) {
            s.selected_frame = 0;
            break;
        }
    }
    refresh(s);
    return s.event.stack;
}

Value SessionManager::eval_in_frame(SessionId id, std::size_t index, std::string_view source) {
    auto& s = open(id);
    auto& p = vm_.process(s.event.pid);
    kernel::ExecutionContext ctx{vm_.runtime(), p.transcript, vm_.now()};
    auto value = kernel::evaluate_in_frame(ctx, p.frames, bottom_index(s, index), source);
    refresh(s);
    return value;
}

}  // namespace polyvm::debug
