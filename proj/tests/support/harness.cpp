#include "harness.hpp"

#include "polyvm/minipy/minipy.hpp"
#include "polyvm/minirb/minirb.hpp"

namespace polyvm::testing {

World::World() {
    py = runtime.register_plugin(minipy::make_plugin());
    rb = runtime.register_plugin(minirb::make_plugin());
}

kernel::FrameStack World::load(LangId lang, std::string_view source) {
    kernel::FrameStack frames;
    frames.push_back(kernel::make_frame(runtime.plugin(lang).compile(source, lang, {}), {}));
    return frames;
}

kernel::StepOutcome World::run(LangId lang, std::string_view source, std::uint64_t budget) {
    auto frames = load(lang, source);
    kernel::ExecutionContext ctx{runtime, transcript};
    std::uint64_t used = 0;
    while (true) {
        auto r = kernel::step(ctx, frames, budget - used);
        used += r.executed;
        if (!std::holds_alternative<kernel::Yielded>(r.outcome) && !std::holds_alternative<kernel::Blocked>(r.outcome)) {
            return r.outcome;
        }
        if (used >= budget) return r.outcome;
    }
}

std::string World::eval(LangId lang, std::string_view source) {
    auto outcome = run(lang, source);
    if (auto* done = std::get_if<kernel::Completed>(&outcome)) return runtime.plugin(lang).display(done->value, runtime);
    if (auto* t = std::get_if<kernel::Trapped>(&outcome)) return "!" + t->exception.title();
    if (auto* f = std::get_if<kernel::Failed>(&outcome)) return "!" + f->exception.title();
    return "?unfinished";
}

}  // namespace polyvm::testing
