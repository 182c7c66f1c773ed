#include "polyvm/bridge/pipeline.hpp"

namespace polyvm::bridge {

Pipeline::Pipeline(vm::Vm& vm, std::vector<PipelineCell> cells, Value initial, ConversionPolicy policy)
    : vm_(vm), initial_(std::move(initial)), policy_(policy) {
    if (cells.empty()) throw PipelineFormatError(0, "a pipeline needs at least one cell");
    auto& rt = vm_.runtime();
    CompileOptions options;
    options.predeclared.emplace_back(kArgumentName);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto lang = rt.language(cells[i].language);
        try {
            codes_.push_back(rt.plugin(lang).compile(cells[i].source, lang, options));
        } catch (const CompileError& e) {
            throw PipelineCompileError(i, e);
        }
    }
    listener_ = vm_.subscribe([this](const vm::VmEvent& event) {
        if (const auto* f = std::get_if<vm::Finished>(&event)) finished(*f);
    });
}

Pipeline::~Pipeline() { vm_.unsubscribe(listener_); }

vm::Pid Pipeline::start() {
    if (current_) throw NotRunnable("pipeline already started");
    spawn(initial_);
    return *current_;
}

void Pipeline::spawn(Value it) {
    current_ = vm_.spawn_code(codes_[index_], {{std::string(kArgumentName), std::move(it)}});
}

void Pipeline::finished(const vm::Finished& event) {
    if (done_ || !current_ || event.pid != *current_) return;
    auto& rt = vm_.runtime();
    const auto lang = codes_[index_]->language;
    if (event.result.failed()) {
        result_.failure = event.result.exception;
        result_.failed_cell = index_;
        result_.final = event.result.value;
        done_ = true;
        if (on_done) on_done(result_);
        return;
    }
    CellResult cell{index_, event.pid, event.result.value, rt.mop_display(event.result.value, lang)};
    result_.per_cell.push_back(cell);
    if (on_cell) on_cell(cell);
    if (index_ + 1 == codes_.size()) {
        result_.final = event.result.value;
        done_ = true;
        if (on_done) on_done(result_);
        return;
    }
    ++index_;
    spawn(rt.convert(event.result.value, lang, codes_[index_]->language, policy_));
}

void Pipeline::run() {
    if (!current_) start();
    while (!done_) {
        auto pid = *current_;
        auto state = vm_.run_until_settled(pid);
        if (done_) break;
        if (pid == *current_ && state != vm::State::Terminated) break;
    }
}

}  // namespace polyvm::bridge
