#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polyvm/bridge/bridge.hpp"
#include "polyvm/vm/vm.hpp"

namespace polyvm::bridge {

struct CellResult {
    std::size_t index = 0;
    vm::Pid pid = 0;
    Value value;
    std::string display;
};

struct PipelineResult {
    std::vector<CellResult> per_cell;
    Value final;
    /// Set when a cell ended with an exception (after the debugger proceeded).
    std::optional<ExceptionValue> failure;
    std::optional<std::size_t> failed_cell;
};

/// A cell that failed to compile; nothing was run.
class PipelineCompileError : public CompileError {
public:
    PipelineCompileError(std::size_t cell, const CompileError& error)
        : CompileError(error.line(), error.column(), "cell " + std::to_string(cell + 1) + ": " + error.detail()),
          cell_(cell) {}
    std::size_t cell() const { return cell_; }

private:
    std::size_t cell_;
};

/// Runs cells one after another, each as its own process with `it` bound to
/// the previous cell's value. A trapped cell simply stays suspended; the
/// pipeline moves on once that process terminates.
class Pipeline {
public:
    /// Compiles every cell. Throws UnknownLanguage or PipelineCompileError.
    Pipeline(vm::Vm& vm, std::vector<PipelineCell> cells, Value initial = Value::nil(),
             ConversionPolicy policy = {});
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    /// Spawns the first cell and returns its pid.
    vm::Pid start();

    /// Ticks the VM until the pipeline is done or its current cell is suspended.
    void run();

    bool done() const { return done_; }
    const PipelineResult& result() const { return result_; }
    std::optional<vm::Pid> current_pid() const { return current_; }
    std::size_t current_cell() const { return index_; }
    std::size_t size() const { return codes_.size(); }

    std::function<void(const CellResult&)> on_cell;
    std::function<void(const PipelineResult&)> on_done;

private:
    void finished(const vm::Finished& event);
    void spawn(Value it);

    vm::Vm& vm_;
    std::vector<kernel::CodePtr> codes_;
    Value initial_;
    ConversionPolicy policy_;
    std::size_t listener_ = 0;
    std::size_t index_ = 0;
    std::optional<vm::Pid> current_;
    bool done_ = false;
    PipelineResult result_;
};

}  // namespace polyvm::bridge
