#include "polyvm/vm/host.hpp"

#include <chrono>

namespace polyvm::vm {

VmHost::VmHost(Vm& vm) : vm_(vm) {}

VmHost::~VmHost() { stop(); }

void VmHost::start() {
    std::lock_guard lock(mutex_);
    if (running_) return;
    running_ = true;
    thread_ = std::thread([this] { loop(); });
}

void VmHost::stop() {
    {
        std::lock_guard lock(mutex_);
        if (!running_) return;
        running_ = false;
    }
    wakeup_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void VmHost::post(Vm::Command command) {
    vm_.post(std::move(command));
    {
        std::lock_guard lock(mutex_);
        pending_ = true;
    }
    wakeup_.notify_all();
}

void VmHost::loop() {
    while (true) {
        {
            std::lock_guard lock(mutex_);
            if (!running_) break;
            pending_ = false;
        }
        auto report = vm_.tick();
        if (!report.idle()) continue;

        std::unique_lock lock(mutex_);
        if (!running_) break;
        if (pending_) continue;
        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(50);
        if (auto wake = vm_.next_wake(); wake && *wake < deadline) deadline = *wake;
        wakeup_.wait_until(lock, deadline, [this] { return pending_ || !running_; });
    }
    vm_.drain();
}

}  // namespace polyvm::vm
