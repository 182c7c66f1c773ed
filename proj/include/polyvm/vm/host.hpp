#pragma once

#include <condition_variable>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>

#include "polyvm/vm/vm.hpp"

namespace polyvm::vm {

/// Runs a Vm on its own thread. Other threads talk to it only through
/// `post`/`submit`; commands run between quanta.
class VmHost {
public:
    explicit VmHost(Vm& vm);
    ~VmHost();
    VmHost(const VmHost&) = delete;
    VmHost& operator=(const VmHost&) = delete;

    void start();
    void stop();

    void post(Vm::Command command);

    /// Runs `fn` on the VM lane and hands its result (or exception) back.
    template <class F>
    auto submit(F fn) -> std::future<std::invoke_result_t<F, Vm&>> {
        using R = std::invoke_result_t<F, Vm&>;
        auto task = std::make_shared<std::packaged_task<R(Vm&)>>(std::move(fn));
        auto future = task->get_future();
        post([task](Vm& vm) { (*task)(vm); });
        return future;
    }

    std::uint64_t total_executed() const { return vm_.total_executed(); }

private:
    void loop();

    Vm& vm_;
    std::thread thread_;
    std::mutex mutex_;
    std::condition_variable wakeup_;
    bool running_ = false;
    bool pending_ = false;
};

}  // namespace polyvm::vm
