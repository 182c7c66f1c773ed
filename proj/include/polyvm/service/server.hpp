#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "polyvm/errors.hpp"
#include "polyvm/vm/vm.hpp"

namespace polyvm::service {

class PortInUse : public VmError {
public:
    explicit PortInUse(std::uint16_t port)
        : VmError("port_in_use", "port " + std::to_string(port) + " is already in use") {}
};

struct ServerOptions {
    /// 0 picks a free port.
    std::uint16_t port = 8080;
    std::string address = "127.0.0.1";
    /// Served at HTTP "/"; empty means the built-in page.
    std::string static_dir;
    std::uint64_t budget = vm::kDefaultQuantum;
    bool auto_convert = true;
};

/// WebSocket endpoint for the protocol plus static files over plain HTTP, on
/// one port. Owns the VM and runs it on its own thread.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts serving. Throws PortInUse.
    void start();
    std::uint16_t port() const;
    /// Blocks until stop() or SIGINT/SIGTERM.
    void wait();
    void stop();

    std::size_t client_count() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace polyvm::service
