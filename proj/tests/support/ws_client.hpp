#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "polyvm/service/wire.hpp"

namespace polyvm::testing {

/// Minimal protocol client for tests. Reads on a background thread.
class WsClient {
public:
    WsClient(const std::string& host, std::uint16_t port);
    ~WsClient();
    WsClient(const WsClient&) = delete;
    WsClient& operator=(const WsClient&) = delete;

    void send(const service::json& message);
    void send_text(const std::string& text);

    /// Next message matching `pred`, skipping (and keeping) the rest.
    std::optional<service::json> wait_for(const std::function<bool(const service::json&)>& pred,
                                          std::chrono::milliseconds timeout = std::chrono::seconds(5));
    /// Sends a request and waits for the reply with the same id.
    std::optional<service::json> call(const service::json& request,
                                      std::chrono::milliseconds timeout = std::chrono::seconds(5));

    /// Every message received so far, in order.
    std::vector<service::json> received() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Plain HTTP GET; returns status and body.
std::pair<int, std::string> http_get(const std::string& host, std::uint16_t port, const std::string& target);

}  // namespace polyvm::testing
