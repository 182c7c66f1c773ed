#include "ws_client.hpp"

#include <future>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

namespace polyvm::testing {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using service::json;

struct WsClient::Impl {
    net::io_context ioc;
    websocket::stream<tcp::socket> ws{ioc};
    beast::flat_buffer buffer;
    std::thread thread;

    mutable std::mutex mutex;
    std::condition_variable cv;
    std::vector<json> inbox;
    std::vector<bool> taken;
    bool closed = false;

    void read_next() {
        ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
            std::lock_guard lock(mutex);
            if (ec) {
                closed = true;
                cv.notify_all();
                return;
            }
            inbox.push_back(json::parse(beast::buffers_to_string(buffer.data()), nullptr, false));
            taken.push_back(false);
            buffer.consume(buffer.size());
            cv.notify_all();
            read_next();
        });
    }
};

WsClient::WsClient(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
    tcp::resolver resolver(impl_->ioc);
    net::connect(impl_->ws.next_layer(), resolver.resolve(host, std::to_string(port)));
    impl_->ws.handshake(host + ":" + std::to_string(port), "/");
    impl_->ws.text(true);
    impl_->read_next();
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

WsClient::~WsClient() {
    net::post(impl_->ioc, [this] {
        beast::error_code ec;
        impl_->ws.next_layer().close(ec);
    });
    impl_->thread.join();
}

void WsClient::send_text(const std::string& text) {
    std::promise<void> done;
    net::post(impl_->ioc, [&] {
        beast::error_code ec;
        impl_->ws.write(net::buffer(text), ec);
        done.set_value();
    });
    done.get_future().get();
}

void WsClient::send(const json& message) { send_text(message.dump()); }

std::optional<json> WsClient::wait_for(const std::function<bool(const json&)>& pred,
                                       std::chrono::milliseconds timeout) {
    auto& s = *impl_;
    std::unique_lock lock(s.mutex);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t scanned = 0;
    while (true) {
        for (; scanned < s.inbox.size(); ++scanned) {
            if (!s.taken[scanned] && pred(s.inbox[scanned])) {
                s.taken[scanned] = true;
                return s.inbox[scanned];
            }
        }
        if (s.closed) return std::nullopt;
        if (s.cv.wait_until(lock, deadline) == std::cv_status::timeout && scanned == s.inbox.size()) {
            return std::nullopt;
        }
    }
}

std::optional<json> WsClient::call(const json& request, std::chrono::milliseconds timeout) {
    const auto id = request.at("id");
    send(request);
    return wait_for([&](const json& m) { return m.is_object() && m.value("id", json()) == id; }, timeout);
}

std::vector<json> WsClient::received() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->inbox;
}

std::pair<int, std::string> http_get(const std::string& host, std::uint16_t port, const std::string& target) {
    net::io_context ioc;
    tcp::resolver resolver(ioc);
    beast::tcp_stream stream(ioc);
    stream.connect(resolver.resolve(host, std::to_string(port)));
    http::request<http::string_body> req{http::verb::get, target, 11};
    req.set(http::field::host, host);
    http::write(stream, req);
    beast::flat_buffer buffer;
    http::response<http::string_body> res;
    http::read(stream, buffer, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return {static_cast<int>(res.result_int()), res.body()};
}

}  // namespace polyvm::testing
