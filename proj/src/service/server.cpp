#include "polyvm/service/server.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "polyvm/service/protocol.hpp"
#include "polyvm/vm/host.hpp"

namespace polyvm::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::string_view kIndexPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>polyvm</title></head>
<body>
<h1>polyvm</h1>
<p>Protocol endpoint: WebSocket on this port. No UI bundle was configured (see <code>polyvm serve --static</code>).</p>
</body></html>
)";

std::string_view mime_type(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    return "application/octet-stream";
}

// parser messages and guest text may carry broken UTF-8
std::string serialize(const json& message) { return message.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

class WsSession;

struct Server::Impl {
    explicit Impl(ServerOptions o) : options(std::move(o)), machine(options.budget), host(machine) {
        auto policy = machine.runtime().policy();
        policy.auto_convert = options.auto_convert;
        machine.runtime().set_policy(policy);
        protocol = std::make_unique<Protocol>(machine, [this](const json& event) { broadcast(serialize(event)); });
    }

    void broadcast(const std::string& text);
    void accept();
    http::response<http::string_body> serve_static(const http::request<http::string_body>& req);

    ServerOptions options;
    vm::Vm machine;
    vm::VmHost host;
    std::unique_ptr<Protocol> protocol;

    net::io_context ioc;
    std::optional<tcp::acceptor> acceptor;
    std::optional<net::signal_set> signals;
    std::thread io_thread;
    std::uint16_t bound_port = 0;

    mutable std::mutex clients_mutex;
    std::set<std::shared_ptr<WsSession>> clients;
    std::mutex done_mutex;
    std::condition_variable done_cv;
    bool stopped = false;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, Server::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void run(http::request<http::string_body> req) {
        ws_.text(true);
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    void send(std::string text) {
        net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
            self->queue_.push_back(std::move(text));
            if (self->queue_.size() == 1) self->write_next();
        });
    }

    void close() {
        net::post(ws_.get_executor(), [self = shared_from_this()] {
            beast::error_code ec;
            beast::get_lowest_layer(self->ws_).socket().close(ec);
        });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        {
            std::lock_guard lock(server_.clients_mutex);
            server_.clients.insert(shared_from_this());
        }
        read_next();
    }

    void read_next() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            std::lock_guard lock(server_.clients_mutex);
            server_.clients.erase(shared_from_this());
            return;
        }
        auto text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        // the protocol runs on the VM lane; the reply comes back through send()
        server_.host.post([self = shared_from_this(), text = std::move(text)](vm::Vm&) {
            self->send(serialize(self->server_.protocol->handle_text(text)));
        });
        read_next();
    }

    void write_next() {
        ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return;
        queue_.pop_front();
        if (!queue_.empty()) write_next();
    }

    websocket::stream<beast::tcp_stream> ws_;
    Server::Impl& server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

    void run() { read_next(); }

private:
    void read_next() {
        req_ = {};
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;
        if (websocket::is_upgrade(req_)) {
            std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>(server_.serve_static(req_));
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || !res->keep_alive()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->read_next();
        });
    }

    beast::tcp_stream stream_;
    Server::Impl& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

void Server::Impl::broadcast(const std::string& text) {
    std::lock_guard lock(clients_mutex);
    for (const auto& c : clients) c->send(text);
}

void Server::Impl::accept() {
    acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<HttpSession>(std::move(socket), *this)->run();
        accept();
    });
}

http::response<http::string_body> Server::Impl::serve_static(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    res.set(http::field::server, "polyvm");
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        res.result(http::status::method_not_allowed);
        res.body() = "method not allowed\n";
        res.prepare_payload();
        return res;
    }
    std::string target(req.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target == "/") target = "/index.html";

    auto not_found = [&] {
        res.result(http::status::not_found);
        res.set(http::field::content_type, "text/plain");
        res.body() = "not found\n";
        res.prepare_payload();
        return res;
    };
    if (target.find("..") != std::string::npos) return not_found();

    if (options.static_dir.empty()) {
        if (target != "/index.html") return not_found();
        res.result(http::status::ok);
        res.set(http::field::content_type, "text/html");
        res.body() = kIndexPage;
    } else {
        const auto path = std::filesystem::path(options.static_dir) / target.substr(1);
        std::ifstream in(path, std::ios::binary);
        if (!in) return not_found();
        std::ostringstream body;
        body << in.rdbuf();
        res.result(http::status::ok);
        res.set(http::field::content_type, std::string(mime_type(path)));
        res.body() = body.str();
    }
    res.prepare_payload();
    if (req.method() == http::verb::head) res.body().clear();
    return res;
}

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
    auto& s = *impl_;
    beast::error_code ec;
    const auto address = net::ip::make_address(s.options.address, ec);
    if (ec) throw VmError("bad_params", "bad listen address " + s.options.address);
    tcp::endpoint endpoint{address, s.options.port};
    s.acceptor.emplace(s.ioc);
    s.acceptor->open(endpoint.protocol(), ec);
    if (!ec) s.acceptor->set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) s.acceptor->bind(endpoint, ec);
    if (ec) {
        s.acceptor.reset();
        throw PortInUse(s.options.port);
    }
    s.acceptor->listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw PortInUse(s.options.port);
    s.bound_port = s.acceptor->local_endpoint().port();

    s.signals.emplace(s.ioc, SIGINT, SIGTERM);
    s.signals->async_wait([this](beast::error_code ec, int) {
        if (!ec) {
            std::lock_guard lock(impl_->done_mutex);
            impl_->stopped = true;
            impl_->done_cv.notify_all();
        }
    });

    s.host.start();
    s.accept();
    s.io_thread = std::thread([&s] { s.ioc.run(); });
}

std::uint16_t Server::port() const { return impl_->bound_port; }

std::size_t Server::client_count() const {
    std::lock_guard lock(impl_->clients_mutex);
    return impl_->clients.size();
}

void Server::wait() {
    std::unique_lock lock(impl_->done_mutex);
    impl_->done_cv.wait(lock, [this] { return impl_->stopped; });
}

void Server::stop() {
    auto& s = *impl_;
    {
        std::lock_guard lock(s.done_mutex);
        s.stopped = true;
    }
    s.done_cv.notify_all();
    {
        std::lock_guard lock(s.clients_mutex);
        for (const auto& c : s.clients) c->close();
    }
    s.host.stop();
    if (s.io_thread.joinable()) {
        net::post(s.ioc, [&s] {
            beast::error_code ec;
            if (s.acceptor) s.acceptor->close(ec);
            if (s.signals) s.signals->cancel(ec);
        });
        s.ioc.stop();
        s.io_thread.join();
    }
    std::lock_guard lock(s.clients_mutex);
    s.clients.clear();
}

}  // namespace polyvm::service
