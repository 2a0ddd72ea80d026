#include "userl/bridge/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace userl::bridge {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::string_view kSessionPrefix = "/session/";

std::string content_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, HumanBridgeHub& hub, std::string id)
        : ws_(std::move(socket)), hub_(hub), id_(std::move(id)) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsSession> weak = shared_from_this();
        auto executor = ws_.get_executor();
        auto sink = [weak, executor](const std::string& line) {
            asio::post(executor, [weak, line] {
                if (auto self = weak.lock()) self->send(line);
            });
        };
        token_ = hub_.attach(id_, sink);
        if (!token_) {
            send(encode(error_message("SessionNotFound", "no session '" + id_ + "'")));
            closing_ = true;
            return;
        }
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            if (token_) hub_.detach(id_, *token_);
            return;
        }
        const std::string line = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        hub_.deliver(id_, line);
        do_read();
    }

    void send(const std::string& line) {
        queue_.push_back(line);
        if (queue_.size() == 1) do_write();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(queue_.front()),
                        beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return;
        queue_.pop_front();
        if (!queue_.empty()) {
            do_write();
        } else if (closing_) {
            ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    HumanBridgeHub& hub_;
    std::string id_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    std::optional<std::uint64_t> token_;
    bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, HumanBridgeHub& hub, const std::filesystem::path& root)
        : stream_(std::move(socket)), hub_(hub), root_(root) {}

    void run() {
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

private:
    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;
        const std::string target(req_.target());
        if (websocket::is_upgrade(req_)) {
            std::string id = target.rfind(kSessionPrefix, 0) == 0 ? target.substr(kSessionPrefix.size()) : "";
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), hub_, std::move(id))->run(std::move(req_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>();
        res->version(req_.version());
        res->keep_alive(false);
        res->set(http::field::access_control_allow_origin, "*");
        if (req_.method() == http::verb::get && target == "/sessions") {
            res->result(http::status::ok);
            res->set(http::field::content_type, "application/json");
            res->body() = hub_.session_summaries().dump();
        } else if (req_.method() == http::verb::get && !root_.empty() && target.find("..") == std::string::npos) {
            auto path = root_ / (target == "/" ? std::string("index.html") : target.substr(1));
            std::ifstream in(path, std::ios::binary);
            if (in) {
                std::ostringstream body;
                body << in.rdbuf();
                res->result(http::status::ok);
                res->set(http::field::content_type, content_type(path));
                res->body() = body.str();
            } else {
                res->result(http::status::not_found);
            }
        } else {
            res->result(http::status::not_found);
        }
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
            beast::error_code ignored;
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
    }

    beast::tcp_stream stream_;
    HumanBridgeHub& hub_;
    const std::filesystem::path& root_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}  // namespace

struct BridgeServer::Impl {
    HumanBridgeHub& hub;
    std::string address;
    unsigned short port;
    std::filesystem::path root;
    asio::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::thread thread;

    Impl(HumanBridgeHub& h, std::string addr, unsigned short p, std::filesystem::path r)
        : hub(h), address(std::move(addr)), port(p), root(std::move(r)) {}

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<HttpSession>(std::move(socket), hub, root)->run();
            accept();
        });
    }
};

BridgeServer::BridgeServer(HumanBridgeHub& hub, std::string address, unsigned short port,
                           std::filesystem::path static_root)
    : impl_(new Impl(hub, std::move(address), port, std::move(static_root))) {}

BridgeServer::~BridgeServer() { stop(); }

void BridgeServer::start() {
    const tcp::endpoint ep{asio::ip::make_address(impl_->address), impl_->port};
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
    impl_->port = impl_->acceptor.local_endpoint().port();
    impl_->accept();
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void BridgeServer::stop() {
    if (!impl_ || !impl_->thread.joinable()) return;
    impl_->ioc.stop();
    impl_->thread.join();
}

unsigned short BridgeServer::port() const { return impl_->port; }

}  // namespace userl::bridge
