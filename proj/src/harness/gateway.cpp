#include "awareness/harness/gateway.hpp"

#include <sys/socket.h>

#include <atomic>
#include <list>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"

namespace awareness::harness {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response json_response(const Request& req, http::status status, const nlohmann::json& body)
{
    Response res{status, req.version()};
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = body.dump();
    res.prepare_payload();
    return res;
}

Response error_response(const Request& req, http::status status, const std::string& message)
{
    return json_response(req, status, {{"error", message}});
}

Response handle_fault(LiveEndpoint& live, const Request& req)
{
    nlohmann::json body;
    try {
        body = model::parse_json(req.body());
    } catch (const DecodeError& e) {
        return error_response(req, http::status::bad_request, e.what());
    }
    if (!body.is_object() || !body.contains("mode") || !body["mode"].is_string()) {
        return error_response(req, http::status::bad_request, "body must be {\"mode\": string, \"duration_ms\": number}");
    }
    const auto mode = gui::fault_mode_from_string(body["mode"].get<std::string>());
    if (!mode) {
        return error_response(req, http::status::bad_request, "unknown fault mode '" + body["mode"].get<std::string>() + "'");
    }
    std::uint64_t duration_ms = 0;
    if (*mode != gui::FaultMode::none) {
        const auto it = body.find("duration_ms");
        if (it == body.end() || !it->is_number() || it->get<double>() <= 0.0) {
            return error_response(req, http::status::bad_request, "duration_ms must be a positive number");
        }
        duration_ms = static_cast<std::uint64_t>(it->get<double>());
    }
    const gui::FaultConfig f = live.inject_fault(*mode, duration_ms);
    return json_response(req, http::status::ok, {{"fault", gui::to_json(f)}});
}

Response handle(LiveEndpoint& live, const Request& req)
{
    const std::string_view target(req.target().data(), req.target().size());
    if (req.method() == http::verb::options) {
        Response res{http::status::no_content, req.version()};
        res.set(http::field::access_control_allow_origin, "*");
        res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
        res.keep_alive(req.keep_alive());
        res.prepare_payload();
        return res;
    }
    if (target == "/status") {
        if (req.method() != http::verb::get) {
            return error_response(req, http::status::method_not_allowed, "use GET");
        }
        return json_response(req, http::status::ok, live.status_json());
    }
    if (target == "/fault") {
        if (req.method() != http::verb::post) {
            return error_response(req, http::status::method_not_allowed, "use POST");
        }
        return handle_fault(live, req);
    }
    return error_response(req, http::status::not_found, "no route for " + std::string(target));
}

}  // namespace

struct Gateway::Impl {
    LiveEndpoint& live;
    std::size_t ws_queue;
    asio::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::thread accept_thread;
    std::atomic<bool> stopping{false};
    bool started = false;
    bool stopped = false;

    struct Session {
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> done = std::make_shared<std::atomic<bool>>(false);
    };
    std::mutex mu;
    std::list<Session> sessions;
    std::map<int, int> open_fds;  // fd -> refcount, for shutdown on stop

    Impl(LiveEndpoint& l, std::size_t q) : live(l), ws_queue(q) {}

    void serve_websocket(tcp::socket& sock, const Request& req)
    {
        websocket::stream<tcp::socket&> ws(sock);
        ws.accept(req);
        ws.text(true);
        auto queue = live.subscribe(ws_queue);
        while (!stopping) {
            auto tick = queue->pop(std::chrono::milliseconds(200));
            if (!tick) {
                if (queue->closed()) {
                    beast::error_code ignored;
                    ws.close(websocket::close_code::normal, ignored);
                    return;
                }
                continue;
            }
            ws.write(asio::buffer(*tick->json));
        }
    }

    void serve(tcp::socket& sock)
    {
        beast::flat_buffer buffer;
        for (;;) {
            Request req;
            beast::error_code ec;
            http::read(sock, buffer, req, ec);
            if (ec) {
                return;
            }
            if (websocket::is_upgrade(req)) {
                if (req.target() == "/live") {
                    serve_websocket(sock, req);
                    return;
                }
                http::write(sock, error_response(req, http::status::not_found, "websocket only on /live"), ec);
                return;
            }
            const Response res = handle(live, req);
            http::write(sock, res, ec);
            if (ec || !res.keep_alive()) {
                sock.shutdown(tcp::socket::shutdown_send, ec);
                return;
            }
        }
    }

    void reap()
    {
        std::lock_guard lock(mu);
        for (auto it = sessions.begin(); it != sessions.end();) {
            if (*it->done) {
                it->thread.join();
                it = sessions.erase(it);
            } else {
                ++it;
            }
        }
    }

    void accept_loop()
    {
        while (!stopping) {
            boost::system::error_code ec;
            tcp::socket sock(ioc);
            acceptor.accept(sock, ec);
            if (ec) {
                if (stopping) {
                    return;
                }
                continue;
            }
            reap();
            const int fd = sock.native_handle();
            std::lock_guard lock(mu);
            if (stopping) {
                return;
            }
            ++open_fds[fd];
            Session& s = sessions.emplace_back();
            s.thread = std::thread([this, fd, done = s.done, sock = std::move(sock)]() mutable {
                try {
                    serve(sock);
                } catch (const std::exception&) {
                    // Connection-level failures (peer reset, bad frame) end only this session.
                }
                {
                    std::lock_guard inner(mu);
                    if (--open_fds[fd] == 0) {
                        open_fds.erase(fd);
                    }
                }
                boost::system::error_code ignored;
                sock.close(ignored);
                *done = true;
            });
        }
    }
};

Gateway::Gateway(LiveEndpoint& live, const std::string& host, std::uint16_t port, std::size_t ws_queue)
    : impl_(std::make_unique<Impl>(live, ws_queue))
{
    try {
        const tcp::endpoint ep(asio::ip::make_address(host), port);
        impl_->acceptor.open(ep.protocol());
        impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
        impl_->acceptor.bind(ep);
        impl_->acceptor.listen();
    } catch (const boost::system::system_error& e) {
        throw BindError(host + ":" + std::to_string(port) + ": " + e.what());
    }
}

Gateway::~Gateway() { stop(); }

std::uint16_t Gateway::port() const { return impl_->acceptor.local_endpoint().port(); }

void Gateway::start()
{
    if (impl_->started) {
        return;
    }
    impl_->started = true;
    impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void Gateway::stop()
{
    if (impl_->stopped) {
        return;
    }
    impl_->stopped = true;
    impl_->stopping = true;
    // shutdown(2) wakes threads blocked in accept/read on these sockets.
    ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
    if (impl_->accept_thread.joinable()) {
        impl_->accept_thread.join();
    }
    std::list<Impl::Session> sessions;
    {
        std::lock_guard lock(impl_->mu);
        for (const auto& [fd, refs] : impl_->open_fds) {
            ::shutdown(fd, SHUT_RDWR);
        }
        sessions.swap(impl_->sessions);
    }
    for (auto& s : sessions) {
        s.thread.join();
    }
    boost::system::error_code ignored;
    impl_->acceptor.close(ignored);
}

}  // namespace awareness::harness
