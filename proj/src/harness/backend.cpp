#include "awareness/harness/backend.hpp"

#include <sys/socket.h>

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/model/scenario.hpp"

namespace awareness::harness {

namespace asio = boost::asio;
using asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class ClientSession : public std::enable_shared_from_this<ClientSession> {
public:
    explicit ClientSession(tcp::socket sock) : sock_(std::move(sock)) {}

    bool alive() const { return alive_; }

    void send(std::shared_ptr<const std::string> line)
    {
        if (!alive_ || closing_) {
            return;
        }
        queue_.push_back(std::move(line));
        if (!writing_) {
            write_next();
        }
    }

    /// Half-closes once everything queued has been written.
    void finish()
    {
        closing_ = true;
        if (!writing_) {
            shut();
        }
    }

private:
    void write_next()
    {
        writing_ = true;
        asio::async_write(sock_, asio::buffer(*queue_.front()),
                          [self = shared_from_this()](const boost::system::error_code& ec, std::size_t) {
                              self->queue_.pop_front();
                              if (ec) {
                                  self->alive_ = false;
                                  self->queue_.clear();
                                  boost::system::error_code ignored;
                                  self->sock_.close(ignored);
                                  return;
                              }
                              if (!self->queue_.empty()) {
                                  self->write_next();
                                  return;
                              }
                              self->writing_ = false;
                              if (self->closing_) {
                                  self->shut();
                              }
                          });
    }

    void shut()
    {
        boost::system::error_code ignored;
        sock_.shutdown(tcp::socket::shutdown_send, ignored);
        sock_.close(ignored);
        alive_ = false;
    }

    tcp::socket sock_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool writing_ = false;
    bool closing_ = false;
    bool alive_ = true;
};

}  // namespace

struct BackendServer::Impl {
    std::vector<model::ModelMessage> stream;
    std::FILE* log = nullptr;
    double time_scale = 1.0;

    asio::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::set<std::shared_ptr<ClientSession>> clients;  // touched only on the io thread

    std::thread io_thread;
    std::thread emitter;
    std::mutex mu;
    std::condition_variable cv;
    bool stop_requested = false;
    std::atomic<bool> done{false};
    std::atomic<std::uint64_t> emitted{0};
    std::atomic<std::uint64_t> accepted{0};
    bool started = false;
    bool joined = false;

    void accept()
    {
        acceptor.async_accept([this](const boost::system::error_code& ec, tcp::socket sock) {
            if (ec) {
                return;  // acceptor closed
            }
            boost::system::error_code ignored;
            sock.set_option(tcp::no_delay(true), ignored);
            clients.insert(std::make_shared<ClientSession>(std::move(sock)));
            ++accepted;
            accept();
        });
    }

    void broadcast(std::shared_ptr<const std::string> line)
    {
        for (auto it = clients.begin(); it != clients.end();) {
            if (!(*it)->alive()) {
                it = clients.erase(it);
                continue;
            }
            (*it)->send(line);
            ++it;
        }
    }

    void emit_all()
    {
        const auto wall0 = Clock::now();
        const std::uint64_t ts0 = stream.empty() ? 0 : stream.front().ts_ms;
        for (const auto& m : stream) {
            const auto due = wall0 + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double, std::milli>((m.ts_ms - ts0) / time_scale));
            {
                std::unique_lock lock(mu);
                if (cv.wait_until(lock, due, [this] { return stop_requested; })) {
                    break;
                }
            }
            auto line = std::make_shared<const std::string>(model::message_line(m) + "\n");
            std::fwrite(line->data(), 1, line->size(), log);
            std::fflush(log);
            ++emitted;
            asio::post(ioc, [this, line] { broadcast(line); });
        }
        asio::post(ioc, [this] {
            boost::system::error_code ignored;
            acceptor.close(ignored);
            for (const auto& c : clients) {
                c->finish();
            }
            clients.clear();
        });
        done = true;
    }
};

BackendServer::BackendServer(std::vector<model::ModelMessage> stream, std::filesystem::path log_path,
                             const std::string& host, std::uint16_t port, double time_scale)
    : impl_(std::make_unique<Impl>())
{
    if (!(time_scale > 0.0)) {
        throw InvalidConfig("time_scale must be positive");
    }
    impl_->stream = std::move(stream);
    impl_->time_scale = time_scale;
    try {
        const tcp::endpoint ep(asio::ip::make_address(host), port);
        impl_->acceptor.open(ep.protocol());
        impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
        impl_->acceptor.bind(ep);
        impl_->acceptor.listen();
    } catch (const boost::system::system_error& e) {
        throw BindError(host + ":" + std::to_string(port) + ": " + e.what());
    }
    if (log_path.has_parent_path()) {
        std::filesystem::create_directories(log_path.parent_path());
    }
    impl_->log = std::fopen(log_path.c_str(), "wb");
    if (impl_->log == nullptr) {
        throw IoError("cannot open " + log_path.string());
    }
}

BackendServer::~BackendServer()
{
    stop();
    wait();
    if (impl_->log != nullptr) {
        std::fclose(impl_->log);
    }
}

std::uint16_t BackendServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void BackendServer::start()
{
    if (impl_->started) {
        return;
    }
    impl_->started = true;
    impl_->accept();
    impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
    impl_->emitter = std::thread([this] { impl_->emit_all(); });
}

void BackendServer::wait()
{
    if (!impl_->started || impl_->joined) {
        return;
    }
    impl_->joined = true;
    impl_->emitter.join();
    impl_->io_thread.join();  // returns once the acceptor is closed and clients are flushed
    std::fflush(impl_->log);
}

void BackendServer::stop()
{
    {
        std::lock_guard lock(impl_->mu);
        impl_->stop_requested = true;
    }
    impl_->cv.notify_all();
}

bool BackendServer::finished() const { return impl_->done; }
std::uint64_t BackendServer::emitted() const { return impl_->emitted; }
std::uint64_t BackendServer::clients_accepted() const { return impl_->accepted; }

struct BackendClient::Impl {
    asio::io_context ioc;
    tcp::socket sock{ioc};
    asio::streambuf buf;
};

BackendClient::BackendClient(const std::string& host, std::uint16_t port, int attempts, int backoff_ms)
    : impl_(std::make_unique<Impl>())
{
    std::string last_error = "no attempt made";
    const tcp::endpoint ep(asio::ip::make_address(host), port);
    for (int i = 0; i < attempts; ++i) {
        if (i > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        }
        boost::system::error_code ec;
        impl_->sock.connect(ep, ec);
        if (!ec) {
            return;
        }
        last_error = ec.message();
        impl_->sock.close(ec);
    }
    throw ConnectError(host + ":" + std::to_string(port) + " after " + std::to_string(attempts) +
                       " attempts: " + last_error);
}

BackendClient::~BackendClient() = default;

std::optional<std::string> BackendClient::next_line()
{
    boost::system::error_code ec;
    const std::size_t n = asio::read_until(impl_->sock, impl_->buf, '\n', ec);
    if (ec) {
        return std::nullopt;  // EOF, reset or closed locally; a partial last line is dropped
    }
    std::string line(asio::buffers_begin(impl_->buf.data()), asio::buffers_begin(impl_->buf.data()) + n - 1);
    impl_->buf.consume(n);
    return line;
}

std::optional<model::ModelMessage> BackendClient::next()
{
    auto line = next_line();
    if (!line) {
        return std::nullopt;
    }
    return model::message_from_json(model::parse_json(*line));
}

void BackendClient::close()
{
    ::shutdown(impl_->sock.native_handle(), SHUT_RDWR);
}

}  // namespace awareness::harness
