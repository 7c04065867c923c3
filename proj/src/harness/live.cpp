#include "awareness/harness/live.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "awareness/error.hpp"
#include "awareness/harness/backend.hpp"
#include "awareness/interp/interpreter.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/raster/png_io.hpp"

namespace awareness::harness {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
    std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

nlohmann::json to_json(const LiveStatus& s, std::optional<std::uint64_t> sim_now_ms)
{
    auto opt_text = [](const std::optional<model::CanonicalJson>& c) {
        return c ? nlohmann::json(c->text) : nlohmann::json(nullptr);
    };
    nlohmann::json fault = gui::to_json(s.fault);
    fault["active"] = sim_now_ms.has_value() && s.fault.active_at(*sim_now_ms);
    nlohmann::json episodes = nlohmann::json::array();
    for (const auto& e : s.episodes) {
        episodes.push_back({{"start_ts_ms", e.start_ts_ms}, {"end_ts_ms", e.end_ts_ms}, {"checks", e.checks}});
    }
    return {{"latest_backend", opt_text(s.latest_backend)},
            {"latest_perceived", opt_text(s.latest_perceived)},
            {"shame", s.shame},
            {"last_check_ts_ms", s.last_check_ts_ms ? nlohmann::json(*s.last_check_ts_ms) : nlohmann::json(nullptr)},
            {"fault", fault},
            {"counters",
             {{"frames", s.frames}, {"messages", s.messages}, {"failures", s.failures}, {"checks", s.checks}}},
            {"episodes", episodes},
            {"sim_time_ms", sim_now_ms ? nlohmann::json(*sim_now_ms) : nlohmann::json(nullptr)},
            {"running", s.running}};
}

TickQueue::TickQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

bool TickQueue::push(TickPayload p)
{
    bool dropped = false;
    {
        std::lock_guard lock(mu_);
        if (closed_) {
            return false;
        }
        if (items_.size() == capacity_) {
            items_.pop_front();
            ++dropped_;
            dropped = true;
        }
        items_.push_back(std::move(p));
    }
    cv_.notify_one();
    return dropped;
}

std::optional<TickPayload> TickQueue::pop(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [this] { return !items_.empty() || closed_; });
    if (items_.empty()) {
        return std::nullopt;
    }
    TickPayload p = std::move(items_.front());
    items_.pop_front();
    return p;
}

void TickQueue::close()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool TickQueue::closed() const
{
    std::lock_guard lock(mu_);
    return closed_ && items_.empty();
}

std::uint64_t TickQueue::dropped() const
{
    std::lock_guard lock(mu_);
    return dropped_;
}

namespace {

/// Unbounded FIFO between two threads.
template <class T>
class Channel {
public:
    enum class Pop { item, timeout, closed };

    void push(T v)
    {
        {
            std::lock_guard lock(mu_);
            items_.push_back(std::move(v));
        }
        cv_.notify_all();
    }

    void close()
    {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    Pop pop_until(T& out, Clock::time_point deadline)
    {
        std::unique_lock lock(mu_);
        cv_.wait_until(lock, deadline, [this] { return !items_.empty() || closed_; });
        return take(out);
    }

    Pop pop(T& out)
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return !items_.empty() || closed_; });
        return take(out);
    }

    /// Moves everything currently queued into `out`.
    void drain(std::deque<T>& out)
    {
        std::lock_guard lock(mu_);
        while (!items_.empty()) {
            out.push_back(std::move(items_.front()));
            items_.pop_front();
        }
    }

private:
    Pop take(T& out)
    {
        if (!items_.empty()) {
            out = std::move(items_.front());
            items_.pop_front();
            return Pop::item;
        }
        return closed_ ? Pop::closed : Pop::timeout;
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<T> items_;
    bool closed_ = false;
};

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_log(const fs::path& path)
{
    File f(std::fopen(path.c_str(), "wb"));
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return f;
}

void append_line(std::FILE* f, const std::string& line)
{
    std::fwrite(line.data(), 1, line.size(), f);
    std::fputc('\n', f);
    std::fflush(f);
}

struct Job {
    gui::FrameLogEntry entry;
    std::shared_ptr<const raster::Image> frame;
};

/// How long the validator waits for the message that closes a frame's pairing window.
constexpr auto kPairingGrace = std::chrono::seconds(1);

}  // namespace

struct LiveSession::Impl {
    HarnessConfig cfg;
    std::shared_ptr<const detect::Detector> det;
    interp::AffordanceMapping mapping;
    fs::path dir;

    // Stop flag and clock anchor share one lock so sleepers wake on either.
    mutable std::mutex mu;
    std::condition_variable cv;
    bool stop_requested = false;
    std::optional<std::pair<Clock::time_point, std::uint64_t>> anchor;
    std::unique_ptr<BackendClient> client;

    Channel<model::ModelMessage> render_inbox;
    Channel<model::ModelMessage> validate_inbox;
    Channel<Job> jobs;

    mutable std::mutex fault_mu;
    gui::FaultConfig fault;
    File fault_log;

    mutable std::mutex status_mu;
    std::shared_ptr<const LiveStatus> status = std::make_shared<const LiveStatus>();

    mutable std::mutex hub_mu;
    std::vector<std::weak_ptr<TickQueue>> subscribers;

    mutable std::mutex verdict_mu;
    std::vector<validate::VerdictRecord> verdicts;

    std::mutex error_mu;
    std::exception_ptr error;

    std::thread source_thread;
    std::thread render_thread;
    std::thread validate_thread;
    bool started = false;
    bool joined = false;
    std::atomic<bool> done{false};

    void request_stop()
    {
        {
            std::lock_guard lock(mu);
            stop_requested = true;
            if (client) {
                client->close();
            }
        }
        cv.notify_all();
    }

    bool stopping() const
    {
        std::lock_guard lock(mu);
        return stop_requested;
    }

    void fail(std::exception_ptr e)
    {
        {
            std::lock_guard lock(error_mu);
            if (!error) {
                error = e;
            }
        }
        request_stop();
    }

    template <class F>
    void guarded(F&& body)
    {
        try {
            body();
        } catch (...) {
            fail(std::current_exception());
        }
    }

    template <class F>
    void update_status(F&& edit)
    {
        std::lock_guard lock(status_mu);
        auto next = std::make_shared<LiveStatus>(*status);
        edit(*next);
        status = std::move(next);
    }

    void set_anchor(std::uint64_t sim_ms)
    {
        {
            std::lock_guard lock(mu);
            if (!anchor) {
                anchor.emplace(Clock::now(), sim_ms);
            }
        }
        cv.notify_all();
    }

    std::optional<std::uint64_t> sim_now() const
    {
        std::lock_guard lock(mu);
        if (!anchor) {
            return std::nullopt;
        }
        const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - anchor->first).count();
        return anchor->second + static_cast<std::uint64_t>(std::max(0.0, elapsed * cfg.live.time_scale));
    }

    /// Wall time at which the simulated clock reads `sim_ms`; requires an anchor.
    Clock::time_point wall_at(double sim_ms) const
    {
        std::lock_guard lock(mu);
        const double ms = (sim_ms - static_cast<double>(anchor->second)) / cfg.live.time_scale;
        return anchor->first + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(ms));
    }

    /// False when stopped before `t`.
    bool sleep_until(Clock::time_point t)
    {
        std::unique_lock lock(mu);
        return !cv.wait_until(lock, t, [this] { return stop_requested; });
    }

    std::uint64_t duration_ms() const
    {
        return static_cast<std::uint64_t>(std::llround(cfg.live.duration_s * 1000.0));
    }

    void deliver(const model::ModelMessage& m, std::FILE* log)
    {
        append_line(log, model::message_line(m));
        render_inbox.push(m);
        validate_inbox.push(m);
        update_status([](LiveStatus& s) { ++s.messages; });
    }

    void run_source()
    {
        File log = open_log(dir / kMessagesFile);
        if (cfg.live.source == LiveSource::in_process) {
            const auto t0 = cfg.live.t0_ms;
            const auto end = t0 + duration_ms();
            set_anchor(t0);
            for (const auto& m : model::gen_scenario(cfg.scenario)) {
                if (m.ts_ms < t0) {
                    continue;
                }
                if (m.ts_ms >= end || !sleep_until(wall_at(static_cast<double>(m.ts_ms)))) {
                    break;
                }
                deliver(m, log.get());
            }
        } else {
            auto c = std::make_unique<BackendClient>(cfg.net.backend_host, cfg.net.backend_port,
                                                     cfg.live.connect_attempts, cfg.live.connect_backoff_ms);
            BackendClient* reader = c.get();
            {
                std::lock_guard lock(mu);
                if (stop_requested) {
                    return;
                }
                client = std::move(c);
            }
            std::optional<std::uint64_t> end;
            while (auto m = reader->next()) {
                if (!end) {
                    set_anchor(m->ts_ms);
                    end = m->ts_ms + duration_ms();
                }
                if (m->ts_ms >= *end) {
                    break;
                }
                deliver(*m, log.get());
            }
        }
        render_inbox.close();
        validate_inbox.close();
    }

    void run_render()
    {
        std::uint64_t t_first = 0;
        {
            std::unique_lock lock(mu);
            cv.wait(lock, [this] { return stop_requested || anchor.has_value(); });
            if (stop_requested) {
                jobs.close();
                return;
            }
            t_first = anchor->second;
        }
        const double fps = cfg.rates.render_fps;
        const double half_tick = 500.0 / fps;
        gui::Renderer renderer(cfg.view);
        gui::DirectorySink sink(dir);
        std::deque<model::ModelMessage> pending;
        std::uint64_t logged = 0;
        std::uint64_t next_check_index = 0;
        std::uint64_t next_check = t_first;
        const auto n = model::tick_count(cfg.live.duration_s, fps);
        for (std::uint64_t k = 0; k < n; ++k) {
            const std::uint64_t now = t_first + model::tick_ts_ms(k, fps);
            if (!sleep_until(wall_at(static_cast<double>(now) + half_tick))) {
                break;
            }
            render_inbox.drain(pending);
            std::vector<model::ModelMessage> arrivals;
            while (!pending.empty() && pending.front().ts_ms <= now) {
                arrivals.push_back(std::move(pending.front()));
                pending.pop_front();
            }
            gui::FaultConfig f;
            {
                std::lock_guard lock(fault_mu);
                f = fault;
            }
            const auto t = renderer.tick(arrivals, f, now);
            if (!t.frame) {
                continue;
            }
            gui::FrameLogEntry e{logged, now, gui::frame_path(logged), cfg.view.width, cfg.view.height,
                                 t.source_msg_seq};
            ++logged;
            sink.write(e, t.frame, t.changed);
            update_status([](LiveStatus& s) { ++s.frames; });
            if (now >= next_check) {
                jobs.push({e, t.frame});
                while (next_check <= now) {
                    next_check = t_first + model::tick_ts_ms(++next_check_index, cfg.rates.validate_hz);
                }
            }
        }
        jobs.close();
    }

    void publish(TickPayload p)
    {
        std::lock_guard lock(hub_mu);
        std::erase_if(subscribers, [](const std::weak_ptr<TickQueue>& w) { return w.expired(); });
        for (const auto& w : subscribers) {
            if (auto q = w.lock()) {
                q->push(p);
            }
        }
    }

    void run_validate()
    {
        File log = open_log(dir / kLiveVerdictsFile);
        std::vector<model::ModelMessage> history;
        bool inbox_closed = false;
        Job job;
        while (jobs.pop(job) == Channel<Job>::Pop::item) {
            // Everything with ts <= frame ts has arrived once a later message shows up.
            const auto deadline = std::max(Clock::now(), wall_at(static_cast<double>(job.entry.ts_ms))) + kPairingGrace;
            while (!inbox_closed && (history.empty() || history.back().ts_ms <= job.entry.ts_ms)) {
                model::ModelMessage m;
                const auto r = validate_inbox.pop_until(m, deadline);
                if (r == Channel<model::ModelMessage>::Pop::item) {
                    history.push_back(std::move(m));
                } else if (r == Channel<model::ModelMessage>::Pop::closed) {
                    inbox_closed = true;
                } else {
                    break;
                }
            }
            const auto pairing = validate::pair_logs(std::span(&job.entry, 1), history, cfg.window_ms);
            if (pairing.samples.empty()) {
                continue;
            }
            const auto perceived = interp::interpret(*job.frame, *det, mapping);
            const auto v = validate::judge(pairing.samples.front(), cfg.filter, perceived.tree);
            append_line(log.get(), model::canonicalize(validate::to_json(v)).text);
            {
                std::lock_guard lock(verdict_mu);
                verdicts.push_back(v);
            }
            update_status([&](LiveStatus& s) {
                const bool was_failing = s.shame;
                ++s.checks;
                s.shame = !v.pass;
                s.latest_backend = v.actual;
                s.latest_perceived = v.perceived;
                s.last_check_ts_ms = v.ts_ms;
                if (!v.pass) {
                    ++s.failures;
                    if (was_failing && !s.episodes.empty()) {
                        s.episodes.back().end_ts_ms = v.ts_ms;
                        ++s.episodes.back().checks;
                    } else {
                        s.episodes.push_back({v.ts_ms, v.ts_ms, 1});
                    }
                }
            });
            raster::Image shown = *job.frame;
            if (!v.pass) {
                gui::overlay_shame(shown, cfg.view);
            }
            const auto png = raster::encode_png(shown);
            const nlohmann::json payload{{"frame", base64_encode(png)},
                                         {"backend", v.actual.text},
                                         {"perceived", v.perceived.text},
                                         {"shame", !v.pass},
                                         {"ts_ms", v.ts_ms},
                                         {"frame_seq", v.frame_seq}};
            publish({v.ts_ms, std::make_shared<const std::string>(payload.dump())});
        }
    }

    void finalize()
    {
        std::lock_guard lock(hub_mu);
        for (const auto& w : subscribers) {
            if (auto q = w.lock()) {
                q->close();
            }
        }
        subscribers.clear();
    }
};

LiveSession::LiveSession(const HarnessConfig& cfg, std::shared_ptr<const detect::Detector> det)
    : impl_(std::make_unique<Impl>())
{
    validate(cfg);
    if (!det) {
        throw MissingArtifact("live session needs a trained detector");
    }
    impl_->cfg = cfg;
    impl_->det = std::move(det);
    impl_->mapping = interp::AffordanceMapping::for_detector(impl_->det->config());
    impl_->fault = cfg.fault;
    impl_->dir = live_dir(cfg);
    fs::remove_all(impl_->dir);
    fs::create_directories(impl_->dir);
    impl_->fault_log = open_log(impl_->dir / "faults.ndjson");
    impl_->update_status([&](LiveStatus& s) { s.fault = cfg.fault; });
}

LiveSession::~LiveSession()
{
    stop();
    try {
        wait();
    } catch (...) {
        // A destructor cannot report; callers that care call wait() themselves.
    }
}

void LiveSession::start()
{
    if (impl_->started) {
        return;
    }
    impl_->started = true;
    impl_->update_status([](LiveStatus& s) { s.running = true; });
    impl_->source_thread = std::thread([this] { impl_->guarded([this] { impl_->run_source(); }); });
    impl_->render_thread = std::thread([this] { impl_->guarded([this] { impl_->run_render(); }); });
    impl_->validate_thread = std::thread([this] { impl_->guarded([this] { impl_->run_validate(); }); });
}

void LiveSession::wait()
{
    if (impl_->started && !impl_->joined) {
        impl_->joined = true;
        impl_->render_thread.join();
        impl_->validate_thread.join();
        impl_->request_stop();
        impl_->render_inbox.close();
        impl_->validate_inbox.close();
        impl_->source_thread.join();
        impl_->finalize();
        impl_->update_status([](LiveStatus& s) { s.running = false; });
        impl_->done = true;
    }
    std::lock_guard lock(impl_->error_mu);
    if (impl_->error) {
        std::rethrow_exception(impl_->error);
    }
}

void LiveSession::stop() { impl_->request_stop(); }

bool LiveSession::finished() const { return impl_->done; }

std::shared_ptr<const LiveStatus> LiveSession::status() const
{
    std::lock_guard lock(impl_->status_mu);
    return impl_->status;
}

std::vector<validate::VerdictRecord> LiveSession::verdicts() const
{
    std::lock_guard lock(impl_->verdict_mu);
    return impl_->verdicts;
}

std::optional<std::uint64_t> LiveSession::sim_now_ms() const { return impl_->sim_now(); }

nlohmann::json LiveSession::status_json() const { return to_json(*status(), sim_now_ms()); }

gui::FaultConfig LiveSession::inject_fault(gui::FaultMode mode, std::uint64_t duration_ms)
{
    const std::uint64_t now = impl_->sim_now().value_or(impl_->cfg.live.t0_ms);
    gui::FaultConfig f;
    f.mode = mode;
    if (mode != gui::FaultMode::none) {
        f.window = gui::FaultWindow{now, now + duration_ms};
    }
    {
        std::lock_guard lock(impl_->fault_mu);
        impl_->fault = f;
        append_line(impl_->fault_log.get(),
                    model::canonicalize({{"at_ms", now}, {"fault", gui::to_json(f)}}).text);
    }
    impl_->update_status([&](LiveStatus& s) { s.fault = f; });
    return f;
}

std::shared_ptr<TickQueue> LiveSession::subscribe(std::size_t capacity)
{
    auto q = std::make_shared<TickQueue>(capacity);
    std::lock_guard lock(impl_->hub_mu);
    if (impl_->done) {
        q->close();
    } else {
        impl_->subscribers.push_back(q);
    }
    return q;
}

}  // namespace awareness::harness
