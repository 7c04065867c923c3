#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/detect/detector.hpp"
#include "awareness/harness/config.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/validate/validator.hpp"

namespace awareness::harness {

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Consecutive failing live checks.
struct LiveEpisode {
    std::uint64_t start_ts_ms = 0;
    std::uint64_t end_ts_ms = 0;
    std::uint64_t checks = 0;
};

struct LiveStatus {
    std::optional<model::CanonicalJson> latest_backend;
    std::optional<model::CanonicalJson> latest_perceived;
    bool shame = false;  ///< the last check failed
    std::optional<std::uint64_t> last_check_ts_ms;
    gui::FaultConfig fault;
    std::uint64_t frames = 0;
    std::uint64_t messages = 0;
    std::uint64_t failures = 0;
    std::uint64_t checks = 0;
    std::vector<LiveEpisode> episodes;
    bool running = false;
};

/// `sim_now_ms` decides whether the fault is reported active.
nlohmann::json to_json(const LiveStatus& s, std::optional<std::uint64_t> sim_now_ms);

/// One validation tick as pushed to observers.
struct TickPayload {
    std::uint64_t ts_ms = 0;
    std::shared_ptr<const std::string> json;  ///< {frame, backend, perceived, shame, ts_ms, frame_seq}
};

/// Bounded queue that drops the oldest entry when full, so producers never block.
class TickQueue {
public:
    explicit TickQueue(std::size_t capacity);
    /// Returns true when an older entry was dropped to make room.
    bool push(TickPayload p);
    /// Waits until an entry arrives, the queue closes, or `timeout` passes.
    std::optional<TickPayload> pop(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;
    std::uint64_t dropped() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<TickPayload> items_;
    std::size_t capacity_;
    bool closed_ = false;
    std::uint64_t dropped_ = 0;
};

/// What the gateway needs from a live run.
class LiveEndpoint {
public:
    virtual ~LiveEndpoint() = default;
    virtual nlohmann::json status_json() const = 0;
    /// Opens a fault window of `duration_ms` at the current simulated time.
    virtual gui::FaultConfig inject_fault(gui::FaultMode mode, std::uint64_t duration_ms) = 0;
    virtual std::shared_ptr<TickQueue> subscribe(std::size_t capacity) = 0;
};

/// The live loop: a message source (in-process scenario or TCP backend), a
/// render thread ticking at render_fps, and a validation thread checking the
/// clean frame at validate_hz. Logs go to live_dir(cfg) in the offline
/// layout, plus live_verdicts.ndjson and faults.ndjson.
class LiveSession : public LiveEndpoint {
public:
    LiveSession(const HarnessConfig& cfg, std::shared_ptr<const detect::Detector> det);
    ~LiveSession() override;
    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    void start();
    /// Blocks until the configured duration has elapsed or stop() was called.
    /// Rethrows the first error raised on a worker thread.
    void wait();
    void stop();
    bool finished() const;

    std::shared_ptr<const LiveStatus> status() const;
    std::vector<validate::VerdictRecord> verdicts() const;
    std::optional<std::uint64_t> sim_now_ms() const;

    nlohmann::json status_json() const override;
    gui::FaultConfig inject_fault(gui::FaultMode mode, std::uint64_t duration_ms) override;
    std::shared_ptr<TickQueue> subscribe(std::size_t capacity) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace awareness::harness
