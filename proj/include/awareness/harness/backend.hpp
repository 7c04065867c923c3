#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "awareness/model/message.hpp"

namespace awareness::harness {

/// NDJSON-over-TCP message service. Emits one canonical message per line at
/// the pace of the message timestamps (scaled by `time_scale`), appends each
/// emitted line to the log, and fans it out to every connected client. A
/// client joining mid-stream receives lines from the current message on.
class BackendServer {
public:
    /// Binds immediately; port 0 picks an ephemeral port. Throws BindError.
    BackendServer(std::vector<model::ModelMessage> stream, std::filesystem::path log_path,
                  const std::string& host, std::uint16_t port, double time_scale = 1.0);
    ~BackendServer();
    BackendServer(const BackendServer&) = delete;
    BackendServer& operator=(const BackendServer&) = delete;

    std::uint16_t port() const;
    void start();
    /// Blocks until the stream is exhausted or stopped and every client is flushed.
    void wait();
    /// Ends the stream early; already emitted lines stay in the log.
    void stop();
    bool finished() const;
    std::uint64_t emitted() const;
    std::uint64_t clients_accepted() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Line reader for the backend stream.
class BackendClient {
public:
    /// Tries `attempts` times, `backoff_ms` apart. Throws ConnectError.
    BackendClient(const std::string& host, std::uint16_t port, int attempts = 1, int backoff_ms = 0);
    ~BackendClient();
    BackendClient(const BackendClient&) = delete;
    BackendClient& operator=(const BackendClient&) = delete;

    /// Next raw line without the newline; nullopt at end of stream.
    std::optional<std::string> next_line();
    std::optional<model::ModelMessage> next();
    /// Unblocks a pending read from another thread.
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace awareness::harness
