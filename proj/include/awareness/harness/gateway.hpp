#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "awareness/harness/live.hpp"

namespace awareness::harness {

/// HTTP/1.1 + WebSocket front of a live run:
///   GET /status   LiveStatus JSON
///   POST /fault   {"mode", "duration_ms"}; 400 on an unknown mode or a malformed body
///   WS /live      one JSON text message per validation tick
/// Each WS connection has its own drop-oldest queue of `ws_queue` ticks.
class Gateway {
public:
    /// Binds immediately; port 0 picks an ephemeral port. Throws BindError.
    Gateway(LiveEndpoint& live, const std::string& host, std::uint16_t port, std::size_t ws_queue = 8);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    std::uint16_t port() const;
    void start();
    /// Closes the listener and every open connection, then joins.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace awareness::harness
