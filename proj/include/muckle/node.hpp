#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "muckle/bench.hpp"
#include "muckle/qkd.hpp"
#include "muckle/session.hpp"
#include "muckle/transport.hpp"

namespace muckle {

/// Receives one human-readable event line. Never given secret material.
using EventSink = std::function<void(const std::string&)>;

/// "inproc" selects `local_kms` (must be non-null); anything else is an
/// HTTP endpoint of a key-delivery service.
std::shared_ptr<QkdClient> make_qkd_client(const std::string& endpoint, const std::string& self_id,
                                           std::shared_ptr<KeyManagementService> local_kms = nullptr);

/// Runs a responder session over one connection until the peer closes it.
/// Each accepted or rejected stage produces one event. Returns the number
/// of accepted stages; a rejected stage ends the connection and rethrows.
int serve_connection(TcpConnection& conn, const SessionConfig& config, std::shared_ptr<QkdClient> qkd,
                     std::unique_ptr<RandomSource> rng, const EventSink& events);

/// Accepts connections and serves each on its own thread with an isolated
/// session. Stops after `max_connections` connections when it is > 0.
void serve_responder(TcpListener& listener, const SessionConfig& config,
                     const std::function<std::shared_ptr<QkdClient>()>& qkd_factory, int max_connections,
                     const EventSink& events);

struct InitiatorOptions {
    std::string host;
    std::uint16_t port = 0;
    int stages = 1;
    int runs = 1;
    std::string suite_name;
};

/// Runs `runs` sessions of `stages` stages, one connection per session, and
/// measures wire bytes and wall time per stage. Throws ProtocolError on
/// reject and std::system_error on connection failure.
bench::BenchReport run_initiator(const SessionConfig& config, const InitiatorOptions& options,
                                 const std::function<std::shared_ptr<QkdClient>()>& qkd_factory,
                                 const EventSink& events);

}  // namespace muckle
