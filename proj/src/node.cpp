#include "muckle/node.hpp"

#include <chrono>
#include <mutex>
#include <thread>
#include <vector>

namespace muckle {

std::shared_ptr<QkdClient> make_qkd_client(const std::string& endpoint, const std::string& self_id,
                                           std::shared_ptr<KeyManagementService> local_kms) {
    if (endpoint == "inproc") {
        if (!local_kms) throw std::invalid_argument("the in-process QKD service is only available in loopback mode");
        return std::make_shared<InProcessQkdClient>(std::move(local_kms), self_id);
    }
    return std::make_shared<HttpQkdClient>(endpoint, self_id);
}

namespace {

std::string stage_line(const Session& s, int t) {
    const auto& rec = s.stage_record(t);
    std::string line = std::string(to_string(s.role())) + " " + s.config().self_id + "<->" + s.config().peer_id +
                       " stage " + std::to_string(t) + " " + std::string(to_string(rec.status));
    if (rec.status == Status::reject) line += " reason=" + std::string(to_string(rec.reason));
    return line;
}

}  // namespace

int serve_connection(TcpConnection& conn, const SessionConfig& config, std::shared_ptr<QkdClient> qkd,
                     std::unique_ptr<RandomSource> rng, const EventSink& events) {
    Session session(config, Role::responder, std::move(qkd), std::move(rng));
    int accepted = 0;
    while (auto wire = conn.receive_message()) {
        if (session.status() == Status::accept) session.advance_stage();
        std::vector<Bytes> replies;
        try {
            replies = session.receive(*wire);
        } catch (const ProtocolError&) {
            if (events) events(stage_line(session, session.stage()));
            conn.close();
            throw;
        }
        for (const auto& m : replies) conn.send(m);
        if (session.status() == Status::accept) {
            ++accepted;
            if (events) events(stage_line(session, session.stage()));
        }
    }
    return accepted;
}

void serve_responder(TcpListener& listener, const SessionConfig& config,
                     const std::function<std::shared_ptr<QkdClient>()>& qkd_factory, int max_connections,
                     const EventSink& events) {
    std::mutex events_mutex;
    const EventSink locked = [&](const std::string& line) {
        std::lock_guard lock(events_mutex);
        if (events) events(line);
    };
    std::vector<std::thread> workers;
    for (int served = 0; max_connections <= 0 || served < max_connections; ++served) {
        TcpConnection conn;
        try {
            conn = listener.accept();
        } catch (const std::system_error&) {
            break;  // listener shut down
        }
        workers.emplace_back([&, c = std::move(conn)]() mutable {
            try {
                serve_connection(c, config, qkd_factory(), std::make_unique<SystemRandom>(), locked);
            } catch (const ProtocolError&) {
                // already reported
            } catch (const std::exception& e) {
                locked(std::string("connection error: ") + e.what());
            }
        });
    }
    for (auto& w : workers) w.join();
}

bench::BenchReport run_initiator(const SessionConfig& config, const InitiatorOptions& options,
                                 const std::function<std::shared_ptr<QkdClient>()>& qkd_factory,
                                 const EventSink& events) {
    using clock = std::chrono::steady_clock;
    bench::BenchAccumulator acc;
    for (int run = 0; run < options.runs; ++run) {
        auto conn = TcpConnection::connect(options.host, options.port);
        Session session(config, Role::initiator, qkd_factory(), std::make_unique<SystemRandom>());
        for (int t = 1; t <= options.stages; ++t) {
            if (t > 1) session.advance_stage();
            const auto start = clock::now();
            try {
                for (const auto& m : session.start()) conn.send(m);
                while (session.status() != Status::accept) {
                    auto wire = conn.receive_message();
                    if (!wire) throw ProtocolError(RejectReason::state_error, "responder closed the connection");
                    for (const auto& m : session.receive(*wire)) conn.send(m);
                }
            } catch (const ProtocolError&) {
                if (events) events(stage_line(session, t));
                throw;
            }
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
            const auto& rec = session.stage_record(t);
            acc.add(bench::measured_sizes(rec.sent, rec.received), ms);
            if (events) events(stage_line(session, t));
        }
    }
    return acc.report(options.suite_name.empty() ? config.suite.describe() : options.suite_name, options.runs,
                      options.stages);
}

}  // namespace muckle
