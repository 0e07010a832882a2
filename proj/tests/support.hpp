#pragma once

// Shared drivers for session tests and the acceptance binary.

#include <functional>
#include <optional>
#include <vector>

#include "muckle/bench.hpp"
#include "muckle/session.hpp"
#include "muckle/wire.hpp"

namespace support {

using namespace muckle;

struct PartyOutcome {
    Status status = Status::unset;
    RejectReason reason = RejectReason::none;
    std::optional<Bytes> key;
};

struct StageOutcome {
    PartyOutcome initiator, responder;
    std::vector<Bytes> wire;  // as delivered
};

/// Rewrites a message in flight; returning false drops it.
using Tamper = std::function<bool(MessageType type, Bytes& wire)>;

inline PartyOutcome outcome_of(const Session& s) {
    return {s.status(), s.reject_reason(), s.stage_key(s.stage())};
}

/// Relays one stage between the pair, applying `tamper` to each message.
/// Stops at the first ProtocolError or when nothing is left to deliver.
inline StageOutcome run_tampered_stage(Session& initiator, Session& responder, const Tamper& tamper) {
    StageOutcome out;
    if (initiator.status() == Status::accept) initiator.advance_stage();
    if (responder.status() == Status::accept) responder.advance_stage();
    std::vector<std::pair<Session*, Bytes>> queue;
    try {
        for (auto& m : initiator.start()) queue.emplace_back(&responder, std::move(m));
        while (!queue.empty()) {
            auto [to, wire] = std::move(queue.front());
            queue.erase(queue.begin());
            if (tamper && !tamper(peek_type(wire), wire)) continue;
            out.wire.push_back(wire);
            Session* from = to == &responder ? &initiator : &responder;
            for (auto& reply : to->receive(wire)) queue.emplace_back(from, std::move(reply));
        }
    } catch (const ProtocolError&) {
    }
    out.initiator = outcome_of(initiator);
    out.responder = outcome_of(responder);
    return out;
}

/// Flips `mask` into byte `pos` of the first message of type `target`.
inline Tamper flip_byte(MessageType target, std::size_t pos, std::uint8_t mask = 0x01) {
    return [=, done = false](MessageType type, Bytes& wire) mutable {
        if (!done && type == target && pos < wire.size()) {
            wire[pos] ^= mask;
            done = true;
        }
        return true;
    };
}

inline Tamper drop(MessageType target) {
    return [=](MessageType type, Bytes&) { return type != target; };
}

/// Lengths of each honest wire message for a deployment.
inline std::vector<std::size_t> honest_lengths(const bench::LocalDeployment& d, std::uint64_t seed) {
    auto pair = bench::make_session_pair(d, seed);
    std::vector<Bytes> wire;
    bench::run_stage(pair.initiator, pair.responder, &wire);
    std::vector<std::size_t> lens(8);
    for (const auto& w : wire) lens[static_cast<std::size_t>(message_index(peek_type(w)) - 1)] = w.size();
    return lens;
}

}  // namespace support
