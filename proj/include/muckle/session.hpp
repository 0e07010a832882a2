#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "muckle/bytes.hpp"
#include "muckle/certificate.hpp"
#include "muckle/key_schedule.hpp"
#include "muckle/qkd.hpp"
#include "muckle/random.hpp"
#include "muckle/registry.hpp"
#include "muckle/wire.hpp"

namespace muckle {

inline constexpr std::size_t kNonceLen = 32;

enum class Role { initiator, responder };

/// Stage status. `unset` is the initial ⊥.
enum class Status { unset, active, accept, reject };

/// Why a stage was rejected.
enum class RejectReason {
    none,
    decode_error,
    schedule_order,
    aead_failure,
    cert_failure,
    identity_mismatch,
    mac_failure,
    qkd_unavailable,
    state_error,
};

std::string_view to_string(Role r);
std::string_view to_string(Status s);
std::string_view to_string(RejectReason r);

/// Thrown by Session when the current stage is rejected. The session's
/// status is already `reject` when this propagates.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(RejectReason reason, const std::string& what)
        : std::runtime_error(std::string(to_string(reason)) + ": " + what), reason_(reason) {}
    RejectReason reason() const { return reason_; }

private:
    RejectReason reason_;
};

struct SessionConfig {
    std::string self_id;
    std::string peer_id;  // intended partner; received certificates must name it
    SuiteIds suite;
    Credential credential;
    TrustStore trust_store;
    KeyScheduleOptions schedule;
    /// Fault injection for tests: may rewrite this party's finished tag
    /// (IF or RF) after it is computed and before it is encrypted.
    std::function<void(Bytes& tag)> finished_tag_hook;
};

/// Ephemeral secrets of one stage, by class: post-quantum (q), classical (c)
/// and the QKD key (s). The initiator stores its ephemeral KEM secret keys,
/// the responder the secrets it encapsulated.
struct EphemeralSecrets {
    std::optional<Bytes> q;
    std::optional<Bytes> c;
    std::optional<Bytes> s;
};

/// Per-stage record kept after the stage ends.
struct StageRecord {
    Status status = Status::unset;
    RejectReason reason = RejectReason::none;
    std::vector<Bytes> sent;      // m_s[t], wire bytes
    std::vector<Bytes> received;  // m_r[t], wire bytes as delivered
    std::optional<Bytes> key;     // k[t] = IATS || RATS, only once accepted
    Bytes sec_state_in;           // SecState the stage started from
    std::optional<Bytes> sec_state_out;  // pss[t]
    EphemeralSecrets ephemeral;
    Bytes qkd_key_id;
};

/// One party's view of a multi-stage session.
///
/// Synchronous message-in/messages-out state machine: the initiator calls
/// start(), then every received wire message goes to receive(), which
/// returns the messages to transmit next. Any failure rejects the current
/// stage and throws ProtocolError; a rejected stage is terminal.
///
/// Not thread-safe; one owner per session.
class Session {
public:
    Session(SessionConfig config, Role role, std::shared_ptr<QkdClient> qkd, std::unique_ptr<RandomSource> rng);
    ~Session();
    Session(Session&&) noexcept;
    Session& operator=(Session&&) noexcept;

    /// Initiator only: emit m1 for a fresh stage.
    std::vector<Bytes> start();
    /// Process one wire message; returns the messages to send in reply.
    std::vector<Bytes> receive(ByteView wire);
    /// Open the next stage after the current one accepted. The new stage is
    /// keyed from the previous stage's SecState.
    void advance_stage();

    Role role() const { return role_; }
    const SessionConfig& config() const { return config_; }
    const Suite& suite() const { return suite_; }

    /// Current stage, starting at 1.
    int stage() const { return static_cast<int>(stages_.size()); }
    Status status() const { return current().status; }
    RejectReason reject_reason() const { return current().reason; }

    /// Record of stage t (1-based). Throws std::out_of_range.
    const StageRecord& stage_record(int t) const;
    /// k[t] when stage t accepted, else std::nullopt.
    std::optional<Bytes> stage_key(int t) const;

    /// Message type the session expects next, if any.
    std::optional<MessageType> expected() const;

    /// Live key schedule and transcript of the current stage (white-box
    /// access for tests and experiment adversaries).
    const KeySchedule& key_schedule() const;
    const TranscriptState& transcript() const;
    /// Certificate the peer presented in the current stage, once verified.
    const std::optional<Certificate>& peer_certificate() const;

private:
    struct StageContext;

    StageRecord& current() { return stages_.back(); }
    const StageRecord& current() const { return stages_.back(); }

    template <typename Fn>
    std::vector<Bytes> guarded(Fn&& fn);

    std::vector<Bytes> initiator_start();
    std::vector<Bytes> responder_on_m1(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> initiator_on_m2(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> initiator_on_m3(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> responder_on_m4(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> responder_on_m5(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> initiator_on_m6(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> responder_on_m7(const HandshakeMessage& m, ByteView wire);
    std::vector<Bytes> initiator_on_m8(const HandshakeMessage& m, ByteView wire);

    Bytes seal_record(MessageType type, Secret traffic_secret, const std::vector<Bytes>& payload);
    std::vector<Bytes> open_record(const HandshakeMessage& m, Secret traffic_secret);
    Certificate check_peer_certificate(ByteView encoded);
    Bytes emit(MessageType type, Bytes wire);
    void accept_stage();

    SessionConfig config_;
    Role role_;
    Suite suite_;
    std::shared_ptr<QkdClient> qkd_;
    std::unique_ptr<RandomSource> rng_;
    std::vector<StageRecord> stages_;
    std::unique_ptr<StageContext> ctx_;
};

}  // namespace muckle
