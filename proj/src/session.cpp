#include "muckle/session.hpp"

#include <array>

#include "muckle/errors.hpp"

namespace muckle {

std::string_view to_string(Role r) { return r == Role::initiator ? "initiator" : "responder"; }

std::string_view to_string(Status s) {
    switch (s) {
        case Status::unset: return "unset";
        case Status::active: return "active";
        case Status::accept: return "accept";
        case Status::reject: return "reject";
    }
    return "?";
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::none: return "none";
        case RejectReason::decode_error: return "decode-error";
        case RejectReason::schedule_order: return "schedule-order";
        case RejectReason::aead_failure: return "aead-failure";
        case RejectReason::cert_failure: return "cert-failure";
        case RejectReason::identity_mismatch: return "identity-mismatch";
        case RejectReason::mac_failure: return "mac-failure";
        case RejectReason::qkd_unavailable: return "qkd-unavailable";
        case RejectReason::state_error: return "state-error";
    }
    return "?";
}

namespace {

// Record sequence numbers restart per traffic secret: RHTS carries m3, IHTS
// m4, IAHTS m5 and m7, RAHTS m6 and m8.
std::uint64_t record_sequence(MessageType t) {
    return (t == MessageType::m7 || t == MessageType::m8) ? 1 : 0;
}

std::string associated_data(MessageType t) { return "Message " + std::to_string(message_index(t)); }

[[noreturn]] void fail(RejectReason r, const std::string& what) { throw ProtocolError(r, what); }

std::vector<Bytes> expect_fields(std::vector<Bytes> fields, std::size_t n, const char* what) {
    if (fields.size() != n) fail(RejectReason::decode_error, std::string(what) + ": wrong field count");
    return fields;
}

}  // namespace

struct Session::StageContext {
    StageContext(const Suite& suite, const KeyScheduleOptions& options)
        : transcript(suite.hash), schedule(suite.prf, options) {}

    TranscriptState transcript;
    KeySchedule schedule;
    std::optional<MessageType> expect;
    Bytes sk_c;
    Bytes sk_pq;
    std::optional<Certificate> peer_certificate;
};

Session::Session(SessionConfig config, Role role, std::shared_ptr<QkdClient> qkd, std::unique_ptr<RandomSource> rng)
    : config_(std::move(config)),
      role_(role),
      suite_(Suite::resolve(config_.suite)),
      qkd_(std::move(qkd)),
      rng_(std::move(rng)) {
    if (!qkd_) throw std::invalid_argument("Session needs a QKD client");
    if (!rng_) throw std::invalid_argument("Session needs a randomness source");
    if (config_.credential.certificate.kem_alg_id != config_.suite.auth_kem)
        throw std::invalid_argument("own certificate does not match the long-term KEM");
    stages_.emplace_back();
    ctx_ = std::make_unique<StageContext>(suite_, config_.schedule);
    if (role_ == Role::responder) ctx_->expect = MessageType::m1;
}

Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

const StageRecord& Session::stage_record(int t) const {
    if (t < 1 || t > stage()) throw std::out_of_range("no such stage " + std::to_string(t));
    return stages_[static_cast<std::size_t>(t - 1)];
}

std::optional<Bytes> Session::stage_key(int t) const {
    if (t < 1 || t > stage()) return std::nullopt;
    const auto& rec = stage_record(t);
    if (rec.status != Status::accept) return std::nullopt;
    return rec.key;
}

std::optional<MessageType> Session::expected() const { return ctx_->expect; }
const KeySchedule& Session::key_schedule() const { return ctx_->schedule; }
const TranscriptState& Session::transcript() const { return ctx_->transcript; }
const std::optional<Certificate>& Session::peer_certificate() const { return ctx_->peer_certificate; }

template <typename Fn>
std::vector<Bytes> Session::guarded(Fn&& fn) {
    RejectReason reason;
    std::string what;
    try {
        return fn();
    } catch (const ProtocolError& e) {
        reason = e.reason();
        what = e.what();
    } catch (const EncodingError& e) {
        reason = RejectReason::decode_error;
        what = e.what();
    } catch (const QkdError& e) {
        reason = RejectReason::qkd_unavailable;
        what = e.what();
    } catch (const ScheduleOrderError& e) {
        reason = RejectReason::schedule_order;
        what = e.what();
    } catch (const std::exception& e) {
        reason = RejectReason::state_error;
        what = e.what();
    }
    current().status = Status::reject;
    current().reason = reason;
    ctx_->expect.reset();
    throw ProtocolError(reason, what);
}

void Session::advance_stage() {
    if (current().status != Status::accept)
        throw ProtocolError(RejectReason::state_error,
                            "cannot advance from a stage in status " + std::string(to_string(current().status)));
    StageRecord next;
    next.sec_state_in = *current().sec_state_out;
    stages_.push_back(std::move(next));
    ctx_ = std::make_unique<StageContext>(suite_, config_.schedule);
    if (role_ == Role::responder) ctx_->expect = MessageType::m1;
}

std::vector<Bytes> Session::start() {
    if (role_ != Role::initiator) throw ProtocolError(RejectReason::state_error, "only the initiator starts a stage");
    if (current().status != Status::unset)
        throw ProtocolError(RejectReason::state_error, "stage already started");
    return guarded([&] { return initiator_start(); });
}

std::vector<Bytes> Session::receive(ByteView wire) {
    // Terminal stages are left untouched.
    if (current().status == Status::reject || current().status == Status::accept)
        throw ProtocolError(RejectReason::state_error,
                            "stage is " + std::string(to_string(current().status)) + "; no further messages");
    current().received.emplace_back(wire.begin(), wire.end());
    return guarded([&]() -> std::vector<Bytes> {
        if (!ctx_->expect) fail(RejectReason::state_error, "no message expected");
        const MessageType type = peek_type(wire);
        if (type != *ctx_->expect)
            fail(RejectReason::state_error, "expected m" + std::to_string(message_index(*ctx_->expect)) + ", got m" +
                                                std::to_string(message_index(type)));
        const HandshakeMessage m = decode_message(wire);
        switch (type) {
            case MessageType::m1: return responder_on_m1(m, wire);
            case MessageType::m2: return initiator_on_m2(m, wire);
            case MessageType::m3: return initiator_on_m3(m, wire);
            case MessageType::m4: return responder_on_m4(m, wire);
            case MessageType::m5: return responder_on_m5(m, wire);
            case MessageType::m6: return initiator_on_m6(m, wire);
            case MessageType::m7: return responder_on_m7(m, wire);
            case MessageType::m8: return initiator_on_m8(m, wire);
        }
        fail(RejectReason::state_error, "unreachable");
    });
}

// ---- helpers ----

Bytes Session::emit(MessageType type, Bytes wire) {
    ctx_->transcript.record(message_index(type), wire);
    current().sent.push_back(wire);
    return wire;
}

Bytes Session::seal_record(MessageType type, Secret traffic_secret, const std::vector<Bytes>& payload) {
    auto keys = traffic_key_expand(ctx_->schedule.get(traffic_secret), *suite_.aead, *suite_.prf);
    const auto seq = record_sequence(type);
    HandshakeMessage m;
    m.type = type;
    m.sequence = seq;
    m.fields = {suite_.aead->seal(keys.key, keys.nonce(seq), as_bytes(associated_data(type)), encode_fields(payload))};
    return encode_message(m);
}

std::vector<Bytes> Session::open_record(const HandshakeMessage& m, Secret traffic_secret) {
    const auto seq = record_sequence(m.type);
    const std::string name = "m" + std::to_string(message_index(m.type));
    if (m.sequence != seq) fail(RejectReason::aead_failure, name + ": unexpected record sequence number");
    auto keys = traffic_key_expand(ctx_->schedule.get(traffic_secret), *suite_.aead, *suite_.prf);
    auto pt = suite_.aead->open(keys.key, keys.nonce(seq), as_bytes(associated_data(m.type)), m.fields.at(0));
    if (!pt) fail(RejectReason::aead_failure, name + ": record authentication failed");
    return decode_fields(*pt);
}

Certificate Session::check_peer_certificate(ByteView encoded) {
    Certificate cert = Certificate::decode(encoded);
    if (cert.subject_id != config_.peer_id)
        fail(RejectReason::identity_mismatch,
             "certificate names '" + cert.subject_id + "', expected '" + config_.peer_id + "'");
    if (!config_.trust_store.verify(cert)) fail(RejectReason::cert_failure, "certificate not trusted");
    if (cert.kem_alg_id != suite_.auth->id() || cert.public_key.size() != suite_.auth->public_key_len())
        fail(RejectReason::cert_failure, "certificate key does not match the long-term KEM");
    ctx_->peer_certificate = cert;
    return cert;
}

void Session::accept_stage() {
    auto& rec = current();
    rec.key = ctx_->schedule.stage_key();
    rec.sec_state_out = ctx_->schedule.get(Secret::sec_state_next);
    rec.status = Status::accept;
    ctx_->expect.reset();
}

// ---- initiator ----

std::vector<Bytes> Session::initiator_start() {
    auto& rec = current();
    rec.status = Status::active;
    auto& ks = ctx_->schedule;

    Bytes n_i = rng_->bytes(kNonceLen);
    Bytes pk_c;
    if (suite_.classical) {
        auto kp = suite_.classical->keygen(*rng_);
        pk_c = std::move(kp.public_key);
        ctx_->sk_c = std::move(kp.secret_key);
        rec.ephemeral.c = ctx_->sk_c;
    }
    auto kp_pq = suite_.pq->keygen(*rng_);
    ctx_->sk_pq = kp_pq.secret_key;
    rec.ephemeral.q = ctx_->sk_pq;

    QkdKey qk = qkd_->get_key(config_.peer_id);
    if (qk.key.size() != kQkdKeyLen || qk.key_id.size() != kQkdKeyIdLen)
        fail(RejectReason::qkd_unavailable, "QKD key or key id has the wrong length");
    rec.ephemeral.s = qk.key;
    rec.qkd_key_id = qk.key_id;

    ks.set_input(Secret::k_q, qk.key);
    ks.set_input(Secret::sec_state_in, rec.sec_state_in);

    HandshakeMessage m1{MessageType::m1, 0, {pk_c, kp_pq.public_key, n_i, qk.key_id}};
    auto out = emit(MessageType::m1, encode_message(m1));
    ctx_->expect = MessageType::m2;
    return {out};
}

std::vector<Bytes> Session::initiator_on_m2(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    const Bytes& ct_c = m.fields[0];
    const Bytes& ct_pq = m.fields[1];
    const Bytes& n_r = m.fields[2];
    if (n_r.size() != kNonceLen) fail(RejectReason::decode_error, "m2: responder nonce has wrong length");

    Bytes ss_c;
    if (suite_.classical) {
        if (ct_c.empty()) fail(RejectReason::decode_error, "m2: classical ciphertext missing");
        auto ss = suite_.classical->decaps(ctx_->sk_c, ct_c);
        if (!ss) fail(RejectReason::decode_error, "m2: classical decapsulation failed");
        ss_c = std::move(*ss);
    } else if (!ct_c.empty()) {
        fail(RejectReason::decode_error, "m2: unexpected classical ciphertext");
    }
    auto ss_pq = suite_.pq->decaps(ctx_->sk_pq, ct_pq);
    if (!ss_pq) fail(RejectReason::decode_error, "m2: post-quantum decapsulation failed");

    ks.set_input(Secret::ss_c, ss_c);
    ks.set_input(Secret::ss_pq, *ss_pq);
    ctx_->transcript.record(2, wire);
    ks.derive_handshake_secrets(ctx_->transcript);
    ctx_->expect = MessageType::m3;
    return {};
}

std::vector<Bytes> Session::initiator_on_m3(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = open_record(m, Secret::RHTS);
    payload = expect_fields(std::move(payload), 1, "m3");
    Certificate cert_r = check_peer_certificate(payload[0]);
    ctx_->transcript.record(3, wire);

    auto enc = suite_.auth->encaps(cert_r.public_key, *rng_);
    ks.set_input(Secret::ss_I, enc.shared_secret);
    auto m4 = emit(MessageType::m4, seal_record(MessageType::m4, Secret::IHTS, {enc.ciphertext}));

    ks.derive_authenticated_secrets(ctx_->transcript);
    auto m5 = emit(MessageType::m5,
                   seal_record(MessageType::m5, Secret::IAHTS, {config_.credential.certificate.encode()}));
    ctx_->expect = MessageType::m6;
    return {m4, m5};
}

std::vector<Bytes> Session::initiator_on_m6(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = expect_fields(open_record(m, Secret::RAHTS), 1, "m6");
    auto ss_r = suite_.auth->decaps(config_.credential.secret_key, payload[0]);
    if (!ss_r) fail(RejectReason::decode_error, "m6: long-term decapsulation failed");
    ks.set_input(Secret::ss_R, *ss_r);
    ctx_->transcript.record(6, wire);
    ks.derive_master_and_finished(ctx_->transcript);

    Bytes tag = suite_.mac->auth(ks.get(Secret::fk_I), ctx_->transcript.digest(3));
    if (config_.finished_tag_hook) config_.finished_tag_hook(tag);
    auto m7 = emit(MessageType::m7, seal_record(MessageType::m7, Secret::IAHTS, {tag}));
    ks.derive_initiator_application_secret(ctx_->transcript);
    ctx_->expect = MessageType::m8;
    return {m7};
}

std::vector<Bytes> Session::initiator_on_m8(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = expect_fields(open_record(m, Secret::RAHTS), 1, "m8");
    if (!suite_.mac->verify(ks.get(Secret::fk_R), ctx_->transcript.digest(4), payload[0]))
        fail(RejectReason::mac_failure, "m8: responder finished tag does not verify");
    ctx_->transcript.record(8, wire);
    ks.derive_application_and_state(ctx_->transcript);
    accept_stage();
    return {};
}

// ---- responder ----

std::vector<Bytes> Session::responder_on_m1(const HandshakeMessage& m, ByteView wire) {
    auto& rec = current();
    rec.status = Status::active;
    auto& ks = ctx_->schedule;

    const Bytes& pk_c = m.fields[0];
    const Bytes& pk_pq = m.fields[1];
    const Bytes& n_i = m.fields[2];
    const Bytes& key_id = m.fields[3];
    if (n_i.size() != kNonceLen) fail(RejectReason::decode_error, "m1: initiator nonce has wrong length");
    if (key_id.size() != kQkdKeyIdLen) fail(RejectReason::decode_error, "m1: QKD key id has wrong length");

    Bytes n_r = rng_->bytes(kNonceLen);
    Bytes ct_c, ss_c;
    if (!pk_c.empty()) {
        if (!suite_.classical) fail(RejectReason::decode_error, "m1: classical KEM not configured");
        auto enc = suite_.classical->encaps(pk_c, *rng_);
        ct_c = std::move(enc.ciphertext);
        ss_c = std::move(enc.shared_secret);
        rec.ephemeral.c = ss_c;
    }
    auto enc_pq = suite_.pq->encaps(pk_pq, *rng_);
    rec.ephemeral.q = enc_pq.shared_secret;

    Bytes k_q = qkd_->get_key_by_id(config_.peer_id, key_id);
    if (k_q.size() != kQkdKeyLen) fail(RejectReason::qkd_unavailable, "QKD key has the wrong length");
    rec.ephemeral.s = k_q;
    rec.qkd_key_id = key_id;

    ks.set_input(Secret::ss_c, ss_c);
    ks.set_input(Secret::ss_pq, enc_pq.shared_secret);
    ks.set_input(Secret::k_q, k_q);
    ks.set_input(Secret::sec_state_in, rec.sec_state_in);

    ctx_->transcript.record(1, wire);
    HandshakeMessage m2{MessageType::m2, 0, {ct_c, enc_pq.ciphertext, n_r}};
    auto out2 = emit(MessageType::m2, encode_message(m2));
    ks.derive_handshake_secrets(ctx_->transcript);
    auto out3 = emit(MessageType::m3,
                     seal_record(MessageType::m3, Secret::RHTS, {config_.credential.certificate.encode()}));
    ctx_->expect = MessageType::m4;
    return {out2, out3};
}

std::vector<Bytes> Session::responder_on_m4(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = expect_fields(open_record(m, Secret::IHTS), 1, "m4");
    auto ss_i = suite_.auth->decaps(config_.credential.secret_key, payload[0]);
    if (!ss_i) fail(RejectReason::decode_error, "m4: long-term decapsulation failed");
    ks.set_input(Secret::ss_I, *ss_i);
    ctx_->transcript.record(4, wire);
    ks.derive_authenticated_secrets(ctx_->transcript);
    ctx_->expect = MessageType::m5;
    return {};
}

std::vector<Bytes> Session::responder_on_m5(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = expect_fields(open_record(m, Secret::IAHTS), 1, "m5");
    Certificate cert_i = check_peer_certificate(payload[0]);
    ctx_->transcript.record(5, wire);

    // Encapsulate to the initiator's long-term key to authenticate it.
    auto enc = suite_.auth->encaps(cert_i.public_key, *rng_);
    ks.set_input(Secret::ss_R, enc.shared_secret);
    auto m6 = emit(MessageType::m6, seal_record(MessageType::m6, Secret::RAHTS, {enc.ciphertext}));
    ks.derive_master_and_finished(ctx_->transcript);
    ctx_->expect = MessageType::m7;
    return {m6};
}

std::vector<Bytes> Session::responder_on_m7(const HandshakeMessage& m, ByteView wire) {
    auto& ks = ctx_->schedule;
    auto payload = expect_fields(open_record(m, Secret::IAHTS), 1, "m7");
    if (!suite_.mac->verify(ks.get(Secret::fk_I), ctx_->transcript.digest(3), payload[0]))
        fail(RejectReason::mac_failure, "m7: initiator finished tag does not verify");
    ctx_->transcript.record(7, wire);
    ks.derive_initiator_application_secret(ctx_->transcript);

    Bytes tag = suite_.mac->auth(ks.get(Secret::fk_R), ctx_->transcript.digest(4));
    if (config_.finished_tag_hook) config_.finished_tag_hook(tag);
    auto m8 = emit(MessageType::m8, seal_record(MessageType::m8, Secret::RAHTS, {tag}));
    ks.derive_application_and_state(ctx_->transcript);
    accept_stage();
    return {m8};
}

}  // namespace muckle
