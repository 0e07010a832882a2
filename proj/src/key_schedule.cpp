#include "muckle/key_schedule.hpp"

#include <stdexcept>
#include <string>

#include "muckle/errors.hpp"

namespace muckle {

namespace {

constexpr std::array<int, 6> kCovered = {0, 2, 4, 6, 7, 8};

constexpr std::array<std::string_view, kSecretCount> kSecretNames = {
    "ss_c", "ss_pq", "k_q",   "sec_state_in", "ss_I",  "ss_R",  "k_c",  "k_pq", "k0",
    "k1",   "k2",    "k3",    "IHTS",         "RHTS",  "dHS",   "AHS",  "IAHTS", "RAHTS",
    "dAHS", "MS",    "fk_I",  "fk_R",         "IATS",  "RATS",  "sec_state_next",
};

std::string_view label(int i) { return kLabels.at(static_cast<std::size_t>(i)); }

}  // namespace

// ---- TranscriptState ----

TranscriptState::TranscriptState(std::shared_ptr<const HashAlgorithm> hash) : hash_(std::move(hash)) {
    digests_[0] = hash_->digest({});
}

int TranscriptState::messages_covered(int j) {
    if (j < 0 || j > 5) throw std::out_of_range("transcript digest index must be 0..5");
    return kCovered[static_cast<std::size_t>(j)];
}

void TranscriptState::record(int index, ByteView wire) {
    if (index != recorded() + 1 || index > 8)
        throw ScheduleOrderError("transcript: expected m" + std::to_string(recorded() + 1) + ", got m" +
                                 std::to_string(index));
    messages_.emplace_back(wire.begin(), wire.end());
    for (int j = 1; j < 6; ++j) {
        if (kCovered[static_cast<std::size_t>(j)] == index) {
            Bytes all;
            for (const auto& m : messages_) append(all, m);
            digests_[static_cast<std::size_t>(j)] = hash_->digest(all);
        }
    }
}

const Bytes& TranscriptState::message(int index) const {
    if (index < 1 || index > recorded()) throw ScheduleOrderError("transcript: m" + std::to_string(index) + " not recorded");
    return messages_[static_cast<std::size_t>(index - 1)];
}

bool TranscriptState::has_digest(int j) const {
    return j >= 0 && j < 6 && digests_[static_cast<std::size_t>(j)].has_value();
}

const Bytes& TranscriptState::digest(int j) const {
    if (!has_digest(j)) throw ScheduleOrderError("transcript: H" + std::to_string(j) + " not available yet");
    return *digests_[static_cast<std::size_t>(j)];
}

// ---- names ----

std::string_view secret_name(Secret s) { return kSecretNames.at(static_cast<std::size_t>(s)); }

std::optional<Secret> secret_from_name(std::string_view name) {
    for (int i = 0; i < kSecretCount; ++i)
        if (kSecretNames[static_cast<std::size_t>(i)] == name) return static_cast<Secret>(i);
    return std::nullopt;
}

// ---- KeySchedule ----

KeySchedule::KeySchedule(std::shared_ptr<const DualPrf> prf, KeyScheduleOptions options)
    : prf_(std::move(prf)), options_(options) {}

void KeySchedule::put(Secret s, Bytes value) {
    auto& slot = values_[index(s)];
    if (slot) throw ScheduleOrderError("key schedule: " + std::string(secret_name(s)) + " already set");
    slot = std::move(value);
}

void KeySchedule::set_input(Secret which, ByteView value) {
    if (static_cast<int>(which) >= kFirstDerived)
        throw std::invalid_argument("key schedule: " + std::string(secret_name(which)) + " is not an input");
    put(which, Bytes(value.begin(), value.end()));
}

const Bytes& KeySchedule::get(Secret s) const {
    const auto& slot = values_[index(s)];
    if (!slot) throw ScheduleOrderError("key schedule: " + std::string(secret_name(s)) + " not derived yet");
    return *slot;
}

Bytes KeySchedule::prf(Secret key, std::string_view lbl, ByteView context) const {
    return prf_->eval(get(key), concat(as_bytes(lbl), context));
}

void KeySchedule::derive_handshake_secrets(const TranscriptState& ts) {
    const Bytes& h0 = ts.digest(0);
    const Bytes& h1 = ts.digest(1);
    // Check every dependency before writing anything.
    for (auto s : {Secret::ss_c, Secret::ss_pq, Secret::k_q, Secret::sec_state_in}) get(s);

    put(Secret::k_c, prf(Secret::ss_c, label(0), h1));
    put(Secret::k_pq, prf(Secret::ss_pq, label(1), h1));
    put(Secret::k0, prf(Secret::k_pq, label(2), h1));
    put(Secret::k1, prf(Secret::k_c, label(3), get(Secret::k0)));
    put(Secret::k2, prf(Secret::k_q, label(4), get(Secret::k1)));
    put(Secret::k3, prf(Secret::sec_state_in, label(5), get(Secret::k2)));

    const bool table = options_.label_binding == LabelBinding::table;
    put(Secret::IHTS, prf(Secret::k3, label(table ? 6 : 7), h1));
    put(Secret::RHTS, prf(Secret::k3, label(table ? 7 : 8), h1));
    put(Secret::dHS, prf(Secret::k3, label(table ? 8 : 6), h0));
}

void KeySchedule::derive_authenticated_secrets(const TranscriptState& ts) {
    const Bytes& h0 = ts.digest(0);
    const Bytes& h2 = ts.digest(2);
    get(Secret::dHS);
    get(Secret::ss_I);

    put(Secret::AHS, prf(Secret::dHS, label(9), get(Secret::ss_I)));
    put(Secret::IAHTS, prf(Secret::AHS, label(10), h2));
    put(Secret::RAHTS, prf(Secret::AHS, label(11), h2));
    put(Secret::dAHS, prf(Secret::AHS, label(12), h0));
}

void KeySchedule::derive_master_and_finished(const TranscriptState& ts) {
    const Bytes& h3 = ts.digest(3);
    get(Secret::dAHS);
    get(Secret::ss_R);

    put(Secret::MS, prf(Secret::dAHS, label(13), get(Secret::ss_R)));
    put(Secret::fk_I, prf(Secret::MS, label(14), h3));
    put(Secret::fk_R, prf(Secret::MS, label(15), h3));
}

void KeySchedule::derive_initiator_application_secret(const TranscriptState& ts) {
    const Bytes& h4 = ts.digest(4);
    get(Secret::MS);
    put(Secret::IATS, prf(Secret::MS, label(16), h4));
}

void KeySchedule::derive_application_and_state(const TranscriptState& ts) {
    const Bytes& h5 = ts.digest(5);
    get(Secret::MS);
    get(Secret::dAHS);
    if (!has(Secret::IATS)) derive_initiator_application_secret(ts);

    const Secret rats_key = options_.rats_mode == RatsMode::figure ? Secret::dAHS : Secret::MS;
    put(Secret::RATS, prf(rats_key, label(17), h5));
    put(Secret::sec_state_next, prf(Secret::MS, label(18), h5));
}

Bytes KeySchedule::stage_key() const { return concat(get(Secret::IATS), get(Secret::RATS)); }

// ---- traffic keys ----

Bytes TrafficKeys::nonce(std::uint64_t sequence) const {
    Bytes n = iv_base;
    for (std::size_t i = 0; i < 8 && i < n.size(); ++i)
        n[n.size() - 1 - i] ^= static_cast<std::uint8_t>(sequence >> (8 * i));
    return n;
}

TrafficKeys traffic_key_expand(ByteView secret, const AeadAlgorithm& aead, const DualPrf& prf) {
    auto key = prf.eval(secret, as_bytes("key"));
    auto iv = prf.eval(secret, as_bytes("iv"));
    if (key.size() < aead.key_len() || iv.size() < aead.nonce_len())
        throw std::invalid_argument("traffic_key_expand: PRF output shorter than AEAD key or nonce");
    key.resize(aead.key_len());
    iv.resize(aead.nonce_len());
    return {std::move(key), std::move(iv)};
}

}  // namespace muckle
