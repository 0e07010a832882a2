#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "muckle/bytes.hpp"
#include "muckle/crypto.hpp"

namespace muckle {

/// Domain-separation labels l0..l18, in table order.
inline constexpr std::array<std::string_view, 19> kLabels = {
    "derive k c",    "derive k pq",   "first ck",      "second ck",     "third ck",
    "fourth ck",     "i hs traffic",  "r hs traffic",  "hs derived",    "first ak",
    "i ahs traffic", "r ahs traffic", "ahs derived",   "second ak",     "derive i fk",
    "derive r fk",   "i app traffic", "r app traffic", "secstate",
};

/// Which labels key the handshake traffic secrets. `table` binds by meaning
/// (IHTS <- "i hs traffic", RHTS <- "r hs traffic", dHS <- "hs derived");
/// `figure` uses the indices as drawn in the protocol diagram
/// (IHTS <- l7, RHTS <- l8, dHS <- l6).
enum class LabelBinding { table, figure };

/// Source of RATS. `figure`: F(dAHS, l17 || H5). `uniform`: F(MS, l17 || H5).
enum class RatsMode { figure, uniform };

struct KeyScheduleOptions {
    LabelBinding label_binding = LabelBinding::table;
    RatsMode rats_mode = RatsMode::figure;
};

/// Wire messages m1..m8 of one stage and the digests over their prefixes.
///
///   H0 = H("")            H1 = H(m1 || m2)       H2 = H(m1 || ... || m4)
///   H3 = H(m1 || ... m6)  H4 = H(m1 || ... m7)   H5 = H(m1 || ... || m8)
///
/// Messages must be recorded in order. A digest is readable only once all of
/// its messages are present.
class TranscriptState {
public:
    explicit TranscriptState(std::shared_ptr<const HashAlgorithm> hash);

    /// Appends m_index; index must equal recorded() + 1.
    void record(int index, ByteView wire);
    int recorded() const { return static_cast<int>(messages_.size()); }
    const Bytes& message(int index) const;
    const std::vector<Bytes>& messages() const { return messages_; }

    /// H_j for j in 0..5. Throws ScheduleOrderError when not yet available.
    const Bytes& digest(int j) const;
    bool has_digest(int j) const;

    /// Number of leading messages covered by H_j.
    static int messages_covered(int j);

private:
    std::shared_ptr<const HashAlgorithm> hash_;
    std::vector<Bytes> messages_;
    std::array<std::optional<Bytes>, 6> digests_;
};

/// Every input and derived value of one stage's key schedule.
enum class Secret : int {
    // inputs
    ss_c,
    ss_pq,
    k_q,
    sec_state_in,
    ss_I,
    ss_R,
    // derived
    k_c,
    k_pq,
    k0,
    k1,
    k2,
    k3,
    IHTS,
    RHTS,
    dHS,
    AHS,
    IAHTS,
    RAHTS,
    dAHS,
    MS,
    fk_I,
    fk_R,
    IATS,
    RATS,
    sec_state_next,
    count_
};

inline constexpr int kSecretCount = static_cast<int>(Secret::count_);
inline constexpr int kFirstDerived = static_cast<int>(Secret::k_c);

std::string_view secret_name(Secret s);
std::optional<Secret> secret_from_name(std::string_view name);

/// Staged key derivation for one stage. Values are written once and never
/// changed; deriving anything before its inputs exist throws
/// ScheduleOrderError.
class KeySchedule {
public:
    KeySchedule(std::shared_ptr<const DualPrf> prf, KeyScheduleOptions options = {});

    /// Sets one of the six input secrets. ss_c and sec_state_in may be empty.
    void set_input(Secret which, ByteView value);

    /// k_c, k_pq, k0..k3, IHTS, RHTS, dHS. Needs ss_c, ss_pq, k_q,
    /// sec_state_in and H1.
    void derive_handshake_secrets(const TranscriptState& ts);
    /// AHS, IAHTS, RAHTS, dAHS. Needs dHS, ss_I and H2.
    void derive_authenticated_secrets(const TranscriptState& ts);
    /// MS, fk_I, fk_R. Needs dAHS, ss_R and H3.
    void derive_master_and_finished(const TranscriptState& ts);
    /// IATS. Needs MS and H4.
    void derive_initiator_application_secret(const TranscriptState& ts);
    /// IATS (if still missing), RATS and the next SecState. Needs H5.
    void derive_application_and_state(const TranscriptState& ts);

    bool has(Secret s) const { return values_[index(s)].has_value(); }
    /// Throws ScheduleOrderError if the value is not set yet.
    const Bytes& get(Secret s) const;

    const KeyScheduleOptions& options() const { return options_; }

    /// IATS || RATS, the exported stage key.
    Bytes stage_key() const;

private:
    static std::size_t index(Secret s) { return static_cast<std::size_t>(s); }
    void put(Secret s, Bytes value);
    Bytes prf(Secret key, std::string_view label, ByteView context) const;

    std::shared_ptr<const DualPrf> prf_;
    KeyScheduleOptions options_;
    std::array<std::optional<Bytes>, kSecretCount> values_;
};

/// AEAD key material expanded from a traffic secret:
/// key = F(secret, "key")[:key_len], iv = F(secret, "iv")[:nonce_len].
struct TrafficKeys {
    Bytes key;
    Bytes iv_base;

    /// iv_base XOR the 64-bit big-endian sequence number, right-aligned.
    Bytes nonce(std::uint64_t sequence) const;
};

TrafficKeys traffic_key_expand(ByteView secret, const AeadAlgorithm& aead, const DualPrf& prf);

}  // namespace muckle
