#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "muckle/bytes.hpp"
#include "muckle/kem.hpp"
#include "muckle/random.hpp"

namespace muckle {

/// Binds a party identity to its long-term KEM public key. Serialized as
/// the field list [subject_id, kem_alg_id, public_key, issuer_id, attestation].
struct Certificate {
    std::string subject_id;
    std::string kem_alg_id;
    Bytes public_key;
    std::string issuer_id;
    Bytes attestation;

    Bytes encode() const;
    /// Throws EncodingError unless exactly five fields are present.
    static Certificate decode(ByteView data);
    /// Everything except the attestation, as a field list.
    Bytes to_be_attested() const;

    bool operator==(const Certificate&) const = default;
};

/// Decides whether a received certificate is acceptable.
///
/// Pinned mode: the certificate must equal a stored entry byte for byte and
/// the attestation is not inspected. Verifier mode: an injected function
/// checks the attestation (a real signature chain can plug in here).
class TrustStore {
public:
    using Verifier = std::function<bool(const Certificate&)>;

    TrustStore() = default;
    static TrustStore pinned(std::vector<Certificate> certificates);
    static TrustStore with_verifier(Verifier verifier);

    void pin(Certificate certificate);
    bool verify(const Certificate& certificate) const;

private:
    std::vector<Bytes> pinned_;
    Verifier verifier_;
};

/// Test/demo certificate authority: the attestation is an HMAC over the
/// attested fields under the issuer's key, padded with deterministic filler
/// to `attestation_len` bytes so certificate sizes can mimic real signature
/// chains.
class SimulatedIssuer {
public:
    SimulatedIssuer(std::string issuer_id, Bytes key, std::size_t attestation_len = 32);

    Certificate issue(std::string subject_id, std::string kem_alg_id, Bytes public_key) const;
    bool check(const Certificate& certificate) const;
    TrustStore::Verifier verifier() const;

    const std::string& id() const { return issuer_id_; }

private:
    Bytes attest(const Certificate& c) const;

    std::string issuer_id_;
    Bytes key_;
    std::size_t attestation_len_;
};

/// A party's long-term credential: certificate plus KEM secret key.
struct Credential {
    Certificate certificate;
    Bytes secret_key;
};

Credential make_credential(const std::string& subject_id, const KemAlgorithm& kem, const SimulatedIssuer& issuer,
                           RandomSource& rng);

}  // namespace muckle
