#include "muckle/certificate.hpp"

#include <stdexcept>

#include "muckle/crypto.hpp"
#include "muckle/errors.hpp"
#include "muckle/wire.hpp"

namespace muckle {

Bytes Certificate::to_be_attested() const {
    return encode_fields({to_bytes(subject_id), to_bytes(kem_alg_id), public_key, to_bytes(issuer_id)});
}

Bytes Certificate::encode() const {
    return encode_fields({to_bytes(subject_id), to_bytes(kem_alg_id), public_key, to_bytes(issuer_id), attestation});
}

Certificate Certificate::decode(ByteView data) {
    auto f = decode_fields(data);
    if (f.size() != 5) throw EncodingError("certificate needs 5 fields, got " + std::to_string(f.size()));
    return {to_string(f[0]), to_string(f[1]), std::move(f[2]), to_string(f[3]), std::move(f[4])};
}

TrustStore TrustStore::pinned(std::vector<Certificate> certificates) {
    TrustStore ts;
    for (auto& c : certificates) ts.pin(std::move(c));
    return ts;
}

TrustStore TrustStore::with_verifier(Verifier verifier) {
    TrustStore ts;
    ts.verifier_ = std::move(verifier);
    return ts;
}

void TrustStore::pin(Certificate certificate) { pinned_.push_back(certificate.encode()); }

bool TrustStore::verify(const Certificate& certificate) const {
    if (verifier_) return verifier_(certificate);
    auto encoded = certificate.encode();
    for (const auto& p : pinned_)
        if (p == encoded) return true;
    return false;
}

SimulatedIssuer::SimulatedIssuer(std::string issuer_id, Bytes key, std::size_t attestation_len)
    : issuer_id_(std::move(issuer_id)), key_(std::move(key)), attestation_len_(attestation_len) {
    if (key_.size() != 32) throw std::invalid_argument("issuer key must be 32 bytes");
    if (attestation_len_ < 32) throw std::invalid_argument("attestation must be at least 32 bytes");
}

Bytes SimulatedIssuer::attest(const Certificate& c) const {
    HmacSha256Mac mac;
    Bytes att = mac.auth(key_, c.to_be_attested());
    // Filler stands in for the bulk of a real signature chain.
    DeterministicRandom filler(att);
    append(att, filler.bytes(attestation_len_ - att.size()));
    return att;
}

Certificate SimulatedIssuer::issue(std::string subject_id, std::string kem_alg_id, Bytes public_key) const {
    Certificate c{std::move(subject_id), std::move(kem_alg_id), std::move(public_key), issuer_id_, {}};
    c.attestation = attest(c);
    return c;
}

bool SimulatedIssuer::check(const Certificate& c) const {
    return c.issuer_id == issuer_id_ && equal_ct(c.attestation, attest(c));
}

TrustStore::Verifier SimulatedIssuer::verifier() const {
    return [issuer = *this](const Certificate& c) { return issuer.check(c); };
}

Credential make_credential(const std::string& subject_id, const KemAlgorithm& kem, const SimulatedIssuer& issuer,
                           RandomSource& rng) {
    auto kp = kem.keygen(rng);
    return {issuer.issue(subject_id, std::string(kem.id()), kp.public_key), kp.secret_key};
}

}  // namespace muckle
