#include "muckle/kem.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>

#include "muckle/errors.hpp"

namespace muckle {

namespace {

void expect_len(ByteView b, std::size_t want, const char* what) {
    if (b.size() != want)
        throw EncodingError(std::string(what) + ": expected " + std::to_string(want) + " bytes, got " +
                            std::to_string(b.size()));
}

Bytes sha256(ByteView m) {
    Bytes out(SHA256_DIGEST_LENGTH);
    SHA256(m.data(), m.size(), out.data());
    return out;
}

}  // namespace

KemKeyPair KemAlgorithm::keygen(RandomSource& rng) const {
    auto kp = do_keygen(rng);
    expect_len(kp.public_key, public_key_len(), "kem public key");
    expect_len(kp.secret_key, secret_key_len(), "kem secret key");
    return kp;
}

Encapsulation KemAlgorithm::encaps(ByteView public_key, RandomSource& rng) const {
    expect_len(public_key, public_key_len(), "kem public key");
    auto e = do_encaps(public_key, rng);
    expect_len(e.ciphertext, ciphertext_len(), "kem ciphertext");
    expect_len(e.shared_secret, shared_secret_len(), "kem shared secret");
    return e;
}

std::optional<Bytes> KemAlgorithm::decaps(ByteView secret_key, ByteView ciphertext) const {
    expect_len(secret_key, secret_key_len(), "kem secret key");
    expect_len(ciphertext, ciphertext_len(), "kem ciphertext");
    return do_decaps(secret_key, ciphertext);
}

// --- toy ---

Bytes ToyKem::derive_public_key(ByteView secret_key) {
    return sha256(concat(as_bytes("pk-derive"), secret_key));
}

Bytes ToyKem::shared_secret(ByteView public_key, ByteView ciphertext) {
    return sha256(concat(as_bytes("ss"), public_key, ciphertext));
}

KemKeyPair ToyKem::do_keygen(RandomSource& rng) const {
    auto sk = rng.bytes(32);
    return {derive_public_key(sk), std::move(sk)};
}

Encapsulation ToyKem::do_encaps(ByteView public_key, RandomSource& rng) const {
    auto r = rng.bytes(32);
    auto ss = shared_secret(public_key, r);
    return {std::move(r), std::move(ss)};
}

std::optional<Bytes> ToyKem::do_decaps(ByteView secret_key, ByteView ciphertext) const {
    return shared_secret(derive_public_key(secret_key), ciphertext);
}

// --- x25519 ---

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;

PkeyPtr x25519_private(ByteView sk) {
    PkeyPtr p(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, sk.data(), sk.size()), EVP_PKEY_free);
    if (!p) throw std::runtime_error("X25519: cannot load private key");
    return p;
}

Bytes x25519_public_of(const EVP_PKEY* key) {
    Bytes pk(32);
    std::size_t len = pk.size();
    if (EVP_PKEY_get_raw_public_key(key, pk.data(), &len) != 1 || len != 32)
        throw std::runtime_error("X25519: cannot export public key");
    return pk;
}

std::optional<Bytes> x25519_dh(ByteView sk, ByteView peer_pk) {
    auto priv = x25519_private(sk);
    PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_pk.data(), peer_pk.size()),
                 EVP_PKEY_free);
    if (!peer) return std::nullopt;
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(priv.get(), nullptr), EVP_PKEY_CTX_free);
    Bytes out(32);
    std::size_t len = out.size();
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
        EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != 32)
        return std::nullopt;
    return out;
}

Bytes x25519_kdf(ByteView dh, ByteView ct, ByteView pk) {
    return sha256(concat(as_bytes("x25519-kem"), dh, ct, pk));
}

}  // namespace

KemKeyPair X25519Kem::do_keygen(RandomSource& rng) const {
    auto sk = rng.bytes(32);
    auto pk = x25519_public_of(x25519_private(sk).get());
    return {std::move(pk), std::move(sk)};
}

Encapsulation X25519Kem::do_encaps(ByteView public_key, RandomSource& rng) const {
    auto eph = rng.bytes(32);
    auto ct = x25519_public_of(x25519_private(eph).get());
    auto dh = x25519_dh(eph, public_key);
    if (!dh) throw EncodingError("X25519: public key yields a degenerate shared point");
    auto ss = x25519_kdf(*dh, ct, public_key);
    return {std::move(ct), std::move(ss)};
}

std::optional<Bytes> X25519Kem::do_decaps(ByteView secret_key, ByteView ciphertext) const {
    auto dh = x25519_dh(secret_key, ciphertext);
    if (!dh) return std::nullopt;
    auto pk = x25519_public_of(x25519_private(secret_key).get());
    return x25519_kdf(*dh, ciphertext, pk);
}

}  // namespace muckle
