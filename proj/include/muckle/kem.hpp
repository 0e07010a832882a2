#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "muckle/bytes.hpp"
#include "muckle/random.hpp"

namespace muckle {

struct KemKeyPair {
    Bytes public_key;
    Bytes secret_key;
};

struct Encapsulation {
    Bytes ciphertext;
    Bytes shared_secret;
};

/// Key-encapsulation mechanism (KGen, Encaps, Decaps).
///
/// The public entry points enforce the declared length contract and throw
/// EncodingError on malformed input; implementations only see well-sized
/// byte strings. Decapsulation may return std::nullopt (the ⊥ outcome) for
/// schemes that can reject ciphertexts.
class KemAlgorithm {
public:
    virtual ~KemAlgorithm() = default;

    virtual std::string_view id() const = 0;
    virtual std::size_t public_key_len() const = 0;
    virtual std::size_t secret_key_len() const = 0;
    virtual std::size_t ciphertext_len() const = 0;
    virtual std::size_t shared_secret_len() const = 0;

    KemKeyPair keygen(RandomSource& rng) const;
    Encapsulation encaps(ByteView public_key, RandomSource& rng) const;
    std::optional<Bytes> decaps(ByteView secret_key, ByteView ciphertext) const;

protected:
    virtual KemKeyPair do_keygen(RandomSource& rng) const = 0;
    virtual Encapsulation do_encaps(ByteView public_key, RandomSource& rng) const = 0;
    virtual std::optional<Bytes> do_decaps(ByteView secret_key, ByteView ciphertext) const = 0;
};

/// INSECURE, TEST-ONLY. sk is 32 random bytes, pk = H("pk-derive" || sk),
/// ct = r (32 random bytes), ss = H("ss" || pk || r). Anyone holding the
/// public transcript can recompute ss; the security-experiment tests rely on
/// exactly that.
class ToyKem final : public KemAlgorithm {
public:
    std::string_view id() const override { return "toy"; }
    std::size_t public_key_len() const override { return 32; }
    std::size_t secret_key_len() const override { return 32; }
    std::size_t ciphertext_len() const override { return 32; }
    std::size_t shared_secret_len() const override { return 32; }

    static Bytes derive_public_key(ByteView secret_key);
    static Bytes shared_secret(ByteView public_key, ByteView ciphertext);

protected:
    KemKeyPair do_keygen(RandomSource& rng) const override;
    Encapsulation do_encaps(ByteView public_key, RandomSource& rng) const override;
    std::optional<Bytes> do_decaps(ByteView secret_key, ByteView ciphertext) const override;
};

/// Classical KEM from X25519 Diffie-Hellman: ct is an ephemeral public key,
/// ss = SHA-256("x25519-kem" || dh || ct || pk). Decapsulation yields ⊥ for
/// ciphertexts that produce an all-zero shared point.
class X25519Kem final : public KemAlgorithm {
public:
    std::string_view id() const override { return "x25519"; }
    std::size_t public_key_len() const override { return 32; }
    std::size_t secret_key_len() const override { return 32; }
    std::size_t ciphertext_len() const override { return 32; }
    std::size_t shared_secret_len() const override { return 32; }

protected:
    KemKeyPair do_keygen(RandomSource& rng) const override;
    Encapsulation do_encaps(ByteView public_key, RandomSource& rng) const override;
    std::optional<Bytes> do_decaps(ByteView secret_key, ByteView ciphertext) const override;
};

}  // namespace muckle
