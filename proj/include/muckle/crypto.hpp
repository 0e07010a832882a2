#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "muckle/bytes.hpp"

namespace muckle {

class HashAlgorithm {
public:
    virtual ~HashAlgorithm() = default;
    virtual std::string_view id() const = 0;
    virtual std::size_t digest_len() const = 0;
    virtual Bytes digest(ByteView message) const = 0;
};

/// F(key, input) -> output_len bytes. Used in both argument positions by the
/// key schedule (secret keys on either side), hence "dual".
class DualPrf {
public:
    virtual ~DualPrf() = default;
    virtual std::string_view id() const = 0;
    virtual std::size_t output_len() const = 0;
    /// The key may be empty (first-stage SecState, absent classical secret).
    virtual Bytes eval(ByteView key, ByteView input) const = 0;
};

class MacAlgorithm {
public:
    virtual ~MacAlgorithm() = default;
    virtual std::string_view id() const = 0;
    virtual std::size_t key_len() const = 0;
    virtual std::size_t tag_len() const = 0;
    virtual Bytes auth(ByteView key, ByteView message) const = 0;
    virtual bool verify(ByteView key, ByteView message, ByteView tag) const;
};

class AeadAlgorithm {
public:
    virtual ~AeadAlgorithm() = default;
    virtual std::string_view id() const = 0;
    virtual std::size_t key_len() const = 0;
    virtual std::size_t nonce_len() const = 0;
    virtual std::size_t tag_overhead() const = 0;
    /// Returns ciphertext || tag. Throws EncodingError on bad key/nonce length.
    virtual Bytes seal(ByteView key, ByteView nonce, ByteView ad, ByteView plaintext) const = 0;
    /// std::nullopt on authentication failure; never returns unverified plaintext.
    virtual std::optional<Bytes> open(ByteView key, ByteView nonce, ByteView ad,
                                      ByteView ciphertext) const = 0;
};

class Sha256 final : public HashAlgorithm {
public:
    std::string_view id() const override { return "sha256"; }
    std::size_t digest_len() const override { return 32; }
    Bytes digest(ByteView message) const override;
};

/// HMAC-SHA256 as the default dual PRF.
class HmacSha256Prf final : public DualPrf {
public:
    std::string_view id() const override { return "hmac-sha256"; }
    std::size_t output_len() const override { return 32; }
    Bytes eval(ByteView key, ByteView input) const override;
};

class HmacSha256Mac final : public MacAlgorithm {
public:
    std::string_view id() const override { return "hmac-sha256"; }
    std::size_t key_len() const override { return 32; }
    std::size_t tag_len() const override { return 32; }
    Bytes auth(ByteView key, ByteView message) const override;
};

/// A MAC whose tags are the first `tag_len` bytes of another MAC's tags.
/// With tiny tag lengths this is deliberately forgeable; the experiment
/// tests use it to show the EUF-CMA harness notices a weak MAC.
class TruncatedMac final : public MacAlgorithm {
public:
    TruncatedMac(std::shared_ptr<const MacAlgorithm> inner, std::size_t tag_len);
    std::string_view id() const override { return id_; }
    std::size_t key_len() const override { return inner_->key_len(); }
    std::size_t tag_len() const override { return tag_len_; }
    Bytes auth(ByteView key, ByteView message) const override;

private:
    std::shared_ptr<const MacAlgorithm> inner_;
    std::size_t tag_len_;
    std::string id_;
};

class ChaCha20Poly1305 final : public AeadAlgorithm {
public:
    std::string_view id() const override { return "chacha20-poly1305"; }
    std::size_t key_len() const override { return 32; }
    std::size_t nonce_len() const override { return 12; }
    std::size_t tag_overhead() const override { return 16; }
    Bytes seal(ByteView key, ByteView nonce, ByteView ad, ByteView plaintext) const override;
    std::optional<Bytes> open(ByteView key, ByteView nonce, ByteView ad, ByteView ciphertext) const override;
};

class Aes256Gcm final : public AeadAlgorithm {
public:
    std::string_view id() const override { return "aes-256-gcm"; }
    std::size_t key_len() const override { return 32; }
    std::size_t nonce_len() const override { return 12; }
    std::size_t tag_overhead() const override { return 16; }
    Bytes seal(ByteView key, ByteView nonce, ByteView ad, ByteView plaintext) const override;
    std::optional<Bytes> open(ByteView key, ByteView nonce, ByteView ad, ByteView ciphertext) const override;
};

}  // namespace muckle
