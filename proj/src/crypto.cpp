#include "muckle/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <stdexcept>

#include "muckle/errors.hpp"

namespace muckle {

bool MacAlgorithm::verify(ByteView key, ByteView message, ByteView tag) const {
    return equal_ct(auth(key, message), tag);
}

Bytes Sha256::digest(ByteView message) const {
    Bytes out(SHA256_DIGEST_LENGTH);
    SHA256(message.data(), message.size(), out.data());
    return out;
}

namespace {

Bytes hmac_sha256(ByteView key, ByteView input) {
    // HMAC() treats a null key pointer as "no key"; pass a valid pointer for empty keys.
    static const std::uint8_t kEmpty = 0;
    Bytes out(SHA256_DIGEST_LENGTH);
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.empty() ? &kEmpty : key.data(), static_cast<int>(key.size()),
             input.empty() ? &kEmpty : input.data(), input.size(), out.data(), &len) == nullptr)
        throw std::runtime_error("HMAC-SHA256 failed");
    return out;
}

struct CipherCtx {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    CipherCtx() {
        if (!ctx) throw std::bad_alloc();
    }
    ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
    CipherCtx(const CipherCtx&) = delete;
    CipherCtx& operator=(const CipherCtx&) = delete;
};

void check_lengths(const AeadAlgorithm& a, ByteView key, ByteView nonce) {
    if (key.size() != a.key_len()) throw EncodingError("AEAD key has wrong length");
    if (nonce.size() != a.nonce_len()) throw EncodingError("AEAD nonce has wrong length");
}

Bytes evp_seal(const EVP_CIPHER* cipher, const AeadAlgorithm& a, ByteView key, ByteView nonce,
               ByteView ad, ByteView plaintext) {
    check_lengths(a, key, nonce);
    CipherCtx c;
    int len = 0;
    Bytes out(plaintext.size() + a.tag_overhead());
    bool ok = EVP_EncryptInit_ex(c.ctx, cipher, nullptr, nullptr, nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_AEAD_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) == 1 &&
              EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) == 1 &&
              (ad.empty() || EVP_EncryptUpdate(c.ctx, nullptr, &len, ad.data(), static_cast<int>(ad.size())) == 1) &&
              (plaintext.empty() ||
               EVP_EncryptUpdate(c.ctx, out.data(), &len, plaintext.data(), static_cast<int>(plaintext.size())) == 1) &&
              EVP_EncryptFinal_ex(c.ctx, out.data() + len, &len) == 1 &&
              EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_AEAD_GET_TAG, static_cast<int>(a.tag_overhead()),
                                  out.data() + plaintext.size()) == 1;
    if (!ok) throw std::runtime_error("AEAD seal failed");
    return out;
}

std::optional<Bytes> evp_open(const EVP_CIPHER* cipher, const AeadAlgorithm& a, ByteView key,
                              ByteView nonce, ByteView ad, ByteView ciphertext) {
    check_lengths(a, key, nonce);
    if (ciphertext.size() < a.tag_overhead()) return std::nullopt;
    const auto body = ciphertext.size() - a.tag_overhead();
    Bytes tag(ciphertext.begin() + static_cast<std::ptrdiff_t>(body), ciphertext.end());
    CipherCtx c;
    int len = 0;
    Bytes out(body + 1);  // +1 keeps data() valid for empty plaintexts
    bool ok = EVP_DecryptInit_ex(c.ctx, cipher, nullptr, nullptr, nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_AEAD_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) == 1 &&
              EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) == 1 &&
              (ad.empty() || EVP_DecryptUpdate(c.ctx, nullptr, &len, ad.data(), static_cast<int>(ad.size())) == 1) &&
              (body == 0 || EVP_DecryptUpdate(c.ctx, out.data(), &len, ciphertext.data(), static_cast<int>(body)) == 1) &&
              EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_AEAD_SET_TAG, static_cast<int>(tag.size()), tag.data()) == 1 &&
              EVP_DecryptFinal_ex(c.ctx, out.data() + len, &len) == 1;
    if (!ok) return std::nullopt;
    out.resize(body);
    return out;
}

}  // namespace

Bytes HmacSha256Prf::eval(ByteView key, ByteView input) const { return hmac_sha256(key, input); }

Bytes HmacSha256Mac::auth(ByteView key, ByteView message) const {
    if (key.size() != key_len()) throw EncodingError("MAC key must be 32 bytes");
    return hmac_sha256(key, message);
}

TruncatedMac::TruncatedMac(std::shared_ptr<const MacAlgorithm> inner, std::size_t tag_len)
    : inner_(std::move(inner)), tag_len_(tag_len) {
    if (!inner_ || tag_len_ == 0 || tag_len_ > inner_->tag_len())
        throw std::invalid_argument("TruncatedMac: invalid tag length");
    id_ = std::string(inner_->id()) + "-trunc" + std::to_string(tag_len_ * 8);
}

Bytes TruncatedMac::auth(ByteView key, ByteView message) const {
    auto tag = inner_->auth(key, message);
    tag.resize(tag_len_);
    return tag;
}

Bytes ChaCha20Poly1305::seal(ByteView key, ByteView nonce, ByteView ad, ByteView plaintext) const {
    return evp_seal(EVP_chacha20_poly1305(), *this, key, nonce, ad, plaintext);
}

std::optional<Bytes> ChaCha20Poly1305::open(ByteView key, ByteView nonce, ByteView ad,
                                            ByteView ciphertext) const {
    return evp_open(EVP_chacha20_poly1305(), *this, key, nonce, ad, ciphertext);
}

Bytes Aes256Gcm::seal(ByteView key, ByteView nonce, ByteView ad, ByteView plaintext) const {
    return evp_seal(EVP_aes_256_gcm(), *this, key, nonce, ad, plaintext);
}

std::optional<Bytes> Aes256Gcm::open(ByteView key, ByteView nonce, ByteView ad, ByteView ciphertext) const {
    return evp_open(EVP_aes_256_gcm(), *this, key, nonce, ad, ciphertext);
}

}  // namespace muckle
