#include "muckle/random.hpp"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>

#include "muckle/errors.hpp"

namespace muckle {

std::uint64_t RandomSource::uniform(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        auto b = bytes(8);
        std::uint64_t v = 0;
        for (auto c : b) v = (v << 8) | c;
        if (v < limit) return v % bound;
    }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw RandomnessError("RAND_bytes failed");
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed, std::string_view label) {
    for (int i = 7; i >= 0; --i) seed_.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    append(seed_, as_bytes(label));
}

DeterministicRandom::DeterministicRandom(ByteView seed_material)
    : seed_(seed_material.begin(), seed_material.end()) {}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
    std::size_t pos = 0;
    while (pos < out.size()) {
        if (used_ == block_.size()) {
            Bytes input = seed_;
            for (int i = 7; i >= 0; --i) input.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
            ++counter_;
            block_.assign(SHA256_DIGEST_LENGTH, 0);
            SHA256(input.data(), input.size(), block_.data());
            used_ = 0;
        }
        auto n = std::min(out.size() - pos, block_.size() - used_);
        std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n, out.begin() + static_cast<std::ptrdiff_t>(pos));
        used_ += n;
        pos += n;
    }
}

DeterministicRandom DeterministicRandom::fork(std::string_view label) {
    Bytes material = bytes(32);
    append(material, as_bytes(label));
    return DeterministicRandom(material);
}

void BoundedRandom::fill(std::span<std::uint8_t> out) {
    if (out.size() > remaining_) {
        remaining_ = 0;
        throw RandomnessError("randomness budget exhausted");
    }
    remaining_ -= out.size();
    inner_.fill(out);
}

}  // namespace muckle
