#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include "muckle/bytes.hpp"

namespace muckle {

/// Source of random bytes. Instances are single-owner: never share one
/// across concurrent callers.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }
    /// Uniform bit.
    bool coin() { return (bytes(1)[0] & 1) != 0; }
    /// Uniform in [0, bound) by rejection sampling; bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound);
};

/// Operating-system randomness (OpenSSL RAND_bytes).
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream: SHA-256 in counter mode over (seed, label).
class DeterministicRandom final : public RandomSource {
public:
    explicit DeterministicRandom(std::uint64_t seed, std::string_view label = {});
    explicit DeterministicRandom(ByteView seed_material);

    void fill(std::span<std::uint8_t> out) override;

    /// Independent child stream, e.g. one per party of a simulated run.
    DeterministicRandom fork(std::string_view label);

private:
    Bytes seed_;
    std::uint64_t counter_ = 0;
    Bytes block_;
    std::size_t used_ = 0;
};

/// Wraps another source and fails once `budget` bytes have been drawn.
class BoundedRandom final : public RandomSource {
public:
    BoundedRandom(RandomSource& inner, std::size_t budget) : inner_(inner), remaining_(budget) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    RandomSource& inner_;
    std::size_t remaining_;
};

}  // namespace muckle
