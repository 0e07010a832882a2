#pragma once

#include <functional>
#include <set>

#include "muckle/bytes.hpp"
#include "muckle/crypto.hpp"
#include "muckle/kem.hpp"
#include "muckle/random.hpp"

namespace muckle {

// ---- EUF-CMA for a MAC ----

/// Auth'/Ver' oracles handed to a forging adversary. Auth' records every
/// queried message in Q.
class MacOracles {
public:
    MacOracles(const MacAlgorithm& mac, Bytes key) : mac_(mac), key_(std::move(key)) {}

    Bytes auth(ByteView message);
    bool verify(ByteView message, ByteView tag);

    bool queried(ByteView message) const { return queried_.count(Bytes(message.begin(), message.end())) != 0; }
    std::size_t auth_queries() const { return auth_queries_; }
    std::size_t verify_queries() const { return verify_queries_; }

private:
    const MacAlgorithm& mac_;
    Bytes key_;
    std::set<Bytes> queried_;
    std::size_t auth_queries_ = 0;
    std::size_t verify_queries_ = 0;
};

struct Forgery {
    Bytes message;
    Bytes tag;
};

using MacAdversary = std::function<Forgery(MacOracles&)>;

struct MacGameResult {
    bool win = false;
    std::size_t auth_queries = 0;
    std::size_t verify_queries = 0;
};

/// Wins iff Ver(sk, m*, tau*) = 1 and m* was never sent to Auth'.
MacGameResult run_euf_cma_experiment(const MacAlgorithm& mac, const MacAdversary& adversary, RandomSource& rng);

// ---- IND-CPA / IND-CCA for a KEM ----

enum class KemAttackMode { cpa, cca };

/// Decaps' oracle. Present only in CCA mode: any query in CPA mode throws
/// HarnessError.
class DecapsOracle {
public:
    DecapsOracle(const KemAlgorithm& kem, Bytes secret_key, KemAttackMode mode)
        : kem_(kem), sk_(std::move(secret_key)), mode_(mode) {}

    std::optional<Bytes> decaps(ByteView ciphertext);
    bool queried(ByteView ciphertext) const { return queried_.count(Bytes(ciphertext.begin(), ciphertext.end())) != 0; }

private:
    const KemAlgorithm& kem_;
    Bytes sk_;
    KemAttackMode mode_;
    std::set<Bytes> queried_;
};

struct KemChallenge {
    Bytes public_key;
    Bytes ciphertext;
    Bytes key;  // K_b: the encapsulated key for b = 0, uniform for b = 1
};

/// Returns the guess b*.
using KemAdversary = std::function<int(const KemChallenge&, DecapsOracle&)>;

/// Wins iff b = b* and ct* was never sent to Decaps'.
bool run_ind_kem_experiment(const KemAlgorithm& kem, const KemAdversary& adversary, KemAttackMode mode,
                            RandomSource& rng);

}  // namespace muckle
