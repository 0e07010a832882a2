#include "muckle/experiments.hpp"

#include "muckle/errors.hpp"

namespace muckle {

Bytes MacOracles::auth(ByteView message) {
    ++auth_queries_;
    queried_.emplace(message.begin(), message.end());
    return mac_.auth(key_, message);
}

bool MacOracles::verify(ByteView message, ByteView tag) {
    ++verify_queries_;
    return mac_.verify(key_, message, tag);
}

MacGameResult run_euf_cma_experiment(const MacAlgorithm& mac, const MacAdversary& adversary, RandomSource& rng) {
    const Bytes key = rng.bytes(mac.key_len());
    MacOracles oracles(mac, key);
    Forgery f = adversary(oracles);
    MacGameResult r;
    r.auth_queries = oracles.auth_queries();
    r.verify_queries = oracles.verify_queries();
    // Final check is made by the experiment itself, not counted as a Ver' query.
    r.win = mac.verify(key, f.message, f.tag) && !oracles.queried(f.message);
    return r;
}

std::optional<Bytes> DecapsOracle::decaps(ByteView ciphertext) {
    if (mode_ == KemAttackMode::cpa) throw HarnessError("Decaps' oracle is not available in IND-CPA mode");
    queried_.emplace(ciphertext.begin(), ciphertext.end());
    return kem_.decaps(sk_, ciphertext);
}

bool run_ind_kem_experiment(const KemAlgorithm& kem, const KemAdversary& adversary, KemAttackMode mode,
                            RandomSource& rng) {
    auto kp = kem.keygen(rng);
    auto real = kem.encaps(kp.public_key, rng);
    Bytes random_key = rng.bytes(kem.shared_secret_len());
    const int b = rng.coin() ? 1 : 0;

    KemChallenge challenge{kp.public_key, real.ciphertext, b == 0 ? real.shared_secret : random_key};
    DecapsOracle oracle(kem, kp.secret_key, mode);
    const int guess = adversary(challenge, oracle);
    return guess == b && !oracle.queried(challenge.ciphertext);
}

}  // namespace muckle
