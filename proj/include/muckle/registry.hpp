#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "muckle/crypto.hpp"
#include "muckle/kem.hpp"

namespace muckle {

/// Algorithms addressed by string id. Registered objects are immutable and
/// safe to share between threads.
class AlgorithmRegistry {
public:
    /// Registry pre-populated with the built-in algorithms.
    static AlgorithmRegistry with_builtins();

    void add(std::shared_ptr<const KemAlgorithm> kem);
    void add(std::shared_ptr<const HashAlgorithm> hash);
    void add(std::shared_ptr<const DualPrf> prf);
    void add(std::shared_ptr<const MacAlgorithm> mac);
    void add(std::shared_ptr<const AeadAlgorithm> aead);

    // Lookups throw RegistryError for unknown ids.
    std::shared_ptr<const KemAlgorithm> kem(const std::string& id) const;
    std::shared_ptr<const HashAlgorithm> hash(const std::string& id) const;
    std::shared_ptr<const DualPrf> prf(const std::string& id) const;
    std::shared_ptr<const MacAlgorithm> mac(const std::string& id) const;
    std::shared_ptr<const AeadAlgorithm> aead(const std::string& id) const;

    bool has_kem(const std::string& id) const;
    std::vector<std::string> kem_ids() const;

    /// Static manifest: one line per algorithm, "kind id key=.. ..." lengths.
    std::string manifest() const;

    AlgorithmRegistry() = default;
    AlgorithmRegistry(const AlgorithmRegistry& other);
    AlgorithmRegistry& operator=(const AlgorithmRegistry&) = delete;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const KemAlgorithm>> kems_;
    std::map<std::string, std::shared_ptr<const HashAlgorithm>> hashes_;
    std::map<std::string, std::shared_ptr<const DualPrf>> prfs_;
    std::map<std::string, std::shared_ptr<const MacAlgorithm>> macs_;
    std::map<std::string, std::shared_ptr<const AeadAlgorithm>> aeads_;
};

/// Process-wide registry holding the built-ins; further algorithms (e.g. an
/// external ML-KEM provider) may be added at startup.
AlgorithmRegistry& default_registry();

/// Algorithm ids for one configuration of the handshake. An empty
/// classical_kem means "no classical KEM".
struct SuiteIds {
    std::string classical_kem;
    std::string pq_kem = "toy";
    std::string auth_kem = "toy";
    std::string hash = "sha256";
    std::string prf = "hmac-sha256";
    std::string mac = "hmac-sha256";
    std::string aead = "chacha20-poly1305";

    std::string describe() const;
    bool operator==(const SuiteIds&) const = default;
};

/// SuiteIds resolved to algorithm objects.
struct Suite {
    SuiteIds ids;
    std::shared_ptr<const KemAlgorithm> classical;  // nullptr when absent
    std::shared_ptr<const KemAlgorithm> pq;
    std::shared_ptr<const KemAlgorithm> auth;
    std::shared_ptr<const HashAlgorithm> hash;
    std::shared_ptr<const DualPrf> prf;
    std::shared_ptr<const MacAlgorithm> mac;
    std::shared_ptr<const AeadAlgorithm> aead;

    static Suite resolve(const SuiteIds& ids, const AlgorithmRegistry& registry = default_registry());
};

struct NamedSuite {
    std::string name;
    SuiteIds ids;
};

/// Suites that run without any external provider.
std::vector<NamedSuite> builtin_suites();

/// Looks up a built-in suite by name; throws RegistryError.
SuiteIds builtin_suite(const std::string& name);

}  // namespace muckle
