#include "muckle/registry.hpp"

#include <mutex>
#include <sstream>

#include "muckle/errors.hpp"

namespace muckle {

namespace {

template <typename Map>
typename Map::mapped_type lookup(const Map& m, const std::string& id, const char* kind) {
    auto it = m.find(id);
    if (it == m.end()) throw RegistryError(std::string("unknown ") + kind + " algorithm '" + id + "'");
    return it->second;
}

}  // namespace

AlgorithmRegistry::AlgorithmRegistry(const AlgorithmRegistry& other) {
    std::shared_lock lock(other.mutex_);
    kems_ = other.kems_;
    hashes_ = other.hashes_;
    prfs_ = other.prfs_;
    macs_ = other.macs_;
    aeads_ = other.aeads_;
}

AlgorithmRegistry AlgorithmRegistry::with_builtins() {
    AlgorithmRegistry r;
    r.add(std::make_shared<ToyKem>());
    r.add(std::make_shared<X25519Kem>());
    r.add(std::make_shared<Sha256>());
    r.add(std::make_shared<HmacSha256Prf>());
    r.add(std::make_shared<HmacSha256Mac>());
    r.add(std::make_shared<ChaCha20Poly1305>());
    r.add(std::make_shared<Aes256Gcm>());
    return r;
}

void AlgorithmRegistry::add(std::shared_ptr<const KemAlgorithm> kem) {
    std::unique_lock lock(mutex_);
    kems_[std::string(kem->id())] = std::move(kem);
}
void AlgorithmRegistry::add(std::shared_ptr<const HashAlgorithm> hash) {
    std::unique_lock lock(mutex_);
    hashes_[std::string(hash->id())] = std::move(hash);
}
void AlgorithmRegistry::add(std::shared_ptr<const DualPrf> prf) {
    std::unique_lock lock(mutex_);
    prfs_[std::string(prf->id())] = std::move(prf);
}
void AlgorithmRegistry::add(std::shared_ptr<const MacAlgorithm> mac) {
    std::unique_lock lock(mutex_);
    macs_[std::string(mac->id())] = std::move(mac);
}
void AlgorithmRegistry::add(std::shared_ptr<const AeadAlgorithm> aead) {
    std::unique_lock lock(mutex_);
    aeads_[std::string(aead->id())] = std::move(aead);
}

std::shared_ptr<const KemAlgorithm> AlgorithmRegistry::kem(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return lookup(kems_, id, "KEM");
}
std::shared_ptr<const HashAlgorithm> AlgorithmRegistry::hash(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return lookup(hashes_, id, "hash");
}
std::shared_ptr<const DualPrf> AlgorithmRegistry::prf(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return lookup(prfs_, id, "PRF");
}
std::shared_ptr<const MacAlgorithm> AlgorithmRegistry::mac(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return lookup(macs_, id, "MAC");
}
std::shared_ptr<const AeadAlgorithm> AlgorithmRegistry::aead(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return lookup(aeads_, id, "AEAD");
}

bool AlgorithmRegistry::has_kem(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return kems_.count(id) != 0;
}

std::vector<std::string> AlgorithmRegistry::kem_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : kems_) ids.push_back(id);
    return ids;
}

std::string AlgorithmRegistry::manifest() const {
    std::shared_lock lock(mutex_);
    std::ostringstream os;
    for (const auto& [id, k] : kems_)
        os << "kem " << id << " pk=" << k->public_key_len() << " sk=" << k->secret_key_len()
           << " ct=" << k->ciphertext_len() << " ss=" << k->shared_secret_len() << '\n';
    for (const auto& [id, h] : hashes_) os << "hash " << id << " digest=" << h->digest_len() << '\n';
    for (const auto& [id, f] : prfs_) os << "prf " << id << " out=" << f->output_len() << '\n';
    for (const auto& [id, m] : macs_) os << "mac " << id << " key=" << m->key_len() << " tag=" << m->tag_len() << '\n';
    for (const auto& [id, a] : aeads_)
        os << "aead " << id << " key=" << a->key_len() << " nonce=" << a->nonce_len()
           << " tag=" << a->tag_overhead() << '\n';
    return os.str();
}

AlgorithmRegistry& default_registry() {
    static AlgorithmRegistry registry = AlgorithmRegistry::with_builtins();
    return registry;
}

std::string SuiteIds::describe() const {
    std::ostringstream os;
    os << "ephemeral=" << (classical_kem.empty() ? "none" : classical_kem) << "+" << pq_kem
       << "+qkd long-term=" << auth_kem << " hash=" << hash << " prf=" << prf << " mac=" << mac
       << " aead=" << aead;
    return os.str();
}

Suite Suite::resolve(const SuiteIds& ids, const AlgorithmRegistry& registry) {
    Suite s;
    s.ids = ids;
    if (!ids.classical_kem.empty()) s.classical = registry.kem(ids.classical_kem);
    s.pq = registry.kem(ids.pq_kem);
    s.auth = registry.kem(ids.auth_kem);
    s.hash = registry.hash(ids.hash);
    s.prf = registry.prf(ids.prf);
    s.mac = registry.mac(ids.mac);
    s.aead = registry.aead(ids.aead);
    return s;
}

std::vector<NamedSuite> builtin_suites() {
    SuiteIds toy;
    SuiteIds toy_hybrid = toy;
    toy_hybrid.classical_kem = "toy";
    SuiteIds x25519_hybrid = toy;
    x25519_hybrid.classical_kem = "x25519";
    SuiteIds x25519_auth = x25519_hybrid;
    x25519_auth.auth_kem = "x25519";
    x25519_auth.aead = "aes-256-gcm";
    return {{"toy", toy}, {"toy-hybrid", toy_hybrid}, {"x25519-hybrid", x25519_hybrid}, {"x25519-auth", x25519_auth}};
}

SuiteIds builtin_suite(const std::string& name) {
    for (auto& s : builtin_suites())
        if (s.name == name) return s.ids;
    throw RegistryError("unknown suite '" + name + "'");
}

}  // namespace muckle
