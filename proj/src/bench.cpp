#include "muckle/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "muckle/certificate.hpp"
#include "muckle/random.hpp"
#include "muckle/wire.hpp"

namespace muckle::bench {

std::size_t MessageSizes::total() const { return std::accumulate(bytes.begin(), bytes.end(), std::size_t{0}); }

SizeParameters size_parameters(const Suite& suite, std::size_t cert_initiator, std::size_t cert_responder) {
    SizeParameters p;
    if (suite.classical) {
        p.classical_pk = suite.classical->public_key_len();
        p.classical_ct = suite.classical->ciphertext_len();
    }
    p.pq_pk = suite.pq->public_key_len();
    p.pq_ct = suite.pq->ciphertext_len();
    p.auth_ct = suite.auth->ciphertext_len();
    p.cert_initiator = cert_initiator;
    p.cert_responder = cert_responder;
    p.aead_tag = suite.aead->tag_overhead();
    p.mac_tag = suite.mac->tag_len();
    return p;
}

MessageSizes predicted_sizes(const SizeParameters& p) {
    const auto plain = [](std::vector<std::size_t> fields) { return kHeaderLen + fields_size(fields); };
    const auto record = [&](std::size_t payload_field) {
        const std::size_t ciphertext = fields_size({payload_field}) + p.aead_tag;
        return kHeaderLen + kSequenceLen + fields_size({ciphertext});
    };
    MessageSizes out;
    out.bytes[0] = plain({p.classical_pk, p.pq_pk, kNonceLen, kQkdKeyIdLen});
    out.bytes[1] = plain({p.classical_ct, p.pq_ct, kNonceLen});
    out.bytes[2] = record(p.cert_responder);
    out.bytes[3] = record(p.auth_ct);
    out.bytes[4] = record(p.cert_initiator);
    out.bytes[5] = record(p.auth_ct);
    out.bytes[6] = record(p.mac_tag);
    out.bytes[7] = record(p.mac_tag);
    return out;
}

MessageSizes measured_sizes(const std::vector<Bytes>& initiator_sent, const std::vector<Bytes>& responder_sent) {
    MessageSizes out;
    for (const auto* list : {&initiator_sent, &responder_sent})
        for (const auto& wire : *list) out.bytes[static_cast<std::size_t>(message_index(peek_type(wire)) - 1)] += wire.size();
    return out;
}

LocalDeployment make_local_deployment(const SuiteIds& suite_ids, std::uint64_t seed, KeyScheduleOptions options,
                                      std::size_t attestation_len) {
    const Suite suite = Suite::resolve(suite_ids);
    DeterministicRandom rng(seed, "local-deployment");
    const SimulatedIssuer issuer("local-ca", rng.bytes(32), attestation_len);
    auto cred_i = make_credential("alice", *suite.auth, issuer, rng);
    auto cred_r = make_credential("bob", *suite.auth, issuer, rng);

    KeyManagementService::Options kms_options;
    kms_options.seed = seed;
    LocalDeployment d;
    d.kms = std::make_shared<KeyManagementService>(kms_options);
    d.kms->add_link("alice", "bob");

    d.initiator.self_id = "alice";
    d.initiator.peer_id = "bob";
    d.initiator.suite = suite_ids;
    d.initiator.credential = cred_i;
    d.initiator.trust_store = TrustStore::with_verifier(issuer.verifier());
    d.initiator.schedule = options;

    d.responder.self_id = "bob";
    d.responder.peer_id = "alice";
    d.responder.suite = suite_ids;
    d.responder.credential = cred_r;
    d.responder.trust_store = TrustStore::with_verifier(issuer.verifier());
    d.responder.schedule = options;
    return d;
}

SessionPair make_session_pair(const LocalDeployment& d, std::uint64_t seed) {
    return SessionPair{
        Session(d.initiator, Role::initiator, std::make_shared<InProcessQkdClient>(d.kms, d.initiator.self_id),
                std::make_unique<DeterministicRandom>(seed, "initiator")),
        Session(d.responder, Role::responder, std::make_shared<InProcessQkdClient>(d.kms, d.responder.self_id),
                std::make_unique<DeterministicRandom>(seed, "responder")),
    };
}

void run_stage(Session& initiator, Session& responder, std::vector<Bytes>* wire) {
    if (initiator.status() == Status::accept) initiator.advance_stage();
    if (responder.status() == Status::accept) responder.advance_stage();
    std::vector<Bytes> to_responder = initiator.start();
    std::vector<Bytes> to_initiator;
    while (!to_responder.empty() || !to_initiator.empty()) {
        for (const auto& m : to_responder) {
            if (wire) wire->push_back(m);
            auto reply = responder.receive(m);
            to_initiator.insert(to_initiator.end(), reply.begin(), reply.end());
        }
        to_responder.clear();
        for (const auto& m : to_initiator) {
            if (wire) wire->push_back(m);
            auto reply = initiator.receive(m);
            to_responder.insert(to_responder.end(), reply.begin(), reply.end());
        }
        to_initiator.clear();
    }
}

// ---- reports ----

void BenchAccumulator::add(const MessageSizes& sizes, double wall_ms) {
    if (sizes_ && !(*sizes_ == sizes)) constant_ = false;
    if (!sizes_) sizes_ = sizes;
    wall_ms_.push_back(wall_ms);
}

BenchReport BenchAccumulator::report(std::string suite, int runs, int stages) const {
    BenchReport r;
    r.suite = std::move(suite);
    r.runs = runs;
    r.stages = stages;
    r.bytes = sizes_.value_or(MessageSizes{});
    r.bytes_constant = constant_;
    if (!wall_ms_.empty()) {
        r.wall_ms_mean = std::accumulate(wall_ms_.begin(), wall_ms_.end(), 0.0) / static_cast<double>(wall_ms_.size());
        r.wall_ms_min = *std::min_element(wall_ms_.begin(), wall_ms_.end());
        r.wall_ms_max = *std::max_element(wall_ms_.begin(), wall_ms_.end());
    }
    return r;
}

std::string BenchReport::to_json() const {
    nlohmann::ordered_json bytes_json;
    for (std::size_t i = 0; i < bytes.bytes.size(); ++i) bytes_json["m" + std::to_string(i + 1)] = bytes.bytes[i];
    bytes_json["total"] = bytes.total();
    nlohmann::ordered_json j;
    j["suite"] = suite;
    j["runs"] = runs;
    j["stages"] = stages;
    j["bytes"] = bytes_json;
    j["wall_ms"] = {{"mean", wall_ms_mean}, {"min", wall_ms_min}, {"max", wall_ms_max}};
    j["cpu_cycles"] = "unavailable";
    j["bytes_constant"] = bytes_constant;
    return j.dump(2);
}

std::string BenchReport::to_table() const {
    std::ostringstream out;
    out << "suite   " << suite << "\nruns    " << runs << "\nstages  " << stages << "\n\n";
    out << "message      bytes\n";
    for (std::size_t i = 0; i < bytes.bytes.size(); ++i)
        out << "m" << (i + 1) << std::setw(17) << bytes.bytes[i] << "\n";
    out << "total" << std::setw(14) << bytes.total() << "  (" << std::fixed << std::setprecision(2)
        << static_cast<double>(bytes.total()) / 1024.0 << " KiB)\n\n";
    out << std::setprecision(3) << "wall ms per stage  mean " << wall_ms_mean << "  min " << wall_ms_min << "  max "
        << wall_ms_max << "\ncpu cycles         unavailable\n";
    return out.str();
}

BenchReport run_local_bench(const SuiteIds& suite, int runs, int stages, std::uint64_t seed,
                            KeyScheduleOptions options) {
    using clock = std::chrono::steady_clock;
    BenchAccumulator acc;
    const auto deployment = make_local_deployment(suite, seed, options);
    for (int run = 0; run < runs; ++run) {
        auto pair = make_session_pair(deployment, seed + static_cast<std::uint64_t>(run) + 1);
        for (int t = 1; t <= stages; ++t) {
            const auto start = clock::now();
            run_stage(pair.initiator, pair.responder);
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
            acc.add(measured_sizes(pair.initiator.stage_record(t).sent, pair.responder.stage_record(t).sent), ms);
        }
    }
    return acc.report(suite.describe(), runs, stages);
}

VectorFile emit_vectors(std::uint64_t seed, const SuiteIds& suite, KeyScheduleOptions options) {
    const auto deployment = make_local_deployment(suite, seed, options);
    auto pair = make_session_pair(deployment, seed);
    std::vector<Bytes> wire;
    run_stage(pair.initiator, pair.responder, &wire);
    std::sort(wire.begin(), wire.end(), [](const Bytes& a, const Bytes& b) { return peek_type(a) < peek_type(b); });

    VectorFile out;
    const auto& ks = pair.initiator.key_schedule();
    for (int s = 0; s < kFirstDerived; ++s) out.set(std::string(secret_name(static_cast<Secret>(s))), ks.get(static_cast<Secret>(s)));
    for (std::size_t i = 0; i < wire.size(); ++i) out.set("m" + std::to_string(i + 1), wire[i]);
    for (int s = kFirstDerived; s < kSecretCount; ++s)
        out.set(std::string(secret_name(static_cast<Secret>(s))), ks.get(static_cast<Secret>(s)));
    return out;
}

}  // namespace muckle::bench
