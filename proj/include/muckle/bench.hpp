#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "muckle/bytes.hpp"
#include "muckle/qkd.hpp"
#include "muckle/registry.hpp"
#include "muckle/session.hpp"
#include "muckle/vectors.hpp"

namespace muckle::bench {

/// Wire bytes of m1..m8 for one stage.
struct MessageSizes {
    std::array<std::size_t, 8> bytes{};

    std::size_t total() const;
    bool operator==(const MessageSizes&) const = default;
};

/// Lengths the analytic size model needs; a classical length of 0 means
/// the suite has no classical KEM.
struct SizeParameters {
    std::size_t classical_pk = 0;
    std::size_t classical_ct = 0;
    std::size_t pq_pk = 0;
    std::size_t pq_ct = 0;
    std::size_t auth_ct = 0;
    std::size_t cert_initiator = 0;
    std::size_t cert_responder = 0;
    std::size_t aead_tag = 0;
    std::size_t mac_tag = 0;
};

SizeParameters size_parameters(const Suite& suite, std::size_t cert_initiator, std::size_t cert_responder);

/// Each message is a 4-byte header plus 2 + len per field; m3..m8 add the
/// 8-byte sequence number and wrap the field-encoded payload in one AEAD
/// ciphertext field.
MessageSizes predicted_sizes(const SizeParameters& p);

/// Sizes from the wire messages both parties sent in one stage.
MessageSizes measured_sizes(const std::vector<Bytes>& initiator_sent, const std::vector<Bytes>& responder_sent);

/// Session configurations for two in-process parties sharing a simulated
/// QKD service and a simulated certificate authority. Deterministic in seed.
struct LocalDeployment {
    SessionConfig initiator;
    SessionConfig responder;
    std::shared_ptr<KeyManagementService> kms;
};

LocalDeployment make_local_deployment(const SuiteIds& suite, std::uint64_t seed, KeyScheduleOptions options = {},
                                      std::size_t attestation_len = 32);

struct SessionPair {
    Session initiator;
    Session responder;
};

SessionPair make_session_pair(const LocalDeployment& d, std::uint64_t seed);

/// Runs the current stage of both sessions to completion in memory.
/// Delivered messages are appended to `wire` when non-null. Throws
/// ProtocolError if either side rejects.
void run_stage(Session& initiator, Session& responder, std::vector<Bytes>* wire = nullptr);

struct BenchReport {
    std::string suite;
    int runs = 0;
    int stages = 0;
    MessageSizes bytes;        // per stage
    bool bytes_constant = true;  // identical in every measured stage
    double wall_ms_mean = 0;
    double wall_ms_min = 0;
    double wall_ms_max = 0;

    std::string to_json() const;
    std::string to_table() const;
};

/// Collects per-stage measurements into a BenchReport.
class BenchAccumulator {
public:
    void add(const MessageSizes& sizes, double wall_ms);
    BenchReport report(std::string suite, int runs, int stages) const;

private:
    std::vector<double> wall_ms_;
    std::optional<MessageSizes> sizes_;
    bool constant_ = true;
};

/// In-memory benchmark: `runs` sessions of `stages` stages each.
BenchReport run_local_bench(const SuiteIds& suite, int runs, int stages, std::uint64_t seed,
                            KeyScheduleOptions options = {});

/// One deterministic stage: every schedule input, m1..m8 and every
/// derived secret, named as in secret_name().
VectorFile emit_vectors(std::uint64_t seed, const SuiteIds& suite = builtin_suite("toy"),
                        KeyScheduleOptions options = {});

}  // namespace muckle::bench
