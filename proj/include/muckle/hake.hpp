#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "muckle/bytes.hpp"
#include "muckle/certificate.hpp"
#include "muckle/qkd.hpp"
#include "muckle/random.hpp"
#include "muckle/session.hpp"

namespace muckle::hake {

struct Params {
    int n_parties = 2;   // n_P
    int n_sessions = 4;  // n_S, per party
    int n_stages = 1;    // n_T
    SuiteIds suite = builtin_suite("toy");
    KeyScheduleOptions schedule;
    std::uint64_t seed = 0;
};

enum class QueryKind {
    create,
    send,
    reveal,
    test,
    corrupt_qk,
    corrupt_ck,
    corrupt_sk,
    compromise_qk,
    compromise_ck,
    compromise_sk,
    compromise_ss,
};

std::string_view to_string(QueryKind k);

/// How a query was answered.
enum class ResultClass { value, bottom, error };

std::string_view to_string(ResultClass r);

/// Stage t of session s of party i. s counts from 0 per party, t from 1.
struct StageRef {
    int i = 0;
    int s = 0;
    int t = 0;
    auto operator<=>(const StageRef&) const = default;
};

struct QueryRecord {
    std::uint64_t index = 0;  // strictly increasing
    QueryKind kind = QueryKind::create;
    int i = -1;
    int s = -1;
    int t = -1;
    int j = -1;                        // create: partner
    std::optional<Role> role;          // create
    std::size_t message_len = 0;       // send
    ResultClass result = ResultClass::bottom;
    /// For stage-addressed queries: whether (i, s, t) had accepted at issue.
    bool target_accepted = false;
    /// Stages that accepted while this query ran (send only).
    std::vector<StageRef> caused_acceptances;
};

/// Query log plus the acceptance and transcript facts the cleanness
/// predicate reads. Built by Experiment, or by hand for table tests.
class QueryLog {
public:
    struct SessionView {
        int i = 0;
        int s = 0;
        int j = 0;  // partner
        Role role = Role::initiator;
        std::vector<std::vector<Bytes>> sent;      // per stage, 1-based by index + 1
        std::vector<std::vector<Bytes>> received;  // per stage
    };

    /// Appends a record and assigns the next ordering index, which is returned.
    std::uint64_t append(QueryRecord record);
    const std::vector<QueryRecord>& records() const { return records_; }
    std::uint64_t next_index() const { return next_index_; }

    void mark_accepted(StageRef stage, std::uint64_t at_index);
    /// Ordering index of the query during which the stage accepted.
    std::optional<std::uint64_t> accepted_at(StageRef stage) const;

    void put_session(SessionView view);
    const SessionView* session(int i, int s) const;
    const std::map<std::pair<int, int>, SessionView>& sessions() const { return sessions_; }

    std::optional<StageRef> test_target;

    /// One line per query: index, kind, args, result class.
    std::string trace() const;

private:
    std::vector<QueryRecord> records_;
    std::uint64_t next_index_ = 1;
    std::map<StageRef, std::uint64_t> accepted_;
    std::map<std::pair<int, int>, SessionView> sessions_;
};

/// pi_i^s and pi_j^r match in stage t: each received exactly what the other sent.
bool matching(const QueryLog& log, int i, int s, int j, int r, int t);
/// pi_i^s prefix-matches pi_j^r in stage t: pi_j^r received what pi_i^s
/// sent, possibly followed by more. A session that sent nothing in stage t
/// prefix-matches nobody.
bool prefix_matching(const QueryLog& log, int i, int s, int j, int r, int t);
/// pi_j^r is an origin session of pi_i^s: pi_j^r matches or prefix-matches pi_i^s.
bool is_origin_session_of(const QueryLog& log, int j, int r, int i, int s, int t);

/// Cleanness of the tested stage. Throws HarnessError if test_target is unset.
bool clean_muckle_sharp(const QueryLog& log);
/// Same, for an explicit target.
bool clean_muckle_sharp(const QueryLog& log, StageRef target);

/// One HAKE key-indistinguishability experiment over Muckle# sessions.
///
/// Parties P0..P{n_P-1} hold long-term KEM credentials issued by one
/// simulated authority and share a simulated QKD service. All randomness
/// derives from Params::seed. Single-threaded.
class Experiment {
public:
    explicit Experiment(Params params);
    ~Experiment();

    const Params& params() const { return params_; }
    static std::string party_name(int i);
    const Certificate& certificate(int i) const;

    /// Session index s, or nullopt if (i, j, role) exists or party i is full.
    std::optional<int> create(int i, int j, Role role);
    /// An empty message starts an initiator stage. Once a stage accepted, the
    /// next send opens stage t + 1 (up to n_T). nullopt is the bottom answer.
    std::optional<std::vector<Bytes>> send(int i, int s, ByteView message);
    std::optional<Bytes> reveal(int i, int s, int t);
    /// Real key if b = 1, else a random 64-byte key fixed at first use. A
    /// second successful Test throws HarnessError.
    std::optional<Bytes> test(int i, int s, int t);

    std::optional<Bytes> corrupt_qk(int i);
    std::optional<Bytes> corrupt_ck(int i);
    std::optional<Bytes> corrupt_sk(int i);
    std::optional<Bytes> compromise_qk(int i, int s, int t);
    std::optional<Bytes> compromise_ck(int i, int s, int t);
    std::optional<Bytes> compromise_sk(int i, int s, int t);
    std::optional<Bytes> compromise_ss(int i, int s, int t);

    bool matching(int i, int s, int j, int r, int t) const;
    bool origin(int i, int s, int j, int r, int t) const;
    bool clean() const;

    /// Snapshot of the log with current session transcripts.
    QueryLog log() const;
    std::optional<StageRef> test_target() const { return log_.test_target; }
    bool challenge_bit_for_testing() const { return b_; }

    /// Seeded coins for the adversary, independent of the challenger's.
    RandomSource& adversary_random() { return adversary_rng_; }

    /// Read-only protocol state, for white-box harness checks.
    const Session& session(int i, int s) const;

private:
    struct Party;
    struct Instance;

    Instance& instance(int i, int s);
    const Instance& instance(int i, int s) const;
    void check_party(int i) const;
    std::optional<Bytes> compromise(QueryKind kind, int i, int s, int t);
    QueryRecord& logged(QueryRecord r);

    Params params_;
    DeterministicRandom rng_;
    DeterministicRandom adversary_rng_;
    bool b_ = false;
    std::shared_ptr<KeyManagementService> kms_;
    std::vector<std::unique_ptr<Party>> parties_;
    QueryLog log_;
    std::optional<Bytes> random_key_;
    std::set<std::pair<QueryKind, StageRef>> compromised_;
};

/// Adversary: drives the experiment through its queries and returns a guess for b.
using Adversary = std::function<int(Experiment&)>;

struct ExperimentOutcome {
    bool win = false;
    int guess = -1;
    bool b = false;
    bool tested = false;
    bool clean = false;
    std::string reason;  // set when a harness error ended the run
};

ExperimentOutcome run_experiment(const Params& params, const Adversary& adversary);

/// Relays one full stage between initiator (i, s) and responder (j, r).
/// Returns true iff both stages accepted. Delivered messages are appended
/// to `wire` in delivery order when it is non-null.
bool relay_stage(Experiment& e, int i, int s, int j, int r, std::vector<Bytes>* wire = nullptr);

/// Stock adversaries for harness validation.
namespace adversaries {

/// Passive relay of one stage, Test on the initiator, random guess.
int coin_flip(Experiment& e);
/// Reveals the tested stage first, then guesses by comparing keys.
int reveal_then_test(Experiment& e);
/// Against the toy KEM suite: recomputes every KEM secret from public
/// ciphertexts, takes k_q via CompromiseSK, replays the key schedule.
int toy_kem_breaker(Experiment& e);

}  // namespace adversaries

}  // namespace muckle::hake
