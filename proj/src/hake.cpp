#include "muckle/hake.hpp"

#include <algorithm>
#include <sstream>

#include "muckle/errors.hpp"
#include "muckle/kem.hpp"

namespace muckle::hake {

std::string_view to_string(QueryKind k) {
    switch (k) {
        case QueryKind::create: return "Create";
        case QueryKind::send: return "Send";
        case QueryKind::reveal: return "Reveal";
        case QueryKind::test: return "Test";
        case QueryKind::corrupt_qk: return "CorruptQK";
        case QueryKind::corrupt_ck: return "CorruptCK";
        case QueryKind::corrupt_sk: return "CorruptSK";
        case QueryKind::compromise_qk: return "CompromiseQK";
        case QueryKind::compromise_ck: return "CompromiseCK";
        case QueryKind::compromise_sk: return "CompromiseSK";
        case QueryKind::compromise_ss: return "CompromiseSS";
    }
    return "?";
}

std::string_view to_string(ResultClass r) {
    switch (r) {
        case ResultClass::value: return "value";
        case ResultClass::bottom: return "bottom";
        case ResultClass::error: return "error";
    }
    return "?";
}

// ---- QueryLog ----

std::uint64_t QueryLog::append(QueryRecord record) {
    record.index = next_index_++;
    records_.push_back(std::move(record));
    return records_.back().index;
}

void QueryLog::mark_accepted(StageRef stage, std::uint64_t at_index) { accepted_.emplace(stage, at_index); }

std::optional<std::uint64_t> QueryLog::accepted_at(StageRef stage) const {
    auto it = accepted_.find(stage);
    if (it == accepted_.end()) return std::nullopt;
    return it->second;
}

void QueryLog::put_session(SessionView view) {
    const auto key = std::make_pair(view.i, view.s);
    sessions_[key] = std::move(view);
}

const QueryLog::SessionView* QueryLog::session(int i, int s) const {
    auto it = sessions_.find({i, s});
    return it == sessions_.end() ? nullptr : &it->second;
}

std::string QueryLog::trace() const {
    std::ostringstream out;
    for (const auto& r : records_) {
        out << r.index << ' ' << to_string(r.kind);
        if (r.i >= 0) out << " i=" << r.i;
        if (r.s >= 0) out << " s=" << r.s;
        if (r.t >= 0) out << " t=" << r.t;
        if (r.j >= 0) out << " j=" << r.j;
        if (r.role) out << " role=" << to_string(*r.role);
        if (r.kind == QueryKind::send) out << " len=" << r.message_len;
        if (r.target_accepted) out << " after-accept";
        out << " -> " << to_string(r.result);
        for (const auto& a : r.caused_acceptances) out << " accept(" << a.i << ',' << a.s << ',' << a.t << ')';
        out << '\n';
    }
    return out.str();
}

// ---- matching and cleanness ----

namespace {

const std::vector<Bytes>* stage_sent(const QueryLog& log, int i, int s, int t) {
    const auto* v = log.session(i, s);
    if (!v || t < 1 || static_cast<std::size_t>(t) > v->sent.size()) return nullptr;
    return &v->sent[static_cast<std::size_t>(t - 1)];
}

const std::vector<Bytes>* stage_received(const QueryLog& log, int i, int s, int t) {
    const auto* v = log.session(i, s);
    if (!v || t < 1 || static_cast<std::size_t>(t) > v->received.size()) return nullptr;
    return &v->received[static_cast<std::size_t>(t - 1)];
}

bool issued(const QueryLog& log, QueryKind kind, int i, int s, int t) {
    return std::any_of(log.records().begin(), log.records().end(), [&](const QueryRecord& r) {
        return r.kind == kind && r.i == i && r.s == s && r.t == t && r.result != ResultClass::error;
    });
}

// Issued strictly before `stage` accepted; a stage that never accepted
// counts every issued query.
bool issued_before_accept(const QueryLog& log, QueryKind kind, int i, int s, int t, StageRef stage) {
    const auto accepted = log.accepted_at(stage);
    return std::any_of(log.records().begin(), log.records().end(), [&](const QueryRecord& r) {
        return r.kind == kind && r.i == i && r.s == s && r.t == t && r.result != ResultClass::error &&
               (!accepted || r.index < *accepted);
    });
}

}  // namespace

bool matching(const QueryLog& log, int i, int s, int j, int r, int t) {
    if (i == j && s == r) return false;
    const auto* i_sent = stage_sent(log, i, s, t);
    const auto* i_recv = stage_received(log, i, s, t);
    const auto* j_sent = stage_sent(log, j, r, t);
    const auto* j_recv = stage_received(log, j, r, t);
    if (!i_sent || !i_recv || !j_sent || !j_recv) return false;
    return *i_sent == *j_recv && *j_sent == *i_recv;
}

bool prefix_matching(const QueryLog& log, int i, int s, int j, int r, int t) {
    if (i == j && s == r) return false;
    const auto* i_sent = stage_sent(log, i, s, t);
    const auto* j_recv = stage_received(log, j, r, t);
    if (!i_sent || !j_recv || i_sent->empty() || j_recv->size() < i_sent->size()) return false;
    return std::equal(i_sent->begin(), i_sent->end(), j_recv->begin());
}

bool is_origin_session_of(const QueryLog& log, int j, int r, int i, int s, int t) {
    return matching(log, j, r, i, s, t) || prefix_matching(log, j, r, i, s, t);
}

bool clean_muckle_sharp(const QueryLog& log) {
    if (!log.test_target) throw HarnessError("cleanness evaluated without a Test target");
    return clean_muckle_sharp(log, *log.test_target);
}

bool clean_muckle_sharp(const QueryLog& log, StageRef target) {
    const auto [i, s, t] = target;
    const auto* view = log.session(i, s);
    if (!view) throw HarnessError("cleanness target names an unknown session");

    if (issued(log, QueryKind::reveal, i, s, t)) return false;

    bool has_origin = false;
    for (const auto& [key, other] : log.sessions()) {
        const auto [j, r] = key;
        if (is_origin_session_of(log, j, r, i, s, t)) has_origin = true;
        if (!matching(log, i, s, j, r, t)) continue;

        if (issued(log, QueryKind::reveal, j, r, t)) return false;

        bool no_qk;
        bool no_sk;
        if (view->role == Role::initiator) {
            no_qk = !issued_before_accept(log, QueryKind::compromise_qk, i, s, t, target);
            no_sk = !issued(log, QueryKind::compromise_sk, i, s, t);
        } else {
            no_qk = !issued_before_accept(log, QueryKind::compromise_qk, j, r, t, StageRef{j, r, t});
            no_sk = !issued(log, QueryKind::compromise_sk, j, r, t);
        }
        if (!no_qk && !no_sk) return false;
    }

    if (!has_origin) {
        // Partner acceptance is read as the tested stage's own acceptance.
        const bool no_corrupt = !issued_before_accept(log, QueryKind::corrupt_qk, i, -1, -1, target);
        const bool no_sk = !issued(log, QueryKind::compromise_sk, i, s, t);
        if (!no_corrupt && !no_sk) return false;
    }
    return true;
}

// ---- Experiment ----

struct Experiment::Instance {
    int j;
    Role role;
    Session session;
};

struct Experiment::Party {
    std::string name;
    Credential credential;
    std::shared_ptr<QkdClient> qkd;
    std::vector<std::unique_ptr<Instance>> sessions;
    bool qk_corrupted = false;
};

Experiment::Experiment(Params params)
    : params_(std::move(params)),
      rng_(params_.seed, "hake-challenger"),
      adversary_rng_(params_.seed, "hake-adversary") {
    if (params_.n_parties < 2 || params_.n_sessions < 1 || params_.n_stages < 1)
        throw HarnessError("experiment needs n_P >= 2, n_S >= 1 and n_T >= 1");
    const Suite suite = Suite::resolve(params_.suite);

    b_ = rng_.coin();

    KeyManagementService::Options kms_options;
    const Bytes kms_seed = rng_.bytes(8);
    for (auto byte : kms_seed) kms_options.seed = (kms_options.seed << 8) | byte;
    kms_ = std::make_shared<KeyManagementService>(kms_options);

    const SimulatedIssuer issuer("hake-ca", rng_.bytes(32));
    for (int i = 0; i < params_.n_parties; ++i) {
        auto party = std::make_unique<Party>();
        party->name = party_name(i);
        auto party_rng = rng_.fork(party->name);
        party->credential = make_credential(party->name, *suite.auth, issuer, party_rng);
        party->qkd = std::make_shared<InProcessQkdClient>(kms_, party->name);
        parties_.push_back(std::move(party));
    }
    for (int i = 0; i < params_.n_parties; ++i)
        for (int j = i + 1; j < params_.n_parties; ++j) kms_->add_link(party_name(i), party_name(j));
}

Experiment::~Experiment() = default;

std::string Experiment::party_name(int i) { return "P" + std::to_string(i); }

void Experiment::check_party(int i) const {
    if (i < 0 || i >= params_.n_parties) throw HarnessError("party index out of range: " + std::to_string(i));
}

const Certificate& Experiment::certificate(int i) const {
    check_party(i);
    return parties_[static_cast<std::size_t>(i)]->credential.certificate;
}

Experiment::Instance& Experiment::instance(int i, int s) {
    return const_cast<Instance&>(static_cast<const Experiment&>(*this).instance(i, s));
}

const Experiment::Instance& Experiment::instance(int i, int s) const {
    check_party(i);
    const auto& sessions = parties_[static_cast<std::size_t>(i)]->sessions;
    if (s < 0 || static_cast<std::size_t>(s) >= sessions.size())
        throw HarnessError("no session " + std::to_string(s) + " at party " + std::to_string(i));
    return *sessions[static_cast<std::size_t>(s)];
}

const Session& Experiment::session(int i, int s) const { return instance(i, s).session; }

QueryRecord& Experiment::logged(QueryRecord r) {
    log_.append(std::move(r));
    return const_cast<QueryRecord&>(log_.records().back());
}

std::optional<int> Experiment::create(int i, int j, Role role) {
    check_party(i);
    check_party(j);
    if (i == j) throw HarnessError("a party cannot partner with itself");
    QueryRecord rec;
    rec.kind = QueryKind::create;
    rec.i = i;
    rec.j = j;
    rec.role = role;

    auto& party = *parties_[static_cast<std::size_t>(i)];
    const bool duplicate = std::any_of(party.sessions.begin(), party.sessions.end(),
                                       [&](const auto& inst) { return inst->j == j && inst->role == role; });
    if (duplicate || static_cast<int>(party.sessions.size()) >= params_.n_sessions) {
        logged(rec);
        return std::nullopt;
    }

    const int s = static_cast<int>(party.sessions.size());
    const auto& peer = *parties_[static_cast<std::size_t>(j)];
    SessionConfig config;
    config.self_id = party.name;
    config.peer_id = peer.name;
    config.suite = params_.suite;
    config.credential = party.credential;
    config.trust_store = TrustStore::pinned({peer.credential.certificate});
    config.schedule = params_.schedule;
    auto session_rng = std::make_unique<DeterministicRandom>(
        rng_.fork("session/" + std::to_string(i) + "/" + std::to_string(s)));
    party.sessions.push_back(std::make_unique<Instance>(
        Instance{j, role, Session(std::move(config), role, party.qkd, std::move(session_rng))}));

    rec.s = s;
    rec.result = ResultClass::value;
    logged(rec);
    return s;
}

std::optional<std::vector<Bytes>> Experiment::send(int i, int s, ByteView message) {
    auto& inst = instance(i, s);
    auto& session = inst.session;
    QueryRecord rec;
    rec.kind = QueryKind::send;
    rec.i = i;
    rec.s = s;
    rec.t = session.stage();
    rec.message_len = message.size();
    rec.target_accepted = session.status() == Status::accept;

    const std::uint64_t index = log_.next_index();
    std::optional<std::vector<Bytes>> out;
    if (session.status() == Status::accept && session.stage() < params_.n_stages) session.advance_stage();
    rec.t = session.stage();

    const Status before = session.status();
    if (before == Status::reject || before == Status::accept) {
        out = std::nullopt;
    } else if (inst.role == Role::initiator && before == Status::unset) {
        if (message.empty()) {
            try {
                out = session.start();
            } catch (const ProtocolError&) {
            }
        }
    } else {
        try {
            out = session.receive(message);
        } catch (const ProtocolError&) {
        }
    }
    if (session.status() == Status::accept && before != Status::accept) {
        const StageRef accepted{i, s, session.stage()};
        rec.caused_acceptances.push_back(accepted);
        log_.mark_accepted(accepted, index);
    }
    rec.result = out ? ResultClass::value : ResultClass::bottom;
    logged(rec);
    return out;
}

std::optional<Bytes> Experiment::reveal(int i, int s, int t) {
    const auto& session = instance(i, s).session;
    QueryRecord rec;
    rec.kind = QueryKind::reveal;
    rec.i = i;
    rec.s = s;
    rec.t = t;
    auto key = session.stage_key(t);
    rec.target_accepted = key.has_value();
    rec.result = key ? ResultClass::value : ResultClass::bottom;
    logged(rec);
    return key;
}

std::optional<Bytes> Experiment::test(int i, int s, int t) {
    const auto& session = instance(i, s).session;
    if (log_.test_target) throw HarnessError("only one Test query is allowed");
    QueryRecord rec;
    rec.kind = QueryKind::test;
    rec.i = i;
    rec.s = s;
    rec.t = t;
    auto key = session.stage_key(t);
    rec.target_accepted = key.has_value();
    if (!key) {
        logged(rec);
        return std::nullopt;
    }
    log_.test_target = StageRef{i, s, t};
    rec.result = ResultClass::value;
    logged(rec);
    if (b_) return key;
    if (!random_key_) random_key_ = rng_.bytes(key->size());
    return random_key_;
}

std::optional<Bytes> Experiment::corrupt_qk(int i) {
    check_party(i);
    auto& party = *parties_[static_cast<std::size_t>(i)];
    QueryRecord rec;
    rec.kind = QueryKind::corrupt_qk;
    rec.i = i;
    std::optional<Bytes> out;
    if (!party.qk_corrupted) {
        party.qk_corrupted = true;
        out = party.credential.secret_key;
    }
    rec.result = out ? ResultClass::value : ResultClass::bottom;
    logged(rec);
    return out;
}

std::optional<Bytes> Experiment::corrupt_ck(int i) {
    // Parties hold no classical long-term key.
    check_party(i);
    QueryRecord rec;
    rec.kind = QueryKind::corrupt_ck;
    rec.i = i;
    logged(rec);
    return std::nullopt;
}

std::optional<Bytes> Experiment::corrupt_sk(int i) {
    // No pre-shared symmetric key exists.
    check_party(i);
    QueryRecord rec;
    rec.kind = QueryKind::corrupt_sk;
    rec.i = i;
    logged(rec);
    return std::nullopt;
}

std::optional<Bytes> Experiment::compromise(QueryKind kind, int i, int s, int t) {
    const auto& session = instance(i, s).session;
    QueryRecord rec;
    rec.kind = kind;
    rec.i = i;
    rec.s = s;
    rec.t = t;
    const StageRef ref{i, s, t};
    rec.target_accepted = log_.accepted_at(ref).has_value();

    std::optional<Bytes> out;
    if (t >= 1 && t <= session.stage() && !compromised_.count({kind, ref})) {
        const auto& stage = session.stage_record(t);
        switch (kind) {
            case QueryKind::compromise_qk: out = stage.ephemeral.q; break;
            case QueryKind::compromise_ck: out = stage.ephemeral.c; break;
            case QueryKind::compromise_sk:
                if (!stage.qkd_key_id.empty()) out = kms_->corrupt_key(stage.qkd_key_id);
                break;
            case QueryKind::compromise_ss: out = stage.sec_state_in; break;
            default: throw HarnessError("not a Compromise query");
        }
        if (out) compromised_.insert({kind, ref});
    }
    rec.result = out ? ResultClass::value : ResultClass::bottom;
    logged(rec);
    return out;
}

std::optional<Bytes> Experiment::compromise_qk(int i, int s, int t) { return compromise(QueryKind::compromise_qk, i, s, t); }
std::optional<Bytes> Experiment::compromise_ck(int i, int s, int t) { return compromise(QueryKind::compromise_ck, i, s, t); }
std::optional<Bytes> Experiment::compromise_sk(int i, int s, int t) { return compromise(QueryKind::compromise_sk, i, s, t); }
std::optional<Bytes> Experiment::compromise_ss(int i, int s, int t) { return compromise(QueryKind::compromise_ss, i, s, t); }

QueryLog Experiment::log() const {
    QueryLog out = log_;
    for (std::size_t i = 0; i < parties_.size(); ++i) {
        const auto& sessions = parties_[i]->sessions;
        for (std::size_t s = 0; s < sessions.size(); ++s) {
            const auto& inst = *sessions[s];
            QueryLog::SessionView view;
            view.i = static_cast<int>(i);
            view.s = static_cast<int>(s);
            view.j = inst.j;
            view.role = inst.role;
            for (int t = 1; t <= inst.session.stage(); ++t) {
                view.sent.push_back(inst.session.stage_record(t).sent);
                view.received.push_back(inst.session.stage_record(t).received);
            }
            out.put_session(std::move(view));
        }
    }
    return out;
}

bool Experiment::matching(int i, int s, int j, int r, int t) const {
    instance(i, s);
    instance(j, r);
    return hake::matching(log(), i, s, j, r, t);
}

bool Experiment::origin(int i, int s, int j, int r, int t) const {
    instance(i, s);
    instance(j, r);
    const auto snapshot = log();
    return hake::matching(snapshot, i, s, j, r, t) || prefix_matching(snapshot, i, s, j, r, t);
}

bool Experiment::clean() const { return clean_muckle_sharp(log()); }

// ---- driver and stock adversaries ----

ExperimentOutcome run_experiment(const Params& params, const Adversary& adversary) {
    ExperimentOutcome outcome;
    try {
        Experiment e(params);
        outcome.b = e.challenge_bit_for_testing();
        try {
            outcome.guess = adversary(e);
        } catch (const std::exception& ex) {
            outcome.reason = ex.what();
            return outcome;
        }
        outcome.tested = e.test_target().has_value();
        if (!outcome.tested) {
            outcome.reason = "no Test query issued";
            return outcome;
        }
        outcome.clean = e.clean();
        outcome.win = outcome.clean && outcome.guess == static_cast<int>(outcome.b);
    } catch (const HarnessError& ex) {
        outcome.reason = ex.what();
        outcome.win = false;
    }
    return outcome;
}

bool relay_stage(Experiment& e, int i, int s, int j, int r, std::vector<Bytes>* wire) {
    auto first = e.send(i, s, {});
    if (!first) return false;
    std::vector<Bytes> to_responder = std::move(*first);
    std::vector<Bytes> to_initiator;
    while (!to_responder.empty() || !to_initiator.empty()) {
        for (const auto& m : to_responder) {
            if (wire) wire->push_back(m);
            auto reply = e.send(j, r, m);
            if (!reply) return false;
            to_initiator.insert(to_initiator.end(), reply->begin(), reply->end());
        }
        to_responder.clear();
        for (const auto& m : to_initiator) {
            if (wire) wire->push_back(m);
            auto reply = e.send(i, s, m);
            if (!reply) return false;
            to_responder.insert(to_responder.end(), reply->begin(), reply->end());
        }
        to_initiator.clear();
    }
    return e.session(i, s).status() == Status::accept && e.session(j, r).status() == Status::accept;
}

namespace adversaries {

namespace {

struct PassivePair {
    int s;
    int r;
};

PassivePair create_pair(Experiment& e) {
    auto s = e.create(0, 1, Role::initiator);
    auto r = e.create(1, 0, Role::responder);
    if (!s || !r) throw HarnessError("could not create the session pair");
    return {*s, *r};
}

std::vector<Bytes> open_payload(const Suite& suite, const KeySchedule& ks, Secret secret, ByteView wire) {
    const HandshakeMessage m = decode_message(wire);
    const auto keys = traffic_key_expand(ks.get(secret), *suite.aead, *suite.prf);
    const std::string ad = "Message " + std::to_string(message_index(m.type));
    auto pt = suite.aead->open(keys.key, keys.nonce(m.sequence), as_bytes(ad), m.fields.at(0));
    if (!pt) throw std::runtime_error("adversary could not open a record");
    return decode_fields(*pt);
}

}  // namespace

int coin_flip(Experiment& e) {
    const auto [s, r] = create_pair(e);
    relay_stage(e, 0, s, 1, r);
    e.test(0, s, 1);
    return e.adversary_random().coin() ? 1 : 0;
}

int reveal_then_test(Experiment& e) {
    const auto [s, r] = create_pair(e);
    relay_stage(e, 0, s, 1, r);
    auto real = e.reveal(0, s, 1);
    auto challenge = e.test(0, s, 1);
    return real && challenge && *real == *challenge ? 1 : 0;
}

int toy_kem_breaker(Experiment& e) {
    const Suite suite = Suite::resolve(e.params().suite);
    const bool toy_only = suite.pq->id() == "toy" && suite.auth->id() == "toy" &&
                          (!suite.classical || suite.classical->id() == "toy");
    const auto [s, r] = create_pair(e);
    std::vector<Bytes> wire;
    if (!relay_stage(e, 0, s, 1, r, &wire) || !toy_only || wire.size() != 8) {
        e.test(0, s, 1);
        return e.adversary_random().coin() ? 1 : 0;
    }
    std::sort(wire.begin(), wire.end(), [](const Bytes& a, const Bytes& b) { return peek_type(a) < peek_type(b); });

    auto k_q = e.compromise_sk(0, s, 1);
    if (!k_q) throw std::runtime_error("CompromiseSK returned bottom");

    const auto m1 = decode_message(wire[0]);
    const auto m2 = decode_message(wire[1]);
    KeySchedule ks(suite.prf, e.params().schedule);
    TranscriptState ts(suite.hash);
    ks.set_input(Secret::ss_c, m1.fields[0].empty() ? Bytes{} : ToyKem::shared_secret(m1.fields[0], m2.fields[0]));
    ks.set_input(Secret::ss_pq, ToyKem::shared_secret(m1.fields[1], m2.fields[1]));
    ks.set_input(Secret::k_q, *k_q);
    ks.set_input(Secret::sec_state_in, {});
    ts.record(1, wire[0]);
    ts.record(2, wire[1]);
    ks.derive_handshake_secrets(ts);

    const auto cert_r = Certificate::decode(open_payload(suite, ks, Secret::RHTS, wire[2]).at(0));
    ts.record(3, wire[2]);
    const auto ct_i = open_payload(suite, ks, Secret::IHTS, wire[3]).at(0);
    ks.set_input(Secret::ss_I, ToyKem::shared_secret(cert_r.public_key, ct_i));
    ts.record(4, wire[3]);
    ks.derive_authenticated_secrets(ts);

    const auto cert_i = Certificate::decode(open_payload(suite, ks, Secret::IAHTS, wire[4]).at(0));
    ts.record(5, wire[4]);
    const auto ct_r = open_payload(suite, ks, Secret::RAHTS, wire[5]).at(0);
    ks.set_input(Secret::ss_R, ToyKem::shared_secret(cert_i.public_key, ct_r));
    ts.record(6, wire[5]);
    ks.derive_master_and_finished(ts);
    ts.record(7, wire[6]);
    ts.record(8, wire[7]);
    ks.derive_application_and_state(ts);

    auto challenge = e.test(0, s, 1);
    return challenge && *challenge == ks.stage_key() ? 1 : 0;
}

}  // namespace adversaries

}  // namespace muckle::hake
