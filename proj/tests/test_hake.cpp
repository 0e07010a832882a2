// HAKE experiment harness: query contracts, partnering, cleanness, stock adversaries.

#include <gtest/gtest.h>

#include "cleanness_cases.hpp"
#include "muckle/errors.hpp"

using namespace muckle;
using namespace muckle::hake;
using cleanness::Pair;

TEST(Hake, CreateContracts) {
    Experiment e(Params{.n_parties = 3, .n_sessions = 2});
    EXPECT_EQ(e.create(0, 1, Role::initiator), 0);
    EXPECT_FALSE(e.create(0, 1, Role::initiator));  // duplicate (i, j, role)
    EXPECT_EQ(e.create(0, 1, Role::responder), 1);
    EXPECT_FALSE(e.create(0, 2, Role::initiator));  // n_S reached
    EXPECT_THROW(e.create(1, 1, Role::initiator), HarnessError);
    EXPECT_THROW(e.create(0, 3, Role::initiator), HarnessError);
    EXPECT_EQ(Experiment::party_name(2), "P2");
    EXPECT_EQ(e.certificate(1).subject_id, "P1");
}

TEST(Hake, SendContracts) {
    Pair p;
    auto reply = p.e.send(1, 0, p.m1[0]);
    ASSERT_TRUE(reply);
    EXPECT_EQ(reply->size(), 2u);
    EXPECT_FALSE(p.e.send(1, 0, p.m1[0]));  // out of order: stage rejects
    EXPECT_EQ(p.e.session(1, 0).status(), Status::reject);
    EXPECT_FALSE(p.e.send(1, 0, reply->at(0)));  // rejected stays bottom
    EXPECT_THROW(p.e.send(0, 5, {}), HarnessError);

    Pair q;
    EXPECT_FALSE(q.e.send(1, 0, {}));  // empty input to a responder is junk
    EXPECT_EQ(q.e.session(1, 0).status(), Status::reject);
}

TEST(Hake, AcceptedSessionAdvancesUpToStageLimit) {
    Pair p(2);
    p.finish();
    auto m1 = p.e.send(0, 0, {});
    ASSERT_TRUE(m1);
    cleanness::pump(p.e, 0, 0, 1, 0, *m1);
    EXPECT_EQ(p.e.session(0, 0).stage(), 2);
    EXPECT_EQ(p.e.session(0, 0).status(), Status::accept);
    EXPECT_FALSE(p.e.send(0, 0, {}));  // n_T reached
    EXPECT_EQ(p.e.reveal(0, 0, 2), p.e.reveal(1, 0, 2));
}

TEST(Hake, RevealAndTestContracts) {
    Pair p;
    EXPECT_FALSE(p.e.reveal(0, 0, 1));  // not accepted
    EXPECT_FALSE(p.e.test(0, 0, 1));    // not accepted, not consumed
    EXPECT_FALSE(p.e.test_target());
    p.finish();
    const auto k = p.e.reveal(1, 0, 1);
    ASSERT_TRUE(k);
    EXPECT_EQ(k->size(), 64u);
    const auto challenge = p.e.test(0, 0, 1);
    ASSERT_TRUE(challenge);
    EXPECT_EQ(*challenge == *k, p.e.challenge_bit_for_testing());
    EXPECT_THROW(p.e.test(1, 0, 1), HarnessError);
    EXPECT_EQ(p.e.test_target(), (StageRef{0, 0, 1}));
}

TEST(Hake, RandomChallengeKeyIsStable) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Experiment e(Params{.seed = seed});
        e.create(0, 1, Role::initiator);
        e.create(1, 0, Role::responder);
        ASSERT_TRUE(relay_stage(e, 0, 0, 1, 0));
        const auto real = e.reveal(1, 0, 1);
        const auto c = e.test(0, 0, 1);
        EXPECT_EQ(*c == *real, e.challenge_bit_for_testing()) << seed;
    }
}

TEST(Hake, CorruptAndCompromiseContracts) {
    Pair p;
    EXPECT_FALSE(p.e.corrupt_ck(0));
    EXPECT_FALSE(p.e.corrupt_sk(0));
    const auto qk = p.e.corrupt_qk(0);
    ASSERT_TRUE(qk);
    EXPECT_FALSE(p.e.corrupt_qk(0));  // once
    ToyKem kem;
    DeterministicRandom rng(1);
    const auto enc = kem.encaps(p.e.certificate(0).public_key, rng);
    EXPECT_EQ(kem.decaps(*qk, enc.ciphertext), enc.shared_secret);

    EXPECT_TRUE(p.e.compromise_qk(0, 0, 1));
    EXPECT_FALSE(p.e.compromise_qk(0, 0, 1));  // once
    EXPECT_FALSE(p.e.compromise_ck(0, 0, 1));  // no classical KEM in the toy suite
    const auto sk = p.e.compromise_sk(0, 0, 1);
    ASSERT_TRUE(sk);
    EXPECT_EQ(sk->size(), kQkdKeyLen);
    EXPECT_FALSE(p.e.compromise_sk(1, 0, 1));  // responder has no stage yet
    EXPECT_EQ(p.e.compromise_ss(0, 0, 1), Bytes{});  // first stage starts from empty state
    p.finish();
    EXPECT_EQ(p.e.session(0, 0).key_schedule().get(Secret::k_q), *sk);
}

TEST(Hake, QueryLogIsOrderedAndTraced) {
    Pair p;
    p.finish();
    p.e.reveal(0, 0, 1);
    const auto log = p.e.log();
    std::uint64_t last = 0;
    for (const auto& r : log.records()) {
        EXPECT_GT(r.index, last);
        last = r.index;
    }
    ASSERT_TRUE(log.accepted_at({0, 0, 1}));
    ASSERT_TRUE(log.accepted_at({1, 0, 1}));
    EXPECT_LT(*log.accepted_at({1, 0, 1}), *log.accepted_at({0, 0, 1}));
    EXPECT_EQ(log.records().back().kind, QueryKind::reveal);
    EXPECT_TRUE(log.records().back().target_accepted);
    const auto trace = log.trace();
    EXPECT_NE(trace.find("Create"), std::string::npos);
    EXPECT_NE(trace.find("Reveal"), std::string::npos);
}

TEST(Hake, MatchingAndPrefixMatching) {
    {
        Pair p;
        p.finish();
        EXPECT_TRUE(p.e.matching(0, 0, 1, 0, 1));
        EXPECT_TRUE(p.e.matching(1, 0, 0, 0, 1));
        EXPECT_TRUE(p.e.origin(0, 0, 1, 0, 1));
        EXPECT_FALSE(p.e.matching(0, 0, 0, 0, 1));  // never with itself
    }
    {
        Pair p;
        p.finish([](MessageType t) { return t != MessageType::m8; });
        const auto log = p.e.log();
        EXPECT_FALSE(matching(log, 0, 0, 1, 0, 1));
        EXPECT_TRUE(prefix_matching(log, 0, 0, 1, 0, 1));   // initiator's output reached the responder
        EXPECT_FALSE(prefix_matching(log, 1, 0, 0, 0, 1));  // m8 never arrived
        EXPECT_TRUE(is_origin_session_of(log, 0, 0, 1, 0, 1));
        EXPECT_FALSE(is_origin_session_of(log, 1, 0, 0, 0, 1));
    }
    {
        Pair p;
        p.m1[0].back() ^= 1;  // key id: responder rejects
        p.finish();
        const auto log = p.e.log();
        EXPECT_FALSE(matching(log, 0, 0, 1, 0, 1));
        EXPECT_FALSE(prefix_matching(log, 0, 0, 1, 0, 1));
        EXPECT_FALSE(prefix_matching(log, 1, 0, 0, 0, 1));
    }
}

TEST(Hake, CleanRequiresTestTarget) {
    Pair p;
    EXPECT_THROW(clean_muckle_sharp(p.e.log()), HarnessError);
}

class CleannessTable : public ::testing::TestWithParam<std::size_t> {};

TEST_P(CleannessTable, Verdict) {
    const auto c = cleanness::cases().at(GetParam());
    EXPECT_EQ(c.evaluate(), c.expected) << c.name;
}

INSTANTIATE_TEST_SUITE_P(Cases, CleannessTable, ::testing::Range<std::size_t>(0, cleanness::cases().size()));

TEST(Hake, CleannessIsMonotoneInQueries) {
    // Adding queries never turns an unclean log clean.
    for (const auto& extra : {QueryKind::reveal, QueryKind::corrupt_qk, QueryKind::compromise_qk,
                              QueryKind::compromise_sk, QueryKind::compromise_ss}) {
        Pair p;
        p.e.compromise_qk(0, 0, 1);
        p.e.compromise_sk(0, 0, 1);
        p.finish();
        p.e.test(0, 0, 1);
        ASSERT_FALSE(p.e.clean());
        auto log = p.e.log();
        log.append({.kind = extra, .i = 1, .s = 0, .t = 1, .result = ResultClass::value});
        EXPECT_FALSE(clean_muckle_sharp(log)) << to_string(extra);
    }
}

TEST(Hake, BottomAnswersStillCount) {
    Pair p;
    p.finish();
    p.e.test(0, 0, 1);
    auto log = p.e.log();
    log.append({.kind = QueryKind::reveal, .i = 0, .s = 0, .t = 1, .result = ResultClass::bottom});
    EXPECT_FALSE(clean_muckle_sharp(log));
    auto errored = p.e.log();
    errored.append({.kind = QueryKind::reveal, .i = 0, .s = 0, .t = 1, .result = ResultClass::error});
    EXPECT_TRUE(clean_muckle_sharp(errored));
}

TEST(Hake, PassiveRelayAgreesInEverySuite) {
    for (const auto& suite : builtin_suites()) {
        Experiment e(Params{.n_stages = 3, .suite = suite.ids, .seed = 5});
        e.create(0, 1, Role::initiator);
        e.create(1, 0, Role::responder);
        for (int t = 1; t <= 3; ++t) {
            ASSERT_TRUE(relay_stage(e, 0, 0, 1, 0)) << suite.name;
            EXPECT_EQ(e.reveal(0, 0, t), e.reveal(1, 0, t)) << suite.name;
        }
    }
}

TEST(Hake, StockAdversaryRates) {
    int coin = 0, reveal = 0, breaker = 0;
    const int runs = 400;
    for (int seed = 0; seed < runs; ++seed) {
        Params p{.seed = static_cast<std::uint64_t>(seed)};
        coin += run_experiment(p, adversaries::coin_flip).win;
        const auto r = run_experiment(p, adversaries::reveal_then_test);
        EXPECT_FALSE(r.clean);
        reveal += r.win;
        const auto b = run_experiment(p, adversaries::toy_kem_breaker);
        EXPECT_TRUE(b.clean) << seed;
        breaker += b.win;
    }
    EXPECT_NEAR(coin / double(runs), 0.5, 0.1);
    EXPECT_EQ(reveal, 0);
    EXPECT_EQ(breaker, runs);
}

TEST(Hake, AdversaryHarnessErrorIsALoss) {
    const auto out = run_experiment(Params{}, [](Experiment& e) {
        e.create(0, 0, Role::initiator);
        return 1;
    });
    EXPECT_FALSE(out.win);
    EXPECT_FALSE(out.reason.empty());
}

TEST(Hake, UntestedRunNeverWins) {
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        EXPECT_FALSE(run_experiment(Params{.seed = seed}, [](Experiment& e) {
                         return e.challenge_bit_for_testing() ? 1 : 0;
                     }).win);
}
