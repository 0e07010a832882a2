// Session state machine: honest runs, stage chaining and every rejection path.

#include <gtest/gtest.h>

#include <set>

#include "muckle/certificate.hpp"
#include "muckle/errors.hpp"
#include "support.hpp"

using namespace muckle;
using support::run_tampered_stage;

namespace {

bench::LocalDeployment deployment(const char* suite = "toy-hybrid", std::uint64_t seed = 1) {
    return bench::make_local_deployment(builtin_suite(suite), seed);
}

}  // namespace

class HonestRun : public ::testing::TestWithParam<std::string> {};

TEST_P(HonestRun, MultiStageKeysAgreeAndChain) {
    const auto d = bench::make_local_deployment(builtin_suite(GetParam()), 7);
    auto pair = bench::make_session_pair(d, 7);
    std::set<Bytes> keys;
    for (int t = 1; t <= 4; ++t) {
        bench::run_stage(pair.initiator, pair.responder);
        ASSERT_EQ(pair.initiator.status(), Status::accept) << t;
        ASSERT_EQ(pair.responder.status(), Status::accept) << t;
        const auto ki = pair.initiator.stage_key(t), kr = pair.responder.stage_key(t);
        ASSERT_TRUE(ki && kr);
        EXPECT_EQ(*ki, *kr);
        EXPECT_EQ(ki->size(), 64u);
        keys.insert(*ki);
        const auto& ri = pair.initiator.stage_record(t);
        const auto& rr = pair.responder.stage_record(t);
        EXPECT_EQ(ri.sent, rr.received);
        EXPECT_EQ(rr.sent, ri.received);
        EXPECT_EQ(ri.sent.size(), 4u);
        EXPECT_EQ(ri.sec_state_out, rr.sec_state_out);
        if (t == 1) EXPECT_TRUE(ri.sec_state_in.empty());
        else EXPECT_EQ(ri.sec_state_in, *pair.initiator.stage_record(t - 1).sec_state_out);
        EXPECT_EQ(ri.qkd_key_id, rr.qkd_key_id);
        EXPECT_TRUE(ri.ephemeral.q && ri.ephemeral.s);
        EXPECT_EQ(static_cast<bool>(ri.ephemeral.c), d.initiator.suite.classical_kem != "");
    }
    EXPECT_EQ(keys.size(), 4u);
    EXPECT_EQ(pair.initiator.peer_certificate()->subject_id, "bob");
    EXPECT_EQ(pair.responder.peer_certificate()->subject_id, "alice");
}

INSTANTIATE_TEST_SUITE_P(Suites, HonestRun, ::testing::Values("toy", "toy-hybrid", "x25519-hybrid", "x25519-auth"));

TEST(Session, StatusWalksThroughStates) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 2);
    EXPECT_EQ(pair.initiator.status(), Status::unset);
    EXPECT_EQ(pair.responder.status(), Status::unset);
    EXPECT_FALSE(pair.initiator.stage_key(1));
    auto m1 = pair.initiator.start();
    EXPECT_EQ(pair.initiator.status(), Status::active);
    EXPECT_EQ(pair.initiator.expected(), MessageType::m2);
    // Flights: m1 | m2 m3 | m4 m5 | m6 | m7 | m8.
    const auto deliver = [](Session& to, const std::vector<Bytes>& msgs) {
        std::vector<Bytes> out;
        for (const auto& m : msgs)
            for (auto& x : to.receive(m)) out.push_back(std::move(x));
        return out;
    };
    const auto f2 = deliver(pair.responder, m1);
    EXPECT_EQ(pair.responder.status(), Status::active);
    ASSERT_EQ(f2.size(), 2u);
    const auto f3 = deliver(pair.initiator, f2);
    ASSERT_EQ(f3.size(), 2u);
    EXPECT_EQ(pair.initiator.expected(), MessageType::m6);
    const auto f4 = deliver(pair.responder, f3);
    ASSERT_EQ(f4.size(), 1u);
    const auto f5 = deliver(pair.initiator, f4);
    ASSERT_EQ(f5.size(), 1u);
    EXPECT_FALSE(pair.initiator.stage_key(1));
    EXPECT_EQ(pair.initiator.status(), Status::active);
    const auto f6 = deliver(pair.responder, f5);
    EXPECT_EQ(pair.responder.status(), Status::accept);
    EXPECT_EQ(pair.initiator.status(), Status::active);
    ASSERT_EQ(f6.size(), 1u);
    EXPECT_TRUE(deliver(pair.initiator, f6).empty());
    EXPECT_EQ(pair.initiator.status(), Status::accept);
    EXPECT_FALSE(pair.initiator.expected());
}

TEST(Session, ReceiveAfterAcceptThrowsWithoutSideEffects) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 3);
    std::vector<Bytes> wire;
    bench::run_stage(pair.initiator, pair.responder, &wire);
    const auto before = pair.initiator.stage_record(1);
    try {
        pair.initiator.receive(wire.back());
        FAIL() << "no exception";
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.reason(), RejectReason::state_error);
    }
    EXPECT_EQ(pair.initiator.status(), Status::accept);
    EXPECT_EQ(pair.initiator.stage_record(1).received, before.received);
    EXPECT_EQ(pair.initiator.stage_key(1), before.key);
}

TEST(Session, RoleMisuseIsStateError) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 4);
    EXPECT_THROW(pair.responder.start(), ProtocolError);
    EXPECT_THROW(pair.initiator.advance_stage(), ProtocolError);
    const auto m1 = pair.initiator.start();
    EXPECT_THROW(pair.initiator.start(), ProtocolError);
    // An initiator never expects m1.
    try {
        pair.initiator.receive(m1[0]);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.reason(), RejectReason::state_error);
    }
    EXPECT_EQ(pair.initiator.status(), Status::reject);
    EXPECT_THROW(pair.initiator.receive(m1[0]), ProtocolError);
    EXPECT_EQ(pair.initiator.reject_reason(), RejectReason::state_error);
}

TEST(Session, OutOfOrderDeliveryRejects) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 5);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, support::drop(MessageType::m2));
    EXPECT_EQ(out.initiator.status, Status::reject);
    EXPECT_EQ(out.initiator.reason, RejectReason::state_error);
    EXPECT_FALSE(out.initiator.key);
    EXPECT_EQ(out.responder.status, Status::active);
}

TEST(Session, DroppedLastMessageLeavesInitiatorActive) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 6);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, support::drop(MessageType::m8));
    EXPECT_EQ(out.responder.status, Status::accept);
    EXPECT_EQ(out.initiator.status, Status::active);
    EXPECT_FALSE(out.initiator.key);
}

TEST(Session, TamperedRecordsFailAuthentication) {
    const auto d = deployment();
    const auto lens = support::honest_lengths(d, 8);
    for (int t = 3; t <= 8; ++t) {
        const auto type = static_cast<MessageType>(t);
        for (const std::size_t pos : {kHeaderLen, kHeaderLen + kSequenceLen + 3, lens[t - 1] - 1}) {
            auto pair = bench::make_session_pair(d, 8);
            const auto out = run_tampered_stage(pair.initiator, pair.responder, support::flip_byte(type, pos));
            const bool to_initiator = t == 3 || t == 6 || t == 8;
            const auto& victim = to_initiator ? out.initiator : out.responder;
            EXPECT_EQ(victim.status, Status::reject) << "m" << t << " @" << pos;
            EXPECT_EQ(victim.reason, RejectReason::aead_failure) << "m" << t << " @" << pos;
            EXPECT_FALSE(out.initiator.key);
        }
    }
}

TEST(Session, TamperedHeaderIsDecodeOrStateError) {
    const auto d = deployment();
    for (int t = 1; t <= 8; ++t) {
        for (std::size_t pos = 0; pos < kHeaderLen; ++pos) {
            auto pair = bench::make_session_pair(d, 9);
            const auto out =
                run_tampered_stage(pair.initiator, pair.responder, support::flip_byte(static_cast<MessageType>(t), pos));
            const bool someone_rejected =
                out.initiator.status == Status::reject || out.responder.status == Status::reject;
            EXPECT_TRUE(someone_rejected) << "m" << t << " @" << pos;
            for (const auto* p : {&out.initiator, &out.responder}) {
                if (p->status == Status::reject) {
                    EXPECT_TRUE(p->reason == RejectReason::decode_error || p->reason == RejectReason::state_error)
                        << to_string(p->reason);
                }
            }
            EXPECT_FALSE(out.initiator.key);
        }
    }
}

TEST(Session, TamperedKeyIdIsQkdUnavailable) {
    const auto d = deployment();
    const auto lens = support::honest_lengths(d, 10);
    auto pair = bench::make_session_pair(d, 10);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, support::flip_byte(MessageType::m1, lens[0] - 1));
    EXPECT_EQ(out.responder.status, Status::reject);
    EXPECT_EQ(out.responder.reason, RejectReason::qkd_unavailable);
}

TEST(Session, ForgedInitiatorFinishedIsMacFailure) {
    auto d = deployment();
    d.initiator.finished_tag_hook = [](Bytes& tag) { tag[0] ^= 1; };
    auto pair = bench::make_session_pair(d, 11);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, nullptr);
    EXPECT_EQ(out.responder.status, Status::reject);
    EXPECT_EQ(out.responder.reason, RejectReason::mac_failure);
    EXPECT_FALSE(out.responder.key);
    EXPECT_EQ(out.initiator.status, Status::active);
}

TEST(Session, ForgedResponderFinishedIsMacFailure) {
    auto d = deployment();
    d.responder.finished_tag_hook = [](Bytes& tag) { tag.back() ^= 0x80; };
    auto pair = bench::make_session_pair(d, 12);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, nullptr);
    EXPECT_EQ(out.initiator.status, Status::reject);
    EXPECT_EQ(out.initiator.reason, RejectReason::mac_failure);
    EXPECT_FALSE(out.initiator.key);
}

TEST(Session, WrongSubjectIsIdentityMismatch) {
    auto d = deployment();
    ToyKem kem;
    DeterministicRandom rng(13);
    const SimulatedIssuer issuer("local-ca", Bytes(32, 4));
    d.responder.credential = make_credential("carol", kem, issuer, rng);
    d.initiator.trust_store = TrustStore::pinned({d.responder.credential.certificate});
    auto pair = bench::make_session_pair(d, 13);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, nullptr);
    EXPECT_EQ(out.initiator.status, Status::reject);
    EXPECT_EQ(out.initiator.reason, RejectReason::identity_mismatch);
}

TEST(Session, UntrustedCertificateIsCertFailure) {
    auto d = deployment();
    d.responder.trust_store = TrustStore();
    auto pair = bench::make_session_pair(d, 14);
    const auto out = run_tampered_stage(pair.initiator, pair.responder, nullptr);
    EXPECT_EQ(out.responder.status, Status::reject);
    EXPECT_EQ(out.responder.reason, RejectReason::cert_failure);
    EXPECT_FALSE(out.initiator.key);
}

TEST(Session, MissingQkdLinkIsQkdUnavailable) {
    auto d = deployment();
    d.kms = std::make_shared<KeyManagementService>();
    auto pair = bench::make_session_pair(d, 15);
    EXPECT_THROW(pair.initiator.start(), ProtocolError);
    EXPECT_EQ(pair.initiator.status(), Status::reject);
    EXPECT_EQ(pair.initiator.reject_reason(), RejectReason::qkd_unavailable);
}

TEST(Session, ResponderRejectsWhenItsKmsLacksTheKey) {
    auto d = deployment();
    auto other = std::make_shared<KeyManagementService>();
    other->add_link("alice", "bob");
    Session initiator(d.initiator, Role::initiator, std::make_shared<InProcessQkdClient>(d.kms, "alice"),
                      std::make_unique<DeterministicRandom>(16));
    Session responder(d.responder, Role::responder, std::make_shared<InProcessQkdClient>(other, "bob"),
                      std::make_unique<DeterministicRandom>(17));
    const auto out = run_tampered_stage(initiator, responder, nullptr);
    EXPECT_EQ(out.responder.reason, RejectReason::qkd_unavailable);
}

TEST(Session, AdvanceRequiresAcceptAndResetsState) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 18);
    bench::run_stage(pair.initiator, pair.responder);
    pair.initiator.advance_stage();
    EXPECT_EQ(pair.initiator.stage(), 2);
    EXPECT_EQ(pair.initiator.status(), Status::unset);
    EXPECT_FALSE(pair.initiator.stage_key(2));
    EXPECT_TRUE(pair.initiator.stage_key(1));
    EXPECT_THROW(pair.initiator.advance_stage(), ProtocolError);
    EXPECT_THROW(pair.initiator.stage_record(3), std::out_of_range);
}

TEST(Session, RejectedStageIsTerminal) {
    auto d = deployment();
    auto pair = bench::make_session_pair(d, 19);
    run_tampered_stage(pair.initiator, pair.responder, support::flip_byte(MessageType::m3, 20));
    ASSERT_EQ(pair.initiator.status(), Status::reject);
    EXPECT_THROW(pair.initiator.advance_stage(), ProtocolError);
    EXPECT_THROW(pair.initiator.start(), ProtocolError);
}

TEST(Session, SameSeedSameTranscript) {
    // Each run needs its own KMS: keys are drawn from the service's stream.
    const auto d = deployment("x25519-hybrid", 20);
    const auto d2 = deployment("x25519-hybrid", 20);
    std::vector<Bytes> a, b;
    auto p1 = bench::make_session_pair(d, 21);
    bench::run_stage(p1.initiator, p1.responder, &a);
    auto p2 = bench::make_session_pair(d2, 21);
    bench::run_stage(p2.initiator, p2.responder, &b);
    EXPECT_EQ(a, b);
    auto p3 = bench::make_session_pair(d, 22);
    std::vector<Bytes> c;
    bench::run_stage(p3.initiator, p3.responder, &c);
    EXPECT_NE(a[0], c[0]);
}
