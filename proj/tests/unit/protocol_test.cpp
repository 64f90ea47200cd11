#include <set>

#include <gtest/gtest.h>

#include "bioauth/errors.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/proposed.hpp"
#include "bioauth/registry.hpp"
#include "test_util.hpp"

namespace bioauth {
namespace {

using namespace proposed;

// Direct evaluation of the message formulas, independent of the role code.
struct Oracle {
  SystemParams params;
  BitString full(const BitString& id, const BitString& nt, const BitString& nr) const {
    return hash(concat(id ^ nt, nr), params);
  }
  BitString p(const BitString& id, const BitString& nt, const BitString& nr) const {
    return split_halves(full(id, nt, nr)).left;
  }
  BitString q(const BitString& id, const BitString& nt, const BitString& nr) const {
    return split_halves(full(id, nt, nr)).right;
  }
  BitString mask(const BitString& id, const BitString& nt, const BitString& nr) const {
    return hash(concat(concat(id, nt), nr), params);
  }
};

class ProposedTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (std::uint64_t s = 0; s < 5; ++s) tags.push_back(register_subject(s, params, db, rng, projector));
  }

  SystemParams params;
  Rng rng{77};
  Projector projector{deployment_key(params), params.d, params.l};
  ServerDb db;
  std::vector<TagState> tags;
  Hasher tag_hasher{params};
  Hasher server_hasher{params};
  Oracle oracle{params};
};

TEST_F(ProposedTest, RegistrationGivesDistinctIdsAndMatchingRecords) {
  std::set<BitString> ids;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    ids.insert(tags[i].id);
    EXPECT_EQ(db.records()[i].id, tags[i].id);
    EXPECT_EQ(db.records()[i].gb_ref, tags[i].gb);
    EXPECT_EQ(tags[i].gb, biohash(subject_template(i, params), projector));
    EXPECT_EQ(tags[i].phase(), TagPhase::Idle);
  }
  EXPECT_EQ(ids.size(), tags.size());
  EXPECT_THROW(db.add({tags[0].id, tags[0].gb, "dup"}), RegistrationError);
}

TEST_F(ProposedTest, ChallengeWidthAndUniqueness) {
  SystemParams p64 = SystemParams::for_width(64);
  Rng r(5);
  std::set<BitString> seen;
  for (int i = 0; i < 10000; ++i) {
    const BitString nr = reader_challenge(r, p64);
    ASSERT_EQ(nr.width(), 64u);
    ASSERT_TRUE(seen.insert(nr).second);
  }
  Rng a(9), b(9);
  EXPECT_EQ(reader_challenge(a, params), reader_challenge(b, params));
}

TEST_F(ProposedTest, TagResponseMatchesFormula) {
  const BitString nr = reader_challenge(rng, params);
  TagState& tag = tags[1];
  const auto [nt, p] = tag_respond(tag, nr, rng, tag_hasher);
  EXPECT_EQ(p, oracle.p(tag.id, nt, nr));
  EXPECT_EQ(p.width(), params.l / 2);
  EXPECT_EQ(tag.phase(), TagPhase::AwaitingQ);
  EXPECT_EQ(tag.session->cached_hash, oracle.full(tag.id, nt, nr));
  EXPECT_THROW(tag_respond(tag, BitString(64), rng, tag_hasher), WidthError);
}

TEST_F(ProposedTest, FreshTagNoncesGiveDistinctResponses) {
  const BitString nr = reader_challenge(rng, params);
  std::set<BitString> seen;
  for (int i = 0; i < 1000; ++i) {
    TagState tag = tags[0];
    ASSERT_TRUE(seen.insert(tag_respond(tag, nr, rng, tag_hasher).p).second);
  }
}

TEST_F(ProposedTest, IdentifyFindsTheRespondingTag) {
  for (auto& tag : tags) {
    const BitString nr = reader_challenge(rng, params);
    const auto r = tag_respond(tag, nr, rng, tag_hasher);
    server_hasher.reset();
    const auto id = server_identify(db, r.nt, nr, r.p, server_hasher);
    ASSERT_TRUE(id);
    EXPECT_EQ(*id, tag.id);
    EXPECT_LE(server_hasher.count(), db.size());
  }
}

TEST_F(ProposedTest, RandomResponsesAreNeverIdentified) {
  std::vector<TagState> ten;
  ServerDb big;
  for (std::uint64_t s = 0; s < 10; ++s) ten.push_back(register_subject(s, params, big, rng, projector));
  for (int i = 0; i < 10000; ++i) {
    server_hasher.reset();
    ASSERT_FALSE(server_identify(big, rng.bits(params.l), rng.bits(params.l), rng.bits(params.l / 2), server_hasher));
    ASSERT_EQ(server_hasher.count(), big.size());
  }
  EXPECT_FALSE(server_identify(ServerDb{}, rng.bits(128), rng.bits(128), rng.bits(64), server_hasher));
}

TEST_F(ProposedTest, ReaderProofRecomposesTheHash) {
  TagState& tag = tags[2];
  const BitString nr = reader_challenge(rng, params);
  const auto r = tag_respond(tag, nr, rng, tag_hasher);
  const BitString q = server_prove(tag.id, r.nt, nr, server_hasher);
  EXPECT_EQ(q, oracle.q(tag.id, r.nt, nr));
  EXPECT_EQ(q.width(), params.l / 2);
  EXPECT_EQ(concat(r.p, q), oracle.full(tag.id, r.nt, nr));
}

TEST_F(ProposedTest, TagVerifiesHonestProofWithoutHashing) {
  TagState& tag = tags[0];
  const BitString nr = reader_challenge(rng, params);
  const auto r = tag_respond(tag, nr, rng, tag_hasher);
  const auto before = tag_hasher.count();
  EXPECT_TRUE(tag_verify_reader(tag, server_prove(tag.id, r.nt, nr, server_hasher)));
  EXPECT_EQ(tag_hasher.count(), before);
  EXPECT_EQ(tag.phase(), TagPhase::BioPhase);
}

TEST_F(ProposedTest, TagRejectsFlippedProofAndClearsSession) {
  TagState& tag = tags[0];
  const BitString nr = reader_challenge(rng, params);
  const auto r = tag_respond(tag, nr, rng, tag_hasher);
  BitString q = server_prove(tag.id, r.nt, nr, server_hasher);
  q.flip_bit(17);
  EXPECT_FALSE(tag_verify_reader(tag, q));
  EXPECT_EQ(tag.phase(), TagPhase::Idle);
}

TEST_F(ProposedTest, TagRejectsProofsForOtherNonces) {
  TagState& tag = tags[3];
  for (int i = 0; i < 10000; ++i) {
    const BitString nr = rng.bits(params.l);
    tag_respond(tag, nr, rng, tag_hasher);
    ASSERT_FALSE(tag_verify_reader(tag, oracle.q(tag.id, rng.bits(params.l), rng.bits(params.l))));
  }
}

TEST_F(ProposedTest, BioMessageMasksGbAndInverts) {
  TagState& tag = tags[4];
  const BitString nr = reader_challenge(rng, params);
  const auto r = tag_respond(tag, nr, rng, tag_hasher);
  ASSERT_TRUE(tag_verify_reader(tag, server_prove(tag.id, r.nt, nr, server_hasher)));
  const BitString m = tag_bio_message(tag, tag_hasher);
  EXPECT_EQ(m.width(), params.l);
  EXPECT_EQ(m ^ oracle.mask(tag.id, r.nt, nr) ^ r.nt, tag.gb);
  EXPECT_EQ(server_extract_gb(tag.id, r.nt, nr, m, server_hasher), db.records()[4].gb_ref);
  EXPECT_EQ(tag.phase(), TagPhase::Idle);
  EXPECT_THROW(tag_bio_message(tag, tag_hasher), Error);
}

TEST_F(ProposedTest, BioMessagesDifferAcrossSessions) {
  TagState tag = tags[0];
  std::set<BitString> seen;
  for (int i = 0; i < 1000; ++i) {
    const BitString nr = rng.bits(params.l);
    const auto r = tag_respond(tag, nr, rng, tag_hasher);
    ASSERT_TRUE(tag_verify_reader(tag, oracle.q(tag.id, r.nt, nr)));
    ASSERT_TRUE(seen.insert(tag_bio_message(tag, tag_hasher)).second);
  }
}

TEST_F(ProposedTest, ExtractionWithWrongIdNeverYieldsGb) {
  const TagState& tag = tags[0];
  for (int i = 0; i < 10000; ++i) {
    const BitString nt = rng.bits(params.l), nr = rng.bits(params.l);
    const BitString m = oracle.mask(tag.id, nt, nr) ^ tag.gb ^ nt;
    ASSERT_NE(server_extract_gb(rng.bits(params.l), nt, nr, m, server_hasher), tag.gb);
  }
}

TEST_F(ProposedTest, ExtractInvertsEmbedForRandomGb) {
  for (int i = 0; i < 100; ++i) {
    const BitString id = rng.bits(params.l), nt = rng.bits(params.l), nr = rng.bits(params.l), gb = rng.bits(params.l);
    ASSERT_EQ(server_extract_gb(id, nt, nr, oracle.mask(id, nt, nr) ^ gb ^ nt, server_hasher), gb);
  }
}

TEST_F(ProposedTest, BiometricVerification) {
  const auto enrolled = subject_template(0, params);
  EXPECT_TRUE(server_verify_bio(tags[0].gb, enrolled, projector, params.epsilon));
  // An impostor's finger never passes at the default threshold.
  for (std::uint64_t s = 100; s < 200; ++s) {
    EXPECT_FALSE(server_verify_bio(tags[0].gb, subject_template(s, params), projector, params.epsilon));
  }
  // Strict threshold: a single differing bit is rejected.
  BitString gb = tags[0].gb;
  gb.flip_bit(0);
  EXPECT_FALSE(server_verify_bio(gb, enrolled, projector, 0));
}

TEST_F(ProposedTest, HonestSessionFullyAccepts) {
  Channel channel;
  const auto live = subject_template(1, params);
  const auto out = run_session(tags[1], db, &live, channel, rng, params);
  EXPECT_TRUE(out.tag_authenticated);
  EXPECT_TRUE(out.reader_authenticated);
  EXPECT_TRUE(out.bio_verified);
  EXPECT_EQ(out.identified_id, tags[1].id);
  EXPECT_FALSE(out.failure_stage);
  EXPECT_EQ(channel.observe().events.size(), 4u);
}

TEST_F(ProposedTest, ImpostorFingerFailsAtBioVerify) {
  Channel channel;
  const auto live = subject_template(999, params);
  const auto out = run_session(tags[1], db, &live, channel, rng, params);
  EXPECT_TRUE(out.tag_authenticated);
  EXPECT_TRUE(out.reader_authenticated);
  EXPECT_FALSE(out.bio_verified);
  EXPECT_EQ(out.failure_stage, FailureStage::BioVerify);
}

TEST_F(ProposedTest, UnregisteredTagFailsAtIdentify) {
  ServerDb other;
  TagState stranger = register_subject(50, params, other, rng, projector);
  Channel channel;
  const auto live = subject_template(50, params);
  const auto out = run_session(stranger, db, &live, channel, rng, params);
  EXPECT_FALSE(out.tag_authenticated);
  EXPECT_FALSE(out.bio_verified);
  EXPECT_EQ(out.failure_stage, FailureStage::Identify);
}

TEST(ProposedProperties, CompletenessOverThousandSeeds) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    SystemParams params;
    params.rng_seed = seed;
    params.n = 3;
    auto proto = make_protocol("proposed", params);
    Rng rng(seed);
    for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
    const std::size_t index = seed % params.n;
    const auto live = genuine_capture(*proto, index, 0.0, rng);
    Channel channel;
    const auto out = run(*proto, index, &live, channel, rng);
    ASSERT_TRUE(fully_accepted(*proto, out)) << "seed " << seed;
    ASSERT_EQ(out.identified_id, proto->tag_id(index));
    ASSERT_TRUE(out.bio_verified && out.tag_authenticated && out.reader_authenticated);
  }
}

TEST(ProposedProperties, HashBudgetPerSession) {
  SystemParams params;
  params.n = 6;
  auto proto = make_protocol("proposed", params);
  Rng rng(4);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
  for (std::size_t index = 0; index < params.n; ++index) {
    proto->tag_hasher().reset();
    proto->server_hasher().reset();
    const auto live = genuine_capture(*proto, index, params.noise_sigma, rng);
    Channel channel;
    ASSERT_TRUE(fully_accepted(*proto, run(*proto, index, &live, channel, rng)));
    EXPECT_EQ(proto->tag_hasher().count(), 2u);
    // Scan up to the match, one proof, one extraction.
    EXPECT_EQ(proto->server_hasher().count(), index + 1 + 1 + 1);
    EXPECT_LE(proto->server_hasher().count(), params.n + 2);
  }
}

TEST(ProposedProperties, SecretsNeverAppearOnTheRadioLink) {
  SystemParams params;
  params.n = 4;
  auto proto = make_protocol("proposed", params);
  Rng rng(6);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
  std::vector<EnrolmentRecord> records;
  for (std::size_t i = 0; i < params.n; ++i) records.push_back(proto->record(i));
  for (int s = 0; s < 10000; ++s) {
    const std::size_t index = static_cast<std::size_t>(s) % params.n;
    const auto live = genuine_capture(*proto, index, params.noise_sigma, rng);
    Channel channel;
    run(*proto, index, &live, channel, rng);
    for (const auto& e : channel.observe().events) {
      const BitString bits = testing::message_bits(e);
      for (const auto& r : records) {
        ASSERT_FALSE(testing::contains_bits(bits, r.id));
        ASSERT_FALSE(testing::contains_bits(bits, r.secret));
      }
    }
  }
}

TEST(ProposedProperties, PersistentStateSurvivesInterruptedSessions) {
  SystemParams params;
  params.n = 2;
  auto proto = make_protocol("proposed", params);
  Rng rng(8);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
  const std::string before = proto->persistent_state();
  for (const auto point : kAllInterruptPoints) {
    const auto live = genuine_capture(*proto, 0, params.noise_sigma, rng);
    Channel channel;
    SessionOptions opts;
    opts.interrupt = point;
    run(*proto, 0, &live, channel, rng, opts);
    ASSERT_EQ(proto->persistent_state(), before) << to_string(point);
  }
  Channel blocked;
  blocked.block([](const ChannelEvent&) { return true; });
  const auto live = genuine_capture(*proto, 1, params.noise_sigma, rng);
  const auto out = run(*proto, 1, &live, blocked, rng);
  EXPECT_EQ(out.failure_stage, FailureStage::ChannelLoss);
  EXPECT_EQ(proto->persistent_state(), before);
}

TEST(ProposedProperties, StepLayoutFollowsTheMessageFlow) {
  const auto& s = steps();
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].sender, Party::Reader);
  EXPECT_FALSE(s[0].counted_in_cost);
  EXPECT_EQ(s[1].sender, Party::Tag);
  EXPECT_EQ(s[2].sender, Party::Reader);
  EXPECT_EQ(s[3].sender, Party::Tag);
}

}  // namespace
}  // namespace bioauth
