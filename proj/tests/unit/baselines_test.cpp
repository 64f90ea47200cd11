#include <vector>

#include <gtest/gtest.h>

#include "bioauth/attacks.hpp"
#include "bioauth/baselines.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/registry.hpp"

namespace bioauth {
namespace {

class RhlsTest : public ::testing::Test {
 protected:
  SystemParams params;
  Rng rng{21};
  Hasher hasher{params};
  std::vector<rhls::Tag> db = {{rng.bits(128)}, {rng.bits(128)}, {rng.bits(128)}};
};

TEST_F(RhlsTest, ResponseMatchesFormula) {
  const auto r = rhls::tag_respond(db[1], rng, hasher);
  EXPECT_EQ(r.h1, hash(concat(db[1].id, r.nt), params));
  EXPECT_EQ(r.h1.width(), params.l);
  EXPECT_EQ(hasher.count(), 1u);
}

TEST_F(RhlsTest, HonestAndReplayedResponsesBothVerify) {
  const auto r = rhls::tag_respond(db[2], rng, hasher);
  EXPECT_EQ(rhls::server_verify(db, r.nt, r.h1, hasher), db[2].id);
  // Nothing binds the response to the session, so it verifies again.
  EXPECT_EQ(rhls::server_verify(db, r.nt, r.h1, hasher), db[2].id);
}

TEST_F(RhlsTest, RandomResponsesAreRejected) {
  for (int i = 0; i < 10000; ++i) ASSERT_FALSE(rhls::server_verify(db, rng.bits(128), rng.bits(128), hasher));
}

class ChTest : public ::testing::Test {
 protected:
  SystemParams params;
  Rng rng{22};
  Hasher hasher{params};
  std::vector<ch::Tag> db = {{rng.bits(128), rng.bits(128)}, {rng.bits(128), rng.bits(128)}};
};

TEST_F(ChTest, RotationIsLeftRotationByHashModWidth) {
  const BitString id = BitString::from_binary("10000001");
  EXPECT_EQ(ch::rotate(id, BitString::from_u64(1, 16)), BitString::from_binary("00000011"));
  EXPECT_EQ(ch::rotate(id, BitString::from_u64(9, 16)), BitString::from_binary("00000011"));
  EXPECT_EQ(ch::rotate(id, BitString::from_u64(8, 16)), id);
}

TEST_F(ChTest, ResponseMatchesFormula) {
  const BitString nr = rng.bits(128);
  const auto r = ch::tag_respond(db[0], nr, rng, hasher);
  const BitString g = hash(nr ^ r.nt ^ db[0].id, params);
  const BitString x = db[0].id.rotate_left(g.mod(128)) ^ g;
  EXPECT_EQ(r.left, left_half(x));
  const auto match = ch::server_respond(db, nr, r.nt, r.left, hasher);
  ASSERT_TRUE(match);
  EXPECT_EQ(match->id, db[0].id);
  EXPECT_EQ(match->right, right_half(x));
}

TEST_F(ChTest, NoMatchGivesNothing) {
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(ch::server_respond(db, rng.bits(128), rng.bits(128), rng.bits(64), hasher));
  }
}

TEST_F(ChTest, XorShiftedNonceReproducesTheResponse) {
  const BitString nr = rng.bits(128);
  const auto r = ch::tag_respond(db[1], nr, rng, hasher);
  const BitString nr2 = rng.bits(128);
  const BitString nt2 = forged_nonce(r.nt, nr, nr2);
  EXPECT_EQ(nt2, r.nt ^ nr ^ nr2);
  const auto match = ch::server_respond(db, nr2, nt2, r.left, hasher);
  ASSERT_TRUE(match);
  EXPECT_EQ(match->id, db[1].id);
  // Degenerate challenge: the forged nonce is the recorded one.
  EXPECT_EQ(forged_nonce(r.nt, nr, nr), r.nt);
}

TEST(ClearIdTest, AnswersWithTheSameIdEverySession) {
  Rng rng(23);
  const clear_id::Tag tag{rng.bits(128)};
  EXPECT_EQ(clear_id::tag_respond(tag), tag.id);
  EXPECT_EQ(clear_id::tag_respond(tag), clear_id::tag_respond(tag));
  EXPECT_EQ(clear_id::tag_respond(tag).width(), 128u);
}

class RegistryTest : public ::testing::TestWithParam<std::string> {};

TEST_P(RegistryTest, HonestSessionsCompleteAndStateIsStatic) {
  SystemParams params;
  params.n = 3;
  auto proto = make_protocol(GetParam(), params);
  Rng rng(31);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
  const std::string before = proto->persistent_state();
  for (int s = 0; s < 200; ++s) {
    const std::size_t index = static_cast<std::size_t>(s) % params.n;
    std::optional<BiometricTemplate> live;
    if (proto->has_bio_phase()) live = genuine_capture(*proto, index, params.noise_sigma, rng);
    Channel channel;
    const auto out = run(*proto, index, live ? &*live : nullptr, channel, rng);
    ASSERT_TRUE(fully_accepted(*proto, out));
    ASSERT_EQ(out.identified_id, proto->tag_id(index));
  }
  EXPECT_EQ(proto->persistent_state(), before);
}

TEST_P(RegistryTest, RecordsRoundTripThroughAdopt) {
  SystemParams params;
  auto a = make_protocol(GetParam(), params);
  Rng rng(32);
  a->enroll(7, rng, "alice");
  auto b = make_protocol(GetParam(), params);
  b->adopt(a->record(0), 7);
  EXPECT_EQ(b->record(0).id, a->record(0).id);
  EXPECT_EQ(b->record(0).secret, a->record(0).secret);
  EXPECT_EQ(b->persistent_state(), a->persistent_state());
}

INSTANTIATE_TEST_SUITE_P(AllProtocols, RegistryTest, ::testing::ValuesIn(protocol_keys()));

TEST(RegistryLayoutTest, StepCountsPerProtocol) {
  SystemParams params;
  EXPECT_EQ(make_protocol("proposed", params)->steps().size(), 4u);
  EXPECT_EQ(make_protocol("rhls", params)->steps().size(), 1u);
  EXPECT_EQ(make_protocol("ch", params)->steps().size(), 3u);
  EXPECT_EQ(make_protocol("clear_id", params)->steps().size(), 1u);
  EXPECT_FALSE(make_protocol("rhls", params)->mutual());
  EXPECT_TRUE(make_protocol("ch", params)->mutual());
  EXPECT_THROW(make_protocol("lcap", params), ConfigError);
}

}  // namespace
}  // namespace bioauth
