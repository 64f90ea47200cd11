#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bioauth/attacks.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/registry.hpp"

namespace bioauth {
namespace {

struct Deployment {
  explicit Deployment(const std::string& key, std::size_t n = 2, std::uint64_t seed = 51) : rng(seed) {
    params.n = n;
    proto = make_protocol(key, params);
    for (std::size_t i = 0; i < n; ++i) proto->enroll(rng.next_u64(), rng);
  }
  SessionOutcome session(std::size_t index, Channel& channel, const SessionOptions& opts = {}) {
    std::optional<BiometricTemplate> live;
    if (proto->has_bio_phase()) live = genuine_capture(*proto, index, params.noise_sigma, rng);
    return run(*proto, index, live ? &*live : nullptr, channel, rng, opts);
  }
  SystemParams params;
  Rng rng;
  std::unique_ptr<Protocol> proto;
};

TEST(ChannelTest, ProposedSessionHasFourRadioEvents) {
  Deployment d("proposed");
  Channel channel;
  d.session(0, channel);
  const auto& events = channel.observe().events;
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events[0].direction, Direction::ReaderToTag);
  EXPECT_EQ(events[1].direction, Direction::TagToReader);
  EXPECT_EQ(events[1].payload.size(), 2u);
  EXPECT_EQ(events[2].direction, Direction::ReaderToTag);
  EXPECT_EQ(events[3].direction, Direction::TagToReader);
  for (const auto& e : events) EXPECT_TRUE(e.delivered);
}

TEST(ChannelTest, RhlsSessionHasOneTagEvent) {
  Deployment d("rhls");
  Channel channel;
  d.session(0, channel);
  ASSERT_EQ(channel.observe().events.size(), 1u);
  EXPECT_EQ(channel.observe().events[0].direction, Direction::TagToReader);
}

TEST(ChannelTest, ObservationIsIdempotent) {
  Deployment d("proposed");
  Channel channel;
  d.session(0, channel);
  const std::string first = to_jsonl(channel.observe());
  EXPECT_EQ(to_jsonl(channel.observe()), first);
}

TEST(ChannelTest, BlockingEverythingLosesTheSession) {
  Deployment d("proposed");
  const std::string before = d.proto->persistent_state();
  Channel channel;
  channel.block([](const ChannelEvent&) { return true; });
  const auto out = d.session(0, channel);
  EXPECT_EQ(out.failure_stage, FailureStage::ChannelLoss);
  EXPECT_FALSE(out.tag_authenticated);
  EXPECT_EQ(d.proto->persistent_state(), before);
}

TEST(ChannelTest, FlippedReaderProofFailsAtReaderProof) {
  Deployment d("proposed");
  Channel channel;
  channel.modify([](ChannelEvent& e) {
    if (e.step == 3) e.payload[0].flip_bit(0);
  });
  const auto out = d.session(0, channel);
  EXPECT_TRUE(out.tag_authenticated);
  EXPECT_FALSE(out.reader_authenticated);
  EXPECT_EQ(out.failure_stage, FailureStage::ReaderProof);
}

TEST(ChannelTest, InjectedRandomResponsesAreNeverIdentified) {
  Deployment d("proposed", 1);
  Rng attacker(3);
  Channel channel;
  for (int i = 0; i < 10000; ++i) {
    channel.reset_transcript();
    ChannelEvent fake;
    fake.step = 2;
    fake.label = "tag_response";
    fake.direction = Direction::TagToReader;
    fake.payload = {attacker.bits(128), attacker.bits(64)};
    channel.inject(fake);
    const auto out = d.session(0, channel);
    ASSERT_FALSE(out.tag_authenticated);
    ASSERT_EQ(out.failure_stage, FailureStage::Identify);
    // The suppressed honest response stays on record ahead of the injected one.
    const auto& events = channel.observe().events;
    ASSERT_FALSE(events[1].delivered);
    ASSERT_TRUE(events[2].adversarial);
  }
}

TEST(ChannelTest, SecureLinksRefuseAdversaryOperations) {
  for (const Link link : {Link::ReaderServer, Link::SensorServer}) {
    Channel channel(link);
    EXPECT_THROW(channel.block([](const ChannelEvent&) { return true; }), AdversaryOnSecureLink);
    EXPECT_THROW(channel.modify([](ChannelEvent&) {}), AdversaryOnSecureLink);
    EXPECT_THROW(channel.inject(ChannelEvent{}), AdversaryOnSecureLink);
  }
  Channel radio;
  EXPECT_NO_THROW(radio.block([](const ChannelEvent&) { return false; }));
}

TEST(ChannelTest, JsonlTranscriptHasOneObjectPerEvent) {
  Deployment d("proposed");
  Channel channel;
  channel.set_metadata("proposed", 51);
  d.session(0, channel);
  std::istringstream lines(to_jsonl(channel.observe()));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("step"));
    EXPECT_TRUE(j.contains("direction"));
    EXPECT_TRUE(j.contains("sender"));
    EXPECT_TRUE(j.contains("receiver"));
    EXPECT_EQ(j["payload_hex"].size(), j["bit_width"].size());
    ++count;
  }
  EXPECT_EQ(count, 4);
}

TEST(ReplayTest, ExpectedOutcomes) {
  const SystemParams params;
  Rng rng(61);
  EXPECT_TRUE(replay_attack("rhls", params, rng).succeeded);
  EXPECT_TRUE(replay_attack("clear_id", params, rng).succeeded);
  const auto rhls = replay_attack("rhls", params, rng);
  EXPECT_EQ(rhls.claim, Claim::ImpersonatedTag);
  EXPECT_FALSE(rhls.trace.events.empty());
}

TEST(ReplayTest, ProposedResistsOverThousandTrials) {
  const SystemParams params;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    ASSERT_FALSE(replay_attack("proposed", params, rng).succeeded) << seed;
  }
}

TEST(AlgebraicReplayTest, BreaksChButNotProposed) {
  const SystemParams params;
  Rng rng(62);
  EXPECT_TRUE(ch_algebraic_replay(params, rng).succeeded);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r(seed);
    ASSERT_FALSE(algebraic_replay("proposed", params, r).succeeded) << seed;
  }
  EXPECT_THROW(algebraic_replay("rhls", params, rng), ConfigError);
}

TEST(MitmTest, ExpectedOutcomes) {
  const SystemParams params;
  Rng rng(63);
  const auto proposed = mitm_relay("proposed", params, rng);
  EXPECT_FALSE(proposed.succeeded);
  EXPECT_FALSE(proposed.findings.empty());
  EXPECT_TRUE(mitm_relay("rhls", params, rng).succeeded);
}

TEST(AgreementTest, PureRelayIsNotAViolation) {
  Deployment d("proposed");
  const auto tag = d.proto->make_tag(0, 1);
  const auto reader = d.proto->make_reader(2);
  const auto live = genuine_capture(*d.proto, 0, 0.0, d.rng);
  Channel channel;
  const auto out = drive_session(d.proto->steps(), *tag, *reader, &live, true, channel);
  ASSERT_TRUE(out.bio_verified);
  const std::vector<RunRecord> runs = {snapshot(*tag), snapshot(*reader, out.bio_verified, true)};
  EXPECT_TRUE(agreement_violations(runs, {}).empty());
  // The same reader acceptance counted twice has only one partner run.
  const std::vector<RunRecord> doubled = {runs[0], runs[1], runs[1]};
  EXPECT_FALSE(agreement_violations(doubled, {}).empty());
}

TEST(TraceGameTest, CalibrationAndProposed) {
  const SystemParams params;
  const Rng rng(64);
  EXPECT_GE(trace_game("clear_id", 2000, params, rng).advantage, 0.95);
  EXPECT_LE(trace_game("proposed", 10000, params, rng).advantage, 0.05);
  EXPECT_THROW(trace_game("proposed", 0, params, rng), ConfigError);
  EXPECT_THROW(trace_game("proposed", 99, params, rng), ConfigError);
}

TEST(TraceGameTest, ResultDoesNotDependOnJobs) {
  const SystemParams params;
  const Rng rng(65);
  const auto one = trace_game("proposed", 400, params, rng, 1);
  const auto four = trace_game("proposed", 400, params, rng, 4);
  EXPECT_EQ(one.wins, four.wins);
}

TEST(DesyncTest, StaticIdProtocolsRecoverEverywhere) {
  const SystemParams params;
  for (const std::string key : {"proposed", "rhls", "ch"}) {
    Rng rng(66);
    EXPECT_TRUE(desync_test(key, kAllInterruptPoints, params, rng)) << key;
  }
  Rng rng(67);
  EXPECT_TRUE(desync_test("proposed", {}, params, rng));
}

TEST(DosTest, BogusSessionsCostExactlyOneScan) {
  SystemParams params;
  params.n = 5;
  Rng rng(68);
  const auto report = dos_flood("proposed", 2000, params, rng);
  EXPECT_TRUE(report.ok);
  EXPECT_TRUE(report.honest_accepted);
  EXPECT_TRUE(report.state_unchanged);
  EXPECT_EQ(report.min_server_hashes, params.n);
  EXPECT_EQ(report.max_server_hashes, params.n);
  Rng r0(69);
  EXPECT_TRUE(dos_flood_test("proposed", 0, params, r0));
}

TEST(AttackJsonTest, CarriesTheDocumentedFields) {
  const SystemParams params;
  Rng rng(70);
  const auto j = nlohmann::json::parse(to_json(replay_attack("rhls", params, rng)));
  for (const char* key : {"protocol", "attack", "succeeded", "seed", "trace_ref"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["protocol"], "rhls");
  EXPECT_EQ(j["succeeded"], true);
}

TEST(DeterminismTest, GamesReplayUnderFixedSeed) {
  const SystemParams params;
  Rng a(71), b(71);
  EXPECT_EQ(to_json(mitm_relay("proposed", params, a)), to_json(mitm_relay("proposed", params, b)));
  Rng c(72), d(72);
  EXPECT_EQ(to_jsonl(replay_attack("rhls", params, c).trace), to_jsonl(replay_attack("rhls", params, d).trace));
}

}  // namespace
}  // namespace bioauth
