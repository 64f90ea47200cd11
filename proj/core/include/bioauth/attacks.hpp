#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bioauth/channel.hpp"
#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"
#include "bioauth/session.hpp"

namespace bioauth {

class Protocol;

enum class Claim { None, ImpersonatedTag, ImpersonatedReader, LearnedSecret, LinkedTags, Desynchronized };

std::string to_string(Claim c);

struct AttackOutcome {
  std::string protocol;
  std::string attack;
  bool succeeded = false;
  Claim claim = Claim::None;
  Transcript trace;
  std::uint64_t seed = 0;
  // Path of the JSONL transcript when one was written.
  std::string trace_ref;
  // Human-readable notes, one per strategy or finding.
  std::vector<std::string> findings;
};

// {protocol, attack, succeeded, claim, seed, trace_ref, findings}
std::string to_json(const AttackOutcome& outcome);

// Snapshot of one finished run, used by the agreement check.
struct RunRecord {
  Party role = Party::Tag;
  SessionValues values;
  bool accepted = false;
  std::optional<BitString> identified_id;  // reader runs only
  bool bio_verified = false;               // reader runs only
  bool live_genuine = true;                // capture came from the identified subject
  bool intruder_owned = false;             // tag runs on the intruder's own credentials
};

RunRecord snapshot(const Endpoint& tag, bool intruder_owned = false);
RunRecord snapshot(const ReaderEndpoint& reader, bool bio_verified, bool live_genuine);

// Injective agreement over a set of runs. Every reader acceptance of an
// honest tag ID must map to its own tag run with equal session values, every
// tag acceptance to its own reader run, and no biometric check may pass on a
// capture that is not the identified subject's. Acceptances of the intruder's
// own IDs are exempt. Returns one message per violation.
std::vector<std::string> agreement_violations(std::span<const RunRecord> runs,
                                              const std::set<BitString>& intruder_ids);

// Session 1 runs honestly and is recorded; in session 2 the adversary answers
// a fresh reader with the recorded tag messages. Succeeds iff the reader
// identifies the victim.
AttackOutcome replay_attack(const std::string& protocol_key, const SystemParams& params, Rng& rng);

// Nonce the algebraic replay sends against a new challenge: nt ^ nr ^ new_nr.
BitString forged_nonce(const BitString& nt, const BitString& nr, const BitString& new_nr);

// Replays a recorded (nt, first-half) response against a new challenge nr'
// with nt' = nt ^ nr ^ nr'. Requires a protocol that opens with a reader
// challenge; throws ConfigError otherwise.
AttackOutcome algebraic_replay(const std::string& protocol_key, const SystemParams& params, Rng& rng);
AttackOutcome ch_algebraic_replay(const SystemParams& params, Rng& rng);

// Scripted man-in-the-middle strategies against a victim tag and a reader;
// the intruder also owns a registered tag. Pure relay never counts as a
// violation. Succeeds iff some strategy breaks injective agreement, passes
// an impostor biometric or puts a tag secret on the wire.
AttackOutcome mitm_relay(const std::string& protocol_key, const SystemParams& params, Rng& rng);

struct TraceGameResult {
  std::size_t trials = 0;
  std::size_t wins = 0;
  double advantage = 0.0;  // |2 * wins / trials - 1|
};

// Untraceability game with a generic distinguisher: it guesses "same tag" iff
// some aligned payload field of the two transcripts is equal or within
// normalised Hamming distance 0.25. Trials use per-trial substreams, so the
// result does not depend on `jobs`. Throws ConfigError when trials < 100.
TraceGameResult trace_game(const std::string& protocol_key, std::size_t trials, const SystemParams& params,
                           const Rng& rng, unsigned jobs = 1);

// Guess of the generic distinguisher for one pair of transcripts.
bool distinguisher_says_same(std::span<const ChannelEvent> first, std::span<const ChannelEvent> second);

struct DesyncReport {
  bool ok = true;
  std::vector<std::string> findings;
};

// For each point: run a session killed there, then a fresh honest session.
// True iff every fresh session fully succeeds and persistent state never
// changes.
DesyncReport desync_report(const std::string& protocol_key, std::span<const InterruptPoint> points,
                           const SystemParams& params, Rng& rng);
bool desync_test(const std::string& protocol_key, std::span<const InterruptPoint> points,
                 const SystemParams& params, Rng& rng);

struct DosReport {
  bool ok = true;
  bool honest_accepted = false;
  bool state_unchanged = false;
  std::uint64_t min_server_hashes = 0;  // per bogus session
  std::uint64_t max_server_hashes = 0;
  std::size_t enrolled = 0;
};

// `bogus_sessions` adversary-initiated runs with random, well-formed payloads,
// then one honest session. params.n tags are enrolled. ok iff the honest run
// succeeds, persistent state is byte-identical and every bogus run costs the
// server at most n + 1 hash evaluations.
DosReport dos_flood(const std::string& protocol_key, std::size_t bogus_sessions, const SystemParams& params,
                    Rng& rng);
bool dos_flood_test(const std::string& protocol_key, std::size_t bogus_sessions, const SystemParams& params,
                    Rng& rng);

// Honest sessions with genuine captures at params.noise_sigma; returns how
// many were fully accepted with the right identity.
std::size_t honest_acceptances(const std::string& protocol_key, std::size_t sessions, const SystemParams& params,
                               Rng& rng);

}  // namespace bioauth
