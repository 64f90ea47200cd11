#include "bioauth/attacks.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <thread>

#include <json.hpp>

#include "bioauth/errors.hpp"
#include "bioauth/registry.hpp"

namespace bioauth {

std::string to_string(Claim c) {
  switch (c) {
    case Claim::None:
      return "None";
    case Claim::ImpersonatedTag:
      return "ImpersonatedTag";
    case Claim::ImpersonatedReader:
      return "ImpersonatedReader";
    case Claim::LearnedSecret:
      return "LearnedSecret";
    case Claim::LinkedTags:
      return "LinkedTags";
    case Claim::Desynchronized:
      return "Desynchronized";
  }
  return "Unknown";
}

std::string to_json(const AttackOutcome& outcome) {
  nlohmann::ordered_json j;
  j["protocol"] = outcome.protocol;
  j["attack"] = outcome.attack;
  j["succeeded"] = outcome.succeeded;
  j["claim"] = to_string(outcome.claim);
  j["seed"] = outcome.seed;
  j["trace_ref"] = outcome.trace_ref;
  j["findings"] = outcome.findings;
  return j.dump();
}

RunRecord snapshot(const Endpoint& tag, bool intruder_owned) {
  RunRecord r;
  r.role = Party::Tag;
  r.values = tag.values();
  r.accepted = tag.accepted();
  r.intruder_owned = intruder_owned;
  return r;
}

RunRecord snapshot(const ReaderEndpoint& reader, bool bio_verified, bool live_genuine) {
  RunRecord r;
  r.role = Party::Reader;
  r.values = reader.values();
  r.accepted = reader.accepted();
  r.identified_id = reader.identified_id();
  r.bio_verified = bio_verified;
  r.live_genuine = live_genuine;
  return r;
}

namespace {

// Every value the reader committed to is one the tag run holds too.
bool agrees(const RunRecord& tag, const RunRecord& reader) {
  for (const auto& [name, value] : reader.values) {
    auto it = tag.values.find(name);
    if (it == tag.values.end() || it->second != value) return false;
  }
  return !reader.values.empty();
}

std::string describe(const RunRecord& r) {
  std::string out = r.role == Party::Tag ? "tag run" : "reader run";
  for (const auto& [name, value] : r.values) out += " " + name + "=" + value.to_hex().substr(0, 8);
  return out;
}

}  // namespace

std::vector<std::string> agreement_violations(std::span<const RunRecord> runs,
                                              const std::set<BitString>& intruder_ids) {
  std::vector<std::string> out;
  std::vector<bool> tag_used(runs.size(), false);
  std::vector<bool> reader_used(runs.size(), false);

  // Nonces make candidate partners unique in practice, so first-fit matching
  // is exact.
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.role != Party::Reader || !r.accepted || !r.identified_id) continue;
    if (intruder_ids.contains(*r.identified_id)) continue;
    bool matched = false;
    for (std::size_t j = 0; j < runs.size() && !matched; ++j) {
      const auto& t = runs[j];
      if (t.role != Party::Tag || t.intruder_owned || tag_used[j] || !agrees(t, r)) continue;
      tag_used[j] = true;
      matched = true;
    }
    if (!matched) out.push_back("reader accepted without a matching tag run: " + describe(r));
    if (r.bio_verified && !r.live_genuine) out.push_back("impostor capture accepted: " + describe(r));
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& t = runs[i];
    if (t.role != Party::Tag || !t.accepted || t.intruder_owned) continue;
    bool matched = false;
    for (std::size_t j = 0; j < runs.size() && !matched; ++j) {
      const auto& r = runs[j];
      if (r.role != Party::Reader || reader_used[j] || !r.accepted || !agrees(t, r)) continue;
      reader_used[j] = true;
      matched = true;
    }
    if (!matched) out.push_back("tag accepted without a matching reader run: " + describe(t));
  }
  return out;
}

namespace {

// Which message of a protocol plays which role.
struct StepRoles {
  std::optional<StepSpec> challenge;
  std::optional<StepSpec> response;
  std::optional<StepSpec> proof;
  std::optional<StepSpec> bio;
};

StepRoles roles_of(const Protocol& protocol) {
  StepRoles roles;
  for (const auto& s : protocol.steps()) {
    if (s.sender == Party::Reader) {
      if (!roles.response) {
        roles.challenge = s;
      } else if (!roles.proof) {
        roles.proof = s;
      }
    } else if (!roles.response) {
      roles.response = s;
    } else if (!roles.bio) {
      roles.bio = s;
    }
  }
  return roles;
}

Direction direction_of(const StepSpec& s) {
  return s.sender == Party::Tag ? Direction::TagToReader : Direction::ReaderToTag;
}

// Adversary-controlled tag: emits whatever its script says and swallows
// everything it hears.
class ScriptedTag final : public Endpoint {
 public:
  using Script = std::function<std::optional<Payload>(int step, const std::map<int, Payload>& heard)>;

  explicit ScriptedTag(Script script) : script_(std::move(script)) {}

  std::optional<Payload> emit(int step) override { return script_(step, heard_); }
  bool absorb(int step, const Payload& message) override {
    heard_[step] = message;
    return true;
  }
  void abort() override {}
  bool accepted() const override { return false; }
  SessionValues values() const override { return {}; }

 private:
  Script script_;
  std::map<int, Payload> heard_;
};

bool deliver(Channel& channel, const StepSpec& step, Payload payload, Endpoint& receiver, bool adversarial) {
  auto got = channel.transmit(step.number, step.label, direction_of(step), std::move(payload), adversarial);
  return got && receiver.absorb(step.number, *got);
}

// Logs a message the adversary swallows.
void drop(Channel& channel, const StepSpec& step, Payload payload) {
  channel.block([](const ChannelEvent&) { return true; });
  channel.transmit(step.number, step.label, direction_of(step), std::move(payload));
  channel.clear_adversary();
}

using Tamper = std::function<bool(const StepSpec& step, Payload& message)>;
using Recording = std::map<int, Payload>;

// Runs the radio exchange, optionally rewriting messages in flight. Returns
// true iff every message was accepted.
bool relay(const Protocol& protocol, Channel& channel, Endpoint& tag, ReaderEndpoint& reader,
           const Tamper& tamper = {}, Recording* recording = nullptr, bool adversarial_tag = false) {
  for (const auto& step : protocol.steps()) {
    const bool from_tag = step.sender == Party::Tag;
    Endpoint& sender = from_tag ? tag : static_cast<Endpoint&>(reader);
    Endpoint& receiver = from_tag ? static_cast<Endpoint&>(reader) : tag;
    auto message = sender.emit(step.number);
    if (!message) {
      tag.abort();
      reader.abort();
      return false;
    }
    if (recording) (*recording)[step.number] = *message;
    const bool changed = tamper && tamper(step, *message);
    if (!deliver(channel, step, std::move(*message), receiver, changed || (from_tag && adversarial_tag))) {
      tag.abort();
      reader.abort();
      return false;
    }
  }
  return true;
}

struct Deployment {
  std::unique_ptr<Protocol> protocol;
  StepRoles roles;
  std::size_t victim = 0;
  std::size_t intruder = 1;
};

Deployment deploy(const std::string& key, const SystemParams& params, Rng& rng, bool with_intruder) {
  Deployment d;
  d.protocol = make_protocol(key, params);
  d.roles = roles_of(*d.protocol);
  d.victim = d.protocol->enroll(0, rng);
  if (with_intruder) d.intruder = d.protocol->enroll(1, rng);
  return d;
}

// Reader side of one honest-looking exchange plus the optional biometric step.
bool finish_bio(const Protocol& protocol, ReaderEndpoint& reader, bool radio_complete,
                const BiometricTemplate& live) {
  return protocol.has_bio_phase() && radio_complete && reader.verify_biometric(live);
}

AttackOutcome started(const std::string& protocol_key, const std::string& attack, const Rng& rng) {
  AttackOutcome out;
  out.protocol = protocol_key;
  out.attack = attack;
  out.seed = rng.key();
  return out;
}

// Capture of the subject behind the intruder's tag: an impostor for the victim.
BiometricTemplate impostor_capture(const Deployment& d, Rng& rng) {
  return genuine_capture(*d.protocol, d.intruder, d.protocol->params().noise_sigma, rng);
}

}  // namespace

AttackOutcome replay_attack(const std::string& protocol_key, const SystemParams& params, Rng& rng) {
  AttackOutcome out = started(protocol_key, "replay", rng);
  auto d = deploy(protocol_key, params, rng, true);
  auto& proto = *d.protocol;
  Channel channel;
  channel.set_metadata(protocol_key, out.seed);

  Recording recorded;
  {
    auto tag = proto.make_tag(d.victim, rng.next_u64());
    auto reader = proto.make_reader(rng.next_u64());
    const auto live = genuine_capture(proto, d.victim, params.noise_sigma, rng);
    const bool ok = relay(proto, channel, *tag, *reader, {}, &recorded);
    finish_bio(proto, *reader, ok, live);
  }

  ScriptedTag replayer([&](int step, const std::map<int, Payload>&) -> std::optional<Payload> {
    auto it = recorded.find(step);
    if (it == recorded.end()) return std::nullopt;
    return it->second;
  });
  auto reader = proto.make_reader(rng.next_u64());
  const auto live = impostor_capture(d, rng);
  const bool complete = relay(proto, channel, replayer, *reader, {}, nullptr, true);
  const bool bio = finish_bio(proto, *reader, complete, live);

  out.succeeded = reader->accepted() && reader->identified_id() == proto.tag_id(d.victim);
  out.claim = out.succeeded ? Claim::ImpersonatedTag : Claim::None;
  out.findings.push_back(out.succeeded ? "reader accepted the replayed tag response"
                                       : "reader rejected the replayed tag response");
  if (bio) out.findings.push_back("impostor capture passed the biometric check");
  out.trace = channel.observe();
  return out;
}

BitString forged_nonce(const BitString& nt, const BitString& nr, const BitString& new_nr) {
  return nt ^ nr ^ new_nr;
}

AttackOutcome algebraic_replay(const std::string& protocol_key, const SystemParams& params, Rng& rng) {
  AttackOutcome out = started(protocol_key, "algebraic-replay", rng);
  auto d = deploy(protocol_key, params, rng, true);
  auto& proto = *d.protocol;
  if (!d.roles.challenge || !d.roles.response) {
    throw ConfigError("algebraic replay needs a protocol that opens with a reader challenge");
  }
  const int challenge = d.roles.challenge->number;
  const int response = d.roles.response->number;
  Channel channel;
  channel.set_metadata(protocol_key, out.seed);

  Recording recorded;
  {
    auto tag = proto.make_tag(d.victim, rng.next_u64());
    auto reader = proto.make_reader(rng.next_u64());
    const auto live = genuine_capture(proto, d.victim, params.noise_sigma, rng);
    const bool ok = relay(proto, channel, *tag, *reader, {}, &recorded);
    finish_bio(proto, *reader, ok, live);
  }
  if (!recorded.contains(challenge) || !recorded.contains(response)) {
    throw Error("algebraic replay: honest session did not complete");
  }

  ScriptedTag forger([&](int step, const std::map<int, Payload>& heard) -> std::optional<Payload> {
    auto it = recorded.find(step);
    if (it == recorded.end()) return std::nullopt;
    Payload message = it->second;
    if (step == response) {
      message[0] = forged_nonce(message[0], recorded.at(challenge)[0], heard.at(challenge)[0]);
    }
    return message;
  });
  auto reader = proto.make_reader(rng.next_u64());
  const auto live = impostor_capture(d, rng);
  const bool complete = relay(proto, channel, forger, *reader, {}, nullptr, true);
  finish_bio(proto, *reader, complete, live);

  out.succeeded = reader->accepted() && reader->identified_id() == proto.tag_id(d.victim);
  out.claim = out.succeeded ? Claim::ImpersonatedTag : Claim::None;
  out.findings.push_back(out.succeeded ? "reader accepted the forged nonce with the recorded response"
                                       : "reader rejected the forged nonce");
  out.trace = channel.observe();
  return out;
}

AttackOutcome ch_algebraic_replay(const SystemParams& params, Rng& rng) { return algebraic_replay("ch", params, rng); }

namespace {

// State shared by the scripted man-in-the-middle strategies.
struct MitmContext {
  Deployment& d;
  Channel& channel;
  Rng& rng;
  std::vector<RunRecord> runs;

  Protocol& proto() { return *d.protocol; }

  bool live_matches(const ReaderEndpoint& reader, std::size_t live_owner) {
    return reader.identified_id() == proto().tag_id(live_owner);
  }

  BiometricTemplate capture_of(std::size_t index) {
    return genuine_capture(proto(), index, proto().params().noise_sigma, rng);
  }

  // Honest tag and reader, optional tampering, capture of `live_owner`.
  void session(std::size_t tag_index, std::size_t live_owner, const Tamper& tamper = {},
               Recording* recording = nullptr) {
    auto tag = proto().make_tag(tag_index, rng.next_u64());
    auto reader = proto().make_reader(rng.next_u64());
    const auto live = capture_of(live_owner);
    const bool ok = relay(proto(), channel, *tag, *reader, tamper, recording);
    const bool bio = finish_bio(proto(), *reader, ok, live);
    runs.push_back(snapshot(*tag, tag_index == d.intruder));
    runs.push_back(snapshot(*reader, bio, live_matches(*reader, live_owner)));
  }
};

using Strategy = std::function<bool(MitmContext&)>;  // false: not applicable

bool pure_relay(MitmContext& c) {
  c.session(c.d.victim, c.d.victim);
  return true;
}

bool stale_response(MitmContext& c) {
  Recording recorded;
  c.session(c.d.victim, c.d.victim, {}, &recorded);
  ScriptedTag replayer([&](int step, const std::map<int, Payload>&) -> std::optional<Payload> {
    auto it = recorded.find(step);
    if (it == recorded.end()) return std::nullopt;
    return it->second;
  });
  auto reader = c.proto().make_reader(c.rng.next_u64());
  const auto live = c.capture_of(c.d.intruder);
  const bool ok = relay(c.proto(), c.channel, replayer, *reader, {}, nullptr, true);
  const bool bio = finish_bio(c.proto(), *reader, ok, live);
  c.runs.push_back(snapshot(*reader, bio, c.live_matches(*reader, c.d.intruder)));
  return true;
}

// The victim's messages go to its honest reader and, as copies, to a second
// reader whose own messages the adversary swallows.
bool cross_session_splice(MitmContext& c) {
  auto& proto = c.proto();
  auto tag = proto.make_tag(c.d.victim, c.rng.next_u64());
  auto first = proto.make_reader(c.rng.next_u64());
  auto second = proto.make_reader(c.rng.next_u64());
  bool first_ok = true;
  bool second_ok = true;
  for (const auto& step : proto.steps()) {
    if (step.sender == Party::Reader) {
      auto m1 = first->emit(step.number);
      auto m2 = second->emit(step.number);
      if (m2) drop(c.channel, step, std::move(*m2));
      if (!m1 || !deliver(c.channel, step, std::move(*m1), *tag, false)) {
        first_ok = false;
        break;
      }
    } else {
      auto m = tag->emit(step.number);
      if (!m) {
        first_ok = false;
        break;
      }
      if (second_ok) second_ok = deliver(c.channel, step, *m, *second, true);
      if (!deliver(c.channel, step, std::move(*m), *first, false)) {
        first_ok = false;
        break;
      }
    }
  }
  const auto genuine = c.capture_of(c.d.victim);
  const auto impostor = c.capture_of(c.d.intruder);
  const bool bio1 = finish_bio(proto, *first, first_ok, genuine);
  const bool bio2 = finish_bio(proto, *second, second_ok, impostor);
  c.runs.push_back(snapshot(*tag));
  c.runs.push_back(snapshot(*first, bio1, c.live_matches(*first, c.d.victim)));
  c.runs.push_back(snapshot(*second, bio2, c.live_matches(*second, c.d.intruder)));
  return true;
}

bool nonce_tamper(MitmContext& c) {
  const int response = c.d.roles.response->number;
  c.session(c.d.victim, c.d.victim, [response](const StepSpec& s, Payload& m) {
    if (s.number != response) return false;
    m[0].flip_bit(0);
    return true;
  });
  return true;
}

// Shifts the challenge by delta towards the tag and the tag's nonce by the
// same delta towards the reader; cancels inside nr ^ nt.
bool xor_tweak(MitmContext& c) {
  if (!c.d.roles.challenge) return false;
  const int challenge = c.d.roles.challenge->number;
  const int response = c.d.roles.response->number;
  const BitString delta = c.rng.bits(c.proto().params().l);
  c.session(c.d.victim, c.d.victim, [&](const StepSpec& s, Payload& m) {
    if (s.number != challenge && s.number != response) return false;
    if (m[0].width() != delta.width()) return false;
    m[0] ^= delta;
    return true;
  });
  return true;
}

bool stale_bio_message(MitmContext& c) {
  if (!c.d.roles.bio) return false;
  Recording recorded;
  c.session(c.d.victim, c.d.victim, {}, &recorded);
  const int bio = c.d.roles.bio->number;
  if (!recorded.contains(bio)) return true;
  const Payload stale = recorded.at(bio);
  c.session(c.d.victim, c.d.intruder, [&](const StepSpec& s, Payload& m) {
    if (s.number != bio) return false;
    m = stale;
    return true;
  });
  return true;
}

// The adversary plays the reader: a challenge (recorded, then fresh) followed
// by a recorded reader proof.
bool reader_impersonation(MitmContext& c) {
  if (!c.d.roles.proof) return false;
  Recording recorded;
  c.session(c.d.victim, c.d.victim, {}, &recorded);
  const auto& roles = c.d.roles;
  if (!recorded.contains(roles.proof->number)) return true;
  for (int variant = 0; variant < 2; ++variant) {
    auto tag = c.proto().make_tag(c.d.victim, c.rng.next_u64());
    bool alive = true;
    if (roles.challenge) {
      Payload challenge = variant == 0 ? recorded.at(roles.challenge->number)
                                       : Payload{c.rng.bits(c.proto().params().l)};
      alive = deliver(c.channel, *roles.challenge, std::move(challenge), *tag, true);
    }
    if (alive) {
      if (auto response = tag->emit(roles.response->number)) drop(c.channel, *roles.response, std::move(*response));
      deliver(c.channel, *roles.proof, recorded.at(roles.proof->number), *tag, true);
    }
    c.runs.push_back(snapshot(*tag));
  }
  return true;
}

// The intruder answers the reader's challenge with its own tag and steers the
// reader's proof and the biometric exchange towards the victim.
bool own_credential_splice(MitmContext& c) {
  auto& proto = c.proto();
  const auto& roles = c.d.roles;
  auto victim = proto.make_tag(c.d.victim, c.rng.next_u64());
  auto own = proto.make_tag(c.d.intruder, c.rng.next_u64());
  auto reader = proto.make_reader(c.rng.next_u64());

  if (roles.challenge) {
    auto challenge = reader->emit(roles.challenge->number);
    if (!challenge) return true;
    deliver(c.channel, *roles.challenge, *challenge, *victim, false);
    deliver(c.channel, *roles.challenge, *challenge, *own, true);
  }
  if (auto v = victim->emit(roles.response->number)) drop(c.channel, *roles.response, std::move(*v));
  bool ok = false;
  if (auto o = own->emit(roles.response->number)) ok = deliver(c.channel, *roles.response, std::move(*o), *reader, true);
  if (ok && roles.proof) {
    if (auto proof = reader->emit(roles.proof->number)) {
      deliver(c.channel, *roles.proof, *proof, *victim, true);
      ok = deliver(c.channel, *roles.proof, std::move(*proof), *own, true);
    }
  }
  if (ok && roles.bio) {
    auto m = victim->emit(roles.bio->number);
    if (!m) m = own->emit(roles.bio->number);
    ok = m && deliver(c.channel, *roles.bio, std::move(*m), *reader, true);
  }
  const auto live = c.capture_of(c.d.intruder);
  const bool bio = finish_bio(proto, *reader, ok, live);
  c.runs.push_back(snapshot(*victim));
  c.runs.push_back(snapshot(*own, true));
  c.runs.push_back(snapshot(*reader, bio, c.live_matches(*reader, c.d.intruder)));
  return true;
}

const std::vector<std::pair<std::string, Strategy>>& strategies() {
  static const std::vector<std::pair<std::string, Strategy>> kStrategies = {
      {"pure_relay", pure_relay},
      {"stale_response", stale_response},
      {"cross_session_splice", cross_session_splice},
      {"nonce_tamper", nonce_tamper},
      {"xor_tweak", xor_tweak},
      {"stale_bio_message", stale_bio_message},
      {"reader_impersonation", reader_impersonation},
      {"own_credential_splice", own_credential_splice},
  };
  return kStrategies;
}

bool secret_on_wire(const Transcript& trace, std::span<const BitString> secrets) {
  for (const auto& e : trace.events) {
    for (const auto& field : e.payload) {
      for (const auto& s : secrets) {
        if (!s.is_zero() && field == s) return true;
      }
    }
  }
  return false;
}

}  // namespace

AttackOutcome mitm_relay(const std::string& protocol_key, const SystemParams& params, Rng& rng) {
  AttackOutcome out = started(protocol_key, "mitm", rng);
  auto d = deploy(protocol_key, params, rng, true);
  Channel channel;
  channel.set_metadata(protocol_key, out.seed);
  const std::set<BitString> intruder_ids = {d.protocol->tag_id(d.intruder)};
  const auto victim_record = d.protocol->record(d.victim);
  const BitString secrets[] = {victim_record.id, victim_record.secret};

  for (const auto& [name, strategy] : strategies()) {
    MitmContext ctx{d, channel, rng, {}};
    if (!strategy(ctx)) {
      out.findings.push_back(name + ": not applicable");
      continue;
    }
    const auto violations = agreement_violations(ctx.runs, intruder_ids);
    if (violations.empty()) {
      out.findings.push_back(name + ": no violation");
      continue;
    }
    out.succeeded = true;
    bool tag_side = false;
    for (const auto& v : violations) {
      out.findings.push_back(name + ": " + v);
      tag_side = tag_side || v.starts_with("tag accepted");
    }
    if (out.claim == Claim::None) out.claim = tag_side ? Claim::ImpersonatedReader : Claim::ImpersonatedTag;
  }
  out.trace = channel.observe();
  if (secret_on_wire(out.trace, secrets)) {
    out.succeeded = true;
    if (out.claim == Claim::None) out.claim = Claim::LearnedSecret;
    out.findings.push_back("a tag secret appeared verbatim on the radio link");
  }
  return out;
}

bool distinguisher_says_same(std::span<const ChannelEvent> first, std::span<const ChannelEvent> second) {
  const std::size_t events = std::min(first.size(), second.size());
  for (std::size_t e = 0; e < events; ++e) {
    const auto& a = first[e].payload;
    const auto& b = second[e].payload;
    const std::size_t fields = std::min(a.size(), b.size());
    for (std::size_t f = 0; f < fields; ++f) {
      if (a[f].width() != b[f].width() || a[f].width() == 0) continue;
      const double distance = static_cast<double>(hamming_distance(a[f], b[f])) / a[f].width();
      if (distance <= 0.25) return true;
    }
  }
  return false;
}

TraceGameResult trace_game(const std::string& protocol_key, std::size_t trials, const SystemParams& params,
                           const Rng& rng, unsigned jobs) {
  if (trials < 100) throw ConfigError("trace_game needs at least 100 trials");
  params.validate();
  const auto projector = std::make_shared<const Projector>(deployment_key(params), params.d, params.l);
  jobs = std::max(1u, jobs);

  auto play = [&](std::size_t trial) {
    Rng t = rng.fork("trial", trial);
    auto proto = make_protocol(protocol_key, params, projector);
    const std::size_t a = proto->enroll(0, t);
    const std::size_t b = proto->enroll(1, t);
    auto observe = [&](std::size_t index) {
      Channel channel;
      const auto live = genuine_capture(*proto, index, params.noise_sigma, t);
      run(*proto, index, &live, channel, t);
      return channel.observe().events;
    };
    const auto reference = observe(a);
    const bool same = t.coin();
    const auto challenge = observe(same ? a : b);
    return distinguisher_says_same(reference, challenge) == same;
  };

  std::vector<std::size_t> wins(jobs, 0);
  auto worker = [&](unsigned job) {
    for (std::size_t i = job; i < trials; i += jobs) wins[job] += play(i) ? 1 : 0;
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
  }

  TraceGameResult result;
  result.trials = trials;
  for (auto w : wins) result.wins += w;
  // Integer numerator keeps the quotient correctly rounded.
  const auto twice = 2 * result.wins;
  const auto gap = twice > trials ? twice - trials : trials - twice;
  result.advantage = static_cast<double>(gap) / static_cast<double>(trials);
  return result;
}

namespace {

std::unique_ptr<Protocol> deploy_population(const std::string& key, const SystemParams& params, Rng& rng) {
  auto proto = make_protocol(key, params);
  const std::size_t n = std::max<std::size_t>(params.n, 1);
  for (std::size_t i = 0; i < n; ++i) proto->enroll(i, rng);
  return proto;
}

bool honest_run(Protocol& proto, std::size_t index, Rng& rng, const SessionOptions& options = {}) {
  Channel channel;
  const auto live = genuine_capture(proto, index, proto.params().noise_sigma, rng);
  const auto outcome = run(proto, index, &live, channel, rng, options);
  return fully_accepted(proto, outcome) && outcome.identified_id == proto.tag_id(index);
}

}  // namespace

DesyncReport desync_report(const std::string& protocol_key, std::span<const InterruptPoint> points,
                           const SystemParams& params, Rng& rng) {
  DesyncReport report;
  auto proto = deploy_population(protocol_key, params, rng);
  const std::string initial = proto->persistent_state();
  for (auto point : points) {
    honest_run(*proto, 0, rng, SessionOptions{point});
    const bool kept_after_cut = proto->persistent_state() == initial;
    const bool recovered = honest_run(*proto, 0, rng);
    const bool kept_after_fresh = proto->persistent_state() == initial;
    const bool ok = kept_after_cut && recovered && kept_after_fresh;
    report.ok = report.ok && ok;
    report.findings.push_back(to_string(point) + (ok ? ": recovered" : ": desynchronized"));
  }
  return report;
}

bool desync_test(const std::string& protocol_key, std::span<const InterruptPoint> points,
                 const SystemParams& params, Rng& rng) {
  return desync_report(protocol_key, points, params, rng).ok;
}

DosReport dos_flood(const std::string& protocol_key, std::size_t bogus_sessions, const SystemParams& params,
                    Rng& rng) {
  DosReport report;
  auto proto = deploy_population(protocol_key, params, rng);
  report.enrolled = proto->size();
  const std::string initial = proto->persistent_state();

  // Well-formed widths reach the identification scan, the costliest path.
  Recording shape;
  {
    auto tag = proto->make_tag(0, rng.next_u64());
    auto reader = proto->make_reader(rng.next_u64());
    Channel channel;
    relay(*proto, channel, *tag, *reader, {}, &shape);
  }

  bool first = true;
  for (std::size_t s = 0; s < bogus_sessions; ++s) {
    auto reader = proto->make_reader(rng.next_u64());
    const auto before = proto->server_hasher().count();
    for (const auto& step : proto->steps()) {
      if (step.sender == Party::Reader) {
        if (!reader->emit(step.number)) break;
        continue;
      }
      Payload garbage;
      for (const auto& field : shape.at(step.number)) garbage.push_back(rng.bits(field.width()));
      if (!reader->absorb(step.number, garbage)) break;
    }
    const auto spent = proto->server_hasher().count() - before;
    report.min_server_hashes = first ? spent : std::min(report.min_server_hashes, spent);
    report.max_server_hashes = first ? spent : std::max(report.max_server_hashes, spent);
    first = false;
  }

  report.honest_accepted = honest_run(*proto, 0, rng);
  report.state_unchanged = proto->persistent_state() == initial;
  report.ok = report.honest_accepted && report.state_unchanged && report.max_server_hashes <= report.enrolled + 1;
  return report;
}

bool dos_flood_test(const std::string& protocol_key, std::size_t bogus_sessions, const SystemParams& params,
                    Rng& rng) {
  return dos_flood(protocol_key, bogus_sessions, params, rng).ok;
}

std::size_t honest_acceptances(const std::string& protocol_key, std::size_t sessions, const SystemParams& params,
                               Rng& rng) {
  auto proto = deploy_population(protocol_key, params, rng);
  std::size_t accepted = 0;
  for (std::size_t s = 0; s < sessions; ++s) accepted += honest_run(*proto, s % proto->size(), rng) ? 1 : 0;
  return accepted;
}

}  // namespace bioauth
