#include "bioauth/proposed.hpp"

#include <sstream>

#include "bioauth/errors.hpp"

namespace bioauth::proposed {
namespace {

BitString proof_input(const BitString& id, const BitString& nt, const BitString& nr) {
  return concat(xor_bits(id, nt), nr);
}

BitString mask_input(const BitString& id, const BitString& nt, const BitString& nr) {
  return concat({id, nt, nr});
}

bool widths_are(const Payload& message, std::initializer_list<std::size_t> widths) {
  if (message.size() != widths.size()) return false;
  std::size_t i = 0;
  for (auto w : widths) {
    if (message[i++].width() != w) return false;
  }
  return true;
}

}  // namespace

std::string TagState::serialize() const { return "tag " + id.to_hex() + " " + gb.to_hex() + "\n"; }

void ServerDb::add(DbRecord record) {
  if (contains(record.id)) throw RegistrationError("duplicate tag ID " + record.id.to_hex());
  records_.push_back(std::move(record));
}

bool ServerDb::contains(const BitString& id) const { return find(id) != nullptr; }

const DbRecord* ServerDb::find(const BitString& id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string ServerDb::serialize() const {
  std::ostringstream os;
  for (const auto& r : records_) os << r.label << ' ' << r.id.to_hex() << ' ' << r.gb_ref.to_hex() << '\n';
  return os.str();
}

BiometricTemplate subject_template(std::uint64_t subject_seed, const SystemParams& params) {
  return enroll_template(subject_seed, params, Rng(params.rng_seed).fork("population"));
}

TagState register_subject(std::uint64_t subject_seed, const SystemParams& params, ServerDb& db, Rng& rng,
                          const Projector& projector, std::string label) {
  constexpr int kMaxRedraws = 100;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    BitString id = rng.bits(params.l);
    if (db.contains(id)) continue;
    TagState tag{std::move(id), biohash(subject_template(subject_seed, params), projector), std::nullopt};
    if (label.empty()) label = "subject-" + std::to_string(subject_seed);
    db.add({tag.id, tag.gb, std::move(label)});
    return tag;
  }
  throw RegistrationError("no fresh tag ID after 100 draws; the RNG is broken");
}

TagState register_subject(std::uint64_t subject_seed, const SystemParams& params, ServerDb& db, Rng& rng) {
  const Projector projector(deployment_key(params), params.d, params.l);
  return register_subject(subject_seed, params, db, rng, projector);
}

BitString reader_challenge(Rng& rng, const SystemParams& params) { return next_nonce(rng, params); }

TagResponse tag_respond(TagState& tag, const BitString& nr, Rng& rng, Hasher& hasher) {
  if (nr.width() != tag.id.width()) {
    throw WidthError("tag_respond: Nr has " + std::to_string(nr.width()) + " bits, ID has " +
                     std::to_string(tag.id.width()));
  }
  BitString nt = rng.bits(tag.id.width());
  BitString full = hasher(proof_input(tag.id, nt, nr));
  BitString p = left_half(full);
  tag.session = TagSession{nt, nr, std::move(full), TagPhase::AwaitingQ};
  return {std::move(nt), std::move(p)};
}

std::optional<BitString> server_identify(const ServerDb& db, const BitString& nt, const BitString& nr,
                                         const BitString& p, Hasher& hasher) {
  for (const auto& record : db.records()) {
    if (record.id.width() != nt.width()) continue;
    if (left_half(hasher(proof_input(record.id, nt, nr))) == p) return record.id;
  }
  return std::nullopt;
}

BitString server_prove(const BitString& id, const BitString& nt, const BitString& nr, Hasher& hasher) {
  return right_half(hasher(proof_input(id, nt, nr)));
}

bool tag_verify_reader(TagState& tag, const BitString& q) {
  if (tag.phase() != TagPhase::AwaitingQ) return false;
  if (right_half(tag.session->cached_hash) == q) {
    tag.session->phase = TagPhase::BioPhase;
    return true;
  }
  tag.session.reset();
  return false;
}

BitString tag_bio_message(TagState& tag, Hasher& hasher) {
  if (tag.phase() != TagPhase::BioPhase) throw Error("tag_bio_message: reader not authenticated");
  const auto& s = *tag.session;
  BitString m = hasher(mask_input(tag.id, s.nt, s.nr)) ^ tag.gb ^ s.nt;
  tag.session.reset();
  return m;
}

BitString server_extract_gb(const BitString& id, const BitString& nt, const BitString& nr, const BitString& m,
                            Hasher& hasher) {
  const BitString m2 = hasher(mask_input(id, nt, nr)) ^ nt;
  return m ^ m2;
}

bool server_verify_bio(const BitString& extracted_gb, const BiometricTemplate& live, const Projector& projector,
                       std::size_t epsilon) {
  const BitString live_hash = biohash(live, projector);
  if (live_hash.width() != extracted_gb.width()) return false;
  return fuzzy_match(live_hash, extracted_gb, epsilon);
}

const std::vector<StepSpec>& steps() {
  static const std::vector<StepSpec> kSteps = {
      {1, "challenge", Party::Reader, false, std::nullopt},
      {2, "tag_response", Party::Tag, true, FailureStage::Identify},
      {3, "reader_proof", Party::Reader, true, FailureStage::ReaderProof},
      {4, "bio_message", Party::Tag, true, FailureStage::BioVerify},
  };
  return kSteps;
}

std::optional<Payload> TagEndpoint::emit(int step) {
  if (dead_) return std::nullopt;
  if (step == 2 && nr_ && tag_.phase() == TagPhase::Idle) {
    auto [nt, p] = tag_respond(tag_, *nr_, rng_, hasher_);
    nt_ = nt;
    return Payload{std::move(nt), std::move(p)};
  }
  if (step == 4 && tag_.phase() == TagPhase::BioPhase) return Payload{tag_bio_message(tag_, hasher_)};
  return std::nullopt;
}

bool TagEndpoint::absorb(int step, const Payload& message) {
  if (dead_) return false;
  if (step == 1) {
    if (!widths_are(message, {tag_.id.width()}) || nr_) return false;
    // A new challenge supersedes any run the tag never finished.
    tag_.session.reset();
    nr_ = message[0];
    return true;
  }
  if (step == 3) {
    if (!widths_are(message, {tag_.id.width() / 2}) || !tag_verify_reader(tag_, message[0])) {
      abort();
      return false;
    }
    reader_ok_ = true;
    return true;
  }
  return false;
}

void TagEndpoint::abort() {
  dead_ = true;
  tag_.session.reset();
}

SessionValues TagEndpoint::values() const {
  SessionValues v{{"ID", tag_.id}};
  if (nt_) v["Nt"] = *nt_;
  if (nr_) v["Nr"] = *nr_;
  return v;
}

std::optional<Payload> ReaderSide::emit(int step) {
  if (dead_) return std::nullopt;
  if (step == 1 && !nr_) {
    nr_ = reader_challenge(rng_, server_.params());
    return Payload{*nr_};
  }
  if (step == 3 && id_) return Payload{server_.prove(*id_, *nt_, *nr_)};
  return std::nullopt;
}

bool ReaderSide::absorb(int step, const Payload& message) {
  if (dead_ || !nr_) return false;
  const std::size_t l = server_.params().l;
  if (step == 2) {
    if (!widths_are(message, {l, l / 2})) return false;
    nt_ = message[0];
    id_ = server_.identify(message[0], *nr_, message[1]);
    return id_.has_value();
  }
  if (step == 4) {
    if (!id_ || !widths_are(message, {l})) return false;
    m_ = message[0];
    return true;
  }
  return false;
}

SessionValues ReaderSide::values() const {
  SessionValues v;
  if (id_) v["ID"] = *id_;
  if (nt_) v["Nt"] = *nt_;
  if (nr_) v["Nr"] = *nr_;
  return v;
}

bool ReaderSide::verify_biometric(const BiometricTemplate& live) {
  if (dead_ || !id_ || !m_) return false;
  return server_.verify(server_.extract(*id_, *nt_, *nr_, *m_), live);
}

SessionOutcome run_session(TagState& tag, const ServerDb& db, const BiometricTemplate* live, Channel& channel,
                           Rng& rng, const SystemParams& params) {
  const Projector projector(deployment_key(params), params.d, params.l);
  Hasher tag_hasher(params);
  Hasher server_hasher(params);
  Server server(db, projector, params, server_hasher);
  Rng tag_rng(rng.next_u64());
  Rng reader_rng(rng.next_u64());
  TagEndpoint tag_side(tag, tag_rng, tag_hasher);
  ReaderSide reader_side(server, reader_rng);
  return drive_session(steps(), tag_side, reader_side, live, true, channel);
}

}  // namespace bioauth::proposed
