#include "bioauth/baselines.hpp"

namespace bioauth {
namespace rhls {

Response tag_respond(const Tag& tag, Rng& rng, Hasher& hasher) {
  BitString nt = rng.bits(tag.id.width());
  BitString h1 = hasher(concat(tag.id, nt));
  return {std::move(nt), std::move(h1)};
}

std::optional<BitString> server_verify(std::span<const Tag> db, const BitString& nt, const BitString& h1,
                                       Hasher& hasher) {
  for (const auto& tag : db) {
    if (hasher(concat(tag.id, nt)) == h1) return tag.id;
  }
  return std::nullopt;
}

const std::vector<StepSpec>& steps() {
  static const std::vector<StepSpec> kSteps = {{1, "tag_response", Party::Tag, true, FailureStage::Identify}};
  return kSteps;
}

std::optional<Payload> TagEndpoint::emit(int step) {
  if (dead_ || step != 1 || nt_) return std::nullopt;
  auto [nt, h1] = tag_respond(tag_, rng_, hasher_);
  nt_ = nt;
  return Payload{std::move(nt), std::move(h1)};
}

SessionValues TagEndpoint::values() const {
  SessionValues v{{"ID", tag_.id}};
  if (nt_) v["nt"] = *nt_;
  return v;
}

bool ReaderSide::absorb(int step, const Payload& message) {
  if (dead_ || step != 1 || message.size() != 2 || db_.empty()) return false;
  if (message[0].width() != db_.front().id.width() || message[1].width() != hasher_.width()) return false;
  nt_ = message[0];
  id_ = server_verify(db_, message[0], message[1], hasher_);
  return id_.has_value();
}

SessionValues ReaderSide::values() const {
  SessionValues v;
  if (id_) v["ID"] = *id_;
  if (nt_) v["nt"] = *nt_;
  return v;
}

}  // namespace rhls

namespace ch {

BitString rotate(const BitString& id, const BitString& g) { return id.rotate_left(g.mod(id.width())); }

BitString masked_rotation(const BitString& id, const BitString& nt, const BitString& nr, Hasher& hasher) {
  const BitString g = hasher(nr ^ nt ^ id);
  return rotate(id, g) ^ g;
}

Response tag_respond(const Tag& tag, const BitString& nr, Rng& rng, Hasher& hasher) {
  BitString nt = rng.bits(tag.id.width());
  BitString full = masked_rotation(tag.id, nt, nr, hasher);
  return {std::move(nt), left_half(full)};
}

std::optional<Match> server_respond(std::span<const Tag> db, const BitString& nr, const BitString& nt,
                                    const BitString& left, Hasher& hasher) {
  for (const auto& tag : db) {
    const auto halves = split_halves(masked_rotation(tag.id, nt, nr, hasher));
    if (halves.left == left) return Match{tag.id, halves.right};
  }
  return std::nullopt;
}

const std::vector<StepSpec>& steps() {
  static const std::vector<StepSpec> kSteps = {
      {1, "challenge", Party::Reader, false, std::nullopt},
      {2, "tag_response", Party::Tag, true, FailureStage::Identify},
      {3, "reader_proof", Party::Reader, true, FailureStage::ReaderProof},
  };
  return kSteps;
}

std::optional<Payload> TagEndpoint::emit(int step) {
  if (dead_ || step != 2 || !nr_ || nt_) return std::nullopt;
  // One hash per session; the full value is kept to check the reader's half.
  BitString nt = rng_.bits(tag_.id.width());
  BitString full = masked_rotation(tag_.id, nt, *nr_, hasher_);
  nt_ = nt;
  BitString left = left_half(full);
  cached_ = std::move(full);
  return Payload{std::move(nt), std::move(left)};
}

bool TagEndpoint::absorb(int step, const Payload& message) {
  if (dead_) return false;
  const std::size_t l = tag_.id.width();
  if (step == 1 && !nr_ && message.size() == 1 && message[0].width() == l) {
    nr_ = message[0];
    return true;
  }
  if (step == 3 && cached_ && message.size() == 1 && message[0] == right_half(*cached_)) {
    reader_ok_ = true;
    return true;
  }
  dead_ = true;
  return false;
}

SessionValues TagEndpoint::values() const {
  SessionValues v{{"ID", tag_.id}};
  if (nt_) v["nt"] = *nt_;
  if (nr_) v["nr"] = *nr_;
  return v;
}

std::optional<Payload> ReaderSide::emit(int step) {
  if (dead_) return std::nullopt;
  if (step == 1 && !nr_) {
    nr_ = rng_.bits(l_);
    return Payload{*nr_};
  }
  if (step == 3 && match_) return Payload{match_->right};
  return std::nullopt;
}

bool ReaderSide::absorb(int step, const Payload& message) {
  if (dead_ || step != 2 || !nr_ || message.size() != 2) return false;
  if (message[0].width() != l_ || message[1].width() != l_ / 2) return false;
  nt_ = message[0];
  match_ = server_respond(db_, *nr_, message[0], message[1], hasher_);
  return match_.has_value();
}

SessionValues ReaderSide::values() const {
  SessionValues v;
  if (match_) v["ID"] = match_->id;
  if (nt_) v["nt"] = *nt_;
  if (nr_) v["nr"] = *nr_;
  return v;
}

std::optional<BitString> ReaderSide::identified_id() const {
  if (!match_) return std::nullopt;
  return match_->id;
}

}  // namespace ch

namespace clear_id {

BitString tag_respond(const Tag& tag) { return tag.id; }

const std::vector<StepSpec>& steps() {
  static const std::vector<StepSpec> kSteps = {{1, "identify", Party::Tag, true, FailureStage::Identify}};
  return kSteps;
}

std::optional<Payload> TagEndpoint::emit(int step) {
  if (dead_ || step != 1) return std::nullopt;
  return Payload{tag_respond(tag_)};
}

bool ReaderSide::absorb(int step, const Payload& message) {
  if (dead_ || step != 1 || message.size() != 1) return false;
  for (const auto& tag : db_) {
    if (tag.id == message[0]) {
      id_ = tag.id;
      return true;
    }
  }
  return false;
}

SessionValues ReaderSide::values() const {
  if (!id_) return {};
  return {{"ID", *id_}};
}

}  // namespace clear_id
}  // namespace bioauth
