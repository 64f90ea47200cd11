#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bioauth/bit_string.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/rng.hpp"
#include "bioauth/session.hpp"

// Static-ID baselines used as attack targets.
namespace bioauth {

// Randomized hash lock: T -> R : nt, h(ID || nt). No reader challenge enters
// the hash, so a recorded response verifies again later.
namespace rhls {

struct Tag {
  BitString id;
};

struct Response {
  BitString nt;
  BitString h1;
};

Response tag_respond(const Tag& tag, Rng& rng, Hasher& hasher);
std::optional<BitString> server_verify(std::span<const Tag> db, const BitString& nt, const BitString& h1,
                                       Hasher& hasher);
const std::vector<StepSpec>& steps();

class TagEndpoint final : public Endpoint {
 public:
  TagEndpoint(const Tag& tag, Rng& rng, Hasher& hasher) : tag_(tag), rng_(rng), hasher_(hasher) {}
  std::optional<Payload> emit(int step) override;
  bool absorb(int, const Payload&) override { return false; }
  void abort() override { dead_ = true; }
  bool accepted() const override { return false; }
  SessionValues values() const override;

 private:
  const Tag& tag_;
  Rng& rng_;
  Hasher& hasher_;
  std::optional<BitString> nt_;
  bool dead_ = false;
};

class ReaderSide final : public ReaderEndpoint {
 public:
  ReaderSide(std::span<const Tag> db, Hasher& hasher) : db_(db), hasher_(hasher) {}
  std::optional<Payload> emit(int) override { return std::nullopt; }
  bool absorb(int step, const Payload& message) override;
  void abort() override { dead_ = true; }
  bool accepted() const override { return id_.has_value(); }
  SessionValues values() const override;
  std::optional<BitString> identified_id() const override { return id_; }
  bool verify_biometric(const BiometricTemplate&) override { return false; }

 private:
  std::span<const Tag> db_;
  Hasher& hasher_;
  std::optional<BitString> nt_;
  std::optional<BitString> id_;
  bool dead_ = false;
};

}  // namespace rhls

// Chien-Huang substring protocol:
//   R -> T : nr
//   T -> R : nt, left(rot(ID, g) ^ g),  g = h(nr ^ nt ^ ID)
//   R -> T : right(rot(ID, g) ^ g)
// nr and nt enter g only through their xor, which is what the algebraic
// replay exploits.
namespace ch {

struct Tag {
  BitString id;
  BitString k;  // shared secret; counted in storage, unused by the message flow
};

struct Response {
  BitString nt;
  BitString left;
};

// Left-rotate ID by (g as an unsigned integer) mod width(ID).
BitString rotate(const BitString& id, const BitString& g);
// rot(ID, g) ^ g for g = h(nr ^ nt ^ ID).
BitString masked_rotation(const BitString& id, const BitString& nt, const BitString& nr, Hasher& hasher);

Response tag_respond(const Tag& tag, const BitString& nr, Rng& rng, Hasher& hasher);

struct Match {
  BitString id;
  BitString right;
};
std::optional<Match> server_respond(std::span<const Tag> db, const BitString& nr, const BitString& nt,
                                    const BitString& left, Hasher& hasher);
const std::vector<StepSpec>& steps();

class TagEndpoint final : public Endpoint {
 public:
  TagEndpoint(const Tag& tag, Rng& rng, Hasher& hasher) : tag_(tag), rng_(rng), hasher_(hasher) {}
  std::optional<Payload> emit(int step) override;
  bool absorb(int step, const Payload& message) override;
  void abort() override { dead_ = true; }
  bool accepted() const override { return reader_ok_; }
  SessionValues values() const override;

 private:
  const Tag& tag_;
  Rng& rng_;
  Hasher& hasher_;
  std::optional<BitString> nr_;
  std::optional<BitString> nt_;
  std::optional<BitString> cached_;
  bool reader_ok_ = false;
  bool dead_ = false;
};

class ReaderSide final : public ReaderEndpoint {
 public:
  ReaderSide(std::span<const Tag> db, Rng& rng, Hasher& hasher, std::size_t l)
      : db_(db), rng_(rng), hasher_(hasher), l_(l) {}
  std::optional<Payload> emit(int step) override;
  bool absorb(int step, const Payload& message) override;
  void abort() override { dead_ = true; }
  bool accepted() const override { return match_.has_value(); }
  SessionValues values() const override;
  std::optional<BitString> identified_id() const override;
  bool verify_biometric(const BiometricTemplate&) override { return false; }

 private:
  std::span<const Tag> db_;
  Rng& rng_;
  Hasher& hasher_;
  std::size_t l_;
  std::optional<BitString> nr_;
  std::optional<BitString> nt_;
  std::optional<Match> match_;
  bool dead_ = false;
};

}  // namespace ch

// Calibration strawman: the tag answers with its static ID in clear.
namespace clear_id {

struct Tag {
  BitString id;
};

BitString tag_respond(const Tag& tag);
const std::vector<StepSpec>& steps();

class TagEndpoint final : public Endpoint {
 public:
  explicit TagEndpoint(const Tag& tag) : tag_(tag) {}
  std::optional<Payload> emit(int step) override;
  bool absorb(int, const Payload&) override { return false; }
  void abort() override { dead_ = true; }
  bool accepted() const override { return false; }
  SessionValues values() const override { return {{"ID", tag_.id}}; }

 private:
  const Tag& tag_;
  bool dead_ = false;
};

class ReaderSide final : public ReaderEndpoint {
 public:
  explicit ReaderSide(std::span<const Tag> db) : db_(db) {}
  std::optional<Payload> emit(int) override { return std::nullopt; }
  bool absorb(int step, const Payload& message) override;
  void abort() override { dead_ = true; }
  bool accepted() const override { return id_.has_value(); }
  SessionValues values() const override;
  std::optional<BitString> identified_id() const override { return id_; }
  bool verify_biometric(const BiometricTemplate&) override { return false; }

 private:
  std::span<const Tag> db_;
  std::optional<BitString> id_;
  bool dead_ = false;
};

}  // namespace clear_id
}  // namespace bioauth
