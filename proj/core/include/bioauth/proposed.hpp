#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bioauth/biohash.hpp"
#include "bioauth/bit_string.hpp"
#include "bioauth/channel.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"
#include "bioauth/session.hpp"

// The combined RFID-biometric mutual authentication protocol.
//
//   R -> T : Nr
//   T -> R : Nt, P = left(h((ID ^ Nt) || Nr))
//   R -> T : Q = right(h((ID ^ Nt) || Nr))          (computed by the server)
//   T -> R : M = h(ID || Nt || Nr) ^ GB ^ Nt
//   server : GB' = M ^ h(ID || Nt || Nr) ^ Nt, accept iff g(B') ~ GB'
namespace bioauth::proposed {

enum class TagPhase { Idle, AwaitingQ, BioPhase };

struct TagSession {
  BitString nt;
  BitString nr;
  BitString cached_hash;  // h((ID ^ Nt) || Nr)
  TagPhase phase = TagPhase::AwaitingQ;
};

struct TagState {
  BitString id;
  BitString gb;
  std::optional<TagSession> session;

  TagPhase phase() const noexcept { return session ? session->phase : TagPhase::Idle; }
  // Persistent part only ({ID, GB}); the session cache is excluded.
  std::string serialize() const;
};

struct DbRecord {
  BitString id;
  BitString gb_ref;
  std::string label;
};

class ServerDb {
 public:
  void add(DbRecord record);
  const std::vector<DbRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool contains(const BitString& id) const;
  const DbRecord* find(const BitString& id) const;
  std::string serialize() const;

 private:
  std::vector<DbRecord> records_;
};

// Template source for simulated subjects; depends only on params.rng_seed and
// the subject seed so enrolment and later captures agree.
BiometricTemplate subject_template(std::uint64_t subject_seed, const SystemParams& params);

// Fresh ID, GB = g(B); appends to `db`. Registration runs over the secure
// channel of the registration centre and never touches the radio link.
TagState register_subject(std::uint64_t subject_seed, const SystemParams& params, ServerDb& db, Rng& rng,
                          const Projector& projector, std::string label = {});
TagState register_subject(std::uint64_t subject_seed, const SystemParams& params, ServerDb& db, Rng& rng);

BitString reader_challenge(Rng& rng, const SystemParams& params);

struct TagResponse {
  BitString nt;
  BitString p;
};

// Step 2 on the tag: first of its two hash evaluations. Leaves the full hash
// cached for step 3.
TagResponse tag_respond(TagState& tag, const BitString& nr, Rng& rng, Hasher& hasher);

// Linear scan in insertion order; first match wins. Costs one hash per
// record examined.
std::optional<BitString> server_identify(const ServerDb& db, const BitString& nt, const BitString& nr,
                                         const BitString& p, Hasher& hasher);
BitString server_prove(const BitString& id, const BitString& nt, const BitString& nr, Hasher& hasher);

// Compares against the cached hash; no hash evaluation. Clears the session on
// failure.
bool tag_verify_reader(TagState& tag, const BitString& q);
// Second and last tag hash evaluation. Clears the session.
BitString tag_bio_message(TagState& tag, Hasher& hasher);

BitString server_extract_gb(const BitString& id, const BitString& nt, const BitString& nr, const BitString& m,
                            Hasher& hasher);
bool server_verify_bio(const BitString& extracted_gb, const BiometricTemplate& live, const Projector& projector,
                       std::size_t epsilon);

const std::vector<StepSpec>& steps();

// Back-end server: identification, reader proof, biometric verification.
class Server {
 public:
  Server(const ServerDb& db, const Projector& projector, const SystemParams& params, Hasher& hasher)
      : db_(db), projector_(projector), params_(params), hasher_(hasher) {}

  std::optional<BitString> identify(const BitString& nt, const BitString& nr, const BitString& p) {
    return server_identify(db_, nt, nr, p, hasher_);
  }
  BitString prove(const BitString& id, const BitString& nt, const BitString& nr) {
    return server_prove(id, nt, nr, hasher_);
  }
  BitString extract(const BitString& id, const BitString& nt, const BitString& nr, const BitString& m) {
    return server_extract_gb(id, nt, nr, m, hasher_);
  }
  bool verify(const BitString& gb, const BiometricTemplate& live) const {
    return server_verify_bio(gb, live, projector_, params_.epsilon);
  }
  const SystemParams& params() const noexcept { return params_; }

 private:
  const ServerDb& db_;
  const Projector& projector_;
  SystemParams params_;
  Hasher& hasher_;
};

class TagEndpoint final : public Endpoint {
 public:
  TagEndpoint(TagState& tag, Rng& rng, Hasher& hasher) : tag_(tag), rng_(rng), hasher_(hasher) {}

  std::optional<Payload> emit(int step) override;
  bool absorb(int step, const Payload& message) override;
  void abort() override;
  bool accepted() const override { return reader_ok_; }
  SessionValues values() const override;

 private:
  TagState& tag_;
  Rng& rng_;
  Hasher& hasher_;
  std::optional<BitString> nr_;
  std::optional<BitString> nt_;
  bool reader_ok_ = false;
  bool dead_ = false;
};

class ReaderSide final : public ReaderEndpoint {
 public:
  ReaderSide(Server& server, Rng& rng) : server_(server), rng_(rng) {}

  std::optional<Payload> emit(int step) override;
  bool absorb(int step, const Payload& message) override;
  void abort() override { dead_ = true; }
  bool accepted() const override { return id_.has_value(); }
  SessionValues values() const override;
  std::optional<BitString> identified_id() const override { return id_; }
  bool verify_biometric(const BiometricTemplate& live) override;

 private:
  Server& server_;
  Rng& rng_;
  std::optional<BitString> nr_;
  std::optional<BitString> nt_;
  std::optional<BitString> id_;
  std::optional<BitString> m_;
  bool dead_ = false;
};

// Full run over `channel`: Nr -> (Nt, P) -> Q -> M, then the sensor capture
// `live` (nullptr: no capture arrives). Persistent tag and server state are
// never modified.
SessionOutcome run_session(TagState& tag, const ServerDb& db, const BiometricTemplate* live, Channel& channel,
                           Rng& rng, const SystemParams& params);

}  // namespace bioauth::proposed
