#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bioauth/biohash.hpp"
#include "bioauth/bit_string.hpp"
#include "bioauth/channel.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"
#include "bioauth/session.hpp"

namespace bioauth {

// Enrolment record in protocol-neutral form. `secret` is GB for the
// biometric protocol, k for Chien-Huang and all zeros otherwise.
struct EnrolmentRecord {
  std::string label;
  BitString id;
  BitString secret;
};

// A deployment of one protocol: its enrolled tags, the server database and
// per-party hash counters. Endpoints created from it share that state.
class Protocol {
 public:
  explicit Protocol(const SystemParams& params);
  virtual ~Protocol() = default;
  Protocol(const Protocol&) = delete;
  Protocol& operator=(const Protocol&) = delete;

  virtual std::string key() const = 0;
  virtual const std::vector<StepSpec>& steps() const = 0;
  virtual bool has_bio_phase() const { return false; }
  // Whether the tag authenticates the reader.
  virtual bool mutual() const = 0;

  // Registers a new tag for `subject_seed`; returns its index.
  virtual std::size_t enroll(std::uint64_t subject_seed, Rng& rng, std::string label = {}) = 0;
  // Re-creates a tag and its server record from a stored enrolment.
  virtual std::size_t adopt(const EnrolmentRecord& record, std::uint64_t subject_seed) = 0;
  virtual EnrolmentRecord record(std::size_t index) const = 0;

  virtual std::size_t size() const = 0;
  virtual const BitString& tag_id(std::size_t index) const = 0;
  std::uint64_t subject_seed(std::size_t index) const { return subject_seeds_.at(index); }

  // Endpoints own their nonce stream, seeded from `seed`. They reference the
  // deployment, which must outlive them; enrolling a new tag invalidates
  // live endpoints.
  virtual std::unique_ptr<Endpoint> make_tag(std::size_t index, std::uint64_t seed) = 0;
  virtual std::unique_ptr<ReaderEndpoint> make_reader(std::uint64_t seed) = 0;

  // Byte serialization of every tag's and the server's persistent state.
  virtual std::string persistent_state() const = 0;
  virtual std::size_t tag_storage_bits() const = 0;

  const SystemParams& params() const noexcept { return params_; }
  Hasher& tag_hasher() noexcept { return tag_hasher_; }
  Hasher& server_hasher() noexcept { return server_hasher_; }

 protected:
  SystemParams params_;
  Hasher tag_hasher_;
  Hasher server_hasher_;
  std::vector<std::uint64_t> subject_seeds_;
};

inline const std::vector<std::string>& protocol_keys() {
  static const std::vector<std::string> kKeys = {"proposed", "rhls", "ch", "clear_id"};
  return kKeys;
}

// Throws ConfigError for an unknown key. `projector` is shared between
// deployments with equal params; one is built when it is null.
std::unique_ptr<Protocol> make_protocol(const std::string& key, const SystemParams& params,
                                        std::shared_ptr<const Projector> projector = nullptr);

// One honest run of tag `index` against the reader over `channel`. The two
// endpoint seeds are drawn from `rng`.
SessionOutcome run(Protocol& protocol, std::size_t index, const BiometricTemplate* live, Channel& channel,
                   Rng& rng, const SessionOptions& options = {});

// Fresh noisy capture of the subject enrolled as tag `index`.
BiometricTemplate genuine_capture(const Protocol& protocol, std::size_t index, double noise_sigma, Rng& rng);

// Tag identified, reader authenticated where the protocol has that step, and
// biometric accepted where it has that phase.
bool fully_accepted(const Protocol& protocol, const SessionOutcome& outcome);

}  // namespace bioauth
