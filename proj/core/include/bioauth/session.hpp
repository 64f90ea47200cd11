#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "bioauth/biohash.hpp"
#include "bioauth/bit_string.hpp"
#include "bioauth/channel.hpp"

namespace bioauth {

enum class Party { Tag, Reader };
enum class FailureStage { Identify, ReaderProof, BioVerify, ChannelLoss };

std::string to_string(FailureStage s);

// One message of a protocol over the radio link.
struct StepSpec {
  int number = 0;
  std::string label;
  Party sender = Party::Tag;
  // The reader's opening challenge nonce is not counted in communication cost.
  bool counted_in_cost = true;
  // Reported when the receiver rejects this message.
  std::optional<FailureStage> reject_stage;
};

struct SessionOutcome {
  bool tag_authenticated = false;
  bool reader_authenticated = false;
  bool bio_verified = false;
  std::optional<BitString> identified_id;
  std::optional<FailureStage> failure_stage;
};

// Named per-run values ("ID", "Nt", "Nr", ...) used by agreement checks.
using SessionValues = std::map<std::string, BitString>;

// One party's view of a run over the radio link.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  // Message this party sends at `step`; nullopt once it has aborted.
  virtual std::optional<Payload> emit(int step) = 0;
  // Consumes the message for `step`. Returns false when the party rejects it,
  // which ends its run.
  virtual bool absorb(int step, const Payload& message) = 0;
  virtual void abort() = 0;

  // Tag side: reader authenticated. Reader side: tag authenticated.
  virtual bool accepted() const = 0;
  virtual SessionValues values() const = 0;
};

// Reader plus back-end server. The reader-server and sensor-server links are
// secure and are not exposed.
class ReaderEndpoint : public Endpoint {
 public:
  virtual std::optional<BitString> identified_id() const = 0;
  // Biometric comparison after the sensor capture. Protocols without a
  // biometric phase return false.
  virtual bool verify_biometric(const BiometricTemplate& live) = 0;
};

enum class InterruptPoint { AfterChallenge, AfterTagResponse, AfterReaderProof, AfterBioMessage, AfterCapture };

inline constexpr InterruptPoint kAllInterruptPoints[] = {
    InterruptPoint::AfterChallenge, InterruptPoint::AfterTagResponse, InterruptPoint::AfterReaderProof,
    InterruptPoint::AfterBioMessage, InterruptPoint::AfterCapture};

std::string to_string(InterruptPoint p);

struct SessionOptions {
  // The run dies at this point; both parties abort.
  std::optional<InterruptPoint> interrupt;
  // Marks every tag-side message as adversary-originated in the transcript.
  bool adversarial_tag = false;
  bool adversarial_reader = false;
};

// Drives one run over `channel`. `live` is the sensor capture presented to the
// server after the radio exchange; it is ignored when `bio_phase` is false.
SessionOutcome drive_session(std::span<const StepSpec> steps, Endpoint& tag, ReaderEndpoint& reader,
                             const BiometricTemplate* live, bool bio_phase, Channel& channel,
                             const SessionOptions& options = {});

}  // namespace bioauth
