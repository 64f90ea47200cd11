#include "bioauth/session.hpp"

namespace bioauth {

std::string to_string(FailureStage s) {
  switch (s) {
    case FailureStage::Identify:
      return "Identify";
    case FailureStage::ReaderProof:
      return "ReaderProof";
    case FailureStage::BioVerify:
      return "BioVerify";
    case FailureStage::ChannelLoss:
      return "ChannelLoss";
  }
  return "Unknown";
}

std::string to_string(InterruptPoint p) {
  switch (p) {
    case InterruptPoint::AfterChallenge:
      return "after_challenge";
    case InterruptPoint::AfterTagResponse:
      return "after_tag_response";
    case InterruptPoint::AfterReaderProof:
      return "after_reader_proof";
    case InterruptPoint::AfterBioMessage:
      return "after_bio_message";
    case InterruptPoint::AfterCapture:
      return "after_capture";
  }
  return "unknown";
}

namespace {

// Message-boundary interrupts map onto the k-th radio message.
std::optional<int> interrupt_index(const std::optional<InterruptPoint>& p) {
  if (!p || *p == InterruptPoint::AfterCapture) return std::nullopt;
  return static_cast<int>(*p) + 1;
}

SessionOutcome aborted(Endpoint& tag, ReaderEndpoint& reader, FailureStage stage) {
  tag.abort();
  reader.abort();
  SessionOutcome out;
  out.tag_authenticated = reader.accepted();
  out.reader_authenticated = tag.accepted();
  out.identified_id = reader.identified_id();
  out.failure_stage = stage;
  return out;
}

}  // namespace

SessionOutcome drive_session(std::span<const StepSpec> steps, Endpoint& tag, ReaderEndpoint& reader,
                             const BiometricTemplate* live, bool bio_phase, Channel& channel,
                             const SessionOptions& options) {
  const auto cut = interrupt_index(options.interrupt);
  int index = 0;
  for (const auto& step : steps) {
    ++index;
    const bool from_tag = step.sender == Party::Tag;
    Endpoint& sender = from_tag ? tag : static_cast<Endpoint&>(reader);
    Endpoint& receiver = from_tag ? static_cast<Endpoint&>(reader) : tag;

    auto message = sender.emit(step.number);
    if (!message) return aborted(tag, reader, FailureStage::ChannelLoss);
    auto delivered = channel.transmit(step.number, step.label,
                                      from_tag ? Direction::TagToReader : Direction::ReaderToTag,
                                      std::move(*message),
                                      from_tag ? options.adversarial_tag : options.adversarial_reader);
    if (!delivered) return aborted(tag, reader, FailureStage::ChannelLoss);
    if (!receiver.absorb(step.number, *delivered)) {
      return aborted(tag, reader, step.reject_stage.value_or(FailureStage::Identify));
    }
    if (cut && *cut == index) return aborted(tag, reader, FailureStage::ChannelLoss);
  }

  SessionOutcome out;
  out.tag_authenticated = reader.accepted();
  out.reader_authenticated = tag.accepted();
  out.identified_id = reader.identified_id();
  if (bio_phase) {
    if (live == nullptr || options.interrupt == InterruptPoint::AfterCapture) {
      return aborted(tag, reader, FailureStage::ChannelLoss);
    }
    out.bio_verified = reader.verify_biometric(*live);
    if (!out.bio_verified) out.failure_stage = FailureStage::BioVerify;
  }
  return out;
}

}  // namespace bioauth
