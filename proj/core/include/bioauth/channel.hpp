#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bioauth/bit_string.hpp"

namespace bioauth {

using Payload = std::vector<BitString>;

enum class Direction { TagToReader, ReaderToTag };
// Only TagReader is radio; the other links are secure by assumption.
enum class Link { TagReader, ReaderServer, SensorServer };

std::string to_string(Direction d);
std::string to_string(Link l);

struct ChannelEvent {
  int step = 0;
  std::string label;
  Direction direction = Direction::TagToReader;
  Payload payload;
  bool delivered = true;
  // Injected, modified or sent by an adversary-controlled endpoint.
  bool adversarial = false;
};

struct Transcript {
  std::string protocol;
  std::uint64_t seed = 0;
  std::vector<ChannelEvent> events;
};

// One JSON object per event: {step, label, direction, sender, receiver,
// payload_hex: [..], bit_width: [..], delivered, adversarial}.
void write_jsonl(std::ostream& out, const Transcript& transcript);
std::string to_jsonl(const Transcript& transcript);

// A simulated link. On the radio link the adversary can observe, block,
// modify and inject; on secure links every adversary operation throws
// AdversaryOnSecureLink.
class Channel {
 public:
  using Predicate = std::function<bool(const ChannelEvent&)>;
  using Transform = std::function<void(ChannelEvent&)>;

  explicit Channel(Link link = Link::TagReader);

  Link link() const noexcept { return link_; }
  void set_metadata(std::string protocol, std::uint64_t seed);

  // Carries one message. Returns the payload the receiver gets, or nullopt
  // when the message is dropped.
  std::optional<Payload> transmit(int step, std::string label, Direction direction, Payload payload,
                                  bool adversarial_sender = false);

  const Transcript& observe() const noexcept { return transcript_; }

  void block(Predicate predicate);
  void modify(Transform transform);
  // The injected event replaces the next honest message with the same step.
  void inject(ChannelEvent event);
  void clear_adversary() noexcept;
  // Starts a new transcript; adversary rules stay installed.
  void reset_transcript();

 private:
  void require_insecure(const char* op) const;

  Link link_;
  Transcript transcript_;
  std::vector<Predicate> blocks_;
  std::vector<Transform> modifiers_;
  std::deque<ChannelEvent> injections_;
};

}  // namespace bioauth
