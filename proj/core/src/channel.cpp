#include "bioauth/channel.hpp"

#include <json.hpp>

#include <ostream>
#include <sstream>

#include "bioauth/errors.hpp"

namespace bioauth {

std::string to_string(Direction d) { return d == Direction::TagToReader ? "tag_to_reader" : "reader_to_tag"; }

std::string to_string(Link l) {
  switch (l) {
    case Link::TagReader:
      return "tag_reader";
    case Link::ReaderServer:
      return "reader_server";
    case Link::SensorServer:
      return "sensor_server";
  }
  return "unknown";
}

void write_jsonl(std::ostream& out, const Transcript& transcript) {
  for (const auto& ev : transcript.events) {
    nlohmann::ordered_json j;
    j["step"] = ev.step;
    j["label"] = ev.label;
    j["direction"] = to_string(ev.direction);
    const bool from_tag = ev.direction == Direction::TagToReader;
    j["sender"] = from_tag ? "tag" : "reader";
    j["receiver"] = from_tag ? "reader" : "tag";
    auto hex = nlohmann::json::array();
    auto widths = nlohmann::json::array();
    for (const auto& field : ev.payload) {
      hex.push_back(field.to_hex());
      widths.push_back(field.width());
    }
    j["payload_hex"] = std::move(hex);
    j["bit_width"] = std::move(widths);
    j["delivered"] = ev.delivered;
    j["adversarial"] = ev.adversarial;
    out << j.dump() << '\n';
  }
}

std::string to_jsonl(const Transcript& transcript) {
  std::ostringstream os;
  write_jsonl(os, transcript);
  return os.str();
}

Channel::Channel(Link link) : link_(link) {}

void Channel::set_metadata(std::string protocol, std::uint64_t seed) {
  transcript_.protocol = std::move(protocol);
  transcript_.seed = seed;
}

std::optional<Payload> Channel::transmit(int step, std::string label, Direction direction, Payload payload,
                                         bool adversarial_sender) {
  ChannelEvent ev{step, std::move(label), direction, std::move(payload), true, adversarial_sender};

  for (auto it = injections_.begin(); it != injections_.end(); ++it) {
    if (it->step != step) continue;
    ChannelEvent injected = std::move(*it);
    injections_.erase(it);
    ev.delivered = false;
    transcript_.events.push_back(std::move(ev));
    injected.adversarial = true;
    injected.delivered = true;
    if (injected.label.empty()) injected.label = transcript_.events.back().label;
    transcript_.events.push_back(injected);
    return injected.payload;
  }

  for (const auto& rewrite : modifiers_) {
    const Payload before = ev.payload;
    rewrite(ev);
    if (ev.payload != before) ev.adversarial = true;
  }
  for (const auto& drop : blocks_) {
    if (drop(ev)) {
      ev.delivered = false;
      break;
    }
  }
  transcript_.events.push_back(ev);
  if (!ev.delivered) return std::nullopt;
  return transcript_.events.back().payload;
}

void Channel::require_insecure(const char* op) const {
  if (link_ != Link::TagReader) {
    throw AdversaryOnSecureLink(std::string(op) + ": link " + to_string(link_) +
                                " is secure and cannot be intercepted");
  }
}

void Channel::block(Predicate predicate) {
  require_insecure("block");
  blocks_.push_back(std::move(predicate));
}

void Channel::modify(Transform transform) {
  require_insecure("modify");
  modifiers_.push_back(std::move(transform));
}

void Channel::inject(ChannelEvent event) {
  require_insecure("inject");
  injections_.push_back(std::move(event));
}

void Channel::clear_adversary() noexcept {
  blocks_.clear();
  modifiers_.clear();
  injections_.clear();
}

void Channel::reset_transcript() { transcript_.events.clear(); }

}  // namespace bioauth
