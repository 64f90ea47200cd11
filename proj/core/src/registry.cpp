#include "bioauth/registry.hpp"

#include <cstdio>
#include <deque>
#include <functional>
#include <sstream>

#include "bioauth/baselines.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/proposed.hpp"

namespace bioauth {

Protocol::Protocol(const SystemParams& params) : params_(params), tag_hasher_(params), server_hasher_(params) {
  params_.validate();
}

namespace {

// Wrappers that give an endpoint ownership of its nonce stream.
template <class Inner>
class OwningReader final : public ReaderEndpoint {
 public:
  OwningReader(std::uint64_t seed, std::function<std::unique_ptr<Inner>(Rng&)> build)
      : rng_(std::make_unique<Rng>(seed)), inner_(build(*rng_)) {}

  std::optional<Payload> emit(int step) override { return inner_->emit(step); }
  bool absorb(int step, const Payload& message) override { return inner_->absorb(step, message); }
  void abort() override { inner_->abort(); }
  bool accepted() const override { return inner_->accepted(); }
  SessionValues values() const override { return inner_->values(); }
  std::optional<BitString> identified_id() const override { return inner_->identified_id(); }
  bool verify_biometric(const BiometricTemplate& live) override { return inner_->verify_biometric(live); }

 private:
  std::unique_ptr<Rng> rng_;
  std::unique_ptr<Inner> inner_;
};

template <class Inner>
class OwningTagBox final : public Endpoint {
 public:
  OwningTagBox(std::uint64_t seed, std::function<std::unique_ptr<Inner>(Rng&)> build)
      : rng_(std::make_unique<Rng>(seed)), inner_(build(*rng_)) {}

  std::optional<Payload> emit(int step) override { return inner_->emit(step); }
  bool absorb(int step, const Payload& message) override { return inner_->absorb(step, message); }
  void abort() override { inner_->abort(); }
  bool accepted() const override { return inner_->accepted(); }
  SessionValues values() const override { return inner_->values(); }

 private:
  std::unique_ptr<Rng> rng_;
  std::unique_ptr<Inner> inner_;
};

BitString fresh_id(Rng& rng, std::size_t l, const std::function<bool(const BitString&)>& taken) {
  constexpr int kMaxRedraws = 100;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    BitString id = rng.bits(l);
    if (!taken(id)) return id;
  }
  throw RegistrationError("no fresh tag ID after 100 draws; the RNG is broken");
}

std::string default_label(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%04llu", static_cast<unsigned long long>(seed));
  return buf;
}

class ProposedProtocol final : public Protocol {
 public:
  ProposedProtocol(const SystemParams& params, std::shared_ptr<const Projector> projector)
      : Protocol(params), projector_(std::move(projector)), server_(db_, *projector_, params_, server_hasher_) {}

  std::string key() const override { return "proposed"; }
  const std::vector<StepSpec>& steps() const override { return proposed::steps(); }
  bool has_bio_phase() const override { return true; }
  bool mutual() const override { return true; }

  std::size_t enroll(std::uint64_t subject_seed, Rng& rng, std::string label) override {
    if (label.empty()) label = default_label(subject_seed);
    // Tags live in a deque so endpoint references survive later enrolments.
    tags_.push_back(proposed::register_subject(subject_seed, params_, db_, rng, *projector_, std::move(label)));
    subject_seeds_.push_back(subject_seed);
    return tags_.size() - 1;
  }

  std::size_t adopt(const EnrolmentRecord& record, std::uint64_t subject_seed) override {
    db_.add({record.id, record.secret, record.label});
    tags_.push_back(proposed::TagState{record.id, record.secret, std::nullopt});
    subject_seeds_.push_back(subject_seed);
    return tags_.size() - 1;
  }

  EnrolmentRecord record(std::size_t index) const override {
    const auto& r = db_.records().at(index);
    return {r.label, r.id, r.gb_ref};
  }

  std::size_t size() const override { return tags_.size(); }
  const BitString& tag_id(std::size_t index) const override { return tags_.at(index).id; }

  std::unique_ptr<Endpoint> make_tag(std::size_t index, std::uint64_t seed) override {
    auto& tag = tags_.at(index);
    return std::make_unique<OwningTagBox<proposed::TagEndpoint>>(
        seed, [&](Rng& r) { return std::make_unique<proposed::TagEndpoint>(tag, r, tag_hasher_); });
  }

  std::unique_ptr<ReaderEndpoint> make_reader(std::uint64_t seed) override {
    return std::make_unique<OwningReader<proposed::ReaderSide>>(
        seed, [&](Rng& r) { return std::make_unique<proposed::ReaderSide>(server_, r); });
  }

  std::string persistent_state() const override {
    std::string out = db_.serialize();
    for (const auto& t : tags_) out += t.serialize();
    return out;
  }

  std::size_t tag_storage_bits() const override { return 2 * params_.l; }

 private:
  std::shared_ptr<const Projector> projector_;
  proposed::ServerDb db_;
  std::deque<proposed::TagState> tags_;
  proposed::Server server_;
};

// Shared shape of the static-ID baselines: a vector of tag records that is
// also the server database.
template <class TagT>
class StaticIdProtocol : public Protocol {
 public:
  using Protocol::Protocol;

  std::size_t adopt(const EnrolmentRecord& record, std::uint64_t subject_seed) override {
    for (const auto& t : tags_) {
      if (t.id == record.id) throw RegistrationError("duplicate tag ID " + record.id.to_hex());
    }
    tags_.push_back(make_record(record));
    labels_.push_back(record.label);
    subject_seeds_.push_back(subject_seed);
    return tags_.size() - 1;
  }

  std::size_t enroll(std::uint64_t subject_seed, Rng& rng, std::string label) override {
    if (label.empty()) label = default_label(subject_seed);
    EnrolmentRecord r{std::move(label), fresh_id(rng, params_.l, [&](const BitString& id) {
                        for (const auto& t : tags_) {
                          if (t.id == id) return true;
                        }
                        return false;
                      }),
                      BitString(params_.l)};
    r.secret = draw_secret(rng);
    return adopt(r, subject_seed);
  }

  std::size_t size() const override { return tags_.size(); }
  const BitString& tag_id(std::size_t index) const override { return tags_.at(index).id; }

  std::string persistent_state() const override {
    std::ostringstream os;
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      const auto r = record(i);
      os << r.label << ' ' << r.id.to_hex() << ' ' << r.secret.to_hex() << '\n';
    }
    return os.str();
  }

 protected:
  virtual TagT make_record(const EnrolmentRecord& record) const = 0;
  virtual BitString draw_secret(Rng&) const { return BitString(params_.l); }

  std::vector<TagT> tags_;
  std::vector<std::string> labels_;
};

class RhlsProtocol final : public StaticIdProtocol<rhls::Tag> {
 public:
  using StaticIdProtocol::StaticIdProtocol;

  std::string key() const override { return "rhls"; }
  const std::vector<StepSpec>& steps() const override { return rhls::steps(); }
  bool mutual() const override { return false; }

  EnrolmentRecord record(std::size_t index) const override {
    return {labels_.at(index), tags_.at(index).id, BitString(params_.l)};
  }

  std::unique_ptr<Endpoint> make_tag(std::size_t index, std::uint64_t seed) override {
    return std::make_unique<OwningTagBox<rhls::TagEndpoint>>(seed, [this, index](Rng& r) {
      return std::make_unique<rhls::TagEndpoint>(tags_.at(index), r, tag_hasher_);
    });
  }

  std::unique_ptr<ReaderEndpoint> make_reader(std::uint64_t seed) override {
    return std::make_unique<OwningReader<rhls::ReaderSide>>(
        seed, [this](Rng&) { return std::make_unique<rhls::ReaderSide>(tags_, server_hasher_); });
  }

  std::size_t tag_storage_bits() const override { return params_.l; }

 protected:
  rhls::Tag make_record(const EnrolmentRecord& record) const override { return {record.id}; }
};

class ChProtocol final : public StaticIdProtocol<ch::Tag> {
 public:
  using StaticIdProtocol::StaticIdProtocol;

  std::string key() const override { return "ch"; }
  const std::vector<StepSpec>& steps() const override { return ch::steps(); }
  bool mutual() const override { return true; }

  EnrolmentRecord record(std::size_t index) const override {
    return {labels_.at(index), tags_.at(index).id, tags_.at(index).k};
  }

  std::unique_ptr<Endpoint> make_tag(std::size_t index, std::uint64_t seed) override {
    return std::make_unique<OwningTagBox<ch::TagEndpoint>>(seed, [this, index](Rng& r) {
      return std::make_unique<ch::TagEndpoint>(tags_.at(index), r, tag_hasher_);
    });
  }

  std::unique_ptr<ReaderEndpoint> make_reader(std::uint64_t seed) override {
    return std::make_unique<OwningReader<ch::ReaderSide>>(seed, [this](Rng& r) {
      return std::make_unique<ch::ReaderSide>(tags_, r, server_hasher_, params_.l);
    });
  }

  std::size_t tag_storage_bits() const override { return 2 * params_.l; }

 protected:
  ch::Tag make_record(const EnrolmentRecord& record) const override { return {record.id, record.secret}; }
  BitString draw_secret(Rng& rng) const override { return rng.bits(params_.l); }
};

class ClearIdProtocol final : public StaticIdProtocol<clear_id::Tag> {
 public:
  using StaticIdProtocol::StaticIdProtocol;

  std::string key() const override { return "clear_id"; }
  const std::vector<StepSpec>& steps() const override { return clear_id::steps(); }
  bool mutual() const override { return false; }

  EnrolmentRecord record(std::size_t index) const override {
    return {labels_.at(index), tags_.at(index).id, BitString(params_.l)};
  }

  std::unique_ptr<Endpoint> make_tag(std::size_t index, std::uint64_t seed) override {
    return std::make_unique<OwningTagBox<clear_id::TagEndpoint>>(
        seed, [this, index](Rng&) { return std::make_unique<clear_id::TagEndpoint>(tags_.at(index)); });
  }

  std::unique_ptr<ReaderEndpoint> make_reader(std::uint64_t seed) override {
    return std::make_unique<OwningReader<clear_id::ReaderSide>>(
        seed, [this](Rng&) { return std::make_unique<clear_id::ReaderSide>(tags_); });
  }

  std::size_t tag_storage_bits() const override { return params_.l; }

 protected:
  clear_id::Tag make_record(const EnrolmentRecord& record) const override { return {record.id}; }
};

}  // namespace

std::unique_ptr<Protocol> make_protocol(const std::string& key, const SystemParams& params,
                                        std::shared_ptr<const Projector> projector) {
  if (key == "proposed") {
    params.validate();
    if (!projector) projector = std::make_shared<const Projector>(deployment_key(params), params.d, params.l);
    if (projector->width() != params.l || projector->dimension() != params.d) {
      throw ConfigError("projector shape does not match params");
    }
    return std::make_unique<ProposedProtocol>(params, std::move(projector));
  }
  if (key == "rhls") return std::make_unique<RhlsProtocol>(params);
  if (key == "ch") return std::make_unique<ChProtocol>(params);
  if (key == "clear_id") return std::make_unique<ClearIdProtocol>(params);
  throw ConfigError("unknown protocol '" + key + "'");
}

SessionOutcome run(Protocol& protocol, std::size_t index, const BiometricTemplate* live, Channel& channel,
                   Rng& rng, const SessionOptions& options) {
  auto tag = protocol.make_tag(index, rng.next_u64());
  auto reader = protocol.make_reader(rng.next_u64());
  return drive_session(protocol.steps(), *tag, *reader, live, protocol.has_bio_phase(), channel, options);
}

BiometricTemplate genuine_capture(const Protocol& protocol, std::size_t index, double noise_sigma, Rng& rng) {
  const auto enrolled = proposed::subject_template(protocol.subject_seed(index), protocol.params());
  return capture(enrolled, noise_sigma, rng);
}

bool fully_accepted(const Protocol& protocol, const SessionOutcome& outcome) {
  if (outcome.failure_stage || !outcome.tag_authenticated) return false;
  if (protocol.mutual() && !outcome.reader_authenticated) return false;
  if (protocol.has_bio_phase() && !outcome.bio_verified) return false;
  return true;
}

}  // namespace bioauth
