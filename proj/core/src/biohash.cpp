#include "bioauth/biohash.hpp"

#include <cmath>

#include "bioauth/errors.hpp"

namespace bioauth {

BioHashKey deployment_key(const SystemParams& params) {
  return {Rng(params.rng_seed).fork("biohash-key").next_u64()};
}

Projector::Projector(const BioHashKey& key, std::size_t d, std::size_t l)
    : d_(d), l_(l), directions_(d * l) {
  Rng rng(key.projection_seed);
  for (double& v : directions_) v = rng.normal();

  const bool orthogonalise = l <= d;
  for (std::size_t i = 0; i < l; ++i) {
    double* row = &directions_[i * d];
    if (orthogonalise) {
      for (std::size_t j = 0; j < i; ++j) {
        const double* prev = &directions_[j * d];
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += row[k] * prev[k];
        for (std::size_t k = 0; k < d; ++k) row[k] -= dot * prev[k];
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) norm += row[k] * row[k];
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < d; ++k) row[k] /= norm;
  }
}

std::vector<double> Projector::project(std::span<const double> features) const {
  if (features.size() != d_) {
    throw DimensionError("biohash: template has " + std::to_string(features.size()) +
                         " features, expected " + std::to_string(d_));
  }
  std::vector<double> out(l_);
  for (std::size_t i = 0; i < l_; ++i) {
    const double* row = &directions_[i * d_];
    double dot = 0.0;
    for (std::size_t k = 0; k < d_; ++k) dot += row[k] * features[k];
    out[i] = dot;
  }
  return out;
}

BitString Projector::apply(std::span<const double> features) const {
  const auto proj = project(features);
  BitString out(l_);
  for (std::size_t i = 0; i < l_; ++i) out.set_bit(i, proj[i] >= 0.0);
  return out;
}

BiometricTemplate enroll_template(std::uint64_t subject_seed, const SystemParams& params, const Rng& rng) {
  Rng stream = rng.fork("subject", subject_seed);
  BiometricTemplate t;
  t.subject_id = "subject-" + std::to_string(subject_seed);
  t.features.resize(params.d);
  for (double& f : t.features) f = stream.normal();
  return t;
}

BiometricTemplate capture(const BiometricTemplate& enrolled, double noise_sigma, Rng& rng) {
  if (!(noise_sigma >= 0.0)) throw ConfigError("capture: noise_sigma must be non-negative");
  BiometricTemplate out = enrolled;
  if (noise_sigma == 0.0) return out;
  for (double& f : out.features) f += noise_sigma * rng.normal();
  return out;
}

BitString biohash(const BiometricTemplate& t, const Projector& projector) { return projector.apply(t.features); }

BitString biohash(const BiometricTemplate& t, const BioHashKey& key, const SystemParams& params) {
  if (t.features.size() != params.d) {
    throw DimensionError("biohash: template has " + std::to_string(t.features.size()) +
                         " features, expected " + std::to_string(params.d));
  }
  return Projector(key, params.d, params.l).apply(t.features);
}

bool fuzzy_match(const BitString& a, const BitString& b, std::size_t epsilon) {
  return hamming_distance(a, b) <= epsilon;
}

std::vector<ErrorRates> error_rate_sweep(std::size_t population_size, double noise_sigma,
                                         std::span<const std::size_t> epsilons, const SystemParams& params,
                                         const Rng& rng) {
  if (population_size < 2) throw ConfigError("estimate_error_rates: population_size must be >= 2");
  const Projector projector(deployment_key(params), params.d, params.l);

  std::vector<BitString> enrolled;
  std::vector<BitString> live;
  enrolled.reserve(population_size);
  live.reserve(population_size);
  for (std::size_t s = 0; s < population_size; ++s) {
    const auto t = enroll_template(s, params, rng);
    Rng noise = rng.fork("capture", s);
    enrolled.push_back(biohash(t, projector));
    live.push_back(biohash(capture(t, noise_sigma, noise), projector));
  }

  // Distances are threshold independent; count them once.
  std::vector<std::size_t> genuine(population_size);
  for (std::size_t s = 0; s < population_size; ++s) genuine[s] = hamming_distance(enrolled[s], live[s]);
  std::vector<std::size_t> impostor_hist(params.l + 1, 0);
  for (std::size_t i = 0; i < population_size; ++i) {
    for (std::size_t j = 0; j < population_size; ++j) {
      if (i != j) ++impostor_hist[hamming_distance(enrolled[i], live[j])];
    }
  }
  const double impostor_pairs = static_cast<double>(population_size * (population_size - 1));

  std::vector<ErrorRates> out;
  for (std::size_t eps : epsilons) {
    std::size_t rejects = 0;
    for (auto dist : genuine) rejects += dist > eps ? 1 : 0;
    std::size_t accepts = 0;
    for (std::size_t dist = 0; dist <= params.l && dist <= eps; ++dist) accepts += impostor_hist[dist];
    out.push_back({static_cast<double>(accepts) / impostor_pairs,
                   static_cast<double>(rejects) / static_cast<double>(population_size)});
  }
  return out;
}

ErrorRates estimate_error_rates(std::size_t population_size, double noise_sigma, std::size_t epsilon,
                                const SystemParams& params, const Rng& rng) {
  const std::size_t eps[] = {epsilon};
  return error_rate_sweep(population_size, noise_sigma, eps, params, rng).front();
}

}  // namespace bioauth
