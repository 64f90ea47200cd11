#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bioauth/bit_string.hpp"
#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"

namespace bioauth {

// Simulated biometric feature vector.
struct BiometricTemplate {
  std::vector<double> features;
  std::string subject_id;
};

// Deployment-wide key for the random projection. One key per deployment; the
// tag carries no per-user key.
struct BioHashKey {
  std::uint64_t projection_seed = 0;
};

BioHashKey deployment_key(const SystemParams& params);

// l unit directions in R^d drawn from the key. When l <= d the directions are
// orthonormalised (Gram-Schmidt), as in classic BioHashing; otherwise they are
// independent unit vectors.
class Projector {
 public:
  Projector(const BioHashKey& key, std::size_t d, std::size_t l);

  // Bit i = 1 iff <features, direction_i> >= 0.
  BitString apply(std::span<const double> features) const;
  std::vector<double> project(std::span<const double> features) const;

  std::size_t dimension() const noexcept { return d_; }
  std::size_t width() const noexcept { return l_; }

 private:
  std::size_t d_;
  std::size_t l_;
  std::vector<double> directions_;  // row-major l x d
};

BiometricTemplate enroll_template(std::uint64_t subject_seed, const SystemParams& params, const Rng& rng);
BiometricTemplate capture(const BiometricTemplate& enrolled, double noise_sigma, Rng& rng);

// Throws DimensionError when the template does not have params.d features.
BitString biohash(const BiometricTemplate& t, const BioHashKey& key, const SystemParams& params);
BitString biohash(const BiometricTemplate& t, const Projector& projector);

bool fuzzy_match(const BitString& a, const BitString& b, std::size_t epsilon);

struct ErrorRates {
  double far = 0.0;
  double frr = 0.0;
};

// Monte Carlo FAR/FRR on one simulated population. Genuine pairs compare each
// subject's enrolled BioHash with a noisy re-capture; impostor pairs compare
// every ordered pair of distinct subjects (capture of j against enrolment of i).
ErrorRates estimate_error_rates(std::size_t population_size, double noise_sigma, std::size_t epsilon,
                                const SystemParams& params, const Rng& rng);

// Same population evaluated at several thresholds; the i-th entry uses epsilons[i].
std::vector<ErrorRates> error_rate_sweep(std::size_t population_size, double noise_sigma,
                                         std::span<const std::size_t> epsilons, const SystemParams& params,
                                         const Rng& rng);

}  // namespace bioauth
