#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace bioauth {

// Deployment-wide configuration. Every run is a pure function of these values
// plus the protocol key.
struct SystemParams {
  std::size_t l = 128;            // hash output width in bits; halves are l / 2
  std::size_t nonce_width = 128;  // must equal l for ID xor Nt to be well formed
  std::size_t n = 1;              // enrolled tags
  std::size_t d = 256;            // biometric feature dimension
  std::size_t epsilon = 19;       // Hamming match threshold in bits (floor(0.15 * l))
  double noise_sigma = 0.05;      // capture noise scale for genuine re-captures
  std::uint64_t rng_seed = 1;
  std::string digest = "sha256";

  // Defaults scaled to a given l: nonce_width = l, epsilon = floor(0.15 * l).
  static SystemParams for_width(std::size_t l);

  // Throws ConfigError on a violated invariant.
  void validate() const;
};

std::size_t default_epsilon(std::size_t l);

}  // namespace bioauth
