#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "bioauth/bit_string.hpp"

namespace bioauth {

struct SystemParams;

// Deterministic PRNG with named substreams.
//
// fork() derives a child from this stream's key and a label only; it does not
// consume or depend on draws already taken, so substreams can be created up
// front for parallel work and reproduce regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng fork(std::string_view label) const;
  Rng fork(std::string_view label, std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Standard normal via Box-Muller; portable across standard libraries.
  double normal();
  BitString bits(std::size_t width);
  bool coin();

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Fresh nonce of params.nonce_width bits.
BitString next_nonce(Rng& rng, const SystemParams& params);

}  // namespace bioauth
