#include "bioauth/rng.hpp"

#include <cmath>
#include <numbers>

#include "bioauth/params.hpp"

namespace bioauth {
namespace {

std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(seed), engine_(splitmix64(seed)) {}

Rng Rng::fork(std::string_view label) const { return Rng(splitmix64(key_ ^ label_hash(label))); }

Rng Rng::fork(std::string_view label, std::uint64_t index) const {
  return Rng(splitmix64(splitmix64(key_ ^ label_hash(label)) + index));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

BitString Rng::bits(std::size_t width) {
  std::vector<std::uint8_t> bytes((width + 7) / 8);
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    std::uint64_t word = engine_();
    for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j) {
      bytes[i + j] = static_cast<std::uint8_t>(word >> (56 - 8 * j));
    }
  }
  return BitString::from_bytes(bytes, width);
}

bool Rng::coin() { return (engine_() >> 63) != 0; }

BitString next_nonce(Rng& rng, const SystemParams& params) { return rng.bits(params.nonce_width); }

}  // namespace bioauth
