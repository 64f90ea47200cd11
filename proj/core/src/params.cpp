#include "bioauth/params.hpp"

#include "bioauth/errors.hpp"
#include "bioauth/hash.hpp"

namespace bioauth {

std::size_t default_epsilon(std::size_t l) { return (l * 15) / 100; }

SystemParams SystemParams::for_width(std::size_t l) {
  SystemParams p;
  p.l = l;
  p.nonce_width = l;
  p.epsilon = default_epsilon(l);
  return p;
}

void SystemParams::validate() const {
  if (l == 0 || l % 2 != 0) throw ConfigError("l must be a positive even number of bits");
  if (nonce_width != l) throw ConfigError("nonce_width must equal l");
  if (epsilon > l) throw ConfigError("epsilon must lie in [0, l]");
  if (n < 1) throw ConfigError("n must be at least 1");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  (void)digest_bits(digest);
}

}  // namespace bioauth
