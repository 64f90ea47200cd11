#pragma once

#include <cstdint>
#include <string>

#include "bioauth/bit_string.hpp"
#include "bioauth/params.hpp"

namespace bioauth {

// One-way hash with output width `width`, built on a named OpenSSL digest.
// Input is the byte serialization of the bit string. Outputs shorter than the
// digest are truncated; longer ones append digest(data || be32(i)) for i = 1, 2, ...
BitString hash_bits(const BitString& data, const std::string& digest, std::size_t width);
BitString hash(const BitString& data, const SystemParams& params);

// Digest output length in bits; throws ConfigError for an unknown name.
std::size_t digest_bits(const std::string& digest);

// Hash evaluator bound to a configuration that counts its evaluations. Each
// protocol party owns one so per-party costs can be read off directly.
class Hasher {
 public:
  explicit Hasher(const SystemParams& params);

  BitString operator()(const BitString& data);

  std::uint64_t count() const noexcept { return count_; }
  void reset() noexcept { count_ = 0; }
  std::size_t width() const noexcept { return width_; }
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
  std::size_t width_;
  std::uint64_t count_ = 0;
};

}  // namespace bioauth
