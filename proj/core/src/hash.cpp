#include "bioauth/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>
#include <vector>

#include "bioauth/errors.hpp"

namespace bioauth {
namespace {

const EVP_MD* lookup(const std::string& name) {
  const EVP_MD* md = EVP_get_digestbyname(name.c_str());
  if (md == nullptr) throw ConfigError("unknown digest '" + name + "'");
  return md;
}

std::vector<std::uint8_t> run_digest(const EVP_MD* md, std::span<const std::uint8_t> a,
                                     std::span<const std::uint8_t> b) {
  struct CtxFree {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
  };
  std::unique_ptr<EVP_MD_CTX, CtxFree> ctx(EVP_MD_CTX_new());
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), a.data(), a.size()) != 1 ||
      (!b.empty() && EVP_DigestUpdate(ctx.get(), b.data(), b.size()) != 1) ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
    throw Error("digest computation failed");
  }
  return {out.begin(), out.begin() + len};
}

}  // namespace

std::size_t digest_bits(const std::string& digest) {
  return static_cast<std::size_t>(EVP_MD_size(lookup(digest))) * 8;
}

BitString hash_bits(const BitString& data, const std::string& digest, std::size_t width) {
  const EVP_MD* md = lookup(digest);
  std::vector<std::uint8_t> out = run_digest(md, data.bytes(), {});
  for (std::uint32_t block = 1; out.size() * 8 < width; ++block) {
    const std::array<std::uint8_t, 4> counter{static_cast<std::uint8_t>(block >> 24),
                                              static_cast<std::uint8_t>(block >> 16),
                                              static_cast<std::uint8_t>(block >> 8),
                                              static_cast<std::uint8_t>(block)};
    auto more = run_digest(md, data.bytes(), counter);
    out.insert(out.end(), more.begin(), more.end());
  }
  out.resize((width + 7) / 8);
  return BitString::from_bytes(out, width);
}

BitString hash(const BitString& data, const SystemParams& params) {
  return hash_bits(data, params.digest, params.l);
}

Hasher::Hasher(const SystemParams& params) : digest_(params.digest), width_(params.l) {}

BitString Hasher::operator()(const BitString& data) {
  ++count_;
  return hash_bits(data, digest_, width_);
}

}  // namespace bioauth
