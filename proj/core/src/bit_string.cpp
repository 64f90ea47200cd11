#include "bioauth/bit_string.hpp"

#include <algorithm>
#include <bit>

#include "bioauth/errors.hpp"

namespace bioauth {
namespace {

constexpr std::size_t byte_count(std::size_t width) { return (width + 7) / 8; }

void clear_padding(std::vector<std::uint8_t>& bytes, std::size_t width) {
  if (const std::size_t used = width % 8; used != 0 && !bytes.empty()) {
    bytes.back() &= static_cast<std::uint8_t>(0xFFu << (8 - used));
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitString::BitString(std::size_t width) : width_(width), bytes_(byte_count(width), 0) {}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t width) {
  if (bytes.size() != byte_count(width)) {
    throw WidthError("from_bytes: " + std::to_string(bytes.size()) + " bytes cannot hold exactly " +
                     std::to_string(width) + " bits");
  }
  BitString out;
  out.width_ = width;
  out.bytes_.assign(bytes.begin(), bytes.end());
  clear_padding(out.bytes_, width);
  return out;
}

BitString BitString::from_binary(std::string_view bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set_bit(i, true);
    } else if (bits[i] != '0') {
      throw ParseError("from_binary: unexpected character '" + std::string(1, bits[i]) + "'");
    }
  }
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t width) {
  if (hex.size() != 2 * byte_count(width)) {
    throw ParseError("from_hex: expected " + std::to_string(2 * byte_count(width)) +
                     " hex digits for width " + std::to_string(width) + ", got " +
                     std::to_string(hex.size()));
  }
  std::vector<std::uint8_t> bytes(byte_count(width));
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ParseError("from_hex: invalid hex digit in '" + std::string(hex) + "'");
    bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  const std::size_t used = width % 8;
  if (used != 0 && (bytes.back() & static_cast<std::uint8_t>(0xFFu >> used)) != 0) {
    throw ParseError("from_hex: padding bits must be zero");
  }
  return from_bytes(bytes, width);
}

BitString BitString::from_u64(std::uint64_t value, std::size_t width) {
  BitString out(width);
  for (std::size_t i = 0; i < width && i < 64; ++i) {
    out.set_bit(width - 1 - i, ((value >> i) & 1u) != 0);
  }
  return out;
}

bool BitString::bit(std::size_t index) const {
  if (index >= width_) throw WidthError("bit index out of range");
  return (bytes_[index / 8] >> (7 - index % 8)) & 1u;
}

void BitString::set_bit(std::size_t index, bool value) {
  if (index >= width_) throw WidthError("bit index out of range");
  const auto mask = static_cast<std::uint8_t>(1u << (7 - index % 8));
  if (value) {
    bytes_[index / 8] |= mask;
  } else {
    bytes_[index / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

void BitString::flip_bit(std::size_t index) { set_bit(index, !bit(index)); }

std::size_t BitString::popcount() const noexcept {
  std::size_t n = 0;
  for (auto b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

std::uint64_t BitString::mod(std::uint64_t modulus) const {
  if (modulus == 0) throw WidthError("mod: zero modulus");
  // Horner over bits; acc < modulus holds after every step without overflow.
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < width_; ++i) {
    acc = acc >= modulus - acc ? acc - (modulus - acc) : acc * 2;
    if (bit(i)) acc = acc == modulus - 1 ? 0 : acc + 1;
  }
  return acc;
}

BitString BitString::rotate_left(std::size_t amount) const {
  if (width_ == 0) return *this;
  amount %= width_;
  if (amount == 0) return *this;
  return concat(slice(*this, amount, width_ - amount), slice(*this, 0, amount));
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (auto b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::string BitString::to_binary() const {
  std::string out(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (bit(i)) out[i] = '1';
  }
  return out;
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.width_ != width_) {
    throw WidthError("xor: width mismatch (" + std::to_string(width_) + " vs " +
                     std::to_string(other.width_) + ")");
  }
  for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= other.bytes_[i];
  return *this;
}

BitString xor_bits(const BitString& a, const BitString& b) {
  BitString out = a;
  out ^= b;
  return out;
}

BitString operator^(const BitString& a, const BitString& b) { return xor_bits(a, b); }

BitString concat(const BitString& a, const BitString& b) {
  if (a.width() % 8 == 0) {
    std::vector<std::uint8_t> bytes(a.bytes().begin(), a.bytes().end());
    bytes.insert(bytes.end(), b.bytes().begin(), b.bytes().end());
    return BitString::from_bytes(bytes, a.width() + b.width());
  }
  BitString out(a.width() + b.width());
  for (std::size_t i = 0; i < a.width(); ++i) out.set_bit(i, a.bit(i));
  for (std::size_t i = 0; i < b.width(); ++i) out.set_bit(a.width() + i, b.bit(i));
  return out;
}

BitString concat(std::initializer_list<std::reference_wrapper<const BitString>> parts) {
  BitString out;
  for (const BitString& p : parts) out = concat(out, p);
  return out;
}

BitString slice(const BitString& s, std::size_t first, std::size_t count) {
  if (first + count > s.width()) throw WidthError("slice out of range");
  if (first % 8 == 0) {
    const std::size_t nbytes = (count + 7) / 8;
    return BitString::from_bytes(s.bytes().subspan(first / 8, nbytes), count);
  }
  BitString out(count);
  for (std::size_t i = 0; i < count; ++i) out.set_bit(i, s.bit(first + i));
  return out;
}

Halves split_halves(const BitString& h) {
  if (h.width() % 2 != 0) {
    throw WidthError("split_halves: odd width " + std::to_string(h.width()));
  }
  const std::size_t half = h.width() / 2;
  return {slice(h, 0, half), slice(h, half, half)};
}

BitString left_half(const BitString& h) { return split_halves(h).left; }
BitString right_half(const BitString& h) { return split_halves(h).right; }

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.width() != b.width()) throw WidthError("hamming_distance: width mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.bytes().size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(static_cast<std::uint8_t>(a.bytes()[i] ^ b.bytes()[i])));
  }
  return d;
}

}  // namespace bioauth

std::size_t std::hash<bioauth::BitString>::operator()(const bioauth::BitString& s) const noexcept {
  std::size_t h = 1469598103934665603ull ^ s.width();
  for (auto b : s.bytes()) h = (h ^ b) * 1099511628211ull;
  return h;
}
