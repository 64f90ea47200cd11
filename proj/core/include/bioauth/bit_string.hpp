#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bioauth {

// Fixed-width bit vector. Bit 0 is the most significant (leftmost) bit.
// Storage is big-endian bytes; unused low bits of the final byte are zero.
class BitString {
 public:
  BitString() = default;
  // All-zero string of `width` bits.
  explicit BitString(std::size_t width);

  // `bytes` must hold exactly ceil(width / 8) bytes; trailing pad bits are cleared.
  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t width);
  // Text of '0'/'1' characters, most significant first.
  static BitString from_binary(std::string_view bits);
  // Lowercase or uppercase hex without prefix; holds ceil(width / 8) bytes.
  static BitString from_hex(std::string_view hex, std::size_t width);
  static BitString from_u64(std::uint64_t value, std::size_t width);

  std::size_t width() const noexcept { return width_; }
  bool empty() const noexcept { return width_ == 0; }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  bool bit(std::size_t index) const;
  void set_bit(std::size_t index, bool value);
  void flip_bit(std::size_t index);

  std::size_t popcount() const noexcept;
  bool is_zero() const noexcept { return popcount() == 0; }

  // Value modulo `modulus`, reading the string as an unsigned big-endian integer.
  std::uint64_t mod(std::uint64_t modulus) const;
  BitString rotate_left(std::size_t amount) const;

  std::string to_hex() const;
  std::string to_binary() const;

  BitString& operator^=(const BitString& other);

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.width_ <=> b.width_; c != 0) return c;
    return a.bytes_ <=> b.bytes_;
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bytes_;
};

BitString xor_bits(const BitString& a, const BitString& b);
BitString operator^(const BitString& a, const BitString& b);
BitString concat(const BitString& a, const BitString& b);
BitString concat(std::initializer_list<std::reference_wrapper<const BitString>> parts);
// [first, first + count)
BitString slice(const BitString& s, std::size_t first, std::size_t count);

struct Halves {
  BitString left;
  BitString right;
};
Halves split_halves(const BitString& h);
BitString left_half(const BitString& h);
BitString right_half(const BitString& h);

std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace bioauth

template <>
struct std::hash<bioauth::BitString> {
  std::size_t operator()(const bioauth::BitString& s) const noexcept;
};
