#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpake/rng.hpp"

namespace qpake {

// Packed GF(2) string of declared length. Bit i lives at word i/64, lane
// i%64. Hex serialization is MSB-first: bit 0 is the high bit of the first
// nibble.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t len);

  static BitString random(std::size_t len, Rng& rng);
  static BitString from_string(std::string_view bits);  // e.g. "0101"
  static BitString from_hex(std::string_view hex, std::size_t len);

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const;
  void set(std::size_t i, bool v);

  BitString operator^(const BitString& other) const;
  bool operator==(const BitString& other) const;
  bool operator!=(const BitString& other) const { return !(*this == other); }

  std::size_t weight() const;
  std::size_t hamming(const BitString& other) const;

  // x|_I for a sorted index set; result length = |I| (no padding here).
  BitString select(std::span<const std::uint32_t> indices) const;

  // Zero-pad or truncate (dropping highest indices) to a fixed width.
  BitString fit(std::size_t width) const;

  // True iff *this < other at the first differing index (0 before 1).
  bool lex_less(const BitString& other) const;

  std::string to_string() const;
  std::string to_hex() const;

  std::span<const std::uint64_t> words() const { return words_; }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t len_ = 0;

  void mask_tail();
};

std::size_t hamming(const BitString& a, const BitString& b);

// Hamming distance / length; distance of two empty strings is 0.
double relative_hamming(const BitString& a, const BitString& b);

// Parity of the AND of two equal-length strings (GF(2) inner product).
bool dot(const BitString& a, const BitString& b);

}  // namespace qpake
