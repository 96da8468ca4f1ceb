#include "qpake/bitstring.hpp"

#include <bit>
#include <stdexcept>

namespace qpake {

namespace {
constexpr std::size_t word_count(std::size_t len) { return (len + 63) / 64; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

BitString::BitString(std::size_t len) : words_(word_count(len), 0), len_(len) {}

BitString BitString::random(std::size_t len, Rng& rng) {
  BitString out(len);
  for (auto& w : out.words_) w = rng.next();
  out.mask_tail();
  return out;
}

BitString BitString::from_string(std::string_view bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set(i, true);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("BitString: expected '0'/'1' characters");
    }
  }
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t len) {
  if (hex.size() != (len + 3) / 4)
    throw std::invalid_argument("BitString: hex length does not match bit length");
  BitString out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const int v = hex_value(hex[i / 4]);
    if (v < 0) throw std::invalid_argument("BitString: invalid hex digit");
    if ((v >> (3 - (i % 4))) & 1) out.set(i, true);
  }
  return out;
}

bool BitString::get(std::size_t i) const {
  if (i >= len_) throw std::out_of_range("BitString::get");
  return (words_[i / 64] >> (i % 64)) & 1;
}

void BitString::set(std::size_t i, bool v) {
  if (i >= len_) throw std::out_of_range("BitString::set");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (v)
    words_[i / 64] |= mask;
  else
    words_[i / 64] &= ~mask;
}

BitString BitString::operator^(const BitString& other) const {
  if (len_ != other.len_)
    throw std::invalid_argument("BitString: XOR length mismatch");
  BitString out(len_);
  for (std::size_t i = 0; i < words_.size(); ++i)
    out.words_[i] = words_[i] ^ other.words_[i];
  return out;
}

bool BitString::operator==(const BitString& other) const {
  return len_ == other.len_ && words_ == other.words_;
}

std::size_t BitString::weight() const {
  std::size_t w = 0;
  for (auto word : words_) w += static_cast<std::size_t>(std::popcount(word));
  return w;
}

std::size_t BitString::hamming(const BitString& other) const {
  if (len_ != other.len_)
    throw std::invalid_argument("BitString: Hamming length mismatch");
  std::size_t w = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    w += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  return w;
}

BitString BitString::select(std::span<const std::uint32_t> indices) const {
  BitString out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out.set(i, get(indices[i]));
  return out;
}

BitString BitString::fit(std::size_t width) const {
  BitString out(width);
  const std::size_t copy = len_ < width ? len_ : width;
  for (std::size_t i = 0; i < copy; ++i) out.set(i, get(i));
  return out;
}

bool BitString::lex_less(const BitString& other) const {
  if (len_ != other.len_)
    throw std::invalid_argument("BitString: lex compare length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::uint64_t diff = words_[i] ^ other.words_[i];
    if (diff != 0) {
      const int bit = std::countr_zero(diff);
      return ((words_[i] >> bit) & 1) == 0;
    }
  }
  return false;
}

std::string BitString::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

std::string BitString::to_hex() const {
  static const char* digits = "0123456789abcdef";
  const std::size_t nibbles = (len_ + 3) / 4;
  std::string s(nibbles, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i / 4] = digits[hex_value(s[i / 4]) | (1 << (3 - (i % 4)))];
  return s;
}

void BitString::mask_tail() {
  const std::size_t rem = len_ % 64;
  if (rem != 0 && !words_.empty())
    words_.back() &= (~std::uint64_t{0}) >> (64 - rem);
}

std::size_t hamming(const BitString& a, const BitString& b) {
  return a.hamming(b);
}

double relative_hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("relative_hamming: length mismatch");
  if (a.size() == 0) return 0.0;
  return static_cast<double>(a.hamming(b)) / static_cast<double>(a.size());
}

bool dot(const BitString& a, const BitString& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: length mismatch");
  std::uint64_t acc = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) acc ^= wa[i] & wb[i];
  return std::popcount(acc) & 1;
}

}  // namespace qpake
