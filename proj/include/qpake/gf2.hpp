#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qpake/bitstring.hpp"
#include "qpake/rng.hpp"

namespace qpake {

// Two-universal hash family: h(x) = T x over GF(2) with T the Toeplitz
// matrix of a seed-derived diagonal. Linear, so h(0) = 0 for every member.
class UniversalHash {
 public:
  static UniversalHash sample(std::uint64_t seed, std::size_t input_len,
                              std::size_t output_len);
  static UniversalHash from_diagonal(const BitString& diagonal,
                                     std::size_t input_len,
                                     std::size_t output_len);

  BitString eval(const BitString& x) const;

  std::size_t input_len() const { return input_len_; }
  std::size_t output_len() const { return output_len_; }
  std::uint64_t seed() const { return seed_; }
  const BitString& diagonal() const { return diagonal_; }

 private:
  UniversalHash(std::uint64_t seed, BitString diagonal, std::size_t in,
                std::size_t out);

  std::uint64_t seed_ = 0;
  BitString diagonal_;           // length input_len + output_len - 1
  std::vector<BitString> rows_;  // output_len rows of width input_len
  std::size_t input_len_ = 0;
  std::size_t output_len_ = 0;
};

// Seed-indexed family of random full-rank parity-check matrices over GF(2),
// standing in for a delta-biased code family. The bias bound delta is a
// declared parameter fed to the bounds module; it is measured exactly only
// at tiny sizes (empirical_bias).
class SyndromeFamily {
 public:
  SyndromeFamily() = default;  // empty placeholder; build via the full ctor
  SyndromeFamily(std::uint64_t family_seed, std::size_t family_size,
                 std::size_t block_len, std::size_t syndrome_len, double tau,
                 double delta_bound);

  std::size_t family_size() const { return family_size_; }
  std::size_t block_len() const { return block_len_; }
  std::size_t syndrome_len() const { return syndrome_len_; }
  double tau() const { return tau_; }
  double delta_bound() const { return delta_bound_; }
  std::uint64_t family_seed() const { return family_seed_; }
  std::size_t decode_radius() const;

  // Parity-check matrix for index j: syndrome_len rows of width block_len,
  // full rank by construction.
  std::vector<BitString> check_matrix(std::uint64_t j) const;

  BitString syndrome(std::uint64_t j, const BitString& x) const;

  // Nearest candidate with the requested syndrome within the decoding
  // radius; min weight first, ties by lexicographically smallest error
  // pattern. nullopt when nothing lies within the radius (or, above the
  // table regime, when the bounded search gives up).
  std::optional<BitString> decode(std::uint64_t j, const BitString& s,
                                  const BitString& x_hat) const;

  // Exact family bias: sqrt of the worst-case fraction of indices whose
  // dual code contains a given nonzero word. Tiny sizes only.
  double empirical_bias() const;
  // Same quantity as an exact fraction (max count, family size).
  std::pair<std::uint64_t, std::uint64_t> bias_fraction() const;

 private:
  std::uint64_t family_seed_ = 0;
  std::size_t family_size_ = 0;
  std::size_t block_len_ = 0;
  std::size_t syndrome_len_ = 0;
  double tau_ = 0.0;
  double delta_bound_ = 0.0;

  struct TableCache;
  std::shared_ptr<TableCache> cache_;

  bool table_feasible() const;
};

// Password code: dictionary index -> basis string in {+,x}^n written as
// bits (0 = +, 1 = x), with minimum distance at least gamma * n.
class PasswordCode {
 public:
  static PasswordCode random(std::uint64_t seed, std::size_t dict_size,
                             std::size_t codeword_len, double gamma);
  static PasswordCode repetition(std::size_t codeword_len);
  static PasswordCode from_table(std::vector<BitString> table, double gamma);

  const BitString& encode(std::size_t pw) const;

  std::size_t size() const { return table_.size(); }
  std::size_t codeword_len() const { return n_; }
  double gamma() const { return gamma_; }
  std::size_t min_distance() const { return min_distance_; }
  bool distance_verified() const { return distance_verified_; }
  std::uint64_t seed() const { return seed_; }

  // Exact pairwise minimum distance; |D| = 1 yields n by convention.
  // Unsupported above the brute-force regime (|D| > 4096).
  std::size_t verify_min_distance() const;

  PasswordCode() = default;  // empty placeholder; build via a factory

 private:
  std::vector<BitString> table_;
  std::size_t n_ = 0;
  std::size_t min_distance_ = 0;
  bool distance_verified_ = false;
  double gamma_ = 0.0;
  std::uint64_t seed_ = 0;
};

}  // namespace qpake
