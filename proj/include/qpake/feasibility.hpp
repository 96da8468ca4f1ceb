#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qpake {

// Finite deterministic two-party function: output tables f_A, f_B over the
// full product of the input alphabets.
struct TwoPartyFunction {
  std::size_t na = 0;  // |Gamma_A|
  std::size_t nb = 0;  // |Gamma_B|
  std::vector<int> fa;  // row-major, x * nb + y
  std::vector<int> fb;

  int f_a(std::size_t x, std::size_t y) const;
  int f_b(std::size_t x, std::size_t y) const;

  static TwoPartyFunction equality(std::size_t alphabet_size);
  static TwoPartyFunction parse(std::istream& in);
};

struct OtCoreQuad {
  std::uint32_t x = 0, x_prime = 0, y = 0, y_prime = 0;
  bool operator==(const OtCoreQuad&) const = default;
};

bool is_ot_core(const TwoPartyFunction& f, const OtCoreQuad& quad);

// All OT-cores in lexicographic (x, x', y, y') order. Exhaustive; requires
// |Gamma_A| * |Gamma_B| <= 10^4.
std::vector<OtCoreQuad> find_ot_cores(const TwoPartyFunction& f);

}  // namespace qpake
