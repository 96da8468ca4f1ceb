#include "qpake/feasibility.hpp"

#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qpake {

int TwoPartyFunction::f_a(std::size_t x, std::size_t y) const {
  if (x >= na || y >= nb)
    throw std::out_of_range("TwoPartyFunction: input outside alphabet");
  return fa[x * nb + y];
}

int TwoPartyFunction::f_b(std::size_t x, std::size_t y) const {
  if (x >= na || y >= nb)
    throw std::out_of_range("TwoPartyFunction: input outside alphabet");
  return fb[x * nb + y];
}

TwoPartyFunction TwoPartyFunction::equality(std::size_t alphabet_size) {
  if (alphabet_size < 2)
    throw std::invalid_argument("equality: alphabet size must be >= 2");
  TwoPartyFunction f;
  f.na = f.nb = alphabet_size;
  f.fa.resize(alphabet_size * alphabet_size);
  for (std::size_t x = 0; x < alphabet_size; ++x)
    for (std::size_t y = 0; y < alphabet_size; ++y)
      f.fa[x * alphabet_size + y] = (x == y) ? 1 : 0;
  f.fb = f.fa;  // both parties learn the same bit
  return f;
}

TwoPartyFunction TwoPartyFunction::parse(std::istream& in) {
  // Header: |Gamma_A| |Gamma_B|; then |Gamma_A| rows of f_A values, then
  // |Gamma_A| rows of f_B values. '#' starts a comment.
  auto next_token = [&in]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::invalid_argument("function table: unexpected end of input");
  };
  auto next_int = [&]() {
    const std::string tok = next_token();
    try {
      return std::stoi(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument("function table: expected integer, got '" +
                                  tok + "'");
    }
  };

  TwoPartyFunction f;
  const int na = next_int();
  const int nb = next_int();
  if (na < 1 || nb < 1 || na * nb > 10000)
    throw std::invalid_argument("function table: alphabet sizes out of range");
  f.na = static_cast<std::size_t>(na);
  f.nb = static_cast<std::size_t>(nb);
  f.fa.resize(f.na * f.nb);
  f.fb.resize(f.na * f.nb);
  for (auto& v : f.fa) v = next_int();
  for (auto& v : f.fb) v = next_int();
  return f;
}

bool is_ot_core(const TwoPartyFunction& f, const OtCoreQuad& q) {
  if (q.x >= f.na || q.x_prime >= f.na || q.y >= f.nb || q.y_prime >= f.nb)
    throw std::out_of_range("is_ot_core: input outside alphabet");
  const bool c1 = f.f_a(q.x, q.y) == f.f_a(q.x, q.y_prime);
  const bool c2 = f.f_b(q.x, q.y) == f.f_b(q.x_prime, q.y);
  const bool c3 = f.f_a(q.x_prime, q.y) != f.f_a(q.x_prime, q.y_prime) ||
                  f.f_b(q.x, q.y_prime) != f.f_b(q.x_prime, q.y_prime);
  return c1 && c2 && c3;
}

std::vector<OtCoreQuad> find_ot_cores(const TwoPartyFunction& f) {
  if (f.na * f.nb > 10000)
    throw std::invalid_argument("find_ot_cores: function too large for exhaustive scan");
  std::vector<OtCoreQuad> cores;
  for (std::uint32_t x = 0; x < f.na; ++x)
    for (std::uint32_t xp = 0; xp < f.na; ++xp)
      for (std::uint32_t y = 0; y < f.nb; ++y)
        for (std::uint32_t yp = 0; yp < f.nb; ++yp) {
          const OtCoreQuad q{x, xp, y, yp};
          if (is_ot_core(f, q)) cores.push_back(q);
        }
  return cores;
}

}  // namespace qpake
