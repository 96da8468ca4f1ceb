#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "qpake/feasibility.hpp"
#include "qpake/rng.hpp"

using namespace qpake;

namespace {

// Second, independent enumeration: evaluates the three defining conditions
// inline, with the loop nest ordered differently from the library.
std::vector<OtCoreQuad> oracle_cores(const TwoPartyFunction& f) {
  std::vector<OtCoreQuad> out;
  for (std::uint32_t y = 0; y < f.nb; ++y)
    for (std::uint32_t yp = 0; yp < f.nb; ++yp)
      for (std::uint32_t x = 0; x < f.na; ++x)
        for (std::uint32_t xp = 0; xp < f.na; ++xp) {
          const bool c1 = f.fa[x * f.nb + y] == f.fa[x * f.nb + yp];
          const bool c2 = f.fb[x * f.nb + y] == f.fb[xp * f.nb + y];
          const bool c3 = f.fa[xp * f.nb + y] != f.fa[xp * f.nb + yp] ||
                          f.fb[x * f.nb + yp] != f.fb[xp * f.nb + yp];
          if (c1 && c2 && c3) out.push_back({x, xp, y, yp});
        }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.x, a.x_prime, a.y, a.y_prime) <
           std::tie(b.x, b.x_prime, b.y, b.y_prime);
  });
  return out;
}

}  // namespace

TEST_CASE("equality tables") {
  const TwoPartyFunction eq2 = TwoPartyFunction::equality(2);
  CHECK(eq2.f_a(0, 0) == 1);
  CHECK(eq2.f_a(0, 1) == 0);
  CHECK(eq2.f_a(1, 1) == 1);
  const TwoPartyFunction eq5 = TwoPartyFunction::equality(5);
  for (std::size_t x = 0; x < 5; ++x)
    for (std::size_t y = 0; y < 5; ++y) {
      CHECK(eq5.f_a(x, y) == (x == y ? 1 : 0));
      CHECK(eq5.f_a(x, y) == eq5.f_a(y, x));  // symmetric
      CHECK(eq5.f_a(x, y) == eq5.f_b(x, y));  // common output
    }
  CHECK_THROWS_AS(TwoPartyFunction::equality(1), std::invalid_argument);
  CHECK_THROWS_AS(eq5.f_a(5, 0), std::out_of_range);
}

TEST_CASE("published quadruple is an OT-core of EQUALITY over {0,1,2}") {
  const TwoPartyFunction eq = TwoPartyFunction::equality(3);
  CHECK(is_ot_core(eq, {1, 2, 0, 2}));
  const auto cores = find_ot_cores(eq);
  CHECK_FALSE(cores.empty());
  CHECK(std::find(cores.begin(), cores.end(), OtCoreQuad{1, 2, 0, 2}) !=
        cores.end());
  CHECK_THROWS_AS(is_ot_core(eq, {1, 2, 0, 3}), std::out_of_range);
}

TEST_CASE("x == x' conflicts with condition one") {
  const TwoPartyFunction eq = TwoPartyFunction::equality(4);
  for (std::uint32_t x = 0; x < 4; ++x)
    for (std::uint32_t y = 0; y < 4; ++y)
      for (std::uint32_t yp = 0; yp < 4; ++yp)
        CHECK_FALSE(is_ot_core(eq, {x, x, y, yp}));
}

TEST_CASE("constant functions have no OT-core") {
  TwoPartyFunction constant;
  constant.na = 3;
  constant.nb = 5;
  constant.fa.assign(15, 7);
  constant.fb.assign(15, 7);
  CHECK(find_ot_cores(constant).empty());
}

TEST_CASE("xor-to-both matches the independent enumeration") {
  TwoPartyFunction xorf;
  xorf.na = xorf.nb = 2;
  xorf.fa = {0, 1, 1, 0};
  xorf.fb = xorf.fa;
  const auto got = find_ot_cores(xorf);
  const auto expected = oracle_cores(xorf);
  CHECK(got == expected);

  const TwoPartyFunction eq = TwoPartyFunction::equality(4);
  CHECK(find_ot_cores(eq) == oracle_cores(eq));
}

TEST_CASE("core detection is invariant under alphabet relabeling") {
  const TwoPartyFunction eq = TwoPartyFunction::equality(5);
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::uint32_t> pa{0, 1, 2, 3, 4}, pb{0, 1, 2, 3, 4};
    for (std::size_t i = 4; i > 0; --i) {
      std::swap(pa[i], pa[rng.below(i + 1)]);
      std::swap(pb[i], pb[rng.below(i + 1)]);
    }
    TwoPartyFunction relabeled;
    relabeled.na = relabeled.nb = 5;
    relabeled.fa.resize(25);
    relabeled.fb.resize(25);
    for (std::size_t x = 0; x < 5; ++x)
      for (std::size_t y = 0; y < 5; ++y) {
        relabeled.fa[x * 5 + y] = eq.f_a(pa[x], pb[y]);
        relabeled.fb[x * 5 + y] = eq.f_b(pa[x], pb[y]);
      }
    // relabel the original cores and compare as sets
    auto base = find_ot_cores(eq);
    std::vector<std::uint32_t> ia(5), ib(5);
    for (std::uint32_t i = 0; i < 5; ++i) {
      ia[pa[i]] = i;
      ib[pb[i]] = i;
    }
    std::vector<OtCoreQuad> mapped;
    for (const auto& c : base)
      mapped.push_back({ia[c.x], ia[c.x_prime], ib[c.y], ib[c.y_prime]});
    auto got = find_ot_cores(relabeled);
    auto key = [](const OtCoreQuad& q) {
      return std::tuple(q.x, q.x_prime, q.y, q.y_prime);
    };
    std::sort(mapped.begin(), mapped.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::sort(got.begin(), got.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    CHECK(got == mapped);
  }
}

TEST_CASE("table parsing") {
  std::stringstream in(
      "# equality over two symbols\n"
      "2 2\n"
      "1 0\n"
      "0 1\n"
      "1 0\n"
      "0 1\n");
  const TwoPartyFunction f = TwoPartyFunction::parse(in);
  CHECK(f.na == 2);
  CHECK(f.f_a(0, 0) == 1);
  CHECK(f.f_b(1, 0) == 0);

  std::stringstream truncated("2 2\n1 0\n");
  CHECK_THROWS_AS(TwoPartyFunction::parse(truncated), std::invalid_argument);
  std::stringstream garbage("2 2\nx y\n");
  CHECK_THROWS_AS(TwoPartyFunction::parse(garbage), std::invalid_argument);
  std::stringstream huge("200 200\n");
  CHECK_THROWS_AS(TwoPartyFunction::parse(huge), std::invalid_argument);
}

TEST_CASE("find_ot_cores is deterministic and bounded") {
  const TwoPartyFunction eq = TwoPartyFunction::equality(3);
  CHECK(find_ot_cores(eq) == find_ot_cores(eq));
  TwoPartyFunction big;
  big.na = 101;
  big.nb = 101;
  big.fa.assign(101 * 101, 0);
  big.fb.assign(101 * 101, 0);
  CHECK_THROWS_AS(find_ot_cores(big), std::invalid_argument);
}
