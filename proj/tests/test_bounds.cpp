#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpake/bounds.hpp"
#include "qpake/pake.hpp"

using namespace qpake;

TEST_CASE("binary entropy endpoints and midpoint") {
  CHECK(bounds::binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bounds::binary_entropy(0.0) == 0.0);
  CHECK(bounds::binary_entropy(1.0) == 0.0);
  CHECK(bounds::binary_entropy(0.25) ==
        doctest::Approx(0.811278124459).epsilon(1e-9));
  CHECK_THROWS_AS(bounds::binary_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(bounds::binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("g(eps) worked value and edge cases") {
  CHECK(std::fabs(bounds::g_eps(1000, 0.05, 0.01, 0.5) - 172.6) < 0.5);
  CHECK(bounds::g_eps(0, 0.05, 0.01, 0.5) == 0.0);
  CHECK_THROWS_AS(bounds::g_eps(100, 0.45, 0.06, 0.5), std::invalid_argument);
  // monotone decreasing in tau
  double prev = bounds::g_eps(1000, 1e-6, 0.0, 0.5);
  for (double tau = 0.01; tau <= 0.2; tau += 0.01) {
    const double g = bounds::g_eps(1000, tau, 0.0, 0.5);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("eps_sec components at the worked parameter point") {
  bounds::BoundsInput in;
  in.n = 1000;
  in.tau = 0.05;
  in.eps = 0.01;
  in.beta = 0.1;
  in.lambda = 128;
  in.cbar = 0.5;
  const auto c = bounds::eps_sec_components(in);
  // g ~ 172.6, so the hash term 2^{-(g-128)/2} ~ 2^-22 and 2*eps dominates
  CHECK(c.eps_pa == doctest::Approx(0.02).epsilon(1e-3));
  CHECK(c.eps_sec == doctest::Approx(c.eps_ec + c.eps_pa));
  CHECK(c.eps_ec < 1e-20);
}

TEST_CASE("eps_sec monotone decreasing in n at fixed rates") {
  // scan 100 grid points inside the regime where g(eps) is positive;
  // below it the raw bounds are vacuous (> 1) and not monotone
  double prev = 2.0;
  for (double n = 2000; n < 2000 + 100 * 99; n += 99) {
    bounds::BoundsInput in;
    in.n = n;
    in.tau = 0.02;
    in.eps = std::pow(n, -1.0 / 3.0);
    in.beta = 0.5;
    in.lambda = 64;
    in.cbar = 0.5;
    const auto c = bounds::eps_sec_components(in);
    CHECK(c.eps_sec < prev);
    prev = c.eps_sec;
  }
}

TEST_CASE("pa and ecc literal plug-ins") {
  CHECK(bounds::pa_bound(10.0, 10.0, 0.0) == doctest::Approx(1.0));   // hmin = l
  CHECK(bounds::pa_bound(30.0, 10.0, 0.0) ==
        doctest::Approx(std::exp2(-10.0)));                            // gap 20
  CHECK(bounds::pa_bound(12.0, 10.0, 0.25) == doctest::Approx(1.0));  // 2eps + 1/2
  CHECK(bounds::ecc_bound(0.5, 20.0, 0.0) ==
        doctest::Approx(0.5 * std::exp2(-10.0)));
}

TEST_CASE("eps_cor is a checked pass-through") {
  CHECK(bounds::eps_cor(0.0) == 0.0);
  CHECK(bounds::eps_cor(1.0) == 1.0);
  CHECK(bounds::eps_cor(0.25) == 0.25);
  CHECK_THROWS_AS(bounds::eps_cor(1.5), std::invalid_argument);
}

TEST_CASE("honest min-entropy and identities") {
  bounds::BoundsInput in;
  in.n = 500;
  in.tau = 0.0;
  in.eps = 0.0;
  in.cbar = 0.5;
  // h -> 0: bound becomes n/2
  CHECK(bounds::min_entropy_honest(in) == doctest::Approx(250.0));

  // min_entropy_honest == g(eps) identically
  for (double n : {100.0, 1000.0, 5000.0}) {
    for (double tau : {0.01, 0.05, 0.1}) {
      bounds::BoundsInput grid;
      grid.n = n;
      grid.tau = tau;
      grid.eps = 0.001;
      grid.cbar = 0.5;
      const double h = bounds::min_entropy_honest(grid);
      const double g = bounds::g_eps(n, tau, 0.001, 0.5);
      CHECK(h == doctest::Approx(g).epsilon(1e-9));
    }
  }

  // negative values are reported raw
  bounds::BoundsInput hot;
  hot.n = 100;
  hot.tau = 0.4;
  hot.eps = 0.05;
  hot.cbar = 0.5;
  CHECK(bounds::min_entropy_honest(hot) < 0.0);
  CHECK(bounds::clamp01(bounds::min_entropy_honest(hot)) == 0.0);
}

TEST_CASE("max entropy bound") {
  bounds::BoundsInput in;
  in.n = 100;
  in.cbar = 0.5;
  in.tau = 0.5;
  in.eps = 0.0;
  CHECK(bounds::max_entropy_bound(in) == doctest::Approx(100.0));
  in.tau = 0.0;
  CHECK(bounds::max_entropy_bound(in) == 0.0);
  in.tau = 0.06;
  CHECK(bounds::max_entropy_bound(in) ==
        doctest::Approx(32.744).epsilon(1e-3));
  in.tau = 0.6;
  CHECK_THROWS_AS(bounds::max_entropy_bound(in), std::invalid_argument);
}

TEST_CASE("corrupted-client bound") {
  bounds::BoundsInput in;
  in.n = 100;
  in.gamma = 1.0;
  in.tau = 0.0;
  in.eps = 0.0;
  in.beta = 0.5;
  in.lambda = 16;
  const auto cc = bounds::corrupted_client_mu(in);
  CHECK(cc.hmin == doctest::Approx(50.0));  // gamma/2 * n at tau = eps = 0

  // corrupted hmin never exceeds n over a scan
  for (double n : {100.0, 1000.0}) {
    for (double gamma : {0.3, 0.6, 1.0}) {
      for (double tau : {0.0, 0.01, 0.05}) {
        bounds::BoundsInput g;
        g.n = n;
        g.gamma = gamma;
        g.tau = tau;
        g.eps = 0.001;
        g.beta = 0.5;
        g.lambda = 64;
        CHECK(bounds::corrupted_client_mu(g).hmin <= n);
      }
    }
  }

  // strong rates: beta/2 + gamma/2 clears 1/2 + eps + 2h(tau+eps), so the
  // error-correction term decays and mu is floored by the 2*eps of the
  // privacy-amplification term
  bounds::BoundsInput strong;
  strong.n = 100000;
  strong.gamma = 0.9;
  strong.beta = 0.6;
  strong.tau = 0.01;
  strong.eps = 0.001;
  strong.lambda = 64;
  const auto scc = bounds::corrupted_client_mu(strong);
  CHECK(scc.eps_ec < std::exp2(-20.0));
  CHECK(scc.eps_pa - 2.0 * strong.eps < std::exp2(-20.0));
  CHECK(scc.mu >= 2.0 * strong.eps);
  CHECK(scc.mu == doctest::Approx(2.0 * strong.eps).epsilon(1e-6));

  // at gamma=0.6, beta=0.5 the ecc exponent is negative: the bound is
  // vacuous and reported raw
  bounds::BoundsInput weak;
  weak.n = 100000;
  weak.gamma = 0.6;
  weak.beta = 0.5;
  weak.tau = 0.01;
  weak.eps = 0.001;
  weak.lambda = 64;
  CHECK(bounds::corrupted_client_mu(weak).eps_ec > 1.0);
}

TEST_CASE("bb84 overlap constant from amplitudes") {
  CHECK(bounds::bb84_overlap_cbar() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("report clamping keeps raw values") {
  bounds::BoundsInput in;
  in.n = 10;
  in.tau = 0.3;
  in.eps = 0.1;
  in.beta = 0.5;
  in.gamma = 0.5;
  in.lambda = 64;
  in.cbar = 0.5;
  const auto rep = bounds::evaluate(in);
  CHECK(rep.eps_pa > 1.0);  // vacuous but reported raw
  CHECK(bounds::clamp01(rep.eps_pa) == 1.0);
}

TEST_CASE("parameter planning") {
  const auto weak = bounds::plan_parameters(0.5, 16, 0.05, 16);
  REQUIRE(weak.feasible);
  // the n^{-1/3} smoothing keeps tau + eps small only past a few thousand
  CHECK(weak.n <= 8192);

  const auto strong = bounds::plan_parameters(0.05, 16, 0.05, 16);
  REQUIRE(strong.feasible);
  CHECK(strong.n >= weak.n);
  CHECK(strong.eps_sec <= 0.05);
  CHECK(strong.n % 64 == 0);

  // a planned point builds a consistent ProtocolParams
  ProtocolParams::Spec spec;
  spec.lambda = weak.lambda;
  spec.k = weak.k;
  spec.alpha = weak.alpha;
  spec.tau = weak.tau;
  spec.gamma = weak.gamma;
  spec.beta = weak.beta;
  spec.dict_size = weak.dict_size;
  const ParamsPtr params = make_params(spec);
  CHECK(params->n == weak.n);
  CHECK(params->ell == weak.ell);

  CHECK_THROWS_AS(bounds::plan_parameters(0.0, 16, 0.05, 16),
                  std::invalid_argument);
}
