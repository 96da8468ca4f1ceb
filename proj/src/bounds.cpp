#include "qpake/bounds.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qpake::bounds {

double binary_entropy(double mu) {
  if (mu < 0.0 || mu > 1.0)
    throw std::invalid_argument("binary_entropy: argument outside [0,1]");
  if (mu == 0.0 || mu == 1.0) return 0.0;
  return -(mu * std::log2(mu) + (1.0 - mu) * std::log2(1.0 - mu));
}

double g_eps(double n, double tau, double eps, double cbar) {
  if (tau + eps >= 0.5)
    throw std::invalid_argument("g_eps: tau + eps must stay below 1/2");
  if (cbar <= 0.0 || cbar >= 1.0)
    throw std::invalid_argument("g_eps: cbar outside (0,1)");
  return (std::log2(1.0 / cbar) - binary_entropy(tau + eps) - 0.5) * n;
}

Components eps_sec_components(const BoundsInput& in) {
  const double g = g_eps(in.n, in.tau, in.eps, in.cbar);
  Components out;
  out.eps_ec = std::exp2(-0.5 * (g + in.beta * in.n / 2.0));
  out.eps_pa = 2.0 * in.eps + std::exp2(-0.5 * (g - in.lambda));
  out.eps_sec = out.eps_ec + out.eps_pa;
  return out;
}

double min_entropy_honest(const BoundsInput& in) {
  const double q = std::log2(1.0 / in.cbar) - binary_entropy(in.tau + in.eps);
  return in.n * q - in.n / 2.0;
}

double max_entropy_bound(const BoundsInput& in) {
  if (in.tau + in.eps > 0.5)
    throw std::invalid_argument("max_entropy_bound: tau + eps above 1/2");
  return binary_entropy(in.tau + in.eps) * in.n;
}

CorruptedClient corrupted_client_mu(const BoundsInput& in) {
  const double h2 = binary_entropy(in.tau + in.eps);
  CorruptedClient out;
  out.hmin = (in.gamma / 2.0 - in.eps - 2.0 * h2) * in.n;
  out.eps_pa = 2.0 * in.eps + std::exp2(-0.5 * (out.hmin - in.lambda));
  out.eps_ec = std::exp2(
      -0.5 * (in.beta / 2.0 + in.gamma / 2.0 - in.eps - 2.0 * h2 - 0.5) * in.n);
  out.mu = out.eps_pa + out.eps_ec;
  return out;
}

double pa_bound(double hmin, double ell_out, double eps) {
  return 2.0 * eps + std::exp2(-0.5 * (hmin - ell_out));
}

double ecc_bound(double delta, double hmin, double block_n) {
  return delta * std::exp2(-0.5 * (hmin - block_n));
}

double eps_cor(double code_failure_prob) {
  if (code_failure_prob < 0.0 || code_failure_prob > 1.0)
    throw std::invalid_argument("eps_cor: probability outside [0,1]");
  return code_failure_prob;
}

double bb84_overlap_cbar() {
  // |<e_i | f_j>|^2 for the computational and Hadamard bases.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::complex<double> plus_basis[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  const std::complex<double> times_basis[2][2] = {{inv_sqrt2, inv_sqrt2},
                                                  {inv_sqrt2, -inv_sqrt2}};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      std::complex<double> ip = 0.0;
      for (int a = 0; a < 2; ++a)
        ip += std::conj(plus_basis[i][a]) * times_basis[j][a];
      worst = std::max(worst, std::norm(ip));
    }
  return worst;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

BoundsReport evaluate(const BoundsInput& in) {
  BoundsReport r;
  r.h_tau = binary_entropy(in.tau + in.eps);
  r.g_eps = g_eps(in.n, in.tau, in.eps, in.cbar);
  const Components c = eps_sec_components(in);
  r.eps_ec = c.eps_ec;
  r.eps_pa = c.eps_pa;
  r.eps_sec = c.eps_sec;
  r.eps_cor = eps_cor(clamp01(in.delta));
  r.hmin_honest = min_entropy_honest(in);
  const CorruptedClient cc = corrupted_client_mu(in);
  r.hmin_corrupted_client = cc.hmin;
  r.mu_corrupted = cc.mu;
  return r;
}

Plan plan_parameters(double target_eps_sec, std::size_t lambda, double tau,
                     std::size_t dict_size) {
  if (target_eps_sec <= 0.0 || target_eps_sec >= 1.0)
    throw std::invalid_argument("plan_parameters: target outside (0,1)");
  if (tau <= 0.0 || tau >= 0.5)
    throw std::invalid_argument("plan_parameters: tau outside (0, 1/2)");
  if (dict_size == 0)
    throw std::invalid_argument("plan_parameters: empty dictionary");

  constexpr std::size_t kGranularity = 64;
  constexpr std::size_t kMaxN = std::size_t{1} << 24;

  auto eval = [&](std::size_t n) -> double {
    BoundsInput in;
    in.n = static_cast<double>(n);
    in.tau = tau;
    in.eps = std::pow(static_cast<double>(n), -1.0 / 3.0);
    in.lambda = static_cast<double>(lambda);
    in.gamma = kDefaultGamma;
    in.beta = kDefaultBeta;
    in.cbar = 0.5;
    if (in.tau + in.eps >= 0.5) return 2.0;  // invalid regime, keep searching
    return eps_sec_components(in).eps_sec;
  };

  // eps_sec is nonincreasing in n here, so binary search over the grid.
  std::size_t lo = 1, hi = kMaxN / kGranularity;
  if (eval(hi * kGranularity) > target_eps_sec) return {};  // infeasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (eval(mid * kGranularity) <= target_eps_sec)
      hi = mid;
    else
      lo = mid + 1;
  }

  Plan plan;
  plan.feasible = true;
  plan.n = lo * kGranularity;
  plan.alpha = 0.25;
  plan.k = 2 * plan.n;  // n = k(1 - 2 alpha) with alpha = 1/4
  plan.ell = (plan.n + 1) / 2;
  plan.eps = std::pow(static_cast<double>(plan.n), -1.0 / 3.0);
  plan.gamma = kDefaultGamma;
  plan.beta = kDefaultBeta;
  plan.tau = tau;
  plan.lambda = lambda;
  plan.dict_size = dict_size;
  plan.eps_sec = eval(plan.n);
  return plan;
}

}  // namespace qpake::bounds
