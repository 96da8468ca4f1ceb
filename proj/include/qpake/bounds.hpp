#pragma once

#include <cstddef>
#include <string>

namespace qpake::bounds {

// Numeric evaluation of the protocol's security bounds. Raw values can
// exceed 1 (vacuous but diagnostically useful); clamp01 is applied only for
// reporting.

struct BoundsInput {
  double n = 0;        // size of the sifting block T-bar
  double k = 0;        // qubit count (informational)
  double alpha = 0;    // test fraction (informational)
  double tau = 0;      // error threshold
  double eps = 0;      // smoothing parameter
  double lambda = 0;   // session-key bits
  double gamma = 0;    // password-code distance rate
  double beta = 0;     // code-bias rate
  double delta = 0;    // code bias fed to the ecc bound
  double cbar = 0.5;   // measurement overlap constant
};

struct BoundsReport {
  double h_tau = 0;
  double g_eps = 0;
  double eps_cor = 0;
  double eps_ec = 0;
  double eps_pa = 0;
  double eps_sec = 0;
  double hmin_honest = 0;
  double hmin_corrupted_client = 0;
  double mu_corrupted = 0;
};

double binary_entropy(double mu);

// (log2(1/cbar) - h(tau + eps) - 1/2) * n; requires tau + eps < 1/2.
double g_eps(double n, double tau, double eps, double cbar);

struct Components {
  double eps_ec = 0;
  double eps_pa = 0;
  double eps_sec = 0;
};
// eps_ec = 2^{-(g + beta n / 2)/2}, eps_pa = 2 eps + 2^{-(g - lambda)/2}.
Components eps_sec_components(const BoundsInput& in);

// n (log2(1/cbar) - h(tau + eps)) - n/2
double min_entropy_honest(const BoundsInput& in);

// h(tau + eps) * n; requires tau + eps <= 1/2.
double max_entropy_bound(const BoundsInput& in);

struct CorruptedClient {
  double hmin = 0;
  double eps_pa = 0;
  double eps_ec = 0;
  double mu = 0;
};
CorruptedClient corrupted_client_mu(const BoundsInput& in);

// Privacy amplification: 2 eps + 2^{-(hmin - ell_out)/2}.
double pa_bound(double hmin, double ell_out, double eps);
// Private error correction: delta * 2^{-(hmin - block_n)/2}.
double ecc_bound(double delta, double hmin, double block_n);

// Claim-1 pass-through: decoding-failure probability bounds key mismatch.
double eps_cor(double code_failure_prob);

// Max squared overlap of the two BB84 bases, computed from the amplitudes.
double bb84_overlap_cbar();

double clamp01(double v);

BoundsReport evaluate(const BoundsInput& in);

struct Plan {
  bool feasible = false;
  std::size_t n = 0;
  std::size_t k = 0;
  double alpha = 0.25;
  std::size_t ell = 0;
  double eps = 0;
  double gamma = 0;
  double beta = 0;
  double tau = 0;
  std::size_t lambda = 0;
  std::size_t dict_size = 0;
  double eps_sec = 0;
};

// Smallest n (granularity 64, n <= 2^24) with eps_sec <= target, under
// cbar = 1/2, eps = n^{-1/3} and the default rates.
Plan plan_parameters(double target_eps_sec, std::size_t lambda, double tau,
                     std::size_t dict_size);

inline constexpr double kDefaultGamma = 0.4;
inline constexpr double kDefaultBeta = 0.5;

}  // namespace qpake::bounds
