#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/util.hpp"

namespace aplab::sieve {

// Linear (kappa = 1) Rosser-Iwaniec sieve functions.  Closed forms
// F(s) = 2e^gamma/s on (0,3], f(s) = 2e^gamma log(s-1)/s on [2,4], continued
// upward by (sF)' = f(s-1), (sf)' = F(s-1).  Absolute error <= 1e-7.
struct LinearFF {
  double f = 0;
  double F = 0;
};
LinearFF linear_sieve_fF(double s);

// Psi_n(s) = n f(s) - (n-1) F(s)^n, the vector-sieve main-term functional.
double psi_n(int n, double s);

// Minimal s > 2 (to 1e-3) with F(s)^n < (1 + 1/(n-1)) f(s), plus the
// 3 log n / log log n guide value.
struct ThresholdResult {
  double s = 0;
  double guide = 0;
};
ThresholdResult vector_sieve_threshold(int n);

enum class WeightKind { Lower, Upper };

// Rosser-Iwaniec combinatorial weights: lambda_d = mu(d) on decreasing prime
// chains z > p_1 > ... > p_r > z0 subject to the parity-truncation conditions
// p_1...p_{m-1} p_m^3 <= D (odd m for the lower sieve, even m for the upper);
// all other lambda_d = 0.
struct SieveWeights {
  WeightKind kind = WeightKind::Lower;
  double D = 2;
  std::uint64_t z0 = 1;
  std::uint64_t z = 2;
  std::map<std::uint64_t, int> lambda;  // support -> mu(d)

  // (1 * lambda)(m) = sum_{d | m} lambda_d
  long long convolve(std::uint64_t m) const;
  // table of (1 * lambda)(m) for m in [0, M]
  std::vector<long long> convolve_table(std::uint64_t M) const;
  // P(z0, z), needed by the sandwich checks (throws if it overflows 64 bits)
  std::uint64_t prime_product() const;
};

SieveWeights beta_sieve_weights(double D, std::uint64_t z0, std::uint64_t z, WeightKind kind);

// sum_i low_i prod_{j != i} up_j - (n-1) prod_i up_i  over precomputed
// convolution values; exact integer arithmetic.
long long vector_sieve_combine(std::span<const std::pair<long long, long long>> lower_upper);

// Same, evaluated from weight pairs at the point m.
long long vector_sieve_combine(std::span<const std::pair<SieveWeights, SieveWeights>> weights,
                               std::span<const std::uint64_t> m);

// Diamond-Halberstam-Richert sieve function pair for dimension kappa >= 1,
// computed as the fixed point of the coupled Buchstab updates
//   f(s) = max(0, 1 - kappa s^-kappa Int_s^inf u^{kappa-1}(F(u-1)-1) du)
//   F(s) = min(1/sigma_kappa(s), 1 + kappa s^-kappa Int_s^inf u^{kappa-1}(1-f(u-1)) du)
// with sigma_kappa the Ankeny-Onishi function.  For kappa = 1 this reproduces
// the linear pair; for kappa > 1 the sieving limit is a numerical estimate.
struct SieveFunctionTable {
  double kappa = 1;
  double beta = 2;       // sieving limit: smallest s with f(s) > 0
  bool beta_is_estimate = false;  // true for kappa > 1
  double grid_step = 1.0 / 1024;
  double s_max = 30;
  std::vector<double> f, F;  // values at s = grid_step * index

  double f_at(double s) const;
  double F_at(double s) const;
};
SieveFunctionTable dhr_sieve_functions(double kappa, double s_max);

// beta_kappa / kappa tends to 2.445...; reported next to the estimates.
inline constexpr double kSievingLimitRatio = 2.44516;

// N(u, v; kappa, mu0, tau) = tau mu0 u - 1
//   + (kappa / f_kappa(tau v)) Int_u^v F_kappa(v (tau - 1/s)) (1 - u/s) ds/s.
// Preconditions: tau v > beta_kappa and 1/tau < u <= v.
double weighted_sieve_N(double u, double v, double kappa, double mu0, double tau,
                        const SieveFunctionTable& table);
double weighted_sieve_N(double u, double v, double kappa, double mu0, double tau);

// Simplified admissible-r thresholds.
// With xi = beta: r >= mu0 - 1 + (mu0 - kappa)(1 - 1/beta) + (kappa+1) log beta.
double weighted_r_simple(double kappa, double mu0, double beta);
// With v' = (beta - 1)/(tau - 1/u):
// r >= tau mu0 u - 1 + (kappa + (u/v') beta) log(v'/u) - kappa (1 - u/v').
double weighted_r_from_u(double kappa, double mu0, double tau, double u, double beta);

}  // namespace aplab::sieve
