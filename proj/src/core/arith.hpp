#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/util.hpp"

namespace aplab::arith {

// Primes up to 10^6, built once and shared.
const std::vector<std::uint32_t>& prime_table();

struct FactorizationView {
  std::uint64_t m = 1;
  std::vector<std::pair<std::uint64_t, int>> factors;  // (prime, multiplicity), increasing
};

// Trial division against the table, Pollard rho fallback for leftovers.
FactorizationView factorize(std::uint64_t m);

std::uint64_t least_prime_factor(std::uint64_t m);  // P^-(1) = 1
int omega_count(std::uint64_t m);                   // Omega, with multiplicity
int nu_count(std::uint64_t m);                      // nu, distinct
std::uint64_t radical(std::uint64_t m);

bool is_prime(std::uint64_t m);
std::uint64_t mobius_sign(std::uint64_t m, bool& squarefree);

// Primitive integer vector representing a rational projective point, with the
// first nonzero coordinate positive.
struct ProjectivePoint {
  std::vector<std::int64_t> coords;
};
ProjectivePoint make_projective(std::span<const std::int64_t> coords);

// Saturation level of a point: max over coordinates |x_i| != 0 and primes
// p | x_i of log|x_i| / log p.  The float value is advisory; order comparisons
// against rationals are exact (integer power inequalities underneath).
struct SaturationLevel {
  double value = 0.0;             // 0 when every coordinate is a unit
  std::uint64_t witness_abs = 1;  // |x_i| attaining the max
  std::uint64_t witness_p = 1;    // its least prime factor
};
SaturationLevel saturation_L(const ProjectivePoint& x);

// Exact tests "L(x) <= u" and "L(x) >= u" for rational u >= 0.
bool saturation_leq(const ProjectivePoint& x, const Rat& u);
bool saturation_geq(const ProjectivePoint& x, const Rat& u);

// Total prime-divisor count over the coordinates (all assumed nonzero).
int omega_projective(const ProjectivePoint& x);

// Buchstab function: w(u) = 1/u on [1,2], continued by (u w(u))' = w(u-1).
// Piecewise analytic through u = 3, RK4 with dense history beyond.
// Absolute error <= 1e-8 on [1, 64].
double buchstab_w(double u);

// (k-1)! u w(u) / (log log x)^(k-1), the density ratio of rough numbers
// against k-almost-primes.
double rough_vs_almostprime_ratio(double x, int k, double u);

}  // namespace aplab::arith
