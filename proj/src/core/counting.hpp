#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/constants.hpp"
#include "core/forms.hpp"
#include "core/util.hpp"

namespace aplab::counting {

// Product weight: either the canonical bump exp(-1/(1-(t/h)^2)) on (-h, h)
// around per-coordinate centers, or the indicator of (0, B]^n.
struct SmoothWeight {
  enum class Kind { Bump, Indicator } kind = Kind::Indicator;
  std::vector<double> center;  // per-coordinate, bump only
  double h = 0.25;
  double w0 = std::exp(-1.0);  // sup of the bump profile

  static SmoothWeight indicator();
  static SmoothWeight bump(std::vector<double> center, double h);

  double profile(double t) const;  // 1-d bump value at offset t (bump only)
  // weight of the integer point x in a box of scale B (product over axes)
  double at(std::span<const std::int64_t> x, double B) const;
  double at_real(std::span<const double> u, std::span<const double> P) const;
  double mass1d() const;  // integral of the 1-d factor profile over its support
};

struct CountConfig {
  double B = 10;
  std::uint64_t W = 1;
  std::vector<std::int64_t> y;   // residues mod W; empty = zero vector
  double z = 0;                  // roughness cutoff: keep x iff p | x1...xn => p > z
  std::vector<std::uint64_t> k;  // divisor constraints k_i | x_i; empty = all ones
  SmoothWeight weight = SmoothWeight::indicator();
  enum class Mitm { Auto, On, Off } mitm = Mitm::Auto;
};

// All x in (0, B]^n with f(x) = 0 passing the configured filters, in
// lexicographic order.  Meet-in-the-middle hash join is used when the single
// equation splits over disjoint variable sets.
std::vector<std::vector<std::int64_t>> enumerate_zeros(const forms::FormSystem& f,
                                                       const CountConfig& config);

// N_w: weighted count over the same solution set, compensated accumulation.
double weighted_count(const forms::FormSystem& f, const CountConfig& config);

// S_w(alpha) = sum_y prod_i w(y_i/P_i - c_i) e(alpha . g(y)); alpha reduced
// mod 1 up front so integer shifts are bit-exact no-ops.
std::complex<double> exp_sum_Sw(const forms::FormSystem& f, std::span<const double> alpha,
                                std::span<const double> P, const SmoothWeight& weight);

// I_w(gamma) (natural = false) or its homogenized variant I_w-natural.
// Tensor Gauss-Legendre (64 nodes/axis) for n <= 6, Halton quasi-Monte Carlo
// beyond; the .error field reports the QMC standard error (0 for tensor).
struct Integral {
  std::complex<double> value;
  double error = 0.0;
};
Integral oscillatory_Iw(const forms::FormSystem& f, std::span<const double> gamma,
                        std::span<const double> P, const SmoothWeight& weight, bool natural);

// Major-arc comparison |S_w(a/q + beta) - q^{-n} S_{a,q} I_w(beta)|.
struct MajorArcResidual {
  std::complex<double> s_w;
  std::complex<double> approx;
  double absolute = 0;
  double relative = 0;       // against |S_w| + 1
  bool hypothesis_ok = true;  // the lemma-shaped smallness conditions
};
MajorArcResidual major_arc_residual(const forms::FormSystem& f, std::span<const std::int64_t> a,
                                    std::uint64_t q, std::span<const double> beta, double B,
                                    const SmoothWeight& weight);

// Truncated singular integral, two modes that must agree on fixtures:
// gamma-truncation int_{|gamma|<=Q} I_w-natural(gamma) d gamma at unit scale,
// and the slab limit (2 eps)^{-R} vol{u in supp w : |f(u)| < eps}.
struct JwResult {
  double value = 0;
  double error = 0;  // combined quadrature/sampling error estimate
};
JwResult singular_integral_gamma(const forms::FormSystem& f, const SmoothWeight& weight,
                                 double Q);
JwResult singular_integral_slab(const forms::FormSystem& f, const SmoothWeight& weight,
                                double eps, std::uint64_t samples);
// |a.value - b.value| <= 3 (a.error + b.error)
bool jw_modes_agree(const JwResult& a, const JwResult& b);

struct PredictionReport {
  double singular_series = 0;   // truncated at Q
  double singular_integral = 0; // gamma-truncated, unit scale
  double varpi_over_k = 1;      // varpi(k) / k~ factor (1 when k = 1)
  double main_term = 0;         // S(Q) J_w varpi(k)/k~ B^(n - Rd)
  double error_budget = 0;      // E(B; k) from the eps-matrix
  double measured = 0;          // weighted count
  double ratio = 0;             // measured / main_term
};
PredictionReport predict_and_compare(const forms::FormSystem& f,
                                     const forms::RankCertificate& cert,
                                     const CountConfig& config, std::uint64_t Q);

// E(B; m) = sum_i B^{-eps_{i,1}} |m|^{eps_{i,2}} min(m_j)^{eps_{i,3}}.
double error_budget_E(const constants::EpsMatrix& eps, double B,
                      std::span<const std::uint64_t> m);

// Smallest W = prod_{p <= z0} p^m (z0 <= 7, m <= 2) admitting y in [1, W]^n
// with gcd(y1...yn, W) = 1 and f(y) = 0 mod W.
struct WTrick {
  std::uint64_t W = 1;
  std::vector<std::int64_t> y;
};
std::optional<WTrick> find_w_trick(const forms::FormSystem& f);

// Non-singular real zero in (0,1)^n by seeded random search + Gauss-Newton,
// with a gradient-rank check; throws DomainError when the search fails.
std::vector<double> find_real_point(const forms::FormSystem& f);
// Largest dyadic eta <= min_i min(zeta_i/2, (1-zeta_i)/2) / 2.
double bump_eta(std::span<const double> zeta);
// Bump centers zeta_i / (2 |zeta|_inf).
std::vector<double> bump_center(std::span<const double> zeta);

}  // namespace aplab::counting
