#pragma once

#include <array>
#include <optional>
#include <string>

#include "core/forms.hpp"
#include "core/util.hpp"

namespace aplab::constants {

// Column i holds the vector (eps_{i,1}, eps_{i,2}, eps_{i,3}).
struct EpsMatrix {
  std::array<std::array<Rat, 3>, 3> col;  // col[i-1][j-1] = eps_{i,j}
  const Rat& eps(int i, int j) const { return col[i - 1][j - 1]; }
};

// Upsilon = d B / ((d-1) 2^(d-1)) * (d - 1/R) + R
Rat compute_upsilon(int birch_rank, int d, int R);

// rho = 4 R (R+1) d (1 + d/(2R(d-1)+1) + 3Rd/(3R(d-1)+1))
Rat compute_rho(int d, int R);

EpsMatrix compute_eps_matrix(const Rat& K, int d, int R);

// theta' = min{ 1/rho, (eps_{i,1} - dR)/(eps_{i,2} + eps_{i,3}) },
// terms with zero denominator are omitted (treated as +infinity).
Rat compute_theta_prime(const Rat& K, int d, int R);

struct WeightedParams {
  Rat u_dd;        // u''
  Rat u_hat;       // u^
  double c_n = 0;  // beta_n / n
  double v_hat = 0;
  double r0 = 0;
};

// Needs theta' > 1/u_hat; throws HypothesisError otherwise.
WeightedParams compute_weighted_params(int n, int d, int R, const Rat& K, double beta_n);

struct TheoremFlags {
  bool main_vector = false;   // logarithmic saturation route
  bool rosser_iwaniec = false;  // K > R(R+1)(d-1)
  bool weighted = false;      // weighted-sieve route
  bool hypersurface = false;  // nonsingular hypersurface corollary (d >= 5)
};

TheoremFlags check_theorem_hypotheses(int n, int d, int R, const forms::RankCertificate& cert);

// 2^8 ceil(n^(3/2)) d (d+1) R^2 (R+1) (R+2): the prior-art u-threshold.
Int comparison_u_threshold(int n, int d, int R);

// Every explicit constant for a given instance, exact where the inputs are.
struct ConstantBundle {
  int n = 0, d = 0, R = 0, birch_rank = 0;
  Rat K, theta;
  Rat upsilon, rho, theta_prime;
  EpsMatrix eps;
  std::optional<WeightedParams> weighted;  // set when beta_n is supplied
  std::string weighted_error;              // reason when the params are undefined
  TheoremFlags flags;
  Int comparison_threshold;
};

ConstantBundle compute_bundle(int n, int d, int R, int birch_rank,
                              std::optional<double> beta_n);

// Line-oriented key=value report; exact rationals as num/den plus decimals.
std::string render_report(const ConstantBundle& b);
std::string render_report_json(const ConstantBundle& b);

}  // namespace aplab::constants
