#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/forms.hpp"
#include "core/util.hpp"

namespace aplab::local {

// N_j(p^l) = #{x mod p^l : p^l | f(p^{j_1} x_1, ..., p^{j_n} x_n)}, exact.
// Strategy: nested enumeration with running partial sums and early pruning,
// or a value-histogram convolution when the system splits additively (R = 1).
Int count_solutions_mod(const forms::FormSystem& f, std::uint64_t p, int level,
                        std::span<const int> j);

// Force a specific strategy (used by the cross-route oracles).
enum class CountStrategy { Auto, Direct, Split };
Int count_solutions_mod(const forms::FormSystem& f, std::uint64_t p, int level,
                        std::span<const int> j, CountStrategy strategy);

Rat sigma_p_approx(const forms::FormSystem& f, std::uint64_t p, int level);
Rat delta_approx(const forms::FormSystem& f, std::uint64_t p, std::span<const int> j, int level);
// delta / sigma; throws DomainError on a local obstruction (sigma = 0).
Rat varpi_approx(const forms::FormSystem& f, std::uint64_t p, std::span<const int> j, int level);

// Multiplicative extension of varpi to divisor vectors k (per-prime factors).
Rat varpi_of_vector(const forms::FormSystem& f, std::span<const std::uint64_t> k, int level);

// Level-l approximant of the sieve density g(p), computed two ways and
// compared exactly:
//   (i)  inclusion-exclusion over nonempty subsets S of coordinates,
//        sum (-1)^(|S|+1) delta(e_S) / p^|S|, divided by sigma;
//   (ii) direct count of solutions mod p^l with p | x_1...x_n, normalized
//        and divided by sigma.
// Raises IdentityError if the two routes disagree.
Rat g_approx(const forms::FormSystem& f, std::uint64_t p, int level);

// Test hook: lets the oracle suite prove that a seeded defect is caught.
enum class TestMutation { None, FlipInclusionExclusionSign };
void set_test_mutation(TestMutation m);

struct ScalingReport {
  bool level_identity_ok = false;  // N_{(1..1)}(p^l) == p^{nd} N_0(p^{l-d})
  Int lhs, rhs;
  int pairs_checked = 0;  // monotone comparisons h >= j
  bool monotone_ok = false;
};
// Requires level > d.
ScalingReport delta_scaling_checks(const forms::FormSystem& f, std::uint64_t p, int level);

// Per (p, level): exact counts and density approximants for j = 0 and the
// coordinate singletons, the sigma/g approximants, plus obstruction flags.
struct LocalDensityTable {
  std::uint64_t p = 0;
  int level = 1;
  Int n0;
  Rat sigma;
  bool obstruction = false;  // sigma approximant vanished
  std::map<std::vector<int>, Int> counts;
  std::map<std::vector<int>, Rat> delta;
  std::map<std::vector<int>, Rat> varpi;
  Rat g;
  bool g_defined = false;
};
LocalDensityTable build_density_table(const forms::FormSystem& f, std::uint64_t p, int level);
std::string render_table(const LocalDensityTable& t);

struct ExpSumValue {
  std::vector<std::int64_t> a;
  std::uint64_t q = 1;
  std::complex<double> value;
};

// S_{a,q} = sum_{y mod q} e(a . g(y) / q) by direct summation.
ExpSumValue gauss_sum(const forms::FormSystem& f, std::span<const std::int64_t> a,
                      std::uint64_t q);

// Histogram of residue vectors of f mod q. Index encodes the R residues in
// base q; size q^R.
std::vector<Int> value_histogram(const forms::FormSystem& f, std::uint64_t q);

// A_q = sum over primitive a mod q of S_{a,q}; exact via Mobius over
// divisors of q (an integer), and in floating point via complex sums.
Int primitive_sum_exact(const forms::FormSystem& f, std::uint64_t q);
std::complex<double> primitive_sum_complex(const forms::FormSystem& f, std::uint64_t q);

struct SeriesTerm {
  std::uint64_t q;
  Rat exact;     // q^{-n} A_q as an exact rational
  double value;  // complex-route real part
};
struct SingularSeries {
  double value = 0.0;           // complex-summed, imaginary part dropped
  double imag_magnitude = 0.0;  // must stay below 1e-9 * (|Re| + 1)
  Rat exact;                    // sum of exact terms
  std::vector<SeriesTerm> terms;
};
SingularSeries truncated_singular_series(const forms::FormSystem& f, std::uint64_t Q);

// Orthogonality at a prime: sum_{t<=l} p^{-tn} A_{p^t} = p^{-l(n-R)} N_0(p^l).
struct OrthogonalityReport {
  std::uint64_t p;
  int level;
  bool integer_ok = false;    // exact equality of the all-integer route
  double complex_rel = 0.0;   // relative error of the complex route
  Rat lhs_exact, rhs_exact;
};
OrthogonalityReport orthogonality_check(const forms::FormSystem& f, std::uint64_t p, int level);

}  // namespace aplab::local
