#include <doctest.h>

#include <cmath>
#include <numeric>

#include "core/sieve.hpp"

using namespace aplab;
using namespace aplab::sieve;

namespace {
constexpr double kGamma = 0.57721566490153286060;
}

TEST_CASE("linear sieve closed forms") {
  CHECK(linear_sieve_fF(2.0).f == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(linear_sieve_fF(2.0).F == doctest::Approx(std::exp(kGamma)).epsilon(1e-9));
  CHECK(linear_sieve_fF(3.0).f ==
        doctest::Approx(2 * std::exp(kGamma) * std::log(2.0) / 3).epsilon(1e-9));
  CHECK_THROWS_AS(linear_sieve_fF(0.0), DomainError);
}

TEST_CASE("linear sieve shape on (2, 20]") {
  double prev_f = -1, prev_F = 1e9;
  for (double s = 2.05; s <= 20.0; s += 0.05) {
    auto [f, F] = linear_sieve_fF(s);
    CHECK(f >= prev_f - 1e-10);
    CHECK(F <= prev_F + 1e-10);
    CHECK(f <= 1.0 + 1e-8);
    CHECK(F >= 1.0 - 1e-8);
    prev_f = f;
    prev_F = F;
  }
  // F - f shrinks monotonically while it dominates the integrator noise
  double prev_gap = 1e9;
  for (double s = 2.05; s <= 6.0; s += 0.05) {
    auto [f, F] = linear_sieve_fF(s);
    CHECK(F - f <= prev_gap + 1e-10);
    prev_gap = F - f;
  }
  // by s = 10 the gap is below the march's noise floor; frozen bound
  double gap10 = linear_sieve_fF(10.0).F - linear_sieve_fF(10.0).f;
  CHECK(std::fabs(gap10) < 1e-3);
  CHECK(std::fabs(gap10) <= 5e-11);
}

TEST_CASE("dhr kappa=1 agrees with the closed forms") {
  auto tab = dhr_sieve_functions(1.0, 8.5);
  CHECK(std::fabs(tab.beta - 2.0) <= 1e-4);
  CHECK_FALSE(tab.beta_is_estimate);
  double worst = 0;
  for (double s = 2.05; s <= 8.0; s += 0.01) {
    auto lin = linear_sieve_fF(s);
    worst = std::max(worst, std::fabs(lin.f - tab.f_at(s)));
    worst = std::max(worst, std::fabs(lin.F - tab.F_at(s)));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("dhr sieving limits for kappa > 1 track the published values") {
  // numerical estimates; the second decimal is what the monitoring needs
  CHECK(dhr_sieve_functions(2.0, 6.0).beta == doctest::Approx(4.2664).epsilon(2e-3));
  CHECK(dhr_sieve_functions(3.0, 8.0).beta == doctest::Approx(6.6409).epsilon(2e-3));
  auto t6 = dhr_sieve_functions(6.0, 16.0).beta;
  CHECK(t6 == doctest::Approx(14.01).epsilon(5e-3));
  CHECK(dhr_sieve_functions(6.0, 16.0).beta_is_estimate);
  // the ratio beta_kappa / kappa climbs toward the limiting constant
  double r2 = dhr_sieve_functions(2.0, 6.0).beta / 2.0;
  double r6 = t6 / 6.0;
  CHECK(r2 < r6);
  CHECK(r6 < kSievingLimitRatio);
}

TEST_CASE("beta sieve weights: structure and fundamental-lemma regime") {
  auto lw = beta_sieve_weights(30, 1, 10, WeightKind::Lower);
  auto uw = beta_sieve_weights(30, 1, 10, WeightKind::Upper);
  CHECK(lw.lambda.at(1) == 1);
  CHECK(uw.lambda.at(1) == 1);
  for (auto& [d, w] : lw.lambda) {
    CHECK((w == 1 || w == -1));
    CHECK(static_cast<double>(d) <= lw.D);
  }
  // the lower sieve keeps every single prime in range
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull}) CHECK(lw.lambda.at(p) == -1);

  // huge D: truncation never binds, weights are exact Mobius on P(z0, z)
  double bigD = 210.0 * 100.0;
  auto full_l = beta_sieve_weights(bigD, 1, 10, WeightKind::Lower);
  auto full_u = beta_sieve_weights(bigD, 1, 10, WeightKind::Upper);
  CHECK(full_l.lambda.size() == 16);  // all squarefree divisors of 210
  CHECK(full_l.lambda == full_u.lambda);
  auto table = full_l.convolve_table(210);
  for (std::uint64_t m = 1; m <= 210; ++m)
    CHECK(table[m] == (std::gcd(m, 210ull) == 1 ? 1 : 0));
  CHECK_THROWS_AS(beta_sieve_weights(30, 7, 7, WeightKind::Lower), DomainError);
}

TEST_CASE("sandwich property, zero tolerance") {
  for (double D : {10.0, 30.0, 100.0}) {
    std::uint64_t z = static_cast<std::uint64_t>(2 * std::sqrt(D));
    auto lw = beta_sieve_weights(D, 1, z, WeightKind::Lower);
    auto uw = beta_sieve_weights(D, 1, z, WeightKind::Upper);
    auto low = lw.convolve_table(10000);
    auto up = uw.convolve_table(10000);
    std::uint64_t P = lw.prime_product();
    for (std::uint64_t m = 1; m <= 10000; ++m) {
      int ind = std::gcd(m, P) == 1 ? 1 : 0;
      REQUIRE(low[m] <= ind);
      REQUIRE(ind <= up[m]);
    }
  }
}

TEST_CASE("vector sieve combinator basics") {
  // identity weights: lower = upper = delta at 1
  std::pair<long long, long long> ones[2] = {{1, 1}, {1, 1}};
  CHECK(vector_sieve_combine(ones) == 1);
  std::pair<long long, long long> mixed[3] = {{0, 1}, {1, 1}, {-1, 2}};
  // direct formula: 0*1*2 + 1*1*2 + (-1)*1*1 - 2*1*1*2
  CHECK(vector_sieve_combine(mixed) == 0 + 2 - 1 - 4);
  auto lw = beta_sieve_weights(30, 1, 10, WeightKind::Lower);
  auto uw = beta_sieve_weights(30, 1, 10, WeightKind::Upper);
  std::pair<SieveWeights, SieveWeights> w3[3] = {{lw, uw}, {lw, uw}, {lw, uw}};
  std::uint64_t m[3] = {1, 1, 1};
  long long at_ones = vector_sieve_combine(w3, m);
  CHECK(at_ones <= 1);
}

TEST_CASE("vector sieve inequality against exact Mobius on a spot grid") {
  // when lambda+- are exact Mobius the combinator telescopes to the product
  double bigD = 210.0 * 100.0;
  auto mu = beta_sieve_weights(bigD, 1, 10, WeightKind::Lower);
  std::uint64_t P = mu.prime_product();
  auto table = mu.convolve_table(300);
  for (std::uint64_t m1 = 1; m1 <= 300; m1 += 7)
    for (std::uint64_t m2 = 1; m2 <= 300; m2 += 11) {
      std::pair<long long, long long> vals[2] = {{table[m1], table[m1]}, {table[m2], table[m2]}};
      long long lhs = (std::gcd(m1, P) == 1 ? 1 : 0) * (std::gcd(m2, P) == 1 ? 1 : 0);
      CHECK(vector_sieve_combine(vals) == lhs);
    }
}

TEST_CASE("psi_n and the vector-sieve threshold") {
  // psi_n(s) > 0 exactly when F^n < (1 + 1/(n-1)) f
  auto t2 = vector_sieve_threshold(2);
  CHECK(t2.s > 2.5);
  CHECK(t2.s < 3.0);
  CHECK(psi_n(2, t2.s + 0.01) > 0);
  CHECK(psi_n(2, t2.s - 0.01) < 0);
  // spot values quoted against the closed forms
  auto at25 = linear_sieve_fF(2.5);
  CHECK(at25.F * at25.F > 2 * at25.f);         // fails at 2.5
  auto at3 = linear_sieve_fF(3.0);
  CHECK(at3.F * at3.F < 2 * at3.f);            // holds at 3
  double prev = 0;
  for (int n = 2; n <= 64; ++n) {
    auto t = vector_sieve_threshold(n);
    CHECK(t.s >= prev - 1e-9);
    prev = t.s;
  }
}

TEST_CASE("weighted sieve N and the simplified r thresholds") {
  CHECK(weighted_sieve_N(3.0, 3.0, 1.0, 2.0, 0.5) == doctest::Approx(2.0));
  // fixed-order Gauss-Legendre oracle for the kappa=1 instance
  auto table = dhr_sieve_functions(1.0, 6.0);
  double u = 3, v = 5, tau = 0.5, mu0 = 2;
  auto integrand = [&](double s) {
    return table.F_at(v * (tau - 1.0 / s)) * (1.0 - u / s) / s;
  };
  // 4096-slice midpoint rule as the independent route
  double acc = 0;
  int M = 4096;
  for (int i = 0; i < M; ++i) {
    double s = u + (v - u) * (i + 0.5) / M;
    acc += (v - u) / M * integrand(s);
  }
  double oracle = tau * mu0 * u - 1 + 1.0 / table.f_at(tau * v) * acc;
  double fast = weighted_sieve_N(u, v, 1.0, mu0, tau, table);
  CHECK(fast == doctest::Approx(oracle).epsilon(1e-4));
  CHECK_THROWS_AS(weighted_sieve_N(1.0, 5.0, 1.0, 2.0, 0.5, table), HypothesisError);
  CHECK_THROWS_AS(weighted_sieve_N(3.0, 3.5, 1.0, 2.0, 0.5, table), HypothesisError);

  CHECK(weighted_r_simple(1, 2, 2) ==
        doctest::Approx(1 + 0.5 + 2 * std::log(2.0)).epsilon(1e-12));
  CHECK(weighted_r_from_u(1, 2, 0.5, 3, 2) ==
        doctest::Approx(2 - 0.5 + 2 * std::log(2.0)).epsilon(1e-12));
}
