#include <doctest.h>

#include "core/constants.hpp"
#include "support/expr_eval.hpp"

using namespace aplab;
using namespace aplab::constants;

namespace {

std::map<std::string, Rat> vars(int d, int R, Rat K = Rat(0), int B = 0, int n = 0) {
  return {{"d", Rat(d)}, {"R", Rat(R)}, {"K", K}, {"B", Rat(B)}, {"n", Rat(n)}};
}

// The three ratio terms of theta', omitting zero denominators; the evaluator
// recomputes each eps entry from its own formula string.
Rat theta_prime_by_expr(Rat K, int d, int R) {
  auto v = vars(d, R, K);
  Rat rho = expreval::eval(
      "4*R*(R+1)*d*(1 + d/(2*R*(d-1)+1) + 3*R*d/(3*R*(d-1)+1))", v);
  Rat e11 = expreval::eval("R*d + 1/2", v);
  Rat e21 = expreval::eval("K", v);
  Rat e31 = expreval::eval("(K - R*(R+1)*(d-1))/(4*R*(R+1)*d) + R*d", v);
  Rat e12 = expreval::eval("R*d + 1/2", v);
  Rat e22 = expreval::eval("K", v);
  Rat e32 = expreval::eval(
      "d*(K - R^2*(d-1))/(2*R*(d-1)) + R + K + 2*d*K/(d-1) - R*d", v);
  Rat e13(0), e23(0);
  Rat e33 = expreval::eval("(K - R*(R+1)*(d-1))/(4*R*(R+1)*d) - R - K + R*d", v);
  if (e33 < 0) e33 = 0;
  Rat best = Rat(1) / rho;
  auto consider = [&](Rat num, Rat den) {
    if (den == 0) return;
    Rat t = num / den;
    if (t < best) best = t;
  };
  consider(e11 - Rat(d * R), e12 + e13);
  consider(e21 - Rat(d * R), e22 + e23);
  consider(e31 - Rat(d * R), e32 + e33);
  return best;
}

}  // namespace

TEST_CASE("Upsilon examples, exact") {
  CHECK(compute_upsilon(6, 2, 1) == 7);
  CHECK(compute_upsilon(0, 2, 1) == 1);
  CHECK(compute_upsilon(0, 3, 5) == 5);
  CHECK(compute_upsilon(2, 2, 2) == 5);
  CHECK_THROWS_AS(compute_upsilon(6, 1, 1), DomainError);
}

TEST_CASE("rho examples, exact") {
  CHECK(compute_rho(2, 1) == Rat(152, 3));
  CHECK(compute_rho(2, 2) == Rat(5232, 35));
  for (int d = 2; d <= 5; ++d)
    for (int R = 1; R <= 3; ++R) CHECK(compute_rho(d, R) > Rat(4 * R * (R + 1) * d));
}

TEST_CASE("eps matrix at K=3, d=2, R=1") {
  auto m = compute_eps_matrix(Rat(3), 2, 1);
  CHECK(m.eps(1, 1) == Rat(5, 2));
  CHECK(m.eps(1, 2) == Rat(5, 2));
  CHECK(m.eps(1, 3) == 0);
  CHECK(m.eps(2, 1) == 3);
  CHECK(m.eps(2, 2) == 3);
  CHECK(m.eps(2, 3) == 0);
  CHECK(m.eps(3, 1) == Rat(33, 16));
  CHECK(m.eps(3, 2) == 16);
  CHECK(m.eps(3, 3) == 0);  // max{0, 1/16 - 1 - 3 + 2} clips to zero
}

TEST_CASE("eps matrix structural facts") {
  for (int d = 2; d <= 4; ++d)
    for (int R = 1; R <= 3; ++R)
      for (int Knum = 1; Knum <= 12; ++Knum) {
        Rat K(Knum, 2);
        auto m = compute_eps_matrix(K, d, R);
        CHECK(m.eps(1, 1) == Rat(R * d) + Rat(1, 2));
        CHECK(m.eps(1, 2) == Rat(R * d) + Rat(1, 2));
        CHECK(m.eps(1, 3) == 0);
        CHECK(m.eps(2, 3) == 0);
        CHECK(m.eps(3, 3) >= 0);
      }
}

TEST_CASE("theta_prime examples") {
  CHECK(compute_theta_prime(Rat(3), 2, 1) == Rat(1, 256));
  CHECK(compute_theta_prime(Rat(2), 2, 1) == 0);
  for (int K = 1; K <= 8; ++K)
    CHECK(compute_theta_prime(Rat(K), 2, 1) <= Rat(1) / compute_rho(2, 1));
}

TEST_CASE("theta_prime cross-checked against the expression evaluator") {
  for (int d = 2; d <= 4; ++d)
    for (int R = 1; R <= 2; ++R)
      for (int Knum = 1; Knum <= 16; ++Knum) {
        Rat K(Knum, 2);
        CHECK(compute_theta_prime(K, d, R) == theta_prime_by_expr(K, d, R));
      }
}

TEST_CASE("theta_prime nondecreasing in K on a grid") {
  for (int d = 2; d <= 3; ++d)
    for (int R = 1; R <= 2; ++R) {
      Rat prev(-1);
      for (int K = R * (R + 1) * (d - 1) + 1; K <= 20; ++K) {
        Rat cur = compute_theta_prime(Rat(K), d, R);
        CHECK(cur >= prev);
        prev = cur;
      }
    }
}

TEST_CASE("weighted parameters at the flagship instance") {
  auto wp = compute_weighted_params(6, 2, 1, Rat(3), 15.0);
  CHECK(wp.u_dd == 1984);
  CHECK(wp.u_hat == 1984);
  CHECK(wp.c_n == doctest::Approx(2.5));
  // v^ = 14 / (1/256 - 1/1984) = 111104/27
  CHECK(wp.v_hat == doctest::Approx(111104.0 / 27.0).epsilon(1e-12));
  CHECK(wp.r0 > 0);
  CHECK(wp.v_hat > wp.u_hat.get_d());
}

TEST_CASE("weighted parameters via the expression evaluator") {
  auto wp = compute_weighted_params(6, 2, 1, Rat(3), 15.0);
  auto v = vars(2, 1, Rat(3), 6, 6);
  Rat u1 = expreval::eval("(n - R*d)*(2*(R*d + 1/2) - 1)/((R*d + 1/2) - R*d)", v);
  Rat u2 = expreval::eval("(n - R*d)*(2*K - 1)/(K - R*d)", v);
  Rat u3 = expreval::eval(
      "(n - R*d)*(2*(d*(K - R^2*(d-1))/(2*R*(d-1)) + R + K + 2*d*K/(d-1) - R*d) - 1)"
      "/((K - R*(R+1)*(d-1))/(4*R*(R+1)*d) + R*d - R*d)",
      v);
  Rat udd = std::max(u1, std::max(u2, u3));
  CHECK(wp.u_dd == udd);
  Rat inv_theta = Rat(1) / theta_prime_by_expr(Rat(3), 2, 1);
  Rat two_rho = expreval::eval(
      "2*(n - R*d)*4*R*(R+1)*d*(1 + d/(2*R*(d-1)+1) + 3*R*d/(3*R*(d-1)+1))", v);
  Rat uhat = std::max(udd, std::max(inv_theta, two_rho));
  CHECK(wp.u_hat == uhat);
}

TEST_CASE("weighted parameters fail loudly when theta' vanishes") {
  CHECK_THROWS_AS(compute_weighted_params(6, 2, 1, Rat(2), 15.0), HypothesisError);
}

TEST_CASE("u_hat dominates its ingredients") {
  for (int K = 3; K <= 8; ++K) {
    auto wp = compute_weighted_params(6 + K, 2, 1, Rat(K), 2.5 * (6 + K));
    CHECK(wp.u_hat >= wp.u_dd);
    CHECK(wp.u_hat >= Rat(2 * (6 + K - 2)) * compute_rho(2, 1));
    CHECK(wp.v_hat > 0);
    CHECK(wp.r0 > 0);
  }
}

TEST_CASE("theorem hypothesis flags") {
  auto cert = forms::make_certificate(6, 2, 1, forms::RankProvenance::UserDeclared);
  auto flags = check_theorem_hypotheses(6, 2, 1, cert);
  // Needs B > max{4, 2 + 2*8, 6} = 18: false.
  CHECK_FALSE(flags.main_vector);
  // K = 3 > 2: true.
  CHECK(flags.rosser_iwaniec);

  auto zero = forms::make_certificate(0, 2, 1, forms::RankProvenance::UserDeclared);
  auto zf = check_theorem_hypotheses(6, 2, 1, zero);
  CHECK_FALSE(zf.main_vector);
  CHECK_FALSE(zf.rosser_iwaniec);
  CHECK_FALSE(zf.weighted);
  CHECK_FALSE(zf.hypersurface);

  auto quintic = forms::make_certificate(49, 5, 1, forms::RankProvenance::UserDeclared);
  CHECK_FALSE(check_theorem_hypotheses(49, 5, 1, quintic).hypersurface);
  auto big = forms::make_certificate(400, 5, 1, forms::RankProvenance::UserDeclared);
  CHECK(check_theorem_hypotheses(400, 5, 1, big).hypersurface);
}

TEST_CASE("prior-art u threshold") {
  CHECK(comparison_u_threshold(4, 2, 1) == 73728);
  CHECK(comparison_u_threshold(1, 2, 1) == Int(256) * 6 * 6);
  // grows like n^(3/2) for fixed d, R
  Int a = comparison_u_threshold(100, 2, 1);
  Int b = comparison_u_threshold(400, 2, 1);
  CHECK(b == 8 * a);
}

TEST_CASE("bundle rendering carries exact strings") {
  auto b = compute_bundle(6, 2, 1, 6, 15.0);
  auto text = render_report(b);
  CHECK(text.find("theta_prime=1/256") != std::string::npos);
  CHECK(text.find("rho=152/3") != std::string::npos);
  CHECK(text.find("Upsilon=7") != std::string::npos);
  CHECK(text.find("u_hat=1984") != std::string::npos);
  CHECK(text.find("thm_rosser_iwaniec=true") != std::string::npos);
  auto js = render_report_json(b);
  CHECK(js.find("\"exact\":\"1/256\"") != std::string::npos);
}
