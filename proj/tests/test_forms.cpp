#include <doctest.h>

#include <random>

#include "core/forms.hpp"

using namespace aplab;
using namespace aplab::forms;

namespace {

std::vector<Int> ints(std::initializer_list<long> xs) {
  std::vector<Int> v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

TEST_CASE("parse_system accepts the cone and reads counts") {
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  CHECK(f.n == 3);
  CHECK(f.R == 1);
  CHECK(f.d == 2);
  CHECK(f.polys[0].terms().size() == 2);
  CHECK(f.coefficient_norm() == 1);
}

TEST_CASE("parse_system accepts the signature (3,3) diagonal quadratic") {
  FormSystem f = parse_system("n=6 R=1 d=2: x1^2+x2^2+x3^2-x4^2-x5^2-x6^2");
  CHECK(f.n == 6);
  CHECK(f.polys[0].terms().size() == 6);
}

TEST_CASE("parse_system rejects degree below two") {
  CHECK_THROWS_AS(parse_system("n=2 R=1 d=1: x1-x2"), ParseError);
}

TEST_CASE("parse_system rejects inhomogeneous and mismatched input") {
  CHECK_THROWS_AS(parse_system("n=2 R=1 d=2: x1^2 + x2"), ParseError);
  CHECK_THROWS_AS(parse_system("n=2 R=2 d=2: x1^2"), ParseError);
  CHECK_THROWS_AS(parse_system("n=2 R=1 d=2: x3^2"), ParseError);
}

TEST_CASE("print/parse round-trip is the identity") {
  const char* samples[] = {
      "n=3 R=1 d=2: x1*x2 - x3^2",
      "n=6 R=1 d=2: x1^2+x2^2+x3^2-x4^2-x5^2-x6^2",
      "n=4 R=2 d=3: 5*x1^3 - 3*x2*x3*x4 ; x1*x2^2 + 7*x4^3",
  };
  for (const char* s : samples) {
    FormSystem f = parse_system(s);
    FormSystem g = parse_system(f.str());
    CHECK(f.str() == g.str());
    CHECK(f.polys == g.polys);
  }
}

TEST_CASE("coefficient_norm") {
  CHECK(parse_system("n=3 R=1 d=2: x1*x2 - x3^2").coefficient_norm() == 1);
  CHECK(parse_system("n=2 R=1 d=2: 5*x1^2 - 3*x2^2").coefficient_norm() == 5);
}

TEST_CASE("coefficient_norm after dilation, against the hand expansion") {
  // f(2(1+6s1), 3(1+6s2), 1+6s3) = 216 s1 s2 - 36 s3^2 + 36 s1 + 36 s2 - 12 s3 + 5
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  auto g = substitute_dilation(f, ints({2, 3, 1}), ints({1, 1, 1}), Int(6));
  CHECK(g.coefficient_norm() == 216);
  CHECK(g.natural_coefficient_norm() == 216);
  CHECK(g.polys[0].eval(ints({0, 0, 0})) == 5);
  CHECK(g.polys[0].str() == "216*x1*x2 - 36*x3^2 + 36*x1 + 36*x2 - 12*x3 + 5");
}

TEST_CASE("substitute_dilation identity and hand-expanded example") {
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  auto g = substitute_dilation(f, ints({1, 1, 1}), ints({0, 0, 0}), Int(1));
  CHECK(g.polys == f.polys);

  FormSystem h = parse_system("n=1 R=1 d=2: x1^2");
  auto s = substitute_dilation(h, ints({2}), ints({1}), Int(3));
  // 4(1+3s)^2 = 36 s^2 + 24 s + 4
  CHECK(s.polys[0].eval(ints({0})) == 4);
  CHECK(s.polys[0].eval(ints({1})) == 64);
  CHECK(s.polys[0].str() == "36*x1^2 + 24*x1 + 4");
}

TEST_CASE("substitution homogeneous-part law and evaluation law on random inputs") {
  std::mt19937 rng(20240811);
  std::uniform_int_distribution<int> coeff(-4, 4), kdist(1, 3), wdist(1, 4), sdist(-5, 5);
  const char* bases[] = {
      "n=3 R=1 d=2: x1*x2 - x3^2",
      "n=2 R=1 d=3: x1^3 - 2*x1*x2^2",
      "n=3 R=2 d=2: x1^2 - x2*x3 ; x2^2 + x1*x3",
  };
  for (int iter = 0; iter < 20; ++iter) {
    FormSystem f = parse_system(bases[iter % 3]);
    Int w(wdist(rng));
    std::vector<Int> k(f.n), tau(f.n);
    for (int i = 0; i < f.n; ++i) {
      k[i] = kdist(rng);
      tau[i] = std::uniform_int_distribution<long>(0, w.get_si() - 1)(rng);
    }
    // Constructor re-checks the homogeneous-part law internally.
    FormSystem g = substitute_dilation(f, k, tau, w);
    // evaluate(g, s) == evaluate(f, <k (tau + W s)>) for several integer s
    for (int t = 0; t < 5; ++t) {
      std::vector<Int> s(f.n), x(f.n);
      for (int i = 0; i < f.n; ++i) {
        s[i] = sdist(rng);
        x[i] = k[i] * (tau[i] + w * s[i]);
      }
      CHECK(g.eval(s) == f.eval(x));
    }
    // Sanity bound on the expanded coefficient norm.
    Int kmax = 1;
    for (auto& ki : k) kmax = std::max(kmax, ki);
    Int bound = f.coefficient_norm() * int_pow(w * kmax, f.d);
    // Allow the multinomial blow-up factor (monomial count after expansion).
    std::size_t terms = 0;
    for (auto& p : g.polys) terms += p.terms().size();
    CHECK(g.coefficient_norm() <= bound * Int(static_cast<unsigned long>(terms + 1)));
  }
}

TEST_CASE("birch_rank diagonal: K * 2^(d-1) = n") {
  FormSystem f = parse_system("n=6 R=1 d=2: x1^2+x2^2+x3^2-x4^2-x5^2-x6^2");
  auto cert = birch_rank(f, RankHint{RankHint::Diagonal});
  CHECK(cert.birch_rank == 6);
  CHECK(cert.K == 3);
  CHECK(cert.theta == 3);
  CHECK(cert.provenance == RankProvenance::DiagonalExact);

  FormSystem g = parse_system("n=4 R=1 d=3: x1^3 + 2*x2^3 - x3^3 + x4^3");
  auto cg = birch_rank(g, RankHint{RankHint::Diagonal});
  CHECK(cg.birch_rank == 4);
  CHECK(cg.K * rat_pow(Rat(2), g.d - 1) == 4);
}

TEST_CASE("birch_rank diagonal hint rejects bad input") {
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  CHECK_THROWS_AS(birch_rank(f, RankHint{RankHint::Diagonal}), DomainError);
  FormSystem g = parse_system("n=3 R=1 d=2: x1^2 + x2^2");
  CHECK_THROWS_AS(birch_rank(g, RankHint{RankHint::Diagonal}), DomainError);
}

TEST_CASE("birch_rank user hint wraps the declared value") {
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  RankHint hint{RankHint::User};
  hint.user_rank = 4;
  auto cert = birch_rank(f, hint);
  CHECK(cert.birch_rank == 4);
  CHECK(cert.provenance == RankProvenance::UserDeclared);
  CHECK(cert.K == 2);
}

TEST_CASE("birch_rank sample mode on the cone estimates rank 3") {
  FormSystem f = parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  auto cert = birch_rank(f, RankHint{RankHint::Sample});
  CHECK(cert.birch_rank == 3);
  CHECK_FALSE(cert.certified());
}

TEST_CASE("rank_lower_bound_after_slicing") {
  auto cert = make_certificate(6, 2, 1, RankProvenance::UserDeclared);
  CHECK(rank_lower_bound_after_slicing(cert, 2, 1, std::vector<int>{1, 0, 0, 0, 0, 0})
            .rank_lower_bound == 4);
  CHECK(rank_lower_bound_after_slicing(cert, 2, 1, std::vector<int>{0, 0, 0, 0, 0, 0})
            .rank_lower_bound == 6);
  auto c2 = make_certificate(3, 2, 2, RankProvenance::UserDeclared);
  CHECK(rank_lower_bound_after_slicing(c2, 2, 2, std::vector<int>{1, 1, 0}).rank_lower_bound == 0);
  auto b = rank_lower_bound_after_slicing(cert, 2, 1, std::vector<int>{1, 0, 0, 0, 0, 0});
  CHECK(b.theta_lower_bound == Rat(4) / Rat(2));
}
