#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/util.hpp"

namespace aplab::forms {

// One monomial: exponent vector over all variables plus an exact coefficient.
struct Monomial {
  std::vector<unsigned> exps;
  Int coeff;
  unsigned total_degree() const {
    unsigned t = 0;
    for (unsigned e : exps) t += e;
    return t;
  }
  bool operator==(const Monomial& o) const { return exps == o.exps && coeff == o.coeff; }
};

// Sparse integer polynomial in a fixed number of variables.  Terms are kept
// in a canonical order (graded lex, descending) with coefficients combined,
// which makes printing and equality bit-stable.
class Poly {
 public:
  Poly() = default;
  Poly(int nvars, std::vector<Monomial> terms);

  int nvars() const { return nvars_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  unsigned degree() const;  // 0 for the zero polynomial

  // Top-degree slice; for a form this is the polynomial itself.
  Poly homogeneous_part() const;
  bool is_homogeneous() const;

  Int eval(std::span<const Int> x) const;
  std::int64_t eval_mod(std::span<const std::int64_t> x, std::int64_t m) const;

  Int coefficient_norm() const;  // max |coeff|, 0 for the zero polynomial

  // Substitute x_i -> a_i + b_i * s_i with exact expansion.
  Poly substitute_affine(std::span<const Int> a, std::span<const Int> b) const;

  // Set x_i := 0 for every i with j_i = 1 (same variable count kept).
  Poly slice_zero(std::span<const int> j) const;

  Poly operator-(const Poly& other) const;
  Poly scale(const Int& c) const;
  bool operator==(const Poly& other) const {
    return nvars_ == other.nvars_ && terms_ == other.terms_;
  }

  std::string str() const;

 private:
  int nvars_ = 0;
  std::vector<Monomial> terms_;
  void normalize();
};

// A system of R integer polynomials of common top degree d in n variables.
// Parsed systems are forms; substituted systems may be inhomogeneous but keep
// a homogeneous part of degree exactly d.
struct FormSystem {
  int n = 0;
  int R = 0;
  int d = 0;
  std::vector<Poly> polys;

  Int coefficient_norm() const;          // over the full polynomials
  Int natural_coefficient_norm() const;  // over the homogeneous parts
  std::vector<Poly> natural_parts() const;
  std::vector<Int> eval(std::span<const Int> x) const;
  bool is_zero_at(std::span<const Int> x) const;
  std::string str() const;
};

// Text format: "n=<int> R=<int> d=<int>: poly ; poly ; ...", variables x1..xn,
// '^' powers, '*' products, integer coefficients.  parse(print(.)) is the
// identity.  Rejects d < 2 and inhomogeneous input.
FormSystem parse_system(const std::string& text);

enum class RankProvenance { UserDeclared, DiagonalExact, MonteCarloEstimate };

struct RankCertificate {
  int birch_rank = 0;  // the rank bound B(f)
  RankProvenance provenance = RankProvenance::UserDeclared;
  Rat K;      // B / 2^(d-1)
  Rat theta;  // K / (R (d-1))
  bool certified() const { return provenance != RankProvenance::MonteCarloEstimate; }
};

RankCertificate make_certificate(int birch_rank, int d, int R, RankProvenance prov);

// Hint modes for the rank.  The general computation is out of reach here:
// `diagonal` covers R=1 diagonal forms exactly, `user` wraps a declared value,
// `sample` estimates the dimension of the rank-deficiency locus by counting
// its points over a few prime fields and fitting q^dim.
struct RankHint {
  enum Kind { Diagonal, User, Sample } kind = Diagonal;
  int user_rank = 0;
  std::vector<std::uint64_t> sample_primes = {101, 103, 107};
};

RankCertificate birch_rank(const FormSystem& f, const RankHint& hint);

// g(s) := f(k1 (tau1 + W s1), ..., kn (taun + W sn)), expanded exactly.
// The homogeneous part equals W^d f(<k s>); this is checked internally.
FormSystem substitute_dilation(const FormSystem& f, std::span<const Int> k,
                               std::span<const Int> tau, const Int& W);

// max(0, B - (R+1) |j|_1) together with the induced lower bound for Theta(j).
struct SlicedRankBound {
  int rank_lower_bound = 0;
  Rat theta_lower_bound;
};
SlicedRankBound rank_lower_bound_after_slicing(const RankCertificate& cert, int d, int R,
                                               std::span<const int> j);

}  // namespace aplab::forms
