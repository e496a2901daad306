#include "core/forms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace aplab::forms {

namespace {

// Graded lex on exponent vectors, higher degree first.
bool term_order(const Monomial& a, const Monomial& b) {
  unsigned da = a.total_degree(), db = b.total_degree();
  if (da != db) return da > db;
  return a.exps > b.exps;
}

}  // namespace

Poly::Poly(int nvars, std::vector<Monomial> terms) : nvars_(nvars), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    if (static_cast<int>(t.exps.size()) != nvars_)
      throw DimensionError("monomial exponent vector length mismatch");
  normalize();
}

void Poly::normalize() {
  std::map<std::vector<unsigned>, Int> combined;
  for (auto& t : terms_) combined[t.exps] += t.coeff;
  terms_.clear();
  for (auto& [e, c] : combined)
    if (c != 0) terms_.push_back(Monomial{e, c});
  std::sort(terms_.begin(), terms_.end(), term_order);
}

unsigned Poly::degree() const {
  unsigned d = 0;
  for (const auto& t : terms_) d = std::max(d, t.total_degree());
  return d;
}

Poly Poly::homogeneous_part() const {
  unsigned d = degree();
  std::vector<Monomial> top;
  for (const auto& t : terms_)
    if (t.total_degree() == d) top.push_back(t);
  return Poly(nvars_, std::move(top));
}

bool Poly::is_homogeneous() const {
  if (terms_.empty()) return true;
  unsigned d = terms_.front().total_degree();
  for (const auto& t : terms_)
    if (t.total_degree() != d) return false;
  return true;
}

Int Poly::eval(std::span<const Int> x) const {
  if (static_cast<int>(x.size()) != nvars_) throw DimensionError("eval: wrong vector length");
  Int acc = 0, term;
  for (const auto& t : terms_) {
    term = t.coeff;
    for (int i = 0; i < nvars_; ++i)
      for (unsigned e = 0; e < t.exps[i]; ++e) term *= x[i];
    acc += term;
  }
  return acc;
}

std::int64_t Poly::eval_mod(std::span<const std::int64_t> x, std::int64_t m) const {
  if (static_cast<int>(x.size()) != nvars_) throw DimensionError("eval_mod: wrong vector length");
  auto mulmod = [m](std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % m);
  };
  std::int64_t acc = 0;
  for (const auto& t : terms_) {
    std::int64_t term = mpz_fdiv_ui(t.coeff.get_mpz_t(), static_cast<unsigned long>(m));
    for (int i = 0; i < nvars_; ++i)
      for (unsigned e = 0; e < t.exps[i]; ++e) term = mulmod(term, x[i] % m);
    acc = (acc + term) % m;
  }
  return ((acc % m) + m) % m;
}

Int Poly::coefficient_norm() const {
  Int norm = 0;
  for (const auto& t : terms_) {
    Int a = abs(t.coeff);
    if (a > norm) norm = a;
  }
  return norm;
}

Poly Poly::substitute_affine(std::span<const Int> a, std::span<const Int> b) const {
  if (static_cast<int>(a.size()) != nvars_ || static_cast<int>(b.size()) != nvars_)
    throw DimensionError("substitute_affine: wrong vector length");
  // Expand (a_i + b_i s_i)^e binomially per variable, one variable at a time.
  std::map<std::vector<unsigned>, Int> acc;
  for (const auto& t : terms_) {
    std::map<std::vector<unsigned>, Int> part;
    part[std::vector<unsigned>(nvars_, 0)] = t.coeff;
    for (int i = 0; i < nvars_; ++i) {
      unsigned e = t.exps[i];
      if (e == 0) continue;
      // (a + b s)^e = sum_j C(e,j) a^(e-j) b^j s^j
      std::vector<Int> coef(e + 1);
      for (unsigned j = 0; j <= e; ++j) {
        Int binom;
        mpz_bin_uiui(binom.get_mpz_t(), e, j);
        coef[j] = binom * int_pow(a[i], e - j) * int_pow(b[i], j);
      }
      std::map<std::vector<unsigned>, Int> next;
      for (const auto& [exps, c] : part) {
        if (c == 0) continue;
        for (unsigned j = 0; j <= e; ++j) {
          if (coef[j] == 0) continue;
          auto exps2 = exps;
          exps2[i] += j;
          next[exps2] += c * coef[j];
        }
      }
      part.swap(next);
    }
    for (const auto& [exps, c] : part) acc[exps] += c;
  }
  std::vector<Monomial> out;
  for (auto& [e, c] : acc)
    if (c != 0) out.push_back(Monomial{e, c});
  return Poly(nvars_, std::move(out));
}

Poly Poly::slice_zero(std::span<const int> j) const {
  if (static_cast<int>(j.size()) != nvars_) throw DimensionError("slice_zero: wrong vector length");
  std::vector<Monomial> kept;
  for (const auto& t : terms_) {
    bool dies = false;
    for (int i = 0; i < nvars_; ++i)
      if (j[i] == 1 && t.exps[i] > 0) dies = true;
    if (!dies) kept.push_back(t);
  }
  return Poly(nvars_, std::move(kept));
}

Poly Poly::operator-(const Poly& other) const {
  if (nvars_ != other.nvars_) throw DimensionError("poly subtraction: variable count mismatch");
  std::vector<Monomial> all = terms_;
  for (auto t : other.terms_) {
    t.coeff = -t.coeff;
    all.push_back(std::move(t));
  }
  return Poly(nvars_, std::move(all));
}

Poly Poly::scale(const Int& c) const {
  std::vector<Monomial> all = terms_;
  for (auto& t : all) t.coeff *= c;
  return Poly(nvars_, std::move(all));
}

std::string Poly::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    Int c = t.coeff;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      c = abs(c);
    }
    bool constant = t.total_degree() == 0;
    if (c != 1 || constant) {
      os << c.get_str();
      if (!constant) os << "*";
    }
    bool firstvar = true;
    for (int i = 0; i < nvars_; ++i) {
      if (t.exps[i] == 0) continue;
      if (!firstvar) os << "*";
      firstvar = false;
      os << "x" << (i + 1);
      if (t.exps[i] > 1) os << "^" << t.exps[i];
    }
    first = false;
  }
  return os.str();
}

Int FormSystem::coefficient_norm() const {
  Int norm = 0;
  for (const auto& p : polys) norm = std::max(norm, p.coefficient_norm());
  return norm;
}

Int FormSystem::natural_coefficient_norm() const {
  Int norm = 0;
  for (const auto& p : polys) norm = std::max(norm, p.homogeneous_part().coefficient_norm());
  return norm;
}

std::vector<Poly> FormSystem::natural_parts() const {
  std::vector<Poly> out;
  out.reserve(polys.size());
  for (const auto& p : polys) out.push_back(p.homogeneous_part());
  return out;
}

std::vector<Int> FormSystem::eval(std::span<const Int> x) const {
  std::vector<Int> out;
  out.reserve(polys.size());
  for (const auto& p : polys) out.push_back(p.eval(x));
  return out;
}

bool FormSystem::is_zero_at(std::span<const Int> x) const {
  for (const auto& p : polys)
    if (p.eval(x) != 0) return false;
  return true;
}

std::string FormSystem::str() const {
  std::ostringstream os;
  os << "n=" << n << " R=" << R << " d=" << d << ": ";
  for (int i = 0; i < R; ++i) {
    if (i) os << " ; ";
    os << polys[i].str();
  }
  return os.str();
}

namespace {

struct Lexer {
  const std::string& s;
  std::size_t pos = 0;
  explicit Lexer(const std::string& str) : s(str) {}
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  long integer() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    std::size_t digits = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == digits) throw ParseError("expected integer at position " + std::to_string(start));
    return std::stol(s.substr(start, pos - start));
  }
};

// term := [integer] ('*'? factor)* ; factor := 'x'<idx> ['^' exp]
Monomial parse_term(Lexer& lx, int nvars, int sign) {
  Monomial m;
  m.exps.assign(nvars, 0);
  m.coeff = sign;
  bool saw_anything = false;
  lx.skip_ws();
  if (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
    m.coeff *= Int(lx.integer());
    saw_anything = true;
  }
  while (true) {
    lx.skip_ws();
    bool star = lx.eat('*');
    char c = lx.peek();
    if (c == 'x') {
      ++lx.pos;
      long idx = lx.integer();
      if (idx < 1 || idx > nvars)
        throw ParseError("variable x" + std::to_string(idx) + " out of range 1.." +
                         std::to_string(nvars));
      unsigned e = 1;
      if (lx.eat('^')) {
        long ee = lx.integer();
        if (ee < 0) throw ParseError("negative exponent");
        e = static_cast<unsigned>(ee);
      }
      m.exps[idx - 1] += e;
      saw_anything = true;
    } else if (star) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        m.coeff *= Int(lx.integer());
        saw_anything = true;
      } else {
        throw ParseError("dangling '*' in term");
      }
    } else {
      break;
    }
  }
  if (!saw_anything) throw ParseError("empty term");
  return m;
}

Poly parse_poly(Lexer& lx, int nvars) {
  std::vector<Monomial> terms;
  int sign = 1;
  if (lx.eat('-'))
    sign = -1;
  else
    lx.eat('+');
  terms.push_back(parse_term(lx, nvars, sign));
  while (true) {
    char c = lx.peek();
    if (c == '+' || c == '-') {
      ++lx.pos;
      terms.push_back(parse_term(lx, nvars, c == '-' ? -1 : 1));
    } else {
      break;
    }
  }
  return Poly(nvars, std::move(terms));
}

long parse_header_field(Lexer& lx, const std::string& key) {
  lx.skip_ws();
  if (lx.s.compare(lx.pos, key.size(), key) != 0)
    throw ParseError("expected '" + key + "' in header");
  lx.pos += key.size();
  if (!lx.eat('=')) throw ParseError("expected '=' after '" + key + "'");
  return lx.integer();
}

}  // namespace

FormSystem parse_system(const std::string& text) {
  Lexer lx(text);
  FormSystem f;
  f.n = static_cast<int>(parse_header_field(lx, "n"));
  f.R = static_cast<int>(parse_header_field(lx, "R"));
  f.d = static_cast<int>(parse_header_field(lx, "d"));
  if (f.n < 1) throw ParseError("n must be at least 1");
  if (f.R < 1) throw ParseError("R must be at least 1");
  if (f.d < 2) throw ParseError("degree d must be at least 2");
  if (!lx.eat(':')) throw ParseError("expected ':' after header");
  f.polys.push_back(parse_poly(lx, f.n));
  while (lx.eat(';')) f.polys.push_back(parse_poly(lx, f.n));
  lx.skip_ws();
  if (lx.pos != lx.s.size()) throw ParseError("trailing input after polynomial list");
  if (static_cast<int>(f.polys.size()) != f.R)
    throw ParseError("header announces R=" + std::to_string(f.R) + " but " +
                     std::to_string(f.polys.size()) + " polynomials given");
  for (const auto& p : f.polys) {
    if (p.is_zero()) throw ParseError("zero polynomial in system");
    if (!p.is_homogeneous() || p.degree() != static_cast<unsigned>(f.d))
      throw ParseError("polynomial is not a form of degree " + std::to_string(f.d) + ": " +
                       p.str());
  }
  return f;
}

RankCertificate make_certificate(int birch_rank, int d, int R, RankProvenance prov) {
  if (d < 2) throw DomainError("degree d must be at least 2");
  if (R < 1) throw DomainError("R must be at least 1");
  if (birch_rank < 0) throw DomainError("Birch rank must be non-negative");
  RankCertificate c;
  c.birch_rank = birch_rank;
  c.provenance = prov;
  c.K = Rat(birch_rank) / rat_pow(Rat(2), d - 1);
  c.theta = c.K / Rat(R * (d - 1));
  return c;
}

namespace {

// Jacobian of the homogeneous parts evaluated mod q, rank via elimination.
int jacobian_rank_mod(const std::vector<Poly>& naturals, std::span<const std::int64_t> x,
                      std::int64_t q) {
  int R = static_cast<int>(naturals.size());
  int n = naturals.empty() ? 0 : naturals[0].nvars();
  std::vector<std::vector<std::int64_t>> jac(R, std::vector<std::int64_t>(n, 0));
  for (int r = 0; r < R; ++r) {
    for (const auto& t : naturals[r].terms()) {
      for (int i = 0; i < n; ++i) {
        if (t.exps[i] == 0) continue;
        // d/dx_i of coeff * prod x^e
        __int128 val = mpz_fdiv_ui(t.coeff.get_mpz_t(), static_cast<unsigned long>(q));
        val = (val * t.exps[i]) % q;
        for (int v = 0; v < n; ++v) {
          unsigned e = t.exps[v] - (v == i ? 1 : 0);
          for (unsigned k = 0; k < e; ++k) val = (val * (x[v] % q)) % q;
        }
        jac[r][i] = static_cast<std::int64_t>((jac[r][i] + val) % q);
      }
    }
  }
  // Gaussian elimination over F_q.
  int rank = 0;
  int col = 0;
  auto inv_mod = [q](std::int64_t a) {
    std::int64_t t = 0, newt = 1, r = q, newr = ((a % q) + q) % q;
    while (newr != 0) {
      std::int64_t quo = r / newr;
      std::int64_t tmp = t - quo * newt;
      t = newt;
      newt = tmp;
      tmp = r - quo * newr;
      r = newr;
      newr = tmp;
    }
    return ((t % q) + q) % q;
  };
  for (int row = 0; row < R && col < n; ++col) {
    int pivot = -1;
    for (int r = row; r < R; ++r)
      if (jac[r][col] % q != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(jac[row], jac[pivot]);
    std::int64_t inv = inv_mod(jac[row][col]);
    for (int r = row + 1; r < R; ++r) {
      __int128 factor = (static_cast<__int128>(jac[r][col]) * inv) % q;
      for (int c = col; c < n; ++c) {
        __int128 v = jac[r][c] - (factor * jac[row][c]) % q;
        jac[r][c] = static_cast<std::int64_t>(((v % q) + q) % q);
      }
    }
    ++row;
    ++rank;
  }
  return rank;
}

// Count points of {rank(Jac) < R} over F_q by full enumeration.
std::uint64_t rank_deficiency_count(const FormSystem& f, std::uint64_t q) {
  double states = std::pow(static_cast<double>(q), f.n);
  check_budget(states, "rank-deficiency point count over F_q");
  auto naturals = f.natural_parts();
  std::vector<std::int64_t> x(f.n, 0);
  std::uint64_t count = 0;
  while (true) {
    if (jacobian_rank_mod(naturals, x, static_cast<std::int64_t>(q)) < f.R) ++count;
    int i = 0;
    while (i < f.n) {
      if (++x[i] < static_cast<std::int64_t>(q)) break;
      x[i] = 0;
      ++i;
    }
    if (i == f.n) break;
  }
  return count;
}

}  // namespace

RankCertificate birch_rank(const FormSystem& f, const RankHint& hint) {
  switch (hint.kind) {
    case RankHint::User:
      return make_certificate(hint.user_rank, f.d, f.R, RankProvenance::UserDeclared);
    case RankHint::Diagonal: {
      if (f.R != 1) throw DomainError("diagonal rank hint requires R = 1");
      std::vector<bool> seen(f.n, false);
      for (const auto& t : f.polys[0].terms()) {
        int var = -1;
        for (int i = 0; i < f.n; ++i) {
          if (t.exps[i] == 0) continue;
          if (var >= 0 || t.exps[i] != static_cast<unsigned>(f.d))
            throw DomainError("diagonal rank hint on non-diagonal form");
          var = i;
        }
        if (var < 0) throw DomainError("diagonal rank hint on non-diagonal form");
        seen[var] = true;
      }
      for (int i = 0; i < f.n; ++i)
        if (!seen[i]) throw DomainError("diagonal form has zero coefficient at x" +
                                        std::to_string(i + 1));
      // Gradient (d a_i x_i^{d-1}) vanishes only at the origin.
      return make_certificate(f.n, f.d, f.R, RankProvenance::DiagonalExact);
    }
    case RankHint::Sample: {
      if (hint.sample_primes.empty()) throw DomainError("sample rank hint needs primes");
      std::vector<int> dims;
      for (std::uint64_t q : hint.sample_primes) {
        std::uint64_t cnt = rank_deficiency_count(f, q);
        // V* always contains the origin, so cnt >= 1; fit cnt ~ q^dim.
        double dim = std::log(static_cast<double>(cnt)) / std::log(static_cast<double>(q));
        dims.push_back(static_cast<int>(std::lround(dim)));
      }
      std::sort(dims.begin(), dims.end());
      int dim = dims[dims.size() / 2];
      int rank = std::max(0, f.n - dim);
      return make_certificate(rank, f.d, f.R, RankProvenance::MonteCarloEstimate);
    }
  }
  throw DomainError("unknown rank hint");
}

FormSystem substitute_dilation(const FormSystem& f, std::span<const Int> k,
                               std::span<const Int> tau, const Int& W) {
  if (static_cast<int>(k.size()) != f.n || static_cast<int>(tau.size()) != f.n)
    throw DimensionError("substitute_dilation: vector length mismatch");
  if (W < 1) throw DomainError("W must be positive");
  for (int i = 0; i < f.n; ++i) {
    if (k[i] < 1) throw DomainError("dilation entries must be positive");
    if (tau[i] < 0 || tau[i] >= W) throw DomainError("residues must lie in [0, W)");
  }
  std::vector<Int> a(f.n), b(f.n), kzero(f.n, Int(0));
  for (int i = 0; i < f.n; ++i) {
    a[i] = k[i] * tau[i];
    b[i] = k[i] * W;
  }
  FormSystem g;
  g.n = f.n;
  g.R = f.R;
  g.d = f.d;
  Int wd = int_pow(W, f.d);
  for (const auto& p : f.polys) {
    Poly sub = p.substitute_affine(a, b);
    // Homogeneous-part law: top part must equal W^d f(<k s>).
    Poly expected = p.substitute_affine(kzero, k).scale(wd);
    if (!(sub.homogeneous_part() == expected))
      throw IdentityError("substitution law violated: homogeneous part != W^d f(<k s>)");
    g.polys.push_back(std::move(sub));
  }
  return g;
}

SlicedRankBound rank_lower_bound_after_slicing(const RankCertificate& cert, int d, int R,
                                               std::span<const int> j) {
  long weight = 0;
  for (int ji : j) {
    if (ji != 0 && ji != 1) throw DomainError("slice vector must be 0/1");
    weight += ji;
  }
  SlicedRankBound out;
  long bound = cert.birch_rank - (R + 1) * weight;
  out.rank_lower_bound = static_cast<int>(std::max(0L, bound));
  out.theta_lower_bound =
      Rat(out.rank_lower_bound) / (Rat(R * (d - 1)) * rat_pow(Rat(2), d - 1));
  return out;
}

}  // namespace aplab::forms
