#include "core/counting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "core/arith.hpp"
#include "core/local.hpp"

namespace aplab::counting {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1, 1], order 64, computed once by Newton
// iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> node, weight;
  GaussLegendre() {
    const int n = 64;
    node.resize(n);
    weight.resize(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-15) break;
      }
      node[i] = x;
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gl64() {
  static const GaussLegendre g;
  return g;
}

double bump_mass_constant() {
  // int_{-1}^{1} exp(-1/(1-t^2)) dt by Gauss-Legendre panels to ~1e-13.
  static const double mass = [] {
    const auto& g = gl64();
    double total = 0.0;
    const int panels = 32;
    for (int p = 0; p < panels; ++p) {
      double a = -1.0 + 2.0 * p / panels, b = -1.0 + 2.0 * (p + 1) / panels;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < 64; ++i) {
        double t = mid + half * g.node[i];
        double d = 1.0 - t * t;
        if (d > 1e-14) total += half * g.weight[i] * std::exp(-1.0 / d);
      }
    }
    return total;
  }();
  return mass;
}

// Least prime factor viewing 1 as having none (roughness filter helper).
bool passes_roughness(std::int64_t x, double z) {
  if (x <= 1) return true;  // no prime divisors to violate the cutoff
  return static_cast<double>(arith::least_prime_factor(static_cast<std::uint64_t>(x))) > z;
}

std::int64_t eval_i64(const forms::Poly& p, std::span<const std::int64_t> x) {
  // Desk-scale boxes keep every intermediate below 2^62; eval via doubles
  // would lose exactness, eval via mpz costs 10x.  The bound check runs
  // before each multiply so the integer product never overflows.
  std::int64_t acc = 0;
  for (const auto& t : p.terms()) {
    if (!t.coeff.fits_slong_p()) throw BudgetError("coefficient exceeds the int64 path");
    double bound = std::fabs(t.coeff.get_d());
    std::int64_t val = t.coeff.get_si();
    for (int i = 0; i < p.nvars(); ++i)
      for (unsigned e = 0; e < t.exps[i]; ++e) {
        bound *= std::fabs(static_cast<double>(x[i])) + 1.0;
        if (bound > 4.0e18) throw BudgetError("evaluation exceeds the int64 range");
        val *= x[i];
      }
    acc += val;
  }
  return acc;
}

struct AxisValues {
  std::vector<std::int64_t> values;  // admissible coordinate values in (0, B]
};

std::vector<AxisValues> admissible_axes(const forms::FormSystem& f, const CountConfig& cfg) {
  std::vector<AxisValues> axes(f.n);
  std::int64_t bmax = static_cast<std::int64_t>(std::floor(cfg.B));
  for (int i = 0; i < f.n; ++i) {
    std::int64_t yi = cfg.y.empty() ? 0 : cfg.y[i];
    std::uint64_t ki = cfg.k.empty() ? 1 : cfg.k[i];
    for (std::int64_t x = 1; x <= bmax; ++x) {
      if (cfg.W > 1 && static_cast<std::uint64_t>(((x - yi) % static_cast<std::int64_t>(cfg.W) +
                                                   static_cast<std::int64_t>(cfg.W)) %
                                                  static_cast<std::int64_t>(cfg.W)) != 0)
        continue;
      if (ki > 1 && static_cast<std::uint64_t>(x) % ki != 0) continue;
      if (cfg.z > 0 && !passes_roughness(x, cfg.z)) continue;
      axes[i].values.push_back(x);
    }
  }
  return axes;
}

// Variable components of a single-equation system (shared-monomial closure).
std::vector<std::vector<int>> variable_components(const forms::FormSystem& f) {
  std::vector<int> parent(f.n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  for (const auto& p : f.polys)
    for (const auto& t : p.terms()) {
      int first = -1;
      for (int i = 0; i < f.n; ++i)
        if (t.exps[i] > 0) {
          if (first < 0)
            first = i;
          else
            parent[find(i)] = find(first);
        }
    }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < f.n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, vars] : groups) out.push_back(vars);
  return out;
}

void enumerate_naive_range(const forms::FormSystem& f, const std::vector<AxisValues>& axes,
                           std::size_t lo0, std::size_t hi0,
                           std::vector<std::vector<std::int64_t>>& out) {
  std::vector<std::size_t> idx(f.n, 0);
  std::vector<std::int64_t> x(f.n);
  idx[0] = lo0;
  if (lo0 >= hi0) return;
  while (true) {
    for (int i = 0; i < f.n; ++i) x[i] = axes[i].values[idx[i]];
    bool zero = true;
    for (const auto& p : f.polys)
      if (eval_i64(p, x) != 0) {
        zero = false;
        break;
      }
    if (zero) out.push_back(x);
    int i = f.n - 1;
    while (i >= 0) {
      std::size_t limit = i == 0 ? hi0 : axes[i].values.size();
      if (++idx[i] < limit) break;
      idx[i] = i == 0 ? lo0 : 0;
      --i;
    }
    if (i < 0) break;
  }
}

// Data-parallel over the outermost axis; per-chunk results are appended in
// chunk order, so the output is independent of scheduling.
void enumerate_naive(const forms::FormSystem& f, const std::vector<AxisValues>& axes,
                     std::vector<std::vector<std::int64_t>>& out) {
  double states = 1;
  for (const auto& a : axes) states *= static_cast<double>(a.values.size());
  check_budget(states, "zero enumeration");
  for (const auto& a : axes)
    if (a.values.empty()) return;
  using Chunk = std::vector<std::vector<std::int64_t>>;
  if (states > 1e6 && worker_count() > 1) {
    Chunk merged = parallel_reduce<Chunk>(
        axes[0].values.size(), Chunk{},
        [&](std::uint64_t lo, std::uint64_t hi, Chunk& acc) {
          enumerate_naive_range(f, axes, lo, hi, acc);
        },
        [](Chunk& acc, const Chunk& part) {
          acc.insert(acc.end(), part.begin(), part.end());
        });
    out.insert(out.end(), merged.begin(), merged.end());
    return;
  }
  enumerate_naive_range(f, axes, 0, axes[0].values.size(), out);
}

// Meet-in-the-middle over a two-block split of the variables (R = 1):
// hash-join G(x_L) against -H(x_R).
void enumerate_mitm(const forms::FormSystem& f, const std::vector<AxisValues>& axes,
                    const std::vector<int>& left, const std::vector<int>& right,
                    std::vector<std::vector<std::int64_t>>& out) {
  const forms::Poly& p = f.polys[0];
  auto restrict_terms = [&](const std::vector<int>& vars, bool take_constants) {
    std::vector<forms::Monomial> terms;
    std::vector<bool> mine(f.n, false);
    for (int v : vars) mine[v] = true;
    for (const auto& t : p.terms()) {
      bool ours = false, theirs = false;
      for (int i = 0; i < f.n; ++i)
        if (t.exps[i] > 0) (mine[i] ? ours : theirs) = true;
      if ((ours && !theirs) || (!ours && !theirs && take_constants)) terms.push_back(t);
    }
    return forms::Poly(f.n, terms);
  };
  forms::Poly pl = restrict_terms(left, true);
  forms::Poly pr = restrict_terms(right, false);

  auto tuples = [&](const std::vector<int>& vars) {
    double states = 1;
    for (int v : vars) states *= static_cast<double>(axes[v].values.size());
    check_budget(states, "meet-in-the-middle side enumeration");
    std::vector<std::vector<std::int64_t>> list;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (int v : vars)
      if (axes[v].values.empty()) return list;
    while (true) {
      std::vector<std::int64_t> x(f.n, 0);
      for (std::size_t i = 0; i < vars.size(); ++i) x[vars[i]] = axes[vars[i]].values[idx[i]];
      list.push_back(std::move(x));
      int i = static_cast<int>(vars.size()) - 1;
      while (i >= 0 && ++idx[i] == axes[vars[i]].values.size()) idx[i] = 0, --i;
      if (i < 0) break;
    }
    return list;
  };

  auto ltuples = tuples(left);
  auto rtuples = tuples(right);
  std::map<std::int64_t, std::vector<std::size_t>> by_value;
  for (std::size_t i = 0; i < ltuples.size(); ++i) by_value[eval_i64(pl, ltuples[i])].push_back(i);
  for (const auto& rt : rtuples) {
    std::int64_t target = -eval_i64(pr, rt);
    auto it = by_value.find(target);
    if (it == by_value.end()) continue;
    for (std::size_t li : it->second) {
      std::vector<std::int64_t> x = ltuples[li];
      for (int v : right) x[v] = rt[v];
      out.push_back(std::move(x));
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

SmoothWeight SmoothWeight::indicator() {
  SmoothWeight w;
  w.kind = Kind::Indicator;
  return w;
}

SmoothWeight SmoothWeight::bump(std::vector<double> center, double h) {
  if (h <= 0 || h > 2) throw DomainError("bump radius must lie in (0, 2]");
  SmoothWeight w;
  w.kind = Kind::Bump;
  w.center = std::move(center);
  w.h = h;
  return w;
}

double SmoothWeight::profile(double t) const {
  double u = t / h;
  double d = 1.0 - u * u;
  if (d <= 1e-14) return 0.0;
  return std::exp(-1.0 / d);
}

double SmoothWeight::at(std::span<const std::int64_t> x, double B) const {
  if (kind == Kind::Indicator) {
    for (auto xi : x)
      if (!(xi > 0 && static_cast<double>(xi) <= B)) return 0.0;
    return 1.0;
  }
  double w = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    w *= profile(static_cast<double>(x[i]) / B - center[i]);
    if (w == 0.0) return 0.0;
  }
  return w;
}

double SmoothWeight::at_real(std::span<const double> u, std::span<const double> P) const {
  if (kind == Kind::Indicator) {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!(u[i] > 0 && u[i] <= P[i])) return 0.0;
    return 1.0;
  }
  double w = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    w *= profile(u[i] / P[i] - center[i]);
    if (w == 0.0) return 0.0;
  }
  return w;
}

double SmoothWeight::mass1d() const {
  if (kind == Kind::Indicator) return 1.0;
  return h * bump_mass_constant();
}

std::vector<std::vector<std::int64_t>> enumerate_zeros(const forms::FormSystem& f,
                                                       const CountConfig& config) {
  if (!config.y.empty() && static_cast<int>(config.y.size()) != f.n)
    throw DimensionError("residue vector length mismatch");
  if (!config.k.empty() && static_cast<int>(config.k.size()) != f.n)
    throw DimensionError("divisor vector length mismatch");
  if (config.W > 1 && !config.y.empty()) {
    std::uint64_t prod = 1;
    for (auto yi : config.y)
      prod = (prod * static_cast<std::uint64_t>(((yi % static_cast<std::int64_t>(config.W)) +
                                                 static_cast<std::int64_t>(config.W)) %
                                                static_cast<std::int64_t>(config.W))) %
             config.W;
    if (std::gcd(prod, config.W) != 1)
      throw DomainError("W-trick residues must satisfy gcd(y1...yn, W) = 1");
  }
  auto axes = admissible_axes(f, config);

  bool want_mitm = false;
  std::vector<int> left, right;
  if (config.mitm != CountConfig::Mitm::Off && f.R == 1) {
    auto comps = variable_components(f);
    if (comps.size() >= 2) {
      // two-block split: first component vs the rest
      left = comps[0];
      for (std::size_t c = 1; c < comps.size(); ++c)
        right.insert(right.end(), comps[c].begin(), comps[c].end());
      double naive = 1, sides = 1;
      for (const auto& a : axes) naive *= std::max<std::size_t>(1, a.values.size());
      double lstates = 1, rstates = 1;
      for (int v : left) lstates *= std::max<std::size_t>(1, axes[v].values.size());
      for (int v : right) rstates *= std::max<std::size_t>(1, axes[v].values.size());
      sides = lstates + rstates;
      want_mitm = config.mitm == CountConfig::Mitm::On || sides * 16 < naive;
    } else if (config.mitm == CountConfig::Mitm::On) {
      throw DomainError("no additive split found for meet-in-the-middle");
    }
  } else if (config.mitm == CountConfig::Mitm::On) {
    throw DomainError("meet-in-the-middle needs R = 1");
  }

  std::vector<std::vector<std::int64_t>> out;
  if (want_mitm)
    enumerate_mitm(f, axes, left, right, out);
  else
    enumerate_naive(f, axes, out);
  std::sort(out.begin(), out.end());
  return out;
}

double weighted_count(const forms::FormSystem& f, const CountConfig& config) {
  auto zeros = enumerate_zeros(f, config);
  Kahan acc;
  for (const auto& x : zeros) acc.add(config.weight.at(x, config.B));
  return acc.value();
}

std::complex<double> exp_sum_Sw(const forms::FormSystem& f, std::span<const double> alpha,
                                std::span<const double> P, const SmoothWeight& weight) {
  if (static_cast<int>(alpha.size()) != f.R) throw DimensionError("alpha needs R entries");
  if (static_cast<int>(P.size()) != f.n) throw DimensionError("P needs n entries");
  // reduce alpha mod 1 so integer shifts are bit-exact no-ops
  std::vector<double> a(alpha.begin(), alpha.end());
  for (auto& ai : a) ai -= std::floor(ai);

  std::vector<std::int64_t> lo(f.n), hi(f.n);
  double states = 1;
  for (int i = 0; i < f.n; ++i) {
    if (weight.kind == SmoothWeight::Kind::Indicator) {
      lo[i] = 1;
      hi[i] = static_cast<std::int64_t>(std::floor(P[i]));
    } else {
      lo[i] = static_cast<std::int64_t>(std::ceil(P[i] * (weight.center[i] - weight.h)));
      hi[i] = static_cast<std::int64_t>(std::floor(P[i] * (weight.center[i] + weight.h)));
    }
    states *= static_cast<double>(std::max<std::int64_t>(0, hi[i] - lo[i] + 1));
  }
  check_budget(states, "exponential sum support");

  KahanComplex acc;
  std::vector<std::int64_t> y = lo;
  if (states == 0) return {0.0, 0.0};
  while (true) {
    double w = 1.0;
    if (weight.kind == SmoothWeight::Kind::Bump) {
      for (int i = 0; i < f.n && w != 0.0; ++i)
        w *= weight.profile(static_cast<double>(y[i]) / P[i] - weight.center[i]);
    } else {
      for (int i = 0; i < f.n; ++i)
        if (!(y[i] > 0 && static_cast<double>(y[i]) <= P[i])) w = 0.0;
    }
    if (w != 0.0) {
      double phase = 0.0;
      for (int r = 0; r < f.R; ++r) {
        double g = static_cast<double>(eval_i64(f.polys[r], y));
        phase += a[r] * g;
      }
      phase -= std::floor(phase);
      acc.add(std::complex<double>(w * std::cos(kTau * phase), w * std::sin(kTau * phase)));
    }
    int i = f.n - 1;
    while (i >= 0 && ++y[i] > hi[i]) y[i] = lo[i], --i;
    if (i < 0) break;
  }
  return acc.value();
}

namespace {

double halton(std::uint64_t index, std::uint64_t base) {
  double result = 0.0, f = 1.0 / static_cast<double>(base);
  std::uint64_t i = index;
  while (i > 0) {
    result += f * static_cast<double>(i % base);
    i /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

}  // namespace

Integral oscillatory_Iw(const forms::FormSystem& f, std::span<const double> gamma,
                        std::span<const double> P, const SmoothWeight& weight, bool natural) {
  if (static_cast<int>(gamma.size()) != f.R) throw DimensionError("gamma needs R entries");
  if (static_cast<int>(P.size()) != f.n) throw DimensionError("P needs n entries");
  std::vector<forms::Poly> polys = natural ? f.natural_parts() : f.polys;

  // integration box per axis
  std::vector<double> lo(f.n), hi(f.n);
  for (int i = 0; i < f.n; ++i) {
    if (weight.kind == SmoothWeight::Kind::Indicator) {
      lo[i] = 0.0;
      hi[i] = P[i];
    } else {
      lo[i] = P[i] * (weight.center[i] - weight.h);
      hi[i] = P[i] * (weight.center[i] + weight.h);
    }
  }
  auto integrand = [&](std::span<const double> u, double& re, double& im) {
    double w = weight.at_real(u, P);
    if (w == 0.0) {
      re = im = 0.0;
      return;
    }
    double phase = 0.0;
    for (int r = 0; r < f.R; ++r) {
      double g = 0.0;
      for (const auto& t : polys[r].terms()) {
        double term = t.coeff.get_d();
        for (int i = 0; i < f.n; ++i)
          for (unsigned e = 0; e < t.exps[i]; ++e) term *= u[i];
        g += term;
      }
      phase += gamma[r] * g;
    }
    re = w * std::cos(kTau * phase);
    im = w * std::sin(kTau * phase);
  };

  Integral out;
  if (f.n <= 6) {
    const auto& g = gl64();
    std::vector<int> idx(f.n, 0);
    std::vector<double> u(f.n);
    KahanComplex acc;
    while (true) {
      double wq = 1.0;
      for (int i = 0; i < f.n; ++i) {
        double mid = 0.5 * (lo[i] + hi[i]), half = 0.5 * (hi[i] - lo[i]);
        u[i] = mid + half * g.node[idx[i]];
        wq *= half * g.weight[idx[i]];
      }
      double re, im;
      integrand(u, re, im);
      acc.add(std::complex<double>(wq * re, wq * im));
      int i = f.n - 1;
      while (i >= 0 && ++idx[i] == 64) idx[i] = 0, --i;
      if (i < 0) break;
    }
    out.value = acc.value();
    out.error = 0.0;
    return out;
  }

  // Halton QMC with a crude batch-split standard error.
  const std::uint64_t N = 1 << 16;
  double vol = 1.0;
  for (int i = 0; i < f.n; ++i) vol *= hi[i] - lo[i];
  static const std::uint64_t bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  KahanComplex acc;
  std::vector<std::complex<double>> batch(8, {0, 0});
  std::vector<double> u(f.n);
  for (std::uint64_t s = 0; s < N; ++s) {
    for (int i = 0; i < f.n; ++i) u[i] = lo[i] + (hi[i] - lo[i]) * halton(s + 1, bases[i]);
    double re, im;
    integrand(u, re, im);
    acc.add({re, im});
    batch[s % 8] += std::complex<double>(re, im);
  }
  out.value = acc.value() * (vol / static_cast<double>(N));
  double mean = std::abs(out.value) / vol;
  double var = 0;
  for (auto& b : batch) {
    double dev = std::abs(b * (8.0 / static_cast<double>(N))) - mean;
    var += dev * dev;
  }
  out.error = vol * std::sqrt(var / 8.0) / std::sqrt(8.0);
  return out;
}

MajorArcResidual major_arc_residual(const forms::FormSystem& f, std::span<const std::int64_t> a,
                                    std::uint64_t q, std::span<const double> beta, double B,
                                    const SmoothWeight& weight) {
  if (static_cast<int>(a.size()) != f.R || static_cast<int>(beta.size()) != f.R)
    throw DimensionError("a and beta need R entries");
  std::vector<double> alpha(f.R), P(f.n, B);
  for (int r = 0; r < f.R; ++r)
    alpha[r] = static_cast<double>(a[r]) / static_cast<double>(q) + beta[r];

  MajorArcResidual out;
  out.s_w = exp_sum_Sw(f, alpha, P, weight);
  auto saq = local::gauss_sum(f, a, q);
  auto iw = oscillatory_Iw(f, beta, P, weight, false);
  double qn = std::pow(static_cast<double>(q), -f.n);
  out.approx = qn * saq.value * iw.value;
  out.absolute = std::abs(out.s_w - out.approx);
  out.relative = out.absolute / (std::abs(out.s_w) + 1.0);

  // Lemma-shaped hypotheses: q small against the box, |beta| q B^{d-1} ||g||
  // small; reported, never fatal.
  double gnorm = f.coefficient_norm().get_d();
  double betamax = 0;
  for (double b : beta) betamax = std::max(betamax, std::fabs(b));
  out.hypothesis_ok = static_cast<double>(q) < B * std::pow(B, -0.05) &&
                      betamax * static_cast<double>(q) * std::pow(B, f.d - 1) * gnorm <
                          std::pow(B, -0.05) + 1.0;
  return out;
}

namespace {

// J(Q) = int_{|gamma|<=Q} I_w-natural(gamma) d gamma collapses under Fubini
// to a single u-integral against the Dirichlet kernel:
//   J(Q) = int w(u) sin(2 pi Q f(u)) / (pi f(u)) du,
// with kernel value 2Q at f(u) = 0.  Tensor quadrature per axis; `panels`
// splits each axis to control the oscillation per panel.
double jw_kernel_quadrature(const forms::FormSystem& f, const SmoothWeight& weight, double Q,
                            int panels) {
  std::vector<double> P(f.n, 1.0), lo(f.n), hi(f.n);
  for (int i = 0; i < f.n; ++i) {
    if (weight.kind == SmoothWeight::Kind::Indicator) {
      lo[i] = 0;
      hi[i] = 1;
    } else {
      lo[i] = weight.center[i] - weight.h;
      hi[i] = weight.center[i] + weight.h;
    }
  }
  auto naturals = f.natural_parts();
  const auto& g = gl64();
  int per_axis = 64 * panels;
  double states = std::pow(static_cast<double>(per_axis), f.n);
  check_budget(states, "singular integral quadrature");
  std::vector<int> idx(f.n, 0);
  std::vector<double> u(f.n);
  Kahan acc;
  while (true) {
    double wq = 1.0;
    for (int i = 0; i < f.n; ++i) {
      int panel = idx[i] / 64, node = idx[i] % 64;
      double a = lo[i] + (hi[i] - lo[i]) * panel / panels;
      double b = lo[i] + (hi[i] - lo[i]) * (panel + 1) / panels;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      u[i] = mid + half * g.node[node];
      wq *= half * g.weight[node];
    }
    double w = weight.at_real(u, P);
    if (w != 0.0) {
      double kernel = 1.0;
      for (const auto& p : naturals) {
        double val = 0;
        for (const auto& t : p.terms()) {
          double term = t.coeff.get_d();
          for (int i = 0; i < f.n; ++i)
            for (unsigned e = 0; e < t.exps[i]; ++e) term *= u[i];
          val += term;
        }
        double x = kTau * Q * val;
        kernel *= std::fabs(x) < 1e-8 ? 2.0 * Q * (1.0 - x * x / 6.0)
                                      : std::sin(x) / (std::numbers::pi * val);
      }
      acc.add(wq * w * kernel);
    }
    int i = f.n - 1;
    while (i >= 0 && ++idx[i] == per_axis) idx[i] = 0, --i;
    if (i < 0) break;
  }
  return acc.value();
}

}  // namespace

JwResult singular_integral_gamma(const forms::FormSystem& f, const SmoothWeight& weight,
                                 double Q) {
  if (f.R != 1)
    throw DomainError("gamma-truncated singular integral implemented for R = 1");
  if (Q <= 0) throw DomainError("Q must be positive");
  JwResult out;
  int panels = std::max(1, static_cast<int>(std::ceil(Q / 16.0)));
  double coarse = jw_kernel_quadrature(f, weight, Q, panels);
  double fine = jw_kernel_quadrature(f, weight, Q, panels + 1);
  out.value = fine;
  // refinement gap plus the next truncation octave as the tail proxy
  double doubled = jw_kernel_quadrature(f, weight, 2 * Q, 2 * panels);
  out.error = std::fabs(fine - coarse) + std::fabs(doubled - fine);
  return out;
}

JwResult singular_integral_slab(const forms::FormSystem& f, const SmoothWeight& weight,
                                double eps, std::uint64_t samples) {
  if (eps <= 0) throw DomainError("slab width must be positive");
  std::vector<double> P(f.n, 1.0), lo(f.n), hi(f.n);
  for (int i = 0; i < f.n; ++i) {
    if (weight.kind == SmoothWeight::Kind::Indicator) {
      lo[i] = 0;
      hi[i] = 1;
    } else {
      lo[i] = weight.center[i] - weight.h;
      hi[i] = weight.center[i] + weight.h;
    }
  }
  double vol = 1.0;
  for (int i = 0; i < f.n; ++i) vol *= hi[i] - lo[i];
  static const std::uint64_t bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  auto naturals = f.natural_parts();
  auto run = [&](double width) {
    Kahan acc;
    std::vector<double> u(f.n);
    std::vector<double> batchsum(8, 0.0);
    for (std::uint64_t s = 0; s < samples; ++s) {
      for (int i = 0; i < f.n; ++i) u[i] = lo[i] + (hi[i] - lo[i]) * halton(s + 1, bases[i]);
      bool inside = true;
      for (const auto& p : naturals) {
        double g = 0;
        for (const auto& t : p.terms()) {
          double term = t.coeff.get_d();
          for (int i = 0; i < f.n; ++i)
            for (unsigned e = 0; e < t.exps[i]; ++e) term *= u[i];
          g += term;
        }
        if (std::fabs(g) >= width) {
          inside = false;
          break;
        }
      }
      double val = inside ? weight.at_real(u, P) : 0.0;
      acc.add(val);
      batchsum[s % 8] += val;
    }
    double mean = acc.value() / static_cast<double>(samples);
    double var = 0;
    for (double b : batchsum) {
      double dev = b * 8.0 / static_cast<double>(samples) - mean;
      var += dev * dev;
    }
    double se = std::sqrt(var / 8.0) / std::sqrt(8.0);
    JwResult r;
    r.value = mean * vol / (2.0 * width);
    r.error = se * vol / (2.0 * width);
    return r;
  };
  JwResult full = run(eps);
  JwResult halfw = run(eps / 2);
  JwResult out;
  out.value = full.value;
  // sampling error plus the slab-width bias probe
  out.error = full.error + std::fabs(full.value - halfw.value);
  return out;
}

bool jw_modes_agree(const JwResult& a, const JwResult& b) {
  return std::fabs(a.value - b.value) <= 3.0 * (a.error + b.error) + 1e-12;
}

PredictionReport predict_and_compare(const forms::FormSystem& f,
                                     const forms::RankCertificate& cert,
                                     const CountConfig& config, std::uint64_t Q) {
  PredictionReport rep;
  auto series = local::truncated_singular_series(f, Q);
  rep.singular_series = series.value;
  auto jw = singular_integral_gamma(f, config.weight, std::max<double>(4.0, Q));
  rep.singular_integral = jw.value;
  rep.varpi_over_k = 1.0;
  if (!config.k.empty()) {
    double ktilde = 1.0;
    bool nontrivial = false;
    for (auto ki : config.k) {
      ktilde *= static_cast<double>(ki);
      nontrivial |= ki > 1;
    }
    if (nontrivial)
      rep.varpi_over_k = local::varpi_of_vector(f, config.k, 2).get_d() / ktilde;
  }
  rep.main_term = rep.singular_series * rep.singular_integral * rep.varpi_over_k *
                  std::pow(config.B, f.n - f.R * f.d);
  auto eps = constants::compute_eps_matrix(cert.K, f.d, f.R);
  std::vector<std::uint64_t> k = config.k.empty() ? std::vector<std::uint64_t>(f.n, 1) : config.k;
  rep.error_budget = error_budget_E(eps, config.B, k);
  rep.measured = weighted_count(f, config);
  rep.ratio = rep.main_term != 0 ? rep.measured / rep.main_term : 0.0;
  return rep;
}

double error_budget_E(const constants::EpsMatrix& eps, double B,
                      std::span<const std::uint64_t> m) {
  if (m.empty()) throw DimensionError("E(B; m) needs a nonempty vector");
  double mmax = 0, mmin = 1e300;
  for (auto mi : m) {
    mmax = std::max(mmax, static_cast<double>(mi));
    mmin = std::min(mmin, static_cast<double>(mi));
  }
  double total = 0;
  for (int i = 1; i <= 3; ++i) {
    total += std::pow(B, -eps.eps(i, 1).get_d()) * std::pow(mmax, eps.eps(i, 2).get_d()) *
             std::pow(mmin, eps.eps(i, 3).get_d());
  }
  return total;
}

std::optional<WTrick> find_w_trick(const forms::FormSystem& f) {
  // candidate W values: prod_{p <= z0} p^m for z0 in {2,3,5,7}, m in {1,2}
  std::vector<std::uint64_t> cands;
  for (int m = 1; m <= 2; ++m) {
    std::uint64_t w = 1;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull}) {
      std::uint64_t pm = 1;
      for (int i = 0; i < m; ++i) pm *= p;
      w *= pm;
      cands.push_back(w);
    }
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  for (std::uint64_t W : cands) {
    double states = std::pow(static_cast<double>(W), f.n);
    if (states > static_cast<double>(enumeration_budget())) continue;
    // search y in [1, W]^n with gcd(y~, W) = 1 and f(y) = 0 mod W
    std::vector<std::int64_t> y(f.n, 1);
    while (true) {
      std::uint64_t prod = 1;
      for (auto yi : y) prod = (prod * static_cast<std::uint64_t>(yi)) % W;
      if (std::gcd(prod == 0 ? W : prod, W) == 1) {
        bool zero = true;
        for (const auto& p : f.polys)
          if (p.eval_mod(y, static_cast<std::int64_t>(W)) != 0) {
            zero = false;
            break;
          }
        if (zero) {
          WTrick out;
          out.W = W;
          out.y = y;
          return out;
        }
      }
      int i = f.n - 1;
      while (i >= 0 && ++y[i] > static_cast<std::int64_t>(W)) y[i] = 1, --i;
      if (i < 0) break;
    }
  }
  return std::nullopt;
}

std::vector<double> find_real_point(const forms::FormSystem& f) {
  std::mt19937_64 rng(0x5eedf00dULL);  // deterministic search
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  auto naturals = f.natural_parts();
  auto eval_at = [&](const forms::Poly& p, const std::vector<double>& u) {
    double g = 0;
    for (const auto& t : p.terms()) {
      double term = t.coeff.get_d();
      for (int i = 0; i < f.n; ++i)
        for (unsigned e = 0; e < t.exps[i]; ++e) term *= u[i];
      g += term;
    }
    return g;
  };
  auto grad_at = [&](const forms::Poly& p, const std::vector<double>& u, int i) {
    double g = 0;
    for (const auto& t : p.terms()) {
      if (t.exps[i] == 0) continue;
      double term = t.coeff.get_d() * t.exps[i];
      for (int v = 0; v < f.n; ++v) {
        unsigned e = t.exps[v] - (v == i ? 1 : 0);
        for (unsigned k = 0; k < e; ++k) term *= u[v];
      }
      g += term;
    }
    return g;
  };
  for (int attempt = 0; attempt < 400; ++attempt) {
    std::vector<double> u(f.n);
    for (auto& ui : u) ui = unif(rng);
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
      // Gauss-Newton step: solve (J J^T) lam = F, u -= J^T lam
      std::vector<std::vector<double>> J(f.R, std::vector<double>(f.n));
      std::vector<double> F(f.R);
      double resid = 0;
      for (int r = 0; r < f.R; ++r) {
        F[r] = eval_at(naturals[r], u);
        resid = std::max(resid, std::fabs(F[r]));
        for (int i = 0; i < f.n; ++i) J[r][i] = grad_at(naturals[r], u, i);
      }
      if (resid < 1e-12) {
        ok = true;
        break;
      }
      // normal equations, tiny R: Gaussian elimination
      std::vector<std::vector<double>> A(f.R, std::vector<double>(f.R + 1, 0.0));
      for (int r = 0; r < f.R; ++r) {
        for (int s = 0; s < f.R; ++s)
          for (int i = 0; i < f.n; ++i) A[r][s] += J[r][i] * J[s][i];
        A[r][f.R] = F[r];
      }
      bool singular = false;
      for (int col = 0; col < f.R; ++col) {
        int piv = col;
        for (int r = col + 1; r < f.R; ++r)
          if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-12) {
          singular = true;
          break;
        }
        std::swap(A[col], A[piv]);
        for (int r = 0; r < f.R; ++r) {
          if (r == col) continue;
          double factor = A[r][col] / A[col][col];
          for (int c = col; c <= f.R; ++c) A[r][c] -= factor * A[col][c];
        }
      }
      if (singular) break;
      for (int r = 0; r < f.R; ++r) {
        double lam = A[r][f.R] / A[r][r];
        for (int i = 0; i < f.n; ++i) u[i] -= J[r][i] * lam;
      }
      for (double ui : u)
        if (!(ui > 1e-3 && ui < 1.0 - 1e-3)) it = 1000;  // left the box, restart
    }
    if (!ok) continue;
    // gradient-rank check at the point
    double gnorm = 0;
    for (int r = 0; r < f.R; ++r)
      for (int i = 0; i < f.n; ++i) gnorm += std::pow(grad_at(naturals[r], u, i), 2);
    bool inside = true;
    for (double ui : u) inside &= ui > 0.02 && ui < 0.98;
    if (inside && gnorm > 1e-8) return u;
  }
  throw DomainError("no non-singular real zero found in (0,1)^n");
}

double bump_eta(std::span<const double> zeta) {
  double cap = 1e9;
  for (double zi : zeta) cap = std::min(cap, std::min(zi / 2, (1 - zi) / 2));
  cap /= 2;
  if (cap <= 0) throw DomainError("point leaves no room for a bump");
  double eta = 1.0;
  while (eta > cap) eta /= 2;
  return eta;
}

std::vector<double> bump_center(std::span<const double> zeta) {
  double sup = 0;
  for (double zi : zeta) sup = std::max(sup, std::fabs(zi));
  if (sup == 0) throw DomainError("zero vector has no direction");
  std::vector<double> c;
  c.reserve(zeta.size());
  for (double zi : zeta) c.push_back(zi / (2 * sup));
  return c;
}

}  // namespace aplab::counting
