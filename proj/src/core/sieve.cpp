#include "core/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "core/arith.hpp"

namespace aplab::sieve {

namespace {

constexpr double kGamma = 0.57721566490153286060;
const double kTwoEGamma = 2.0 * std::exp(kGamma);

// Dense tables of M(s) = s F(s) and m(s) = s f(s), step 1/4096.
struct LinearTable {
  static constexpr int kPerUnit = 4096;
  static constexpr double kMax = 64.0;
  std::vector<double> M, m;  // index i <-> s = i / kPerUnit

  static double closed_M(double) { return kTwoEGamma; }  // s <= 3
  static double closed_m(double s) { return s <= 2.0 ? 0.0 : kTwoEGamma * std::log(s - 1.0); }

  double interp(const std::vector<double>& a, double s) const {
    double idx = s * kPerUnit;
    std::size_t i = static_cast<std::size_t>(idx);
    if (i + 1 >= a.size()) return a.back();
    double t = idx - static_cast<double>(i);
    return a[i] * (1 - t) + a[i + 1] * t;
  }
};

LinearTable build_linear_table() {
  LinearTable tab;
  const double h = 1.0 / LinearTable::kPerUnit;
  std::size_t count = static_cast<std::size_t>(LinearTable::kMax * LinearTable::kPerUnit) + 1;
  tab.M.resize(count);
  tab.m.resize(count);
  std::size_t i3 = static_cast<std::size_t>(3.0 * LinearTable::kPerUnit);
  std::size_t i4 = static_cast<std::size_t>(4.0 * LinearTable::kPerUnit);
  for (std::size_t i = 0; i < count; ++i) {
    double s = static_cast<double>(i) * h;
    tab.M[i] = i <= i3 ? LinearTable::closed_M(s) : 0.0;
    tab.m[i] = i <= i4 ? LinearTable::closed_m(s) : 0.0;
  }
  // March (sF)' = f(s-1) = m(s-1)/(s-1) and (sf)' = F(s-1) = M(s-1)/(s-1);
  // the unit lag keeps every needed value behind the frontier.
  auto f_of = [&](std::size_t i) {
    double s = static_cast<double>(i) * h;
    return s <= 2.0 ? 0.0 : tab.m[i] / s;
  };
  auto F_of = [&](std::size_t i) {
    double s = static_cast<double>(i) * h;
    return s <= 0.0 ? 0.0 : tab.M[i] / s;
  };
  std::size_t lag = LinearTable::kPerUnit;
  for (std::size_t i = i3; i + 1 < count; ++i) {
    if (i >= i3) tab.M[i + 1] = tab.M[i] + 0.5 * h * (f_of(i - lag) + f_of(i + 1 - lag));
    if (i >= i4)
      tab.m[i + 1] = tab.m[i] + 0.5 * h * (F_of(i - lag) + F_of(i + 1 - lag));
    else if (i + 1 <= i4)
      tab.m[i + 1] = LinearTable::closed_m(static_cast<double>(i + 1) * h);
  }
  return tab;
}

const LinearTable& linear_table() {
  static const LinearTable tab = build_linear_table();
  return tab;
}

}  // namespace

LinearFF linear_sieve_fF(double s) {
  if (s <= 0) throw DomainError("linear sieve functions need s > 0");
  LinearFF out;
  if (s <= 3.0)
    out.F = kTwoEGamma / s;
  else if (s >= LinearTable::kMax)
    out.F = 1.0;
  else
    out.F = linear_table().interp(linear_table().M, s) / s;
  if (s <= 2.0)
    out.f = 0.0;
  else if (s <= 4.0)
    out.f = kTwoEGamma * std::log(s - 1.0) / s;
  else if (s >= LinearTable::kMax)
    out.f = 1.0;
  else
    out.f = linear_table().interp(linear_table().m, s) / s;
  return out;
}

double psi_n(int n, double s) {
  if (n < 1) throw DomainError("psi_n needs n >= 1");
  auto [f, F] = linear_sieve_fF(s);
  return n * f - (n - 1) * std::exp(n * std::log(F));
}

ThresholdResult vector_sieve_threshold(int n) {
  if (n < 2) throw DomainError("vector_sieve_threshold needs n >= 2");
  auto holds = [n](double s) {
    auto [f, F] = linear_sieve_fF(s);
    return std::exp(n * std::log(F)) < (1.0 + 1.0 / (n - 1)) * f;
  };
  double lo = 2.0, hi = 4.0;
  while (!holds(hi)) {
    lo = hi;
    hi *= 1.5;
    if (hi > LinearTable::kMax - 1)
      throw DomainError("vector-sieve threshold beyond the tabulated range");
  }
  while (hi - lo > 1e-3) {
    double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  ThresholdResult out;
  out.s = hi;
  out.guide = 3.0 * std::log(static_cast<double>(n)) / std::log(std::log(static_cast<double>(n)));
  return out;
}

long long SieveWeights::convolve(std::uint64_t m) const {
  long long acc = 0;
  for (const auto& [d, w] : lambda) {
    if (d > m) break;
    if (m % d == 0) acc += w;
  }
  return acc;
}

std::vector<long long> SieveWeights::convolve_table(std::uint64_t M) const {
  std::vector<long long> table(M + 1, 0);
  for (const auto& [d, w] : lambda)
    for (std::uint64_t m = d; m <= M; m += d) table[m] += w;
  if (!table.empty()) table[0] = 0;
  return table;
}

std::uint64_t SieveWeights::prime_product() const {
  std::uint64_t prod = 1;
  for (std::uint32_t p : arith::prime_table()) {
    if (p > z) break;
    if (p <= z0) continue;
    if (prod > std::numeric_limits<std::uint64_t>::max() / p)
      throw DomainError("P(z0, z) exceeds 64 bits");
    prod *= p;
  }
  return prod;
}

SieveWeights beta_sieve_weights(double D, std::uint64_t z0, std::uint64_t z, WeightKind kind) {
  if (D < 2 || z < 2 || static_cast<double>(z) > D)
    throw DomainError("beta sieve needs 2 <= z <= D");
  SieveWeights out;
  out.kind = kind;
  out.D = D;
  out.z0 = z0;
  out.z = z;
  std::vector<std::uint64_t> primes;  // decreasing
  for (std::uint32_t p : arith::prime_table()) {
    if (p > z) break;
    if (p > z0) primes.push_back(p);
  }
  std::sort(primes.rbegin(), primes.rend());
  if (primes.empty()) throw DomainError("empty sieving range (z0, z]");

  out.lambda[1] = 1;
  // DFS over decreasing chains; position m = depth + 1 carries the parity
  // condition p_1...p_{m-1} p_m^3 <= D on odd (lower) or even (upper) m.
  std::function<void(std::size_t, std::uint64_t, int)> dfs = [&](std::size_t start,
                                                                 std::uint64_t prod, int depth) {
    for (std::size_t idx = start; idx < primes.size(); ++idx) {
      std::uint64_t p = primes[idx];
      int m = depth + 1;
      double cond = static_cast<double>(prod) * std::pow(static_cast<double>(p), 3);
      // The lower sieve must keep every single prime (odd positions free),
      // so its truncation binds at even positions; the upper at odd ones.
      bool constrained = (kind == WeightKind::Lower) ? (m % 2 == 0) : (m % 2 == 1);
      if (constrained && cond > D) continue;
      std::uint64_t d = prod * p;
      out.lambda[d] = (m % 2 == 0) ? 1 : -1;
      dfs(idx + 1, d, m);
    }
  };
  dfs(0, 1, 0);
  return out;
}

long long vector_sieve_combine(std::span<const std::pair<long long, long long>> lower_upper) {
  int n = static_cast<int>(lower_upper.size());
  if (n < 1) throw DimensionError("vector_sieve_combine needs at least one factor");
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    long long prod = lower_upper[i].first;
    for (int j = 0; j < n; ++j)
      if (j != i) prod *= lower_upper[j].second;
    total += prod;
  }
  long long all_upper = 1;
  for (int i = 0; i < n; ++i) all_upper *= lower_upper[i].second;
  return total - (n - 1) * all_upper;
}

long long vector_sieve_combine(std::span<const std::pair<SieveWeights, SieveWeights>> weights,
                               std::span<const std::uint64_t> m) {
  if (weights.size() != m.size()) throw DimensionError("weights/m length mismatch");
  std::vector<std::pair<long long, long long>> vals;
  vals.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    vals.emplace_back(weights[i].first.convolve(m[i]), weights[i].second.convolve(m[i]));
  return vector_sieve_combine(vals);
}

namespace {

double interp_linear(const std::vector<double>& a, double step, double s, double fallback) {
  double idx = s / step;
  if (idx <= 1.0) return a.size() > 1 ? a[1] : fallback;
  std::size_t i = static_cast<std::size_t>(idx);
  if (i + 1 >= a.size()) return fallback;
  double t = idx - static_cast<double>(i);
  return a[i] * (1 - t) + a[i + 1] * t;
}

}  // namespace

double SieveFunctionTable::f_at(double s) const {
  if (s <= 0) throw DomainError("sieve function argument must be positive");
  if (s <= beta) return 0.0;
  return interp_linear(f, grid_step, s, 1.0);
}

double SieveFunctionTable::F_at(double s) const {
  if (s <= 0) throw DomainError("sieve function argument must be positive");
  return interp_linear(F, grid_step, s, 1.0);
}

SieveFunctionTable dhr_sieve_functions(double kappa, double s_max) {
  if (kappa < 1.0) throw DomainError("dhr_sieve_functions needs kappa >= 1");
  if (s_max < 3.0) s_max = 3.0;
  SieveFunctionTable tab;
  tab.kappa = kappa;
  tab.beta_is_estimate = kappa != 1.0;
  tab.grid_step = 1.0 / 1024;
  tab.s_max = std::max({s_max + 2.0, 2.6 * kappa + 18.0, 30.0});
  const double h = tab.grid_step;
  const double S = tab.s_max;
  const int N = static_cast<int>(S / h);

  // Ankeny-Onishi sigma: sigma(u) = (u/2)^kappa e^{-gamma kappa} / Gamma(kappa+1)
  // on (0,2], then sigma'(u) = kappa (sigma(u) - sigma(u-2)) / u.
  std::vector<double> sval(N + 1), sig(N + 1, 0.0);
  double lg = std::lgamma(kappa + 1.0);
  for (int i = 0; i <= N; ++i) {
    sval[i] = i * h;
    if (i > 0 && sval[i] <= 2.0)
      sig[i] = std::exp(kappa * std::log(sval[i] / 2.0) - kGamma * kappa - lg);
  }
  auto sig_at = [&](double x) -> double {
    if (x <= 0) return 0.0;
    int i = std::min(static_cast<int>(x / h), N - 1);
    double t = x / h - i;
    return sig[i] * (1 - t) + sig[i + 1] * t;
  };
  for (int i = static_cast<int>(2.0 / h); i < N; ++i) {
    double u = sval[i];
    double k1 = kappa * (sig[i] - sig_at(u - 2.0)) / u;
    double mid = sig[i] + 0.5 * h * k1;
    double k2 = kappa * (mid - sig_at(u + 0.5 * h - 2.0)) / (u + 0.5 * h);
    sig[i + 1] = sig[i] + h * k2;
  }

  std::vector<double>& F = tab.F;
  std::vector<double>& f = tab.f;
  F.assign(N + 1, 1.0);
  f.assign(N + 1, 0.0);
  for (int i = 1; i <= N; ++i) F[i] = std::max(1.0, 1.0 / std::max(sig[i], 1e-300));
  F[0] = F[1];

  auto lag = [&](const std::vector<double>& a, double x) -> double {
    if (x <= h) return a[1];
    if (x >= S) return 1.0;
    int i = static_cast<int>(x / h);
    if (i >= N) return a[N];
    double t = x / h - i;
    return a[i] * (1 - t) + a[i + 1] * t;
  };

  std::vector<double> g(N + 1), T(N + 1), fnew(N + 1), Fnew(N + 1);
  std::vector<double> raw(N + 1);
  double beta = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    // f update: 1 - kappa s^-k Int_s^inf u^{k-1}(F(u-1)-1) du, clamped at 0
    for (int i = 1; i <= N; ++i) g[i] = std::pow(sval[i], kappa - 1.0) * (lag(F, sval[i] - 1.0) - 1.0);
    T[N] = 0.0;
    for (int i = N - 1; i >= 1; --i) T[i] = T[i + 1] + 0.5 * h * (g[i] + g[i + 1]);
    beta = 0.0;
    for (int i = 1; i <= N; ++i) {
      raw[i] = 1.0 - kappa * std::pow(sval[i], -kappa) * T[i];
      fnew[i] = std::max(0.0, raw[i]);
      if (raw[i] <= 0.0) beta = sval[i];
    }
    fnew[0] = 0.0;
    // F update, capped by the Ankeny-Onishi profile
    for (int i = 1; i <= N; ++i)
      g[i] = std::pow(sval[i], kappa - 1.0) * (1.0 - lag(fnew, sval[i] - 1.0));
    T[N] = 0.0;
    for (int i = N - 1; i >= 1; --i) T[i] = T[i + 1] + 0.5 * h * (g[i] + g[i + 1]);
    double delta = 0.0;
    for (int i = 1; i <= N; ++i) {
      double cand = 1.0 + kappa * std::pow(sval[i], -kappa) * T[i];
      double ao = 1.0 / std::max(sig[i], 1e-300);
      Fnew[i] = std::min(cand, std::max(ao, 1.0));
      delta = std::max(delta, std::fabs(Fnew[i] - F[i]));
    }
    Fnew[0] = Fnew[1];
    F.swap(Fnew);
    f.swap(fnew);
    if (delta < 1e-13 && iter > 5) break;
  }

  // Refine beta: bisect the sign change of the raw (unclamped) f update
  // between the bracketing grid points.
  int ib = static_cast<int>(beta / h);
  if (ib >= 1 && ib + 1 <= N && raw[ib] <= 0.0 && raw[ib + 1] > 0.0) {
    double lo = sval[ib], hi = sval[ib + 1];
    double flo = raw[ib], fhi = raw[ib + 1];
    for (int it = 0; it < 40 && hi - lo > 1e-7; ++it) {
      double mid = 0.5 * (lo + hi);
      double t = (mid - sval[ib]) / h;
      double val = flo * (1 - t) + fhi * t;  // linear model on the cell
      (val <= 0 ? lo : hi) = mid;
    }
    beta = 0.5 * (lo + hi);
  }
  tab.beta = beta;
  return tab;
}

double weighted_sieve_N(double u, double v, double kappa, double mu0, double tau,
                        const SieveFunctionTable& table) {
  if (!(tau > 0) || tau > 1) throw HypothesisError("weighted sieve needs tau in (0, 1]");
  if (!(1.0 / tau < u)) throw HypothesisError("weighted sieve needs u > 1/tau");
  if (!(u <= v)) throw HypothesisError("weighted sieve needs u <= v");
  double base = tau * mu0 * u - 1.0;
  if (u == v) return base;  // empty integral, no f_kappa evaluation needed
  if (!(tau * v > table.beta))
    throw HypothesisError("weighted sieve needs tau v > beta_kappa = " +
                          std::to_string(table.beta));
  double fv = table.f_at(tau * v);
  if (fv <= 0) throw HypothesisError("f_kappa(tau v) vanishes; enlarge v");
  auto integrand = [&](double s) {
    return table.F_at(v * (tau - 1.0 / s)) * (1.0 - u / s) / s;
  };
  // Adaptive Simpson, relative target 1e-4 (absolute floor prevents stalls).
  std::function<double(double, double, double, double, double, double, int)> simpson =
      [&](double a, double b, double fa, double fm, double fb, double whole, int depth) {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = integrand(lm), frm = integrand(rm);
        double left = (m - a) / 6 * (fa + 4 * flm + fm);
        double right = (b - m) / 6 * (fm + 4 * frm + fb);
        if (depth <= 0 || std::fabs(left + right - whole) < 1e-4 * std::fabs(whole) + 1e-12)
          return left + right;
        return simpson(a, m, fa, flm, fm, left, depth - 1) +
               simpson(m, b, fm, frm, fb, right, depth - 1);
      };
  double fa = integrand(u), fb = integrand(v), fm = integrand(0.5 * (u + v));
  double whole = (v - u) / 6 * (fa + 4 * fm + fb);
  double integral = simpson(u, v, fa, fm, fb, whole, 30);
  return base + kappa / fv * integral;
}

double weighted_sieve_N(double u, double v, double kappa, double mu0, double tau) {
  SieveFunctionTable table = dhr_sieve_functions(kappa, std::max(tau * v + 2.0, v));
  return weighted_sieve_N(u, v, kappa, mu0, tau, table);
}

double weighted_r_simple(double kappa, double mu0, double beta) {
  if (beta <= 1) throw DomainError("weighted_r_simple needs beta > 1");
  return mu0 - 1.0 + (mu0 - kappa) * (1.0 - 1.0 / beta) + (kappa + 1.0) * std::log(beta);
}

double weighted_r_from_u(double kappa, double mu0, double tau, double u, double beta) {
  if (!(tau > 0) || !(u > 1.0 / tau)) throw DomainError("needs u > 1/tau > 0");
  double vp = (beta - 1.0) / (tau - 1.0 / u);
  if (vp <= u) throw DomainError("v' <= u: no admissible range");
  return tau * mu0 * u - 1.0 + (kappa + (u / vp) * beta) * std::log(vp / u) -
         kappa * (1.0 - u / vp);
}

}  // namespace aplab::sieve
