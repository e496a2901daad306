#include "core/arith.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

namespace aplab::arith {

namespace {

constexpr std::uint32_t kTableLimit = 1000000;

std::vector<std::uint32_t> build_primes() {
  std::vector<bool> composite(kTableLimit + 1, false);
  std::vector<std::uint32_t> primes;
  for (std::uint32_t i = 2; i <= kTableLimit; ++i) {
    if (!composite[i]) {
      primes.push_back(i);
      for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= kTableLimit; j += i)
        composite[j] = true;
    }
  }
  return primes;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool miller_rabin(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic witness set for 64-bit inputs.
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

std::uint64_t pollard_brent(std::uint64_t n) {
  if ((n & 1) == 0) return 2;
  std::uint64_t c = 1;
  while (true) {
    std::uint64_t x = 2, y = 2, d = 1;
    std::uint64_t saved = y;
    int power = 1, lam = 1;
    auto step = [&](std::uint64_t v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      if (lam == power) {
        x = y;
        power *= 2;
        lam = 0;
        saved = y;
      }
      y = step(y);
      ++lam;
      std::uint64_t diff = x > y ? x - y : y - x;
      if (diff == 0) break;
      d = std::gcd(diff, n);
    }
    (void)saved;
    if (d != 1 && d != n) return d;
    ++c;  // cycle degenerated, retry with another offset
  }
}

void factor_into(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (miller_rabin(n)) {
    out.push_back(n);
    return;
  }
  std::uint64_t d = pollard_brent(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

const std::vector<std::uint32_t>& prime_table() {
  static const std::vector<std::uint32_t> primes = build_primes();
  return primes;
}

FactorizationView factorize(std::uint64_t m) {
  if (m == 0) throw DomainError("factorize: m must be positive");
  FactorizationView out;
  out.m = m;
  std::vector<std::uint64_t> primes;
  for (std::uint32_t p : prime_table()) {
    if (static_cast<std::uint64_t>(p) * p > m) break;
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  }
  if (m > 1) {
    if (m <= static_cast<std::uint64_t>(kTableLimit) * kTableLimit && m > 1 &&
        (m < kTableLimit || miller_rabin(m))) {
      primes.push_back(m);
    } else {
      factor_into(m, primes);
    }
  }
  std::sort(primes.begin(), primes.end());
  for (std::uint64_t p : primes) {
    if (!out.factors.empty() && out.factors.back().first == p)
      ++out.factors.back().second;
    else
      out.factors.emplace_back(p, 1);
  }
  return out;
}

std::uint64_t least_prime_factor(std::uint64_t m) {
  if (m == 0) throw DomainError("least_prime_factor: m must be positive");
  if (m == 1) return 1;
  for (std::uint32_t p : prime_table()) {
    if (static_cast<std::uint64_t>(p) * p > m) return m;
    if (m % p == 0) return p;
  }
  return factorize(m).factors.front().first;
}

int omega_count(std::uint64_t m) {
  auto f = factorize(m);
  int total = 0;
  for (auto& [p, e] : f.factors) total += e;
  return total;
}

int nu_count(std::uint64_t m) { return static_cast<int>(factorize(m).factors.size()); }

std::uint64_t radical(std::uint64_t m) {
  auto f = factorize(m);
  std::uint64_t r = 1;
  for (auto& [p, e] : f.factors) r *= p;
  return r;
}

bool is_prime(std::uint64_t m) { return miller_rabin(m); }

std::uint64_t mobius_sign(std::uint64_t m, bool& squarefree) {
  auto f = factorize(m);
  squarefree = true;
  for (auto& [p, e] : f.factors)
    if (e > 1) squarefree = false;
  return f.factors.size();
}

ProjectivePoint make_projective(std::span<const std::int64_t> coords) {
  if (coords.empty()) throw DomainError("projective point needs at least one coordinate");
  std::uint64_t g = 0;
  for (std::int64_t c : coords) g = std::gcd(g, static_cast<std::uint64_t>(c < 0 ? -c : c));
  if (g == 0) throw DomainError("projective point cannot be the zero vector");
  int sign = 0;
  for (std::int64_t c : coords) {
    if (c != 0) {
      sign = c > 0 ? 1 : -1;
      break;
    }
  }
  ProjectivePoint x;
  x.coords.reserve(coords.size());
  for (std::int64_t c : coords) x.coords.push_back(sign * (c / static_cast<std::int64_t>(g)));
  return x;
}

SaturationLevel saturation_L(const ProjectivePoint& x) {
  SaturationLevel best;
  for (std::int64_t c : x.coords) {
    std::uint64_t a = static_cast<std::uint64_t>(c < 0 ? -c : c);
    if (a <= 1) continue;  // units contribute nothing to the max
    std::uint64_t p = least_prime_factor(a);
    double ratio = std::log(static_cast<double>(a)) / std::log(static_cast<double>(p));
    if (ratio > best.value) {
      best.value = ratio;
      best.witness_abs = a;
      best.witness_p = p;
    }
  }
  return best;
}

namespace {

// log a / log p <= s/t  <=>  a^t <= p^s (a, p >= 2; s, t >= 1), exact.
bool log_ratio_leq(std::uint64_t a, std::uint64_t p, const Rat& u) {
  if (u < 0) return false;
  Int lhs = int_pow(Int(static_cast<unsigned long>(a)),
                    mpz_get_ui(u.get_den_mpz_t()));
  Int rhs = int_pow(Int(static_cast<unsigned long>(p)),
                    mpz_get_ui(u.get_num_mpz_t()));
  return lhs <= rhs;
}

}  // namespace

bool saturation_leq(const ProjectivePoint& x, const Rat& u) {
  for (std::int64_t c : x.coords) {
    std::uint64_t a = static_cast<std::uint64_t>(c < 0 ? -c : c);
    if (a <= 1) continue;
    // The least prime factor gives the largest ratio for this coordinate.
    if (!log_ratio_leq(a, least_prime_factor(a), u)) return false;
  }
  return true;
}

bool saturation_geq(const ProjectivePoint& x, const Rat& u) {
  if (u <= 0) return true;
  for (std::int64_t c : x.coords) {
    std::uint64_t a = static_cast<std::uint64_t>(c < 0 ? -c : c);
    if (a <= 1) continue;
    std::uint64_t p = least_prime_factor(a);
    // log a / log p >= s/t  <=>  a^t >= p^s
    Int lhs = int_pow(Int(static_cast<unsigned long>(a)), mpz_get_ui(u.get_den_mpz_t()));
    Int rhs = int_pow(Int(static_cast<unsigned long>(p)), mpz_get_ui(u.get_num_mpz_t()));
    if (lhs >= rhs) return true;
  }
  return false;
}

int omega_projective(const ProjectivePoint& x) {
  int total = 0;
  for (std::int64_t c : x.coords) {
    std::uint64_t a = static_cast<std::uint64_t>(c < 0 ? -c : c);
    if (a == 0) throw DomainError("omega_projective needs all coordinates nonzero");
    total += omega_count(a);
  }
  return total;
}

namespace {

// Dense Buchstab table on [1, kBuchstabMax], step 1/1024, filled by RK4 with
// cubic history interpolation.  The closed forms cover [1, 3].
constexpr double kBuchstabMax = 64.0;
constexpr int kPerUnit = 1024;

double buchstab_closed(double u) {
  if (u < 1.0) throw DomainError("buchstab_w needs u >= 1");
  if (u <= 2.0) return 1.0 / u;
  return (1.0 + std::log(u - 1.0)) / u;  // valid through u = 3
}

struct BuchstabTable {
  std::vector<double> w;  // w[i] = value at u = 1 + i/kPerUnit
  double at(double u) const {
    if (u <= 3.0) return buchstab_closed(u);
    double idx = (u - 1.0) * kPerUnit;
    std::size_t i = static_cast<std::size_t>(idx);
    if (i + 2 >= w.size()) throw DomainError("buchstab_w: u beyond tabulated range");
    // Catmull-Rom through the four surrounding knots.
    double t = idx - static_cast<double>(i);
    double p0 = w[i > 0 ? i - 1 : 0], p1 = w[i], p2 = w[i + 1], p3 = w[i + 2];
    double a = 2 * p1;
    double b = p2 - p0;
    double c = 2 * p0 - 5 * p1 + 4 * p2 - p3;
    double d = -p0 + 3 * p1 - 3 * p2 + p3;
    return 0.5 * (a + b * t + c * t * t + d * t * t * t);
  }
};

BuchstabTable build_buchstab() {
  BuchstabTable tab;
  const double h = 1.0 / kPerUnit;
  std::size_t count = static_cast<std::size_t>((kBuchstabMax - 1.0) * kPerUnit) + 1;
  tab.w.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = 1.0 + static_cast<double>(i) * h;
    if (u <= 3.0 + 1e-12)
      tab.w[i] = buchstab_closed(std::min(u, 3.0));
    else
      tab.w[i] = 0.0;
  }
  // w'(u) = (w(u-1) - w(u)) / u.  The lag term at half-steps is interpolated
  // from already-filled knots (the lag of 1 unit keeps those behind the
  // frontier).
  auto lag = [&](double u) {
    if (u - 1.0 <= 3.0) return buchstab_closed(u - 1.0);
    return tab.at(u - 1.0);
  };
  std::size_t start = static_cast<std::size_t>(2.0 * kPerUnit);  // u = 3.0
  for (std::size_t i = start; i + 1 < tab.w.size(); ++i) {
    double u = 1.0 + static_cast<double>(i) * h;
    double w = tab.w[i];
    auto f = [&](double uu, double ww) { return (lag(uu) - ww) / uu; };
    double k1 = f(u, w);
    double k2 = f(u + h / 2, w + h / 2 * k1);
    double k3 = f(u + h / 2, w + h / 2 * k2);
    double k4 = f(u + h, w + h * k3);
    tab.w[i + 1] = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return tab;
}

const BuchstabTable& buchstab_table() {
  static const BuchstabTable tab = build_buchstab();
  return tab;
}

}  // namespace

double buchstab_w(double u) {
  if (u < 1.0) throw DomainError("buchstab_w needs u >= 1");
  if (u <= 3.0) return buchstab_closed(u);
  if (u > kBuchstabMax - 0.01) throw DomainError("buchstab_w tabulated only up to u = 64");
  return buchstab_table().at(u);
}

double rough_vs_almostprime_ratio(double x, int k, double u) {
  // needs log log x > 0
  if (x <= std::exp(1.0) + 1e-12)
    throw DomainError("rough_vs_almostprime_ratio needs x > e");
  if (k < 2) throw DomainError("rough_vs_almostprime_ratio needs k >= 2");
  if (u <= 1.0) throw DomainError("rough_vs_almostprime_ratio needs u > 1");
  double loglog = std::log(std::log(x));
  double fact = 1.0;
  for (int i = 2; i <= k - 1; ++i) fact *= i;
  return fact * u * buchstab_w(u) / std::pow(loglog, k - 1);
}

}  // namespace aplab::arith
