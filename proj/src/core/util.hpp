#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aplab {

using Int = mpz_class;
using Rat = mpq_class;

// Error taxonomy; the C API maps each type onto a status code.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IdentityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rat make_rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline Rat rat_pow(const Rat& base, long e) {
  Rat r;
  if (e >= 0) {
    mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
  } else {
    if (base == 0) throw DomainError("rat_pow: zero base with negative exponent");
    mpz_pow_ui(r.get_num_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(-e));
    mpz_pow_ui(r.get_den_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(-e));
  }
  r.canonicalize();
  return r;
}

inline Int int_pow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

// Serialized as "num/den" (plain integer when den == 1), the exact wire format
// used in every report.
inline std::string rat_str(const Rat& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string int_str(const Int& z) { return z.get_str(); }

// Enumeration budget (number of visited states). Overridable via APLAB_BUDGET.
std::uint64_t enumeration_budget();

// Worker count for data-parallel loops. Overridable via APLAB_WORKERS.
unsigned worker_count();

void check_budget(double states, const std::string& what);

// Deterministic parallel map-reduce over [0, count): each chunk owns a private
// accumulator, merge happens in chunk order regardless of scheduling.
template <typename Acc>
Acc parallel_reduce(std::uint64_t count, Acc init,
                    const std::function<void(std::uint64_t, std::uint64_t, Acc&)>& body,
                    const std::function<void(Acc&, const Acc&)>& merge) {
  unsigned workers = worker_count();
  if (workers <= 1 || count < 2 * workers) {
    Acc acc = init;
    body(0, count, acc);
    return acc;
  }
  std::vector<Acc> partial(workers, init);
  std::vector<std::thread> threads;
  std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = std::min<std::uint64_t>(count, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&, w, lo, hi] { body(lo, hi, partial[w]); });
  }
  for (auto& t : threads) t.join();
  Acc acc = init;
  for (unsigned w = 0; w < workers; ++w) merge(acc, partial[w]);
  return acc;
}

// Compensated (Kahan) accumulator; merging keeps determinism when reductions
// happen in fixed order.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct KahanComplex {
  Kahan re, im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

}  // namespace aplab
