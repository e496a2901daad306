#include "core/local.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "core/arith.hpp"

namespace aplab::local {

namespace {

std::atomic<TestMutation> g_mutation{TestMutation::None};

std::uint64_t pow_u64(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// The system f(p^{j_1} x_1, ...) reduced mod m: per-monomial scaled
// coefficients, variables that vanished dropped.
struct ScaledSystem {
  std::uint64_t m = 1;
  std::uint64_t unit_p = 0;      // when set, variables range over units mod p only
  bool allow_prune = true;       // zero-count mode may cut subtrees; histograms must not
  int nvars = 0;                 // active variables
  int dropped = 0;               // inactive ones (free mod m)
  std::vector<int> active;       // active variable indices in the original order
  struct Term {
    std::uint64_t coeff;
    std::vector<std::pair<int, int>> powers;  // (active var slot, exponent)
    int max_slot = -1;
  };
  struct Equation {
    std::vector<Term> terms;
    std::uint64_t constant = 0;
    int complete_at = -1;  // highest slot appearing in any term
  };
  std::vector<Equation> eqs;

  std::uint64_t values_per_slot() const { return unit_p ? m - m / unit_p : m; }
};

ScaledSystem scale_system(const forms::FormSystem& f, std::uint64_t p, int level,
                          std::span<const int> j) {
  if (static_cast<int>(j.size()) != f.n) throw DimensionError("j vector length mismatch");
  for (int ji : j)
    if (ji < 0) throw DomainError("j entries must be non-negative");
  ScaledSystem s;
  s.m = pow_u64(p, level);
  Int m_int(static_cast<unsigned long>(s.m));

  std::vector<bool> used(f.n, false);
  std::vector<ScaledSystem::Equation> eqs(f.R);
  for (int r = 0; r < f.R; ++r) {
    for (const auto& t : f.polys[r].terms()) {
      // coeff * p^{sum j_i e_i} mod m
      long shift = 0;
      for (int i = 0; i < f.n; ++i) shift += static_cast<long>(j[i]) * t.exps[i];
      Int scaled = t.coeff;
      if (shift >= level)
        scaled = 0;
      else
        scaled *= int_pow(Int(static_cast<unsigned long>(p)), shift);
      scaled = ((scaled % m_int) + m_int) % m_int;
      std::uint64_t c = mpz_get_ui(scaled.get_mpz_t());
      if (c == 0) continue;
      ScaledSystem::Term term;
      term.coeff = c;
      bool constant = true;
      for (int i = 0; i < f.n; ++i) {
        if (t.exps[i] > 0) {
          term.powers.emplace_back(i, static_cast<int>(t.exps[i]));
          used[i] = true;
          constant = false;
        }
      }
      if (constant)
        eqs[r].constant = (eqs[r].constant + c) % s.m;
      else
        eqs[r].terms.push_back(std::move(term));
    }
  }
  std::vector<int> slot_of(f.n, -1);
  for (int i = 0; i < f.n; ++i) {
    if (used[i]) {
      slot_of[i] = static_cast<int>(s.active.size());
      s.active.push_back(i);
    } else {
      ++s.dropped;
    }
  }
  s.nvars = static_cast<int>(s.active.size());
  for (auto& eq : eqs) {
    for (auto& t : eq.terms) {
      for (auto& [var, e] : t.powers) {
        var = slot_of[var];
        t.max_slot = std::max(t.max_slot, var);
      }
      std::sort(t.powers.begin(), t.powers.end());
      eq.complete_at = std::max(eq.complete_at, t.max_slot);
    }
    if (eq.terms.empty()) eq.complete_at = -1;
  }
  s.eqs = std::move(eqs);
  return s;
}

// Power table pow[value * (d+1) + e] = value^e mod m; falls back to on-the-fly
// computation when the table would not fit.
struct PowTable {
  std::uint64_t m = 1;
  int maxexp = 1;
  bool tabled = false;
  std::vector<std::uint64_t> data;
  void build(std::uint64_t mod, int me) {
    m = mod;
    maxexp = me;
    tabled = m * static_cast<std::uint64_t>(me + 1) <= (std::uint64_t(1) << 25);
    if (!tabled) return;
    data.assign(static_cast<std::size_t>(m) * (me + 1), 1);
    for (std::uint64_t v = 0; v < m; ++v) {
      std::uint64_t acc = 1;
      for (int e = 1; e <= me; ++e) {
        acc = static_cast<std::uint64_t>((static_cast<unsigned __int128>(acc) * v) % m);
        data[static_cast<std::size_t>(v) * (maxexp + 1) + e] = acc;
      }
    }
  }
  std::uint64_t at(std::uint64_t v, int e) const {
    if (tabled) return data[static_cast<std::size_t>(v) * (maxexp + 1) + e];
    std::uint64_t acc = 1;
    for (int i = 0; i < e; ++i)
      acc = static_cast<std::uint64_t>((static_cast<unsigned __int128>(acc) * v) % m);
    return acc;
  }
};

// Odometer enumeration over the active variables with per-equation running
// sums; prunes once an equation is complete and nonzero.  The callback sees
// the residue vector of the system for each visited leaf.  The outermost
// slot is restricted to [lo0, hi0), which carries the data parallelism.
template <typename Leaf>
void enumerate_states_range(const ScaledSystem& s, std::uint64_t lo0, std::uint64_t hi0,
                            Leaf&& leaf) {
  int k = s.nvars;
  std::uint64_t m = s.m;
  int maxexp = 1;
  for (const auto& eq : s.eqs)
    for (const auto& t : eq.terms)
      for (const auto& [var, e] : t.powers) maxexp = std::max(maxexp, e);
  PowTable pows;
  pows.build(m, maxexp);

  int R = static_cast<int>(s.eqs.size());
  if (k == 0) {
    if (lo0 != 0) return;  // single empty state, owned by the first chunk
    std::vector<std::uint64_t> vals(R);
    for (int r = 0; r < R; ++r) vals[r] = s.eqs[r].constant % m;
    leaf(vals);
    return;
  }

  // terms grouped by their max slot
  struct Grouped {
    const ScaledSystem::Term* term;
    int eq;
  };
  std::vector<std::vector<Grouped>> by_slot(k);
  for (int r = 0; r < R; ++r)
    for (const auto& t : s.eqs[r].terms) by_slot[t.max_slot].push_back({&t, r});

  std::vector<std::uint64_t> x(k, 0);
  // partial[v][r]: running residue of equation r after assigning slots 0..v
  std::vector<std::vector<std::uint64_t>> partial(k, std::vector<std::uint64_t>(R, 0));
  std::vector<std::uint64_t> leafvals(R);

  auto recompute = [&](int v) {
    for (int r = 0; r < R; ++r)
      partial[v][r] = v > 0 ? partial[v - 1][r] : s.eqs[r].constant % m;
    for (const auto& g : by_slot[v]) {
      unsigned __int128 val = g.term->coeff;
      for (const auto& [slot, e] : g.term->powers) val = (val * pows.at(x[slot], e)) % m;
      partial[v][g.eq] = static_cast<std::uint64_t>((partial[v][g.eq] + val) % m);
    }
  };

  std::uint64_t p = s.unit_p;
  auto skip_nonunits = [&](std::uint64_t v, std::uint64_t limit) {
    if (p)
      while (v < limit && v % p == 0) ++v;
    return v;
  };

  int v = 0;
  x[0] = skip_nonunits(lo0, hi0);
  if (x[0] >= hi0) return;
  while (true) {
    recompute(v);
    bool pruned = false;
    if (s.allow_prune) {
      for (int r = 0; r < R; ++r) {
        if (s.eqs[r].complete_at == v && partial[v][r] % m != 0) {
          pruned = true;
          break;
        }
      }
    }
    if (!pruned && v + 1 < k) {
      ++v;
      x[v] = skip_nonunits(0, m);
      continue;
    }
    if (!pruned) {
      for (int r = 0; r < R; ++r) leafvals[r] = partial[v][r];
      leaf(leafvals);
    }
    // advance odometer; slot 0 wraps at hi0
    while (v >= 0) {
      std::uint64_t limit = v == 0 ? hi0 : m;
      x[v] = skip_nonunits(x[v] + 1, limit);
      if (x[v] < limit) break;
      x[v] = skip_nonunits(v == 0 ? lo0 : 0, limit);
      --v;
    }
    if (v < 0) break;
  }
}

template <typename Leaf>
void enumerate_states(const ScaledSystem& s, Leaf&& leaf) {
  enumerate_states_range(s, 0, s.m, leaf);
}

double states_cost(const ScaledSystem& s) {
  return std::pow(static_cast<double>(s.values_per_slot()), s.nvars);
}

// Connected components of active variables under shared monomials (R = 1).
std::vector<std::vector<int>> split_components(const ScaledSystem& s) {
  std::vector<int> parent(s.nvars);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  for (const auto& eq : s.eqs)
    for (const auto& t : eq.terms)
      for (std::size_t i = 1; i < t.powers.size(); ++i)
        parent[find(t.powers[i].first)] = find(t.powers[0].first);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < s.nvars; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, vars] : groups) out.push_back(vars);
  return out;
}

ScaledSystem restrict_to(const ScaledSystem& s, const std::vector<int>& slots) {
  ScaledSystem out;
  out.m = s.m;
  out.unit_p = s.unit_p;
  out.nvars = static_cast<int>(slots.size());
  out.dropped = 0;
  std::vector<int> slot_of(s.nvars, -1);
  for (std::size_t i = 0; i < slots.size(); ++i) slot_of[slots[i]] = static_cast<int>(i);
  ScaledSystem::Equation eq;
  for (const auto& t : s.eqs[0].terms) {
    if (slot_of[t.powers[0].first] < 0) continue;
    ScaledSystem::Term nt;
    nt.coeff = t.coeff;
    for (auto [var, e] : t.powers) {
      nt.powers.emplace_back(slot_of[var], e);
      nt.max_slot = std::max(nt.max_slot, slot_of[var]);
    }
    eq.terms.push_back(std::move(nt));
    eq.complete_at = std::max(eq.complete_at, eq.terms.back().max_slot);
  }
  out.eqs.push_back(std::move(eq));
  return out;
}

// Histogram of the single-equation value distribution.
std::vector<std::uint64_t> histogram_r1(const ScaledSystem& s) {
  ScaledSystem full = s;
  full.allow_prune = false;
  std::vector<std::uint64_t> h(s.m, 0);
  enumerate_states(full, [&](const std::vector<std::uint64_t>& vals) { ++h[vals[0]]; });
  return h;
}

Int count_via_split(const ScaledSystem& s) {
  auto comps = split_components(s);
  // convolution of per-component value histograms, then the residue 0 entry
  std::uint64_t m = s.m;
  std::uint64_t constant = s.eqs[0].constant % m;
  std::vector<Int> acc(m, Int(0));
  acc[constant] = 1;
  for (const auto& comp : comps) {
    ScaledSystem sub = restrict_to(s, comp);
    double cost = states_cost(sub) + static_cast<double>(m) * m;
    check_budget(cost, "split enumeration");
    auto h = histogram_r1(sub);
    std::vector<Int> next(m, Int(0));
    for (std::uint64_t v = 0; v < m; ++v) {
      if (acc[v] == 0) continue;
      for (std::uint64_t w = 0; w < m; ++w) {
        if (h[w] == 0) continue;
        next[(v + w) % m] += acc[v] * Int(static_cast<unsigned long>(h[w]));
      }
    }
    acc.swap(next);
  }
  return acc[0];
}

Int count_direct(const ScaledSystem& s) {
  check_budget(states_cost(s), "solution count mod p^l");
  std::uint64_t m = s.m;
  if (s.nvars >= 2 && states_cost(s) > 1e6 && worker_count() > 1) {
    auto result = parallel_reduce<std::uint64_t>(
        m, 0,
        [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t& acc) {
          std::uint64_t local = 0;
          enumerate_states_range(s, lo, hi, [&](const std::vector<std::uint64_t>& vals) {
            for (auto v : vals)
              if (v != 0) return;
            ++local;
          });
          acc += local;
        },
        [](std::uint64_t& a, const std::uint64_t& b) { a += b; });
    return Int(static_cast<unsigned long>(result));
  }
  std::uint64_t count = 0;
  enumerate_states(s, [&](const std::vector<std::uint64_t>& vals) {
    for (auto v : vals)
      if (v != 0) return;
    ++count;
  });
  return Int(static_cast<unsigned long>(count));
}

}  // namespace

namespace {

Int count_scaled(const ScaledSystem& s, int R, CountStrategy strategy) {
  Int free_factor = int_pow(Int(static_cast<unsigned long>(s.values_per_slot())), s.dropped);
  bool can_split = R == 1 && s.nvars >= 2 && split_components(s).size() >= 2;
  bool use_split = false;
  switch (strategy) {
    case CountStrategy::Direct:
      use_split = false;
      break;
    case CountStrategy::Split:
      if (!can_split) throw DomainError("system does not split additively");
      use_split = true;
      break;
    case CountStrategy::Auto:
      use_split = can_split && states_cost(s) > 4e6;
      break;
  }
  Int count = use_split ? count_via_split(s) : count_direct(s);
  return count * free_factor;
}

}  // namespace

Int count_solutions_mod(const forms::FormSystem& f, std::uint64_t p, int level,
                        std::span<const int> j, CountStrategy strategy) {
  if (level < 1) throw DomainError("level must be at least 1");
  if (p < 2) throw DomainError("p must be a prime");
  ScaledSystem s = scale_system(f, p, level, j);
  return count_scaled(s, f.R, strategy);
}

Int count_solutions_mod(const forms::FormSystem& f, std::uint64_t p, int level,
                        std::span<const int> j) {
  return count_solutions_mod(f, p, level, j, CountStrategy::Auto);
}

Rat sigma_p_approx(const forms::FormSystem& f, std::uint64_t p, int level) {
  std::vector<int> j(f.n, 0);
  return delta_approx(f, p, j, level);
}

Rat delta_approx(const forms::FormSystem& f, std::uint64_t p, std::span<const int> j, int level) {
  Int count = count_solutions_mod(f, p, level, j);
  Rat out(count);
  out /= Rat(int_pow(Int(static_cast<unsigned long>(p)),
                     static_cast<unsigned long>(level) * (f.n - f.R)));
  return out;
}

Rat varpi_approx(const forms::FormSystem& f, std::uint64_t p, std::span<const int> j, int level) {
  Rat sigma = sigma_p_approx(f, p, level);
  if (sigma == 0)
    throw DomainError("local obstruction: sigma_p approximant vanishes at p=" + std::to_string(p) +
                      ", level " + std::to_string(level));
  return delta_approx(f, p, j, level) / sigma;
}

Rat varpi_of_vector(const forms::FormSystem& f, std::span<const std::uint64_t> k, int level) {
  if (static_cast<int>(k.size()) != f.n) throw DimensionError("divisor vector length mismatch");
  std::uint64_t prod = 1;
  for (auto ki : k) {
    if (ki == 0) throw DomainError("divisor entries must be positive");
    prod *= ki;
  }
  Rat out(1);
  if (prod == 1) return out;
  auto fact = arith::factorize(prod);
  for (auto& [p, e] : fact.factors) {
    std::vector<int> j(f.n, 0);
    for (int i = 0; i < f.n; ++i) {
      std::uint64_t ki = k[i];
      while (ki % p == 0) {
        ++j[i];
        ki /= p;
      }
    }
    out *= varpi_approx(f, p, j, level);
  }
  return out;
}

void set_test_mutation(TestMutation m) { g_mutation.store(m); }

Rat g_approx(const forms::FormSystem& f, std::uint64_t p, int level) {
  Rat sigma = sigma_p_approx(f, p, level);
  if (sigma == 0)
    throw DomainError("local obstruction: sigma_p approximant vanishes at p=" + std::to_string(p));

  Int ppow = int_pow(Int(static_cast<unsigned long>(p)),
                     static_cast<unsigned long>(level) * (f.n - f.R));

  // Route (i): inclusion-exclusion over nonempty coordinate subsets.
  Rat route_ie(0);
  for (unsigned mask = 1; mask < (1u << f.n); ++mask) {
    std::vector<int> j(f.n, 0);
    int bits = 0;
    for (int i = 0; i < f.n; ++i)
      if (mask & (1u << i)) {
        j[i] = 1;
        ++bits;
      }
    Rat term(count_solutions_mod(f, p, level, j));
    term /= Rat(ppow * int_pow(Int(static_cast<unsigned long>(p)), bits));
    bool plus = (bits % 2) == 1;
    if (g_mutation.load() == TestMutation::FlipInclusionExclusionSign) plus = !plus;
    if (plus)
      route_ie += term;
    else
      route_ie -= term;
  }
  route_ie /= sigma;

  // Route (ii): direct count with p | x_1...x_n, as total solutions minus the
  // solutions with every coordinate a unit mod p.
  std::vector<int> zeros(f.n, 0);
  Int total = count_solutions_mod(f, p, level, zeros);
  ScaledSystem units = scale_system(f, p, level, zeros);
  units.unit_p = p;
  Int coprime = count_scaled(units, f.R, CountStrategy::Auto);
  Rat route_direct = Rat(total - coprime) / Rat(ppow);
  route_direct /= sigma;

  if (route_ie != route_direct)
    throw IdentityError("g(p) routes disagree: inclusion-exclusion " + rat_str(route_ie) +
                        " vs direct " + rat_str(route_direct));
  return route_direct;
}

ScalingReport delta_scaling_checks(const forms::FormSystem& f, std::uint64_t p, int level) {
  if (level <= f.d) throw DomainError("delta_scaling_checks needs level > d");
  ScalingReport rep;
  std::vector<int> ones(f.n, 1), zeros(f.n, 0);
  rep.lhs = count_solutions_mod(f, p, level, ones);
  rep.rhs = int_pow(Int(static_cast<unsigned long>(p)),
                    static_cast<unsigned long>(f.n) * f.d) *
            count_solutions_mod(f, p, level - f.d, zeros);
  rep.level_identity_ok = rep.lhs == rep.rhs;

  // Monotone scaling: for h >= j componentwise,
  // N_j(p^l) * p^{|h|} >= N_h(p^l) * p^{|j|}.
  rep.monotone_ok = true;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
  pairs.push_back({zeros, ones});
  if (f.n >= 2) {
    std::vector<int> j1(f.n, 0), h1(f.n, 1);
    j1[f.n - 1] = 1;
    pairs.push_back({j1, h1});
    std::vector<int> j2(f.n, 0), h2(f.n, 0);
    h2[0] = 1;
    pairs.push_back({j2, h2});
    pairs.push_back({j1, j1});
  }
  for (auto& [j, h] : pairs) {
    long wj = std::accumulate(j.begin(), j.end(), 0L);
    long wh = std::accumulate(h.begin(), h.end(), 0L);
    Int nj = count_solutions_mod(f, p, level, j);
    Int nh = count_solutions_mod(f, p, level, h);
    Int lhs = nj * int_pow(Int(static_cast<unsigned long>(p)), wh);
    Int rhs = nh * int_pow(Int(static_cast<unsigned long>(p)), wj);
    if (lhs < rhs) rep.monotone_ok = false;
    ++rep.pairs_checked;
  }
  return rep;
}

LocalDensityTable build_density_table(const forms::FormSystem& f, std::uint64_t p, int level) {
  LocalDensityTable t;
  t.p = p;
  t.level = level;
  std::vector<int> zeros(f.n, 0);
  t.n0 = count_solutions_mod(f, p, level, zeros);
  Int ppow = int_pow(Int(static_cast<unsigned long>(p)),
                     static_cast<unsigned long>(level) * (f.n - f.R));
  t.sigma = Rat(t.n0) / Rat(ppow);
  t.obstruction = t.sigma == 0;
  t.counts[zeros] = t.n0;
  t.delta[zeros] = t.sigma;
  if (!t.obstruction) t.varpi[zeros] = Rat(1);
  for (int i = 0; i < f.n; ++i) {
    std::vector<int> j(f.n, 0);
    j[i] = 1;
    Int c = count_solutions_mod(f, p, level, j);
    t.counts[j] = c;
    t.delta[j] = Rat(c) / Rat(ppow);
    if (!t.obstruction) t.varpi[j] = t.delta[j] / t.sigma;
  }
  if (!t.obstruction) {
    t.g = g_approx(f, p, level);
    t.g_defined = true;
  }
  return t;
}

std::string render_table(const LocalDensityTable& t) {
  std::ostringstream os;
  os << "p=" << t.p << " level=" << t.level << "\n";
  os << "N0=" << int_str(t.n0) << "\n";
  os << "sigma=" << rat_str(t.sigma) << "\n";
  if (t.obstruction) os << "obstruction=true\n";
  for (const auto& [j, c] : t.counts) {
    os << "N_j[";
    for (std::size_t i = 0; i < j.size(); ++i) os << (i ? "," : "") << j[i];
    os << "]=" << int_str(c) << " delta=" << rat_str(t.delta.at(j));
    auto it = t.varpi.find(j);
    if (it != t.varpi.end()) os << " varpi=" << rat_str(it->second);
    os << "\n";
  }
  if (t.g_defined) os << "g=" << rat_str(t.g) << "\n";
  return os.str();
}

ExpSumValue gauss_sum(const forms::FormSystem& f, std::span<const std::int64_t> a,
                      std::uint64_t q) {
  if (static_cast<int>(a.size()) != f.R) throw DimensionError("a vector must have R entries");
  if (q < 1) throw DomainError("q must be positive");
  double cost = std::pow(static_cast<double>(q), f.n);
  check_budget(cost, "exponential sum over y mod q");
  ExpSumValue out;
  out.a.assign(a.begin(), a.end());
  out.q = q;
  bool all_zero = true;
  for (auto ai : a) all_zero &= (ai % static_cast<std::int64_t>(q)) == 0;
  if (all_zero) {
    out.value = {std::pow(static_cast<double>(q), f.n), 0.0};
    return out;
  }
  KahanComplex acc;
  std::vector<std::int64_t> y(f.n, 0);
  const double tau = 2.0 * std::numbers::pi;
  while (true) {
    std::int64_t phase = 0;
    for (int r = 0; r < f.R; ++r) {
      std::int64_t v = f.polys[r].eval_mod(y, static_cast<std::int64_t>(q));
      phase = (phase + (a[r] % static_cast<std::int64_t>(q)) * v) % static_cast<std::int64_t>(q);
    }
    double ang = tau * static_cast<double>(((phase % static_cast<std::int64_t>(q)) +
                                            static_cast<std::int64_t>(q)) %
                                           static_cast<std::int64_t>(q)) /
                 static_cast<double>(q);
    acc.add({std::cos(ang), std::sin(ang)});
    int i = 0;
    while (i < f.n) {
      if (++y[i] < static_cast<std::int64_t>(q)) break;
      y[i] = 0;
      ++i;
    }
    if (i == f.n) break;
  }
  out.value = acc.value();
  return out;
}

std::vector<Int> value_histogram(const forms::FormSystem& f, std::uint64_t q) {
  double table = std::pow(static_cast<double>(q), f.R);
  if (table > 2e8) throw BudgetError("value histogram table q^R too large");
  std::size_t cells = 1;
  for (int r = 0; r < f.R; ++r) cells *= q;
  // scale_system with level 1 and base q just reduces coefficients mod q.
  ScaledSystem s = scale_system(f, q, 1, std::vector<int>(f.n, 0));
  s.allow_prune = false;
  check_budget(states_cost(s) + table, "value histogram");
  std::vector<Int> h(cells, Int(0));
  Int free_factor = int_pow(Int(static_cast<unsigned long>(q)), s.dropped);
  enumerate_states(s, [&](const std::vector<std::uint64_t>& vals) {
    std::size_t idx = 0;
    for (int r = f.R - 1; r >= 0; --r) idx = idx * q + vals[r];
    h[idx] += 1;
  });
  if (free_factor != 1)
    for (auto& c : h) c *= free_factor;
  return h;
}

namespace {

// Mobius function over the divisor lattice of q.
std::vector<std::pair<std::uint64_t, int>> divisors_with_mobius(std::uint64_t q) {
  auto fact = arith::factorize(q);
  std::vector<std::pair<std::uint64_t, int>> divs = {{1, 1}};
  for (auto& [p, e] : fact.factors) {
    std::size_t base = divs.size();
    for (std::size_t i = 0; i < base; ++i) {
      std::uint64_t pe = 1;
      for (int k = 1; k <= e; ++k) {
        pe *= p;
        divs.emplace_back(divs[i].first * pe, k == 1 ? -divs[i].second : 0);
      }
    }
  }
  return divs;
}

}  // namespace

Int primitive_sum_exact(const forms::FormSystem& f, std::uint64_t q) {
  if (q == 1) return Int(1);
  auto h = value_histogram(f, q);
  // sum over primitive a of e(a.v/q) = sum_{d | q} mu(d) (q/d)^R [ (q/d) | v ]
  auto divs = divisors_with_mobius(q);
  Int acc(0);
  for (auto& [d, mu] : divs) {
    if (mu == 0) continue;
    std::uint64_t e = q / d;  // contributes when e | v for all components
    Int weight = Int(mu) * int_pow(Int(static_cast<unsigned long>(e)), f.R);
    // walk all residue vectors divisible by e in every component
    std::vector<std::uint64_t> v(f.R, 0);
    Int sub(0);
    while (true) {
      std::size_t idx = 0;
      for (int r = f.R - 1; r >= 0; --r) idx = idx * q + v[r];
      sub += h[idx];
      int i = 0;
      while (i < f.R) {
        v[i] += e;
        if (v[i] < q) break;
        v[i] = 0;
        ++i;
      }
      if (i == f.R) break;
    }
    acc += weight * sub;
  }
  return acc;
}

std::complex<double> primitive_sum_complex(const forms::FormSystem& f, std::uint64_t q) {
  if (q == 1) return {1.0, 0.0};
  auto h = value_histogram(f, q);
  const double tau = 2.0 * std::numbers::pi;
  KahanComplex total;
  // iterate over a in (Z/q)^R with gcd(a_1,...,a_R,q) = 1
  std::vector<std::uint64_t> a(f.R, 0);
  while (true) {
    std::uint64_t g = q;
    for (auto ai : a) g = std::gcd(g, ai);
    if (g == 1) {
      KahanComplex sum;
      // S_{a,q} = sum_v h[v] e(a.v/q)
      std::vector<std::uint64_t> v(f.R, 0);
      std::size_t idx = 0;
      std::size_t total_cells = 1;
      for (int r = 0; r < f.R; ++r) total_cells *= q;
      for (idx = 0; idx < total_cells; ++idx) {
        if (h[idx] == 0) continue;
        std::size_t rest = idx;
        std::uint64_t dot = 0;
        for (int r = 0; r < f.R; ++r) {
          std::uint64_t vr = rest % q;
          rest /= q;
          dot = (dot + a[r] * vr) % q;
        }
        double ang = tau * static_cast<double>(dot) / static_cast<double>(q);
        double weight = h[idx].get_d();
        sum.add({weight * std::cos(ang), weight * std::sin(ang)});
      }
      total.add(sum.value());
    }
    int i = 0;
    while (i < f.R) {
      if (++a[i] < q) break;
      a[i] = 0;
      ++i;
    }
    if (i == f.R) break;
  }
  return total.value();
}

SingularSeries truncated_singular_series(const forms::FormSystem& f, std::uint64_t Q) {
  SingularSeries out;
  KahanComplex acc;
  out.exact = Rat(0);
  for (std::uint64_t q = 1; q <= Q; ++q) {
    Rat qn = rat_pow(Rat(static_cast<unsigned long>(q)), -static_cast<long>(f.n));
    Int exact_a = primitive_sum_exact(f, q);
    std::complex<double> complex_a = primitive_sum_complex(f, q);
    Rat exact_term = qn * Rat(exact_a);
    out.exact += exact_term;
    acc.add(complex_a * qn.get_d());
    out.terms.push_back(SeriesTerm{q, exact_term, complex_a.real() * qn.get_d()});
  }
  auto v = acc.value();
  out.imag_magnitude = std::abs(v.imag());
  if (out.imag_magnitude > 1e-9 * (std::abs(v.real()) + 1.0))
    throw IdentityError("singular series: imaginary part fails conjugate-symmetry bound");
  out.value = v.real();
  return out;
}

OrthogonalityReport orthogonality_check(const forms::FormSystem& f, std::uint64_t p, int level) {
  OrthogonalityReport rep;
  rep.p = p;
  rep.level = level;
  // RHS: exact count by direct enumeration (no histogram sharing).
  std::vector<int> zeros(f.n, 0);
  Int n0 = count_solutions_mod(f, p, level, zeros, CountStrategy::Direct);
  Int prln = int_pow(Int(static_cast<unsigned long>(p)),
                     static_cast<unsigned long>(level) * (f.n - f.R));
  rep.rhs_exact = Rat(n0) / Rat(prln);

  // LHS, exact: sum_{t=0}^{l} p^{-tn} A_{p^t} with A from the Mobius route.
  Rat lhs(0);
  double lhs_c = 0.0;
  KahanComplex cacc;
  for (int t = 0; t <= level; ++t) {
    std::uint64_t q = pow_u64(p, t);
    Rat qn = rat_pow(Rat(static_cast<unsigned long>(q)), -static_cast<long>(f.n));
    lhs += qn * Rat(primitive_sum_exact(f, q));
    cacc.add(primitive_sum_complex(f, q) * qn.get_d());
  }
  rep.lhs_exact = lhs;
  rep.integer_ok = lhs == rep.rhs_exact;
  auto v = cacc.value();
  lhs_c = v.real();
  double denom = std::abs(rep.rhs_exact.get_d()) + 1e-300;
  rep.complex_rel = std::abs(lhs_c - rep.rhs_exact.get_d()) / denom;
  return rep;
}

}  // namespace aplab::local
