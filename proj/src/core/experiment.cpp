#include "core/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "core/arith.hpp"
#include "core/constants.hpp"
#include "core/local.hpp"
#include "core/sieve.hpp"

namespace aplab::experiment {

double ZPolicy::z_of(double B, double theta_prime, int n) const {
  switch (kind) {
    case Kind::Fixed:
      return fixed;
    case Kind::LogPower:
      return std::pow(std::log(B) / std::log(log_base), exponent);
    case Kind::ThmVector: {
      // z = B^(theta' loglog n / (c0 log n))
      if (n < 3) throw DomainError("theorem-vector policy needs n >= 3");
      double expo = theta_prime * std::log(std::log(n)) / (c0 * std::log(n));
      if (!(expo > 0 && expo < 1)) throw DomainError("z exponent must lie in (0,1)");
      return std::pow(B, expo);
    }
    case Kind::ThmRosser: {
      double expo = theta_prime / (3.75 * n);
      if (!(expo > 0 && expo < 1)) throw DomainError("z exponent must lie in (0,1)");
      return std::pow(B, expo);
    }
  }
  throw DomainError("unknown z policy");
}

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

void apply_kv(ExperimentSpec& spec, const std::string& section, const std::string& key,
              const std::string& value) {
  auto fullkey = section.empty() ? key : section + "." + key;
  if (fullkey == "form.text")
    spec.form_text = value;
  else if (fullkey == "form.file")
    spec.form_file = value;
  else if (fullkey == "form.rank_hint")
    spec.rank_hint = value;
  else if (fullkey == "grid.B")
    spec.b_grid = parse_grid(value);
  else if (fullkey == "grid.z_policy") {
    if (value == "fixed")
      spec.z_policy.kind = ZPolicy::Kind::Fixed;
    else if (value == "log-power")
      spec.z_policy.kind = ZPolicy::Kind::LogPower;
    else if (value == "theorem-vector")
      spec.z_policy.kind = ZPolicy::Kind::ThmVector;
    else if (value == "theorem-rosser")
      spec.z_policy.kind = ZPolicy::Kind::ThmRosser;
    else
      throw ParseError("unknown z policy: " + value);
  } else if (fullkey == "grid.z_value")
    spec.z_policy.fixed = std::stod(value);
  else if (fullkey == "grid.z_base")
    spec.z_policy.log_base = std::stod(value);
  else if (fullkey == "grid.z_exponent")
    spec.z_policy.exponent = std::stod(value);
  else if (fullkey == "grid.c0")
    spec.z_policy.c0 = std::stod(value);
  else if (fullkey == "series.Q")
    spec.Q = std::stoull(value);
  else if (fullkey == "sieve.beta_n")
    spec.beta_n = std::stod(value);
  else if (fullkey == "output.csv")
    spec.csv_path = value;
  else if (fullkey == "output.summary")
    spec.summary_path = value;
  else if (fullkey == "count.w_trick")
    spec.use_w_trick = value == "true" || value == "1";
  else if (fullkey == "count.mitm") {
    if (value == "auto")
      spec.mitm = counting::CountConfig::Mitm::Auto;
    else if (value == "on")
      spec.mitm = counting::CountConfig::Mitm::On;
    else if (value == "off")
      spec.mitm = counting::CountConfig::Mitm::Off;
    else
      throw ParseError("unknown mitm mode: " + value);
  } else if (fullkey == "budget.states") {
    // budgets are process-wide; the CLI maps this onto APLAB_BUDGET
  } else {
    throw ParseError("unknown key: " + fullkey);
  }
}

ExperimentSpec parse_spec_json(const std::string& text) {
  ExperimentSpec spec;
  auto j = nlohmann::json::parse(text);
  for (auto& [section, body] : j.items()) {
    if (!body.is_object()) throw ParseError("top-level JSON values must be sections");
    for (auto& [key, value] : body.items()) {
      std::string v;
      if (value.is_string())
        v = value.get<std::string>();
      else if (value.is_boolean())
        v = value.get<bool>() ? "true" : "false";
      else if (value.is_array()) {
        std::string acc;
        for (auto& e : value) acc += (acc.empty() ? "" : ",") + e.dump();
        v = acc;
      } else
        v = value.dump();
      apply_kv(spec, section, key, v);
    }
  }
  return spec;
}

forms::RankHint parse_rank_hint(const std::string& text) {
  forms::RankHint hint;
  if (text == "diagonal")
    hint.kind = forms::RankHint::Diagonal;
  else if (text == "sample")
    hint.kind = forms::RankHint::Sample;
  else if (text.rfind("user:", 0) == 0) {
    hint.kind = forms::RankHint::User;
    hint.user_rank = std::stoi(text.substr(5));
  } else {
    throw ParseError("unknown rank hint: " + text);
  }
  return hint;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_spec_json(text);
  ExperimentSpec spec;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto ltrim = line.find_first_not_of(" \t\r");
    if (ltrim == std::string::npos) continue;
    auto rtrim = line.find_last_not_of(" \t\r");
    line = line.substr(ltrim, rtrim - ltrim + 1);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    apply_kv(spec, section, key, value);
  }
  return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  std::string form_text = spec.form_text;
  if (form_text.empty() && !spec.form_file.empty()) {
    std::ifstream in(spec.form_file);
    if (!in) throw ParseError("cannot read form file " + spec.form_file);
    std::getline(in, form_text);
  }
  if (form_text.empty()) throw ParseError("experiment needs a form");
  if (spec.b_grid.empty()) throw ParseError("experiment needs a B grid");
  forms::FormSystem f = forms::parse_system(form_text);
  ExperimentResult out;
  out.cert = forms::birch_rank(f, parse_rank_hint(spec.rank_hint));
  auto bundle = constants::compute_bundle(f.n, f.d, f.R, out.cert.birch_rank, spec.beta_n);
  out.theta_prime = bundle.theta_prime.get_d();

  std::ostringstream csv;
  csv << "# columns: B = box scale; z = roughness cutoff (least prime factor bound);\n"
         "# count = rough integer zeros in (0,B]^n; weighted = smooth-weighted count N_w;\n"
         "# sseries = truncated singular series S(Q); sintegral = truncated singular integral "
         "J_w;\n"
         "# main_term = sseries * sintegral * B^(n-Rd); error_budget = E(B;k) from the "
         "eps-matrix;\n"
         "# ratio = weighted / main_term\n";
  csv << "B,z,count,weighted,sseries,sintegral,main_term,error_budget,ratio\n";

  counting::CountConfig base;
  base.mitm = spec.mitm;
  if (spec.use_w_trick) {
    auto wt = counting::find_w_trick(f);
    if (!wt) throw DomainError("no admissible W-trick parameters found");
    base.W = wt->W;
    base.y = wt->y;
  }
  auto zeta = counting::find_real_point(f);
  base.weight = counting::SmoothWeight::bump(counting::bump_center(zeta),
                                             counting::bump_eta(zeta));

  for (double B : spec.b_grid) {
    counting::CountConfig cfg = base;
    cfg.B = B;
    cfg.z = spec.z_policy.z_of(B, out.theta_prime, f.n);
    auto zeros = counting::enumerate_zeros(f, cfg);
    auto pred = counting::predict_and_compare(f, out.cert, cfg, spec.Q);
    ExperimentRow row;
    row.B = B;
    row.z = cfg.z;
    row.count = static_cast<long long>(zeros.size());
    row.weighted = pred.measured;
    row.main_term = pred.main_term;
    row.error_budget = pred.error_budget;
    row.ratio = pred.ratio;
    out.rows.push_back(row);
    csv << fmt(B) << "," << fmt(row.z) << "," << row.count << "," << fmt(row.weighted) << ","
        << fmt(pred.singular_series) << "," << fmt(pred.singular_integral) << ","
        << fmt(row.main_term) << "," << fmt(row.error_budget) << "," << fmt(row.ratio) << "\n";
  }
  out.csv = csv.str();

  std::ostringstream summary;
  summary << "form: " << f.str() << "\n";
  summary << "rank: " << out.cert.birch_rank
          << (out.cert.certified() ? "" : " (monte-carlo estimate, not certified)") << "\n";
  summary << constants::render_report(bundle);
  summary << "[policy]\n";
  summary << "z_policy=";
  switch (spec.z_policy.kind) {
    case ZPolicy::Kind::Fixed:
      summary << "fixed z=" << fmt(spec.z_policy.fixed);
      break;
    case ZPolicy::Kind::LogPower:
      summary << "log-power base=" << fmt(spec.z_policy.log_base)
              << " exponent=" << fmt(spec.z_policy.exponent);
      break;
    case ZPolicy::Kind::ThmVector:
      summary << "theorem-vector c0=" << fmt(spec.z_policy.c0) << " exponent="
              << fmt(out.theta_prime * std::log(std::log(f.n)) /
                     (spec.z_policy.c0 * std::log(f.n)));
      break;
    case ZPolicy::Kind::ThmRosser:
      summary << "theorem-rosser exponent=" << fmt(out.theta_prime / (3.75 * f.n));
      break;
  }
  summary << "\n";
  if (base.W > 1) {
    summary << "W=" << base.W << " y=";
    for (std::size_t i = 0; i < base.y.size(); ++i) summary << (i ? "," : "") << base.y[i];
    summary << "\n";
  }
  out.summary = summary.str();

  if (!spec.csv_path.empty()) {
    std::ofstream fout(spec.csv_path);
    if (!fout) throw DomainError("cannot write " + spec.csv_path);
    fout << out.csv;
  }
  if (!spec.summary_path.empty()) {
    std::ofstream fout(spec.summary_path);
    if (!fout) throw DomainError("cannot write " + spec.summary_path);
    fout << out.summary;
  }
  return out;
}

namespace {

using Status = OracleResult::Status;

OracleResult run_check(const std::string& name, const std::function<void()>& body) {
  OracleResult r;
  r.name = name;
  try {
    body();
    r.status = Status::Pass;
  } catch (const BudgetError& e) {
    r.status = Status::Skip;
    r.detail = e.what();
  } catch (const std::exception& e) {
    r.status = Status::Fail;
    r.detail = e.what();
  }
  return r;
}

void expect(bool cond, const std::string& what) {
  if (!cond) throw IdentityError(what);
}

}  // namespace

std::vector<OracleResult> run_oracle_suite() {
  std::vector<OracleResult> out;
  auto cone = forms::parse_system("n=3 R=1 d=2: x1*x2 - x3^2");
  auto diag6 = forms::parse_system("n=6 R=1 d=2: x1^2+x2^2+x3^2-x4^2-x5^2-x6^2");

  out.push_back(run_check("orthogonality-exact", [&] {
    for (std::uint64_t p : {3ull, 5ull, 7ull}) {
      for (int l = 1; l <= 3; ++l) {
        auto rep = local::orthogonality_check(cone, p, l);
        expect(rep.integer_ok, "integer route mismatch at p=" + std::to_string(p) +
                                   " l=" + std::to_string(l));
        expect(rep.complex_rel <= 1e-9, "complex route off at p=" + std::to_string(p));
      }
    }
  }));

  out.push_back(run_check("delta-scaling", [&] {
    for (int l : {3, 4}) {
      auto rep = local::delta_scaling_checks(cone, 3, l);
      expect(rep.level_identity_ok, "level identity failed at l=" + std::to_string(l));
      expect(rep.monotone_ok, "monotone scaling failed at l=" + std::to_string(l));
    }
  }));

  out.push_back(run_check("g-two-routes", [&] {
    expect(local::g_approx(cone, 3, 1) == Rat(5, 9), "cone g(3) != 5/9");
    local::g_approx(diag6, 5, 1);  // raises internally on route mismatch
  }));

  out.push_back(run_check("beta-sieve-sandwich", [&] {
    for (double D : {10.0, 30.0, 100.0}) {
      std::uint64_t z = static_cast<std::uint64_t>(2 * std::sqrt(D));
      auto lw = sieve::beta_sieve_weights(D, 1, z, sieve::WeightKind::Lower);
      auto uw = sieve::beta_sieve_weights(D, 1, z, sieve::WeightKind::Upper);
      auto low = lw.convolve_table(10000);
      auto up = uw.convolve_table(10000);
      std::uint64_t P = lw.prime_product();
      for (std::uint64_t m = 1; m <= 10000; ++m) {
        int ind = std::gcd(m, P) == 1 ? 1 : 0;
        expect(low[m] <= ind && ind <= up[m],
               "sandwich violated at D=" + std::to_string(D) + " m=" + std::to_string(m));
      }
    }
  }));

  out.push_back(run_check("vector-sieve-inequality", [&] {
    auto lw = sieve::beta_sieve_weights(30, 1, 10, sieve::WeightKind::Lower);
    auto uw = sieve::beta_sieve_weights(30, 1, 10, sieve::WeightKind::Upper);
    auto low = lw.convolve_table(500);
    auto up = uw.convolve_table(500);
    std::uint64_t P = lw.prime_product();
    auto ind = [&](std::uint64_t m) { return std::gcd(m, P) == 1 ? 1 : 0; };
    for (std::uint64_t m1 = 1; m1 <= 500; ++m1)
      for (std::uint64_t m2 = 1; m2 <= 500; ++m2) {
        std::pair<long long, long long> vals[2] = {{low[m1], up[m1]}, {low[m2], up[m2]}};
        expect(static_cast<long long>(ind(m1) * ind(m2)) >= sieve::vector_sieve_combine(vals),
               "n=2 inequality violated at (" + std::to_string(m1) + "," + std::to_string(m2) +
                   ")");
      }
    // fixed-size scan (1.25e8 integer ops), deliberately not budget-gated
    for (std::uint64_t m1 = 1; m1 <= 500; ++m1)
      for (std::uint64_t m2 = 1; m2 <= 500; ++m2)
        for (std::uint64_t m3 = 1; m3 <= 500; ++m3) {
          long long lhs = ind(m1) * ind(m2) * ind(m3);
          long long rhs = low[m1] * up[m2] * up[m3] + up[m1] * low[m2] * up[m3] +
                          up[m1] * up[m2] * low[m3] - 2 * up[m1] * up[m2] * up[m3];
          if (lhs < rhs)
            throw IdentityError("n=3 inequality violated at (" + std::to_string(m1) + "," +
                                std::to_string(m2) + "," + std::to_string(m3) + ")");
        }
  }));

  out.push_back(run_check("linear-sieve-values", [&] {
    auto a = sieve::linear_sieve_fF(2.0);
    expect(std::fabs(a.f) <= 1e-7, "f(2) != 0");
    expect(std::fabs(a.F - std::exp(0.57721566490153286)) <= 1e-6, "F(2) != e^gamma");
    auto b = sieve::linear_sieve_fF(3.0);
    expect(std::fabs(b.f - 2 * std::exp(0.57721566490153286) * std::log(2.0) / 3) <= 1e-6,
           "f(3) mismatch");
    auto tab = sieve::dhr_sieve_functions(1.0, 8.5);
    expect(std::fabs(tab.beta - 2.0) <= 1e-4, "beta_1 != 2");
    for (double s = 2.05; s <= 8.0; s += 0.01) {
      auto lin = sieve::linear_sieve_fF(s);
      expect(std::fabs(lin.f - tab.f_at(s)) <= 1e-5, "dhr f gap at s=" + std::to_string(s));
      expect(std::fabs(lin.F - tab.F_at(s)) <= 1e-5, "dhr F gap at s=" + std::to_string(s));
    }
  }));

  out.push_back(run_check("counting-fixture", [&] {
    counting::CountConfig cfg;
    cfg.B = 10;
    expect(counting::enumerate_zeros(cone, cfg).size() == 18, "cone B=10 != 18");
    cfg.z = 2;
    expect(counting::enumerate_zeros(cone, cfg).size() == 7, "cone B=10 z=2 != 7");
    cfg.z = 0;
    cfg.mitm = counting::CountConfig::Mitm::On;
    auto a = counting::enumerate_zeros(cone, cfg);
    cfg.mitm = counting::CountConfig::Mitm::Off;
    auto b = counting::enumerate_zeros(cone, cfg);
    expect(a == b, "MITM and naive enumeration disagree");
  }));

  out.push_back(run_check("roughness-inclusion-exclusion", [&] {
    counting::CountConfig cfg;
    cfg.B = 10;
    auto all = counting::enumerate_zeros(cone, cfg);
    // z = 2: P(2) = 2; count = sum_{d | 2} mu(d) #{solutions: d | x1 x2 x3}
    long with2 = 0;
    for (const auto& x : all)
      if ((x[0] * x[1] * x[2]) % 2 == 0) ++with2;
    cfg.z = 2;
    auto rough = counting::enumerate_zeros(cone, cfg);
    expect(static_cast<long>(all.size()) - with2 == static_cast<long>(rough.size()),
           "inclusion-exclusion mismatch at z=2");
  }));

  out.push_back(run_check("dilation-two-routes", [&] {
    // N_w with k-divisibility == weighted count over the substituted system
    counting::CountConfig cfg;
    cfg.B = 12;
    cfg.k = {2, 1, 3};
    cfg.weight = counting::SmoothWeight::bump({0.5, 0.5, 0.5}, 0.45);
    double direct = counting::weighted_count(cone, cfg);
    std::vector<Int> k = {Int(2), Int(1), Int(3)}, tau(3, Int(0));
    auto g = forms::substitute_dilation(cone, k, tau, Int(1));
    Kahan acc;
    // s_i ranges over [1, B/k_i]
    for (std::int64_t s1 = 1; s1 <= 6; ++s1)
      for (std::int64_t s2 = 1; s2 <= 12; ++s2)
        for (std::int64_t s3 = 1; s3 <= 4; ++s3) {
          std::vector<Int> s = {Int(s1), Int(s2), Int(s3)};
          bool zero = true;
          for (auto& p : g.polys)
            if (p.eval(s) != 0) zero = false;
          if (!zero) continue;
          std::vector<std::int64_t> x = {2 * s1, s2, 3 * s3};
          acc.add(cfg.weight.at(x, cfg.B));
        }
    expect(std::fabs(direct - acc.value()) <= 1e-12 * (std::fabs(direct) + 1),
           "substitution route disagrees");
  }));

  out.push_back(run_check("exp-sum-symmetries", [&] {
    auto w = counting::SmoothWeight::bump({0.5, 0.5, 0.5}, 0.45);
    std::vector<double> P(3, 15.0);
    // dyadic alphas keep alpha + m exactly representable, so the mod-1
    // reduction makes integer shifts bit-exact
    for (double alpha : {0.25, 0.375, 0.5, 0.9375}) {
      auto s = counting::exp_sum_Sw(cone, std::vector<double>{alpha}, P, w);
      auto shifted = counting::exp_sum_Sw(cone, std::vector<double>{alpha + 3.0}, P, w);
      expect(s == shifted, "period-1 shift not exact");
      auto conj = counting::exp_sum_Sw(cone, std::vector<double>{-alpha}, P, w);
      expect(std::abs(conj - std::conj(s)) <= 1e-9 * (std::abs(s) + 1),
             "conjugate symmetry violated");
    }
  }));

  out.push_back(run_check("singular-series-conjugacy", [&] {
    auto series = local::truncated_singular_series(cone, 12);
    expect(series.imag_magnitude <= 1e-9 * (std::fabs(series.value) + 1),
           "imaginary part too large");
    expect(std::fabs(series.value - series.exact.get_d()) <= 1e-9 * (std::fabs(series.value) + 1),
           "complex and exact series disagree");
  }));

  out.push_back(run_check("jw-two-modes", [&] {
    auto w = counting::SmoothWeight::bump({0.5, 0.5, 0.5}, 0.25);
    auto a = counting::singular_integral_gamma(cone, w, 24.0);
    auto b = counting::singular_integral_slab(cone, w, 1.0 / 256, 1 << 15);
    expect(counting::jw_modes_agree(a, b),
           "modes disagree: gamma=" + std::to_string(a.value) + "+-" + std::to_string(a.error) +
               " slab=" + std::to_string(b.value) + "+-" + std::to_string(b.error));
  }));

  return out;
}

bool all_passed(const std::vector<OracleResult>& results) {
  for (const auto& r : results)
    if (r.status == Status::Fail) return false;
  return true;
}

std::string render_oracle_report(const std::vector<OracleResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    const char* tag = r.status == Status::Pass ? "PASS"
                      : r.status == Status::Skip ? "SKIP"
                                                 : "FAIL";
    os << tag << " " << r.name;
    if (!r.detail.empty()) os << " (" << r.detail << ")";
    os << "\n";
  }
  return os.str();
}

}  // namespace aplab::experiment
