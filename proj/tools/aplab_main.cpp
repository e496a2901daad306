// aplab command line tool.  Every computation goes through the C API in
// aplab/aplab.h; this file only parses arguments and formats output.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aplab/aplab.h"

namespace {

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { aplab_string_free(s); }
};

struct FormGuard {
  aplab_form* f = nullptr;
  ~FormGuard() { aplab_form_free(f); }
};

int fail(aplab_status st) {
  std::cerr << "error (" << aplab_status_name(st) << "): " << aplab_last_error() << "\n";
  return 1;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoull(item));
  return out;
}

std::vector<std::int64_t> parse_i64_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoll(item));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aplab: almost-prime solution laboratory"};
  app.require_subcommand(1);

  // constants ------------------------------------------------------------
  auto* c_cmd = app.add_subcommand("constants", "exact constants and hypothesis flags");
  int c_n = 0, c_d = 0, c_R = 1, c_rank = 0;
  double c_beta = NAN;
  bool c_json = false;
  c_cmd->add_option("--n", c_n, "variable count")->required();
  c_cmd->add_option("--d", c_d, "degree")->required();
  c_cmd->add_option("--R", c_R, "equation count")->required();
  c_cmd->add_option("--birch-rank", c_rank, "Birch rank")->required();
  c_cmd->add_option("--beta-n", c_beta, "sieving limit beta_n for the weighted parameters");
  c_cmd->add_flag("--json", c_json, "emit JSON instead of key=value lines");

  // arith ----------------------------------------------------------------
  auto* a_cmd = app.add_subcommand("arith", "elementary arithmetic helpers");
  auto* a_lpf = a_cmd->add_subcommand("lpf", "least prime factor");
  std::uint64_t a_m = 1;
  a_lpf->add_option("m", a_m)->required();
  auto* a_factor = a_cmd->add_subcommand("factor", "Omega, nu, radical");
  a_factor->add_option("m", a_m)->required();
  auto* a_buch = a_cmd->add_subcommand("buchstab", "Buchstab w(u)");
  double a_u = 2.0;
  a_buch->add_option("u", a_u)->required();
  auto* a_sat = a_cmd->add_subcommand("saturation", "saturation level of a projective point");
  std::string a_coords;
  a_sat->add_option("coords", a_coords, "comma-separated integers")->required();
  auto* a_ratio = a_cmd->add_subcommand("ratio", "rough vs almost-prime density ratio");
  double a_x = 100, a_uu = 2;
  int a_k = 2;
  a_ratio->add_option("--x", a_x)->required();
  a_ratio->add_option("--k", a_k)->required();
  a_ratio->add_option("--u", a_uu)->required();

  // local ----------------------------------------------------------------
  auto* l_cmd = app.add_subcommand("local", "p-adic densities and exponential sums");
  std::string l_form, l_j, l_check;
  std::uint64_t l_p = 3, l_Q = 0;
  int l_level = 1;
  l_cmd->add_option("--form", l_form, "system text")->required();
  l_cmd->add_option("--p", l_p, "prime");
  l_cmd->add_option("--level", l_level, "level l (modulus p^l)");
  l_cmd->add_option("--j", l_j, "comma-separated scaling exponents");
  l_cmd->add_option("--check", l_check, "'identities' runs the exact oracle set");
  l_cmd->add_option("--series-Q", l_Q, "also print the singular series truncated at Q");

  // sieve ----------------------------------------------------------------
  auto* s_cmd = app.add_subcommand("sieve", "sieve weights, functions and thresholds");
  auto* s_weights = s_cmd->add_subcommand("weights", "Rosser-Iwaniec weight support");
  double s_D = 30;
  std::uint64_t s_z0 = 1, s_z = 10;
  std::string s_kind = "lower";
  s_weights->add_option("--D", s_D, "level")->required();
  s_weights->add_option("--z", s_z, "sieving range top")->required();
  s_weights->add_option("--z0", s_z0, "sieving range bottom (default 1)");
  s_weights->add_option("--kind", s_kind, "lower|upper")->required();
  auto* s_funcs = s_cmd->add_subcommand("functions", "f_kappa, F_kappa grid as CSV");
  double s_kappa = 1, s_smax = 8;
  s_funcs->add_option("--kappa", s_kappa)->required();
  s_funcs->add_option("--smax", s_smax);
  auto* s_thresh = s_cmd->add_subcommand("threshold", "minimal s with F^n < (1+1/(n-1)) f");
  int s_n = 2;
  s_thresh->add_option("--n", s_n)->required();
  auto* s_beta = s_cmd->add_subcommand("beta", "sieving limit beta_kappa");
  s_beta->add_option("--kappa", s_kappa)->required();
  auto* s_wN = s_cmd->add_subcommand("weightedN", "Diamond-Halberstam-Richert N(u,v)");
  double s_u = 3, s_v = 5, s_mu0 = 2, s_tau = 0.5;
  s_wN->add_option("--u", s_u)->required();
  s_wN->add_option("--v", s_v)->required();
  s_wN->add_option("--kappa", s_kappa)->required();
  s_wN->add_option("--mu0", s_mu0)->required();
  s_wN->add_option("--tau", s_tau)->required();

  // count / predict --------------------------------------------------------
  auto* n_cmd = app.add_subcommand("count", "enumerate zeros and compare with the main term");
  auto* p_cmd = app.add_subcommand("predict", "count plus singular-series prediction columns");
  std::string n_form, n_k, n_weight = "indicator", n_mitm = "auto", n_W = "1";
  std::vector<double> n_B;
  double n_z = 0;
  std::uint64_t n_Q = 8;
  int n_rank = 0;
  for (auto* cmd : {n_cmd, p_cmd}) {
    cmd->add_option("--form", n_form, "system text")->required();
    cmd->add_option("--B", n_B, "one or more box scales")->required();
    cmd->add_option("--z", n_z, "roughness cutoff (0 = none)");
    cmd->add_option("--W", n_W, "'auto', 1, or an explicit wheel modulus");
    cmd->add_option("--k", n_k, "comma-separated divisor constraints");
    cmd->add_option("--weight", n_weight, "bump|indicator");
    cmd->add_option("--mitm", n_mitm, "auto|on|off");
    cmd->add_option("--Q", n_Q, "singular series truncation");
    cmd->add_option("--birch-rank", n_rank, "declared rank (else sampled)");
  }

  // experiment / oracles ----------------------------------------------------
  auto* e_cmd = app.add_subcommand("experiment", "run a spec file and write reports");
  std::string e_spec;
  e_cmd->add_option("--spec", e_spec, "spec file (INI sections or JSON)")->required();
  auto* o_cmd = app.add_subcommand("oracles", "run every exact-identity oracle");

  CLI11_PARSE(app, argc, argv);

  if (*c_cmd) {
    StringGuard out;
    auto st = aplab_constants_report(c_n, c_d, c_R, c_rank, c_beta, c_json ? 1 : 0, &out.s);
    if (st != APLAB_OK) return fail(st);
    std::cout << out.s;
    return 0;
  }

  if (*a_cmd) {
    if (*a_lpf) {
      std::uint64_t r = 0;
      auto st = aplab_least_prime_factor(a_m, &r);
      if (st != APLAB_OK) return fail(st);
      std::cout << r << "\n";
    } else if (*a_factor) {
      int omega = 0, nu = 0;
      std::uint64_t rad = 0;
      auto st = aplab_factor_counts(a_m, &omega, &nu, &rad);
      if (st != APLAB_OK) return fail(st);
      std::cout << "Omega=" << omega << " nu=" << nu << " radical=" << rad << "\n";
    } else if (*a_buch) {
      double w = 0;
      auto st = aplab_buchstab(a_u, &w);
      if (st != APLAB_OK) return fail(st);
      std::printf("%.10f\n", w);
    } else if (*a_sat) {
      auto coords = parse_i64_list(a_coords);
      aplab_saturation sat{};
      auto st = aplab_saturation_level(coords.data(), static_cast<int>(coords.size()), &sat);
      if (st != APLAB_OK) return fail(st);
      std::printf("L=%.10f witness=%llu prime=%llu\n", sat.value,
                  static_cast<unsigned long long>(sat.witness_abs),
                  static_cast<unsigned long long>(sat.witness_p));
    } else if (*a_ratio) {
      double r = 0;
      auto st = aplab_rough_ratio(a_x, a_k, a_uu, &r);
      if (st != APLAB_OK) return fail(st);
      std::printf("%.10g\n", r);
    } else {
      std::cerr << "arith needs a subcommand\n";
      return 1;
    }
    return 0;
  }

  if (*l_cmd) {
    FormGuard form;
    auto st = aplab_form_parse(l_form.c_str(), &form.f);
    if (st != APLAB_OK) return fail(st);
    if (l_check == "identities") {
      StringGuard report;
      st = aplab_local_check_identities(form.f, l_p, l_level, &report.s);
      if (report.s) std::cout << report.s;
      if (st == APLAB_ERR_IDENTITY) {
        std::cerr << "identity check FAILED\n";
        return 2;
      }
      if (st != APLAB_OK) return fail(st);
      std::cout << "all identities hold\n";
      return 0;
    }
    if (!l_j.empty()) {
      auto j = parse_int_list(l_j);
      StringGuard count;
      st = aplab_local_count(form.f, l_p, l_level, j.data(), &count.s);
      if (st != APLAB_OK) return fail(st);
      std::cout << "N_j(" << l_p << "^" << l_level << ")=" << count.s << "\n";
    } else {
      StringGuard table;
      st = aplab_local_table(form.f, l_p, l_level, &table.s);
      if (st != APLAB_OK) return fail(st);
      std::cout << table.s;
    }
    if (l_Q > 0) {
      double value = 0, imag = 0;
      StringGuard exact;
      st = aplab_singular_series(form.f, l_Q, &value, &exact.s, &imag);
      if (st != APLAB_OK) return fail(st);
      std::printf("S(Q=%llu)=%.12g exact=%s imag=%.3g\n",
                  static_cast<unsigned long long>(l_Q), value, exact.s, imag);
    }
    return 0;
  }

  if (*s_cmd) {
    if (*s_weights) {
      StringGuard out;
      auto st = aplab_sieve_weights(s_D, s_z0, s_z, s_kind == "upper" ? 1 : 0, &out.s);
      if (st != APLAB_OK) return fail(st);
      std::cout << out.s;
    } else if (*s_funcs) {
      StringGuard out;
      auto st = aplab_sieve_functions(s_kappa, s_smax, &out.s);
      if (st != APLAB_OK) return fail(st);
      std::cout << out.s;
    } else if (*s_thresh) {
      double s = 0, guide = 0;
      auto st = aplab_sieve_threshold(s_n, &s, &guide);
      if (st != APLAB_OK) return fail(st);
      std::printf("threshold_s=%.4f guide_3logn_loglogn=%.4f\n", s, guide);
    } else if (*s_beta) {
      double beta = 0;
      int estimate = 0;
      auto st = aplab_sieve_beta(s_kappa, &beta, &estimate);
      if (st != APLAB_OK) return fail(st);
      std::printf("beta=%.6f%s\n", beta, estimate ? " (numerical estimate)" : "");
    } else if (*s_wN) {
      double out = 0;
      auto st = aplab_weighted_sieve_N(s_u, s_v, s_kappa, s_mu0, s_tau, &out);
      if (st != APLAB_OK) return fail(st);
      std::printf("N=%.8f\n", out);
    } else {
      std::cerr << "sieve needs a subcommand\n";
      return 1;
    }
    return 0;
  }

  if (*n_cmd || *p_cmd) {
    // predictions compare against the smooth-weighted main term by default
    if (*p_cmd && p_cmd->count("--weight") == 0) n_weight = "bump";
    FormGuard form;
    auto st = aplab_form_parse(n_form.c_str(), &form.f);
    if (st != APLAB_OK) return fail(st);
    std::vector<std::uint64_t> k;
    if (!n_k.empty()) k = parse_u64_list(n_k);
    bool first = true;
    for (double B : n_B) {
      aplab_count_opts opts{};
      opts.B = B;
      opts.z = n_z;
      opts.W = n_W == "auto" ? UINT64_MAX : std::stoull(n_W);
      opts.k = k.empty() ? nullptr : k.data();
      opts.weight_bump = n_weight == "bump" ? 1 : 0;
      opts.mitm = n_mitm == "on" ? 1 : n_mitm == "off" ? 2 : 0;
      opts.Q = n_Q;
      opts.birch_rank = n_rank;
      StringGuard csv;
      st = aplab_count_run(form.f, &opts, &csv.s);
      if (st != APLAB_OK) return fail(st);
      std::string text(csv.s);
      if (!first) {
        auto nl = text.find('\n');
        if (nl != std::string::npos) text.erase(0, nl + 1);
      }
      std::cout << text;
      first = false;
    }
    return 0;
  }

  if (*e_cmd) {
    StringGuard summary, csv;
    auto st = aplab_experiment_run(read_file(e_spec).c_str(), &summary.s, &csv.s);
    if (st != APLAB_OK) return fail(st);
    std::cout << summary.s << "\n" << csv.s;
    return 0;
  }

  if (*o_cmd) {
    StringGuard report;
    auto st = aplab_oracle_suite(&report.s);
    if (report.s) std::cout << report.s;
    if (st == APLAB_ERR_IDENTITY) {
      std::cerr << "oracle suite FAILED\n";
      return 2;
    }
    if (st != APLAB_OK) return fail(st);
    return 0;
  }

  return 0;
}
