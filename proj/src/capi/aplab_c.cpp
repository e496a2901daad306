#include "aplab/aplab.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "core/arith.hpp"
#include "core/constants.hpp"
#include "core/counting.hpp"
#include "core/experiment.hpp"
#include "core/forms.hpp"
#include "core/local.hpp"
#include "core/sieve.hpp"
#include "core/util.hpp"

using namespace aplab;

struct aplab_form {
  forms::FormSystem f;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
aplab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    t_last_error = e.what();
    return APLAB_ERR_PARSE;
  } catch (const DimensionError& e) {
    t_last_error = e.what();
    return APLAB_ERR_DIMENSION;
  } catch (const BudgetError& e) {
    t_last_error = e.what();
    return APLAB_ERR_BUDGET;
  } catch (const HypothesisError& e) {
    t_last_error = e.what();
    return APLAB_ERR_HYPOTHESIS;
  } catch (const IdentityError& e) {
    t_last_error = e.what();
    return APLAB_ERR_IDENTITY;
  } catch (const DomainError& e) {
    t_last_error = e.what();
    return APLAB_ERR_DOMAIN;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return APLAB_ERR_INTERNAL;
  }
}

aplab_status need(const void* p) {
  if (p) return APLAB_OK;
  t_last_error = "null pointer argument";
  return APLAB_ERR_NULL;
}

}  // namespace

extern "C" {

const char* aplab_status_name(aplab_status status) {
  switch (status) {
    case APLAB_OK: return "ok";
    case APLAB_ERR_PARSE: return "parse-error";
    case APLAB_ERR_DOMAIN: return "domain-error";
    case APLAB_ERR_DIMENSION: return "dimension-mismatch";
    case APLAB_ERR_BUDGET: return "budget-exceeded";
    case APLAB_ERR_HYPOTHESIS: return "hypothesis-failed";
    case APLAB_ERR_IDENTITY: return "identity-failed";
    case APLAB_ERR_IO: return "io-error";
    case APLAB_ERR_NULL: return "null-argument";
    case APLAB_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* aplab_last_error(void) { return t_last_error.c_str(); }

void aplab_string_free(char* s) { delete[] s; }

aplab_status aplab_form_parse(const char* text, aplab_form** out) {
  if (auto st = need(text); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    auto* handle = new aplab_form{forms::parse_system(text)};
    *out = handle;
    return APLAB_OK;
  });
}

void aplab_form_free(aplab_form* form) { delete form; }

aplab_status aplab_form_print(const aplab_form* form, char** out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    *out = dup_string(form->f.str());
    return APLAB_OK;
  });
}

aplab_status aplab_form_dims(const aplab_form* form, int* n, int* R, int* d) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (n) *n = form->f.n;
  if (R) *R = form->f.R;
  if (d) *d = form->f.d;
  return APLAB_OK;
}

aplab_status aplab_form_coefficient_norm(const aplab_form* form, int natural, char** out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    Int norm = natural ? form->f.natural_coefficient_norm() : form->f.coefficient_norm();
    *out = dup_string(int_str(norm));
    return APLAB_OK;
  });
}

aplab_status aplab_form_substitute(const aplab_form* form, const int64_t* k, const int64_t* tau,
                                   int64_t W, aplab_form** out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(k); st != APLAB_OK) return st;
  if (auto st = need(tau); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    std::vector<Int> kv, tv;
    for (int i = 0; i < form->f.n; ++i) {
      kv.emplace_back(static_cast<long>(k[i]));
      tv.emplace_back(static_cast<long>(tau[i]));
    }
    auto g = forms::substitute_dilation(form->f, kv, tv, Int(static_cast<long>(W)));
    *out = new aplab_form{std::move(g)};
    return APLAB_OK;
  });
}

aplab_status aplab_form_birch_rank(const aplab_form* form, const char* hint,
                                   aplab_rank_info* out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(hint); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    forms::RankHint h;
    std::string text(hint);
    if (text == "diagonal")
      h.kind = forms::RankHint::Diagonal;
    else if (text == "sample")
      h.kind = forms::RankHint::Sample;
    else if (text.rfind("user:", 0) == 0) {
      h.kind = forms::RankHint::User;
      h.user_rank = std::stoi(text.substr(5));
    } else {
      throw ParseError("unknown rank hint: " + text);
    }
    auto cert = forms::birch_rank(form->f, h);
    out->birch_rank = cert.birch_rank;
    out->certified = cert.certified() ? 1 : 0;
    std::snprintf(out->K, sizeof out->K, "%s", rat_str(cert.K).c_str());
    std::snprintf(out->theta, sizeof out->theta, "%s", rat_str(cert.theta).c_str());
    return APLAB_OK;
  });
}

aplab_status aplab_rank_after_slicing(const aplab_form* form, int birch_rank, const int* j,
                                      int* out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(j); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    auto cert = forms::make_certificate(birch_rank, form->f.d, form->f.R,
                                        forms::RankProvenance::UserDeclared);
    std::vector<int> jv(j, j + form->f.n);
    *out = forms::rank_lower_bound_after_slicing(cert, form->f.d, form->f.R, jv)
               .rank_lower_bound;
    return APLAB_OK;
  });
}

aplab_status aplab_least_prime_factor(uint64_t m, uint64_t* out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    *out = arith::least_prime_factor(m);
    return APLAB_OK;
  });
}

aplab_status aplab_factor_counts(uint64_t m, int* omega, int* nu, uint64_t* radical) {
  return guarded([&] {
    auto f = arith::factorize(m);
    int om = 0;
    for (auto& [p, e] : f.factors) om += e;
    if (omega) *omega = om;
    if (nu) *nu = static_cast<int>(f.factors.size());
    if (radical) {
      uint64_t r = 1;
      for (auto& [p, e] : f.factors) r *= p;
      *radical = r;
    }
    return APLAB_OK;
  });
}

aplab_status aplab_buchstab(double u, double* out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    *out = arith::buchstab_w(u);
    return APLAB_OK;
  });
}

aplab_status aplab_rough_ratio(double x, int k, double u, double* out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    *out = arith::rough_vs_almostprime_ratio(x, k, u);
    return APLAB_OK;
  });
}

aplab_status aplab_saturation_level(const int64_t* coords, int n, aplab_saturation* out) {
  if (auto st = need(coords); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    auto x = arith::make_projective(std::span<const std::int64_t>(coords, n));
    auto s = arith::saturation_L(x);
    out->value = s.value;
    out->witness_abs = s.witness_abs;
    out->witness_p = s.witness_p;
    return APLAB_OK;
  });
}

aplab_status aplab_constants_report(int n, int d, int R, int birch_rank, double beta_n,
                                    int as_json, char** out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    std::optional<double> beta;
    if (!std::isnan(beta_n)) beta = beta_n;
    auto bundle = constants::compute_bundle(n, d, R, birch_rank, beta);
    *out = dup_string(as_json ? constants::render_report_json(bundle)
                              : constants::render_report(bundle));
    return APLAB_OK;
  });
}

aplab_status aplab_local_count(const aplab_form* form, uint64_t p, int level, const int* j,
                               char** out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    std::vector<int> jv(form->f.n, 0);
    if (j) jv.assign(j, j + form->f.n);
    Int count = local::count_solutions_mod(form->f, p, level, jv);
    *out = dup_string(int_str(count));
    return APLAB_OK;
  });
}

aplab_status aplab_local_table(const aplab_form* form, uint64_t p, int level, char** out) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    auto table = local::build_density_table(form->f, p, level);
    *out = dup_string(local::render_table(table));
    return APLAB_OK;
  });
}

aplab_status aplab_singular_series(const aplab_form* form, uint64_t Q, double* value,
                                   char** exact, double* imag_magnitude) {
  if (auto st = need(form); st != APLAB_OK) return st;
  return guarded([&] {
    auto series = local::truncated_singular_series(form->f, Q);
    if (value) *value = series.value;
    if (exact) *exact = dup_string(rat_str(series.exact));
    if (imag_magnitude) *imag_magnitude = series.imag_magnitude;
    return APLAB_OK;
  });
}

aplab_status aplab_local_check_identities(const aplab_form* form, uint64_t p, int level,
                                          char** report) {
  if (auto st = need(form); st != APLAB_OK) return st;
  return guarded([&] {
    std::string text;
    aplab_status status = APLAB_OK;
    try {
      auto orth = local::orthogonality_check(form->f, p, level);
      text += std::string("orthogonality integer route: ") +
              (orth.integer_ok ? "exact" : "MISMATCH") + "\n";
      text += "orthogonality complex relative error: " + std::to_string(orth.complex_rel) + "\n";
      if (!orth.integer_ok || orth.complex_rel > 1e-9) status = APLAB_ERR_IDENTITY;
      if (level > form->f.d) {
        auto scal = local::delta_scaling_checks(form->f, p, level);
        text += std::string("delta level identity: ") +
                (scal.level_identity_ok ? "exact" : "MISMATCH") + "\n";
        text += std::string("delta monotone scaling: ") +
                (scal.monotone_ok ? "holds" : "VIOLATED") + "\n";
        if (!scal.level_identity_ok || !scal.monotone_ok) status = APLAB_ERR_IDENTITY;
      }
      auto g = local::g_approx(form->f, p, level);
      text += "g approximant (both routes): " + rat_str(g) + "\n";
    } catch (const IdentityError& e) {
      text += std::string("identity failure: ") + e.what() + "\n";
      status = APLAB_ERR_IDENTITY;
    }
    if (report) *report = dup_string(text);
    if (status != APLAB_OK) t_last_error = "exact identity check failed";
    return status;
  });
}

aplab_status aplab_sieve_weights(double D, uint64_t z0, uint64_t z, int kind, char** out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    auto w = sieve::beta_sieve_weights(D, z0, z,
                                       kind ? sieve::WeightKind::Upper : sieve::WeightKind::Lower);
    std::string text;
    for (const auto& [d, lam] : w.lambda)
      text += std::to_string(d) + " " + std::to_string(lam) + "\n";
    *out = dup_string(text);
    return APLAB_OK;
  });
}

aplab_status aplab_sieve_functions(double kappa, double smax, char** csv) {
  if (auto st = need(csv); st != APLAB_OK) return st;
  return guarded([&] {
    auto tab = sieve::dhr_sieve_functions(kappa, smax);
    std::string text = "s,f,F\n";
    char buf[96];
    for (double s = 0.25; s <= smax + 1e-9; s += 0.25) {
      std::snprintf(buf, sizeof buf, "%.4f,%.8f,%.8f\n", s, tab.f_at(s), tab.F_at(s));
      text += buf;
    }
    *csv = dup_string(text);
    return APLAB_OK;
  });
}

aplab_status aplab_sieve_beta(double kappa, double* beta, int* is_estimate) {
  if (auto st = need(beta); st != APLAB_OK) return st;
  return guarded([&] {
    auto tab = sieve::dhr_sieve_functions(kappa, 4.0);
    *beta = tab.beta;
    if (is_estimate) *is_estimate = tab.beta_is_estimate ? 1 : 0;
    return APLAB_OK;
  });
}

aplab_status aplab_sieve_threshold(int n, double* s, double* guide) {
  if (auto st = need(s); st != APLAB_OK) return st;
  return guarded([&] {
    auto t = sieve::vector_sieve_threshold(n);
    *s = t.s;
    if (guide) *guide = t.guide;
    return APLAB_OK;
  });
}

aplab_status aplab_weighted_sieve_N(double u, double v, double kappa, double mu0, double tau,
                                    double* out) {
  if (auto st = need(out); st != APLAB_OK) return st;
  return guarded([&] {
    *out = sieve::weighted_sieve_N(u, v, kappa, mu0, tau);
    return APLAB_OK;
  });
}

aplab_status aplab_count_run(const aplab_form* form, const aplab_count_opts* opts, char** csv) {
  if (auto st = need(form); st != APLAB_OK) return st;
  if (auto st = need(opts); st != APLAB_OK) return st;
  if (auto st = need(csv); st != APLAB_OK) return st;
  return guarded([&] {
    counting::CountConfig cfg;
    cfg.B = opts->B;
    cfg.z = opts->z;
    cfg.mitm = opts->mitm == 1   ? counting::CountConfig::Mitm::On
               : opts->mitm == 2 ? counting::CountConfig::Mitm::Off
                                 : counting::CountConfig::Mitm::Auto;
    if (opts->k) cfg.k.assign(opts->k, opts->k + form->f.n);
    if (opts->W == UINT64_MAX) {
      auto wt = counting::find_w_trick(form->f);
      if (!wt) throw DomainError("no admissible W-trick parameters found");
      cfg.W = wt->W;
      cfg.y = wt->y;
    } else if (opts->W > 1) {
      cfg.W = opts->W;
      cfg.y.assign(form->f.n, 1);
    }
    if (opts->weight_bump) {
      auto zeta = counting::find_real_point(form->f);
      cfg.weight = counting::SmoothWeight::bump(counting::bump_center(zeta),
                                                counting::bump_eta(zeta));
    }
    auto cert = forms::make_certificate(
        opts->birch_rank > 0
            ? opts->birch_rank
            : forms::birch_rank(form->f, forms::RankHint{forms::RankHint::Sample}).birch_rank,
        form->f.d, form->f.R, forms::RankProvenance::UserDeclared);
    auto zeros = counting::enumerate_zeros(form->f, cfg);
    auto pred = counting::predict_and_compare(form->f, cert, cfg, opts->Q ? opts->Q : 8);
    char buf[320];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  cfg.B, cfg.z, zeros.size(), pred.measured, pred.singular_series,
                  pred.singular_integral, pred.main_term, pred.error_budget, pred.ratio);
    std::string text = "B,z,count,weighted,sseries,sintegral,main_term,error_budget,ratio\n";
    text += buf;
    *csv = dup_string(text);
    return APLAB_OK;
  });
}

aplab_status aplab_experiment_run(const char* spec_text, char** summary, char** csv) {
  if (auto st = need(spec_text); st != APLAB_OK) return st;
  return guarded([&] {
    auto spec = experiment::parse_spec(spec_text);
    auto result = experiment::run_experiment(spec);
    if (summary) *summary = dup_string(result.summary);
    if (csv) *csv = dup_string(result.csv);
    return APLAB_OK;
  });
}

aplab_status aplab_oracle_suite(char** report) {
  return guarded([&] {
    auto results = experiment::run_oracle_suite();
    if (report) *report = dup_string(experiment::render_oracle_report(results));
    if (!experiment::all_passed(results)) {
      t_last_error = "oracle suite reported failures";
      return APLAB_ERR_IDENTITY;
    }
    return APLAB_OK;
  });
}

}  // extern "C"
