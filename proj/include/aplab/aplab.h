/* aplab: almost-prime solution laboratory, C API.
 *
 * Opaque handles + status codes over the C++ core.  Every function returns
 * APLAB_OK or an error status; aplab_last_error() describes the most recent
 * failure on the calling thread.  Strings returned through char** are
 * allocated by the library and released with aplab_string_free().
 *
 * Budgets and parallelism come from the environment: APLAB_BUDGET caps
 * enumeration states (default 1e8), APLAB_WORKERS sets the worker count.
 */
#ifndef APLAB_H
#define APLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aplab_status {
  APLAB_OK = 0,
  APLAB_ERR_PARSE = 1,      /* malformed input text */
  APLAB_ERR_DOMAIN = 2,     /* precondition violated */
  APLAB_ERR_DIMENSION = 3,  /* vector length mismatch */
  APLAB_ERR_BUDGET = 4,     /* enumeration budget exceeded */
  APLAB_ERR_HYPOTHESIS = 5, /* theorem-shaped hypothesis fails */
  APLAB_ERR_IDENTITY = 6,   /* an exact-identity oracle tripped */
  APLAB_ERR_IO = 7,         /* file output failed */
  APLAB_ERR_NULL = 8,       /* null pointer argument */
  APLAB_ERR_INTERNAL = 9
} aplab_status;

const char* aplab_status_name(aplab_status status);
const char* aplab_last_error(void);
void aplab_string_free(char* s);

/* ---- forms ------------------------------------------------------------ */

typedef struct aplab_form aplab_form; /* an immutable polynomial system */

/* Text format: "n=<int> R=<int> d=<int>: poly ; poly ; ..." over x1..xn. */
aplab_status aplab_form_parse(const char* text, aplab_form** out);
void aplab_form_free(aplab_form* form);
aplab_status aplab_form_print(const aplab_form* form, char** out);
aplab_status aplab_form_dims(const aplab_form* form, int* n, int* R, int* d);
/* decimal string of the max |coefficient|; natural = homogeneous parts only */
aplab_status aplab_form_coefficient_norm(const aplab_form* form, int natural, char** out);

/* g(s) = f(k1 (tau1 + W s1), ..., kn (taun + W sn)), exactly expanded. */
aplab_status aplab_form_substitute(const aplab_form* form, const int64_t* k, const int64_t* tau,
                                   int64_t W, aplab_form** out);

/* rank hints: "diagonal", "sample", or "user:<int>" */
typedef struct aplab_rank_info {
  int birch_rank;
  int certified; /* 0 for the Monte Carlo estimate */
  char K[64];    /* exact rational as text */
  char theta[64];
} aplab_rank_info;
aplab_status aplab_form_birch_rank(const aplab_form* form, const char* hint,
                                   aplab_rank_info* out);

/* max(0, B - (R+1)|j|_1) for a 0/1 slice vector of length n */
aplab_status aplab_rank_after_slicing(const aplab_form* form, int birch_rank, const int* j,
                                      int* out);

/* ---- arith ------------------------------------------------------------ */

aplab_status aplab_least_prime_factor(uint64_t m, uint64_t* out);
aplab_status aplab_factor_counts(uint64_t m, int* omega, int* nu, uint64_t* radical);
aplab_status aplab_buchstab(double u, double* out);
aplab_status aplab_rough_ratio(double x, int k, double u, double* out);
/* saturation level of the projective point with the given coordinates */
typedef struct aplab_saturation {
  double value;
  uint64_t witness_abs;
  uint64_t witness_p;
} aplab_saturation;
aplab_status aplab_saturation_level(const int64_t* coords, int n, aplab_saturation* out);

/* ---- constants --------------------------------------------------------- */

/* key=value report (or JSON when as_json != 0); beta_n = NaN when absent */
aplab_status aplab_constants_report(int n, int d, int R, int birch_rank, double beta_n,
                                    int as_json, char** out);

/* ---- local densities --------------------------------------------------- */

/* exact N_j(p^level) as a decimal string; j may be NULL for the zero vector */
aplab_status aplab_local_count(const aplab_form* form, uint64_t p, int level, const int* j,
                               char** out);
/* per-(p, level) table: counts, sigma, delta, varpi, g, as exact rationals */
aplab_status aplab_local_table(const aplab_form* form, uint64_t p, int level, char** out);
/* truncated singular series S(Q); imag_magnitude reports the conjugacy check */
aplab_status aplab_singular_series(const aplab_form* form, uint64_t Q, double* value,
                                   char** exact, double* imag_magnitude);
/* runs the exact-identity checks for this form at (p, level); APLAB_OK or
 * APLAB_ERR_IDENTITY with the failure description in the report */
aplab_status aplab_local_check_identities(const aplab_form* form, uint64_t p, int level,
                                          char** report);

/* ---- sieve ------------------------------------------------------------- */

/* lines "d lambda" for the Rosser-Iwaniec weights; kind: 0 lower, 1 upper */
aplab_status aplab_sieve_weights(double D, uint64_t z0, uint64_t z, int kind, char** out);
/* CSV "s,f,F" for the dimension-kappa pair on [grid, smax] */
aplab_status aplab_sieve_functions(double kappa, double smax, char** csv);
aplab_status aplab_sieve_beta(double kappa, double* beta, int* is_estimate);
aplab_status aplab_sieve_threshold(int n, double* s, double* guide);
aplab_status aplab_weighted_sieve_N(double u, double v, double kappa, double mu0, double tau,
                                    double* out);

/* ---- counting ---------------------------------------------------------- */

typedef struct aplab_count_opts {
  double B;
  double z;             /* roughness cutoff, 0 = none */
  uint64_t W;           /* 0 or 1 = no W-trick; 2+ = explicit; UINT64_MAX = auto */
  const uint64_t* k;    /* divisor constraints, NULL = all ones */
  int weight_bump;      /* 0 indicator, 1 canonical bump at the found center */
  int mitm;             /* 0 auto, 1 on, 2 off */
  uint64_t Q;           /* singular-series truncation for predictions */
  int birch_rank;       /* <= 0: estimate by sampling */
} aplab_count_opts;

/* one CSV row: B,z,count,weighted,sseries,sintegral,main_term,error_budget,ratio */
aplab_status aplab_count_run(const aplab_form* form, const aplab_count_opts* opts, char** csv);

/* ---- experiments -------------------------------------------------------- */

/* spec text: INI-style sections or a JSON object; writes the configured
 * output files and returns the summary (and the CSV when csv != NULL) */
aplab_status aplab_experiment_run(const char* spec_text, char** summary, char** csv);

/* full exact-identity oracle suite; APLAB_OK when nothing failed (skips
 * allowed), APLAB_ERR_IDENTITY otherwise; report lists PASS/SKIP/FAIL lines */
aplab_status aplab_oracle_suite(char** report);

#ifdef __cplusplus
}
#endif

#endif /* APLAB_H */
