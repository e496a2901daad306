#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/counting.hpp"
#include "core/forms.hpp"

namespace aplab::experiment {

// z selection per B: a constant, a power of log B, or B to an exponent
// derived from theta' (the two theorem-shaped policies).
struct ZPolicy {
  enum class Kind { Fixed, LogPower, ThmVector, ThmRosser } kind = Kind::Fixed;
  double fixed = 0;        // Fixed
  double log_base = 2;     // LogPower: z = (log_base B)^exponent
  double exponent = 1;     // LogPower exponent; must keep z < B
  double c0 = 3;           // ThmVector constant
  double z_of(double B, double theta_prime, int n) const;
};

struct ExperimentSpec {
  std::string form_text;
  std::string form_file;  // alternative source: file containing the form text
  std::string rank_hint = "sample";  // "diagonal" | "sample" | "user:<int>"
  std::vector<double> b_grid;
  ZPolicy z_policy;
  std::uint64_t Q = 8;                     // singular series truncation
  std::optional<double> beta_n;            // weighted-sieve input
  std::string csv_path = "experiment.csv";
  std::string summary_path = "experiment_summary.txt";
  bool use_w_trick = false;
  counting::CountConfig::Mitm mitm = counting::CountConfig::Mitm::Auto;
};

// Line-oriented `[section]` + `key=value` format, or a JSON object with the
// same keys when the text starts with '{'.
ExperimentSpec parse_spec(const std::string& text);

struct ExperimentRow {
  double B = 0;
  double z = 0;
  long long count = 0;
  double weighted = 0;
  double main_term = 0;
  double error_budget = 0;
  double ratio = 0;
};

struct ExperimentResult {
  forms::RankCertificate cert;
  double theta_prime = 0;
  std::vector<ExperimentRow> rows;
  std::string csv;      // also written to csv_path when non-empty
  std::string summary;  // constants, flags, policy notes
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// Named exact-identity oracles over the local/sieve/counting fixtures;
// budget-capped cases report SKIP.  Intended as the CI gate.
struct OracleResult {
  std::string name;
  enum class Status { Pass, Fail, Skip } status = Status::Pass;
  std::string detail;
};
std::vector<OracleResult> run_oracle_suite();
bool all_passed(const std::vector<OracleResult>& results);
std::string render_oracle_report(const std::vector<OracleResult>& results);

}  // namespace aplab::experiment
