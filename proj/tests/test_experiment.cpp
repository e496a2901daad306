#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/experiment.hpp"
#include "core/local.hpp"

using namespace aplab;
using namespace aplab::experiment;

TEST_CASE("spec parsing: INI sections") {
  auto spec = parse_spec(
      "# cone fixture\n"
      "[form]\n"
      "text = n=3 R=1 d=2: x1*x2 - x3^2\n"
      "rank_hint = sample\n"
      "[grid]\n"
      "B = 10,20\n"
      "z_policy = fixed\n"
      "z_value = 2\n"
      "[series]\n"
      "Q = 6\n"
      "[output]\n"
      "csv = \n"
      "summary = \n");
  CHECK(spec.form_text == "n=3 R=1 d=2: x1*x2 - x3^2");
  CHECK(spec.b_grid == std::vector<double>{10, 20});
  CHECK(spec.z_policy.kind == ZPolicy::Kind::Fixed);
  CHECK(spec.z_policy.fixed == 2);
  CHECK(spec.Q == 6);
  CHECK(spec.csv_path.empty());
}

TEST_CASE("spec parsing: JSON alternative") {
  auto spec = parse_spec(R"({
    "form": {"text": "n=3 R=1 d=2: x1*x2 - x3^2", "rank_hint": "user:3"},
    "grid": {"B": "10", "z_policy": "fixed", "z_value": "0"},
    "output": {"csv": "", "summary": ""}
  })");
  CHECK(spec.form_text == "n=3 R=1 d=2: x1*x2 - x3^2");
  CHECK(spec.rank_hint == "user:3");
  CHECK(spec.b_grid == std::vector<double>{10});
}

TEST_CASE("spec parsing rejects unknown keys and malformed lines") {
  CHECK_THROWS_AS(parse_spec("[grid]\nbogus = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_spec("[grid]\nno equals sign\n"), ParseError);
}

TEST_CASE("z policies") {
  ZPolicy fixed;
  fixed.kind = ZPolicy::Kind::Fixed;
  fixed.fixed = 7;
  CHECK(fixed.z_of(100, 0.5, 6) == 7);

  ZPolicy logp;
  logp.kind = ZPolicy::Kind::LogPower;
  logp.log_base = 2;
  logp.exponent = 1;
  CHECK(logp.z_of(64, 0.5, 6) == doctest::Approx(6.0));

  ZPolicy thm;
  thm.kind = ZPolicy::Kind::ThmVector;
  thm.c0 = 3;
  // exponent = theta' loglog n / (3 log n) at theta' = 1/256, n = 6
  double expo = (1.0 / 256) * std::log(std::log(6.0)) / (3 * std::log(6.0));
  CHECK(thm.z_of(50, 1.0 / 256, 6) == doctest::Approx(std::pow(50.0, expo)));

  ZPolicy ros;
  ros.kind = ZPolicy::Kind::ThmRosser;
  CHECK(ros.z_of(50, 1.0 / 256, 6) ==
        doctest::Approx(std::pow(50.0, (1.0 / 256) / (3.75 * 6))));
}

TEST_CASE("run_experiment reproduces the cone fixture rows") {
  ExperimentSpec spec;
  spec.form_text = "n=3 R=1 d=2: x1*x2 - x3^2";
  spec.rank_hint = "user:3";
  spec.b_grid = {10};
  spec.z_policy.kind = ZPolicy::Kind::Fixed;
  spec.z_policy.fixed = 0;
  spec.Q = 4;
  spec.csv_path.clear();
  spec.summary_path.clear();
  auto plain = run_experiment(spec);
  REQUIRE(plain.rows.size() == 1);
  CHECK(plain.rows[0].count == 18);

  spec.z_policy.fixed = 2;
  auto rough = run_experiment(spec);
  CHECK(rough.rows[0].count == 7);
  CHECK(rough.csv.find("B,z,count,") != std::string::npos);
  CHECK(rough.summary.find("theta_prime") != std::string::npos);
  CHECK(rough.rows[0].main_term > 0);
}

TEST_CASE("experiment reports are byte-identical across runs") {
  ExperimentSpec spec;
  spec.form_text = "n=3 R=1 d=2: x1*x2 - x3^2";
  spec.rank_hint = "user:3";
  spec.b_grid = {10, 15};
  spec.z_policy.kind = ZPolicy::Kind::Fixed;
  spec.z_policy.fixed = 2;
  spec.Q = 4;
  spec.csv_path.clear();
  spec.summary_path.clear();
  auto a = run_experiment(spec);
  auto b = run_experiment(spec);
  CHECK(a.csv == b.csv);
  CHECK(a.summary == b.summary);
}

TEST_CASE("experiment with the W-trick wheel restricts residues") {
  ExperimentSpec spec;
  spec.form_text = "n=3 R=1 d=2: x1*x2 - x3^2";
  spec.rank_hint = "user:3";
  spec.b_grid = {10};
  spec.z_policy.kind = ZPolicy::Kind::Fixed;
  spec.z_policy.fixed = 0;
  spec.Q = 4;
  spec.use_w_trick = true;
  spec.csv_path.clear();
  spec.summary_path.clear();
  auto result = run_experiment(spec);
  // the wheel W = 2 with y = (1,1,1) keeps exactly the 7 all-odd solutions
  CHECK(result.rows[0].count == 7);
  CHECK(result.summary.find("W=2") != std::string::npos);
}

TEST_CASE("experiment accepts a form from a file") {
  const char* path = "form_under_test.txt";
  {
    std::ofstream out(path);
    out << "n=3 R=1 d=2: x1*x2 - x3^2\n";
  }
  ExperimentSpec spec;
  spec.form_file = path;
  spec.rank_hint = "user:3";
  spec.b_grid = {10};
  spec.z_policy.kind = ZPolicy::Kind::Fixed;
  spec.z_policy.fixed = 2;
  spec.Q = 4;
  spec.csv_path.clear();
  spec.summary_path.clear();
  CHECK(run_experiment(spec).rows[0].count == 7);
  std::remove(path);
}

TEST_CASE("experiment surfaces parse errors from the form") {
  ExperimentSpec spec;
  spec.form_text = "n=2 R=1 d=1: x1 - x2";
  spec.b_grid = {10};
  spec.csv_path.clear();
  spec.summary_path.clear();
  CHECK_THROWS_AS(run_experiment(spec), ParseError);
}

TEST_CASE("oracle suite: all pass on a fresh tree") {
  auto results = run_oracle_suite();
  CHECK(all_passed(results));
  int passes = 0;
  for (const auto& r : results)
    if (r.status == OracleResult::Status::Pass) ++passes;
  CHECK(passes >= 10);
  auto report = render_oracle_report(results);
  CHECK(report.find("FAIL") == std::string::npos);
}

TEST_CASE("oracle suite catches a seeded defect") {
  local::set_test_mutation(local::TestMutation::FlipInclusionExclusionSign);
  auto results = run_oracle_suite();
  local::set_test_mutation(local::TestMutation::None);
  CHECK_FALSE(all_passed(results));
  bool named = false;
  for (const auto& r : results)
    if (r.name == "g-two-routes" && r.status == OracleResult::Status::Fail) named = true;
  CHECK(named);
}
