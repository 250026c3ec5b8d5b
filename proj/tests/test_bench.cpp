#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "apig/bench.hpp"

using namespace apig;
using namespace apig::bench;

namespace {

ScenarioConfig small_nnls_config() {
  ScenarioConfig config;
  config.problem_kind = "nnls";
  config.m = 15;
  config.n = 8;
  config.n_instances = 3;
  config.base_seed = 5;
  config.epsilon = 1e-6;
  AlgorithmSpec pg;
  pg.name = "pg";
  AlgorithmSpec noisy;
  noisy.name = "apig_a";
  noisy.delta1 = 2.0;
  noisy.delta2 = 1.2;
  config.algorithms = {pg, noisy};
  return config;
}

}  // namespace

TEST_CASE("config JSON parsing and validation") {
  nlohmann::json j = {
      {"problem", "beamforming"},
      {"instance", {{"M", 4}, {"K", 4}, {"gamma_bar", 3.0}, {"p_bar", 12.0}}},
      {"n_instances", 2},
      {"base_seed", 9},
      {"epsilon", 1e-6},
      {"algorithms",
       {{{"name", "pg"}}, {{"name", "apig_fp_a"}, {"delta1", 2.0}, {"delta2", 1.2}}}}};
  const ScenarioConfig config = config_from_json(j);
  CHECK(config.M == 4);
  CHECK(config.algorithms.size() == 2);

  SUBCASE("summability guard") {
    j["algorithms"][1]["delta2"] = 0.9;
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  }
  SUBCASE("psg is beamforming-only") {
    j["problem"] = "nnls";
    j["algorithms"] = {{{"name", "psg"}}};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  }
  SUBCASE("unknown algorithm") {
    j["algorithms"][0]["name"] = "sdr";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
  }
}

TEST_CASE("instance generation is deterministic") {
  ScenarioConfig config;
  config.problem_kind = "beamforming";
  config.M = config.K = 3;
  config.gamma_bar = 1.5;
  config.p_bar = 10.0;
  config.n_instances = 4;
  config.base_seed = 7;
  AlgorithmSpec pg;
  pg.name = "pg";
  config.algorithms = {pg};

  const auto a = generate_beamforming_instances(config);
  const auto b = generate_beamforming_instances(config);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK((a[i].H - b[i].H).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("hopeless SINR targets are a configuration error") {
  ScenarioConfig config;
  config.problem_kind = "beamforming";
  config.M = 2;
  config.K = 3;  // more users than antennas
  config.gamma_bar = 1e6;
  config.p_bar = 10.0;
  config.n_instances = 2;
  AlgorithmSpec pg;
  pg.name = "pg";
  config.algorithms = {pg};
  CHECK_THROWS_AS(generate_beamforming_instances(config), std::invalid_argument);
}

TEST_CASE("suite runs are deterministic apart from wall time") {
  const ScenarioConfig config = small_nnls_config();
  RunReport r1 = run_suite(config);
  RunReport r2 = run_suite(config);
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].algorithm == r2.rows[i].algorithm);
    CHECK(r1.rows[i].outer_iters == r2.rows[i].outer_iters);
    CHECK(r1.rows[i].total_fp_iters == r2.rows[i].total_fp_iters);
    CHECK(r1.rows[i].final_dual_value == r2.rows[i].final_dual_value);
    CHECK(r1.rows[i].status == r2.rows[i].status);
  }
}

TEST_CASE("all nnls runs pass the quality gate") {
  RunReport report = run_suite(small_nnls_config());
  REQUIRE(report.rows.size() == 6);
  for (const auto& row : report.rows) CHECK(row.status == "converged");
  CHECK(report.aggregates.size() == 2);
  for (const auto& agg : report.aggregates) CHECK(agg.runs == 3);
}

TEST_CASE("report CSV round-trip preserves the aggregates") {
  RunReport report = run_suite(small_nnls_config());
  std::stringstream ss;
  write_report_csv(report, ss);
  RunReport back = read_report_csv(ss);
  REQUIRE(back.rows.size() == report.rows.size());
  REQUIRE(back.aggregates.size() == report.aggregates.size());
  for (std::size_t i = 0; i < report.aggregates.size(); ++i) {
    CHECK(back.aggregates[i].algorithm == report.aggregates[i].algorithm);
    CHECK(back.aggregates[i].runs == report.aggregates[i].runs);
    CHECK(back.aggregates[i].mean_outer == report.aggregates[i].mean_outer);
    CHECK(back.aggregates[i].mean_total_fpi == report.aggregates[i].mean_total_fpi);
    CHECK(back.aggregates[i].mean_fpi_per_outer == report.aggregates[i].mean_fpi_per_outer);
  }
}

TEST_CASE("empty report emits a header-only CSV") {
  RunReport report;
  std::ostringstream os;
  write_report_csv(report, os);
  CHECK(os.str() ==
        "instance_id,algorithm,outer_iters,total_fp_iters,mean_fpi_per_outer,final_delta,"
        "final_dual_value,status,wall_ms\n");
}

TEST_CASE("markdown summary carries the three benchmark metrics") {
  RunReport report = run_suite(small_nnls_config());
  std::ostringstream os;
  write_report_markdown(report, os);
  const std::string text = os.str();
  CHECK(text.find("time (ms)") != std::string::npos);
  CHECK(text.find("per-iteration FPIs") != std::string::npos);
  CHECK(text.find("outer iterations") != std::string::npos);
}

TEST_CASE("subgradient baseline trails the adaptive solver at equal budget") {
  ScenarioConfig config;
  config.problem_kind = "beamforming";
  config.M = config.K = 5;
  config.gamma_bar = 3.0;
  config.p_bar = 4.0;
  config.n_instances = 2;
  config.base_seed = 41;
  config.epsilon = 1e-6;
  config.lambda_max = 1e3;
  config.require_active_papc = true;
  AlgorithmSpec r, psg;
  r.name = "apig_fp_r";
  r.delta1 = 1.0;
  r.delta2 = 2.0;
  r.delta3 = 1.0;
  psg.name = "psg";
  config.algorithms = {r, psg};

  RunReport report = run_suite(config);
  REQUIRE(report.rows.size() == 4);
  for (int inst = 0; inst < 2; ++inst) {
    const RunRow& adaptive = report.rows[2 * inst];
    const RunRow& subgrad = report.rows[2 * inst + 1];
    REQUIRE(adaptive.algorithm == "apig_fp_r");
    REQUIRE(subgrad.algorithm == "psg");
    CHECK(adaptive.status == "converged");
    // the certified gap of the adaptive run beats the subgradient gap at an
    // equal gradient-evaluation budget
    CHECK(subgrad.final_delta > adaptive.final_delta);
  }
}

TEST_CASE("paper-protocol sizes converge on most draws") {
  ScenarioConfig gen;
  gen.problem_kind = "beamforming";
  gen.M = gen.K = 7;
  gen.gamma_bar = 3.0;
  gen.p_bar = 12.0;
  gen.n_instances = 20;
  gen.base_seed = 77;
  AlgorithmSpec pg;
  pg.name = "pg";
  gen.algorithms = {pg};
  const auto instances = generate_beamforming_instances(gen);

  int converged_baseline = 0;
  int converged_tight = 0;
  for (const auto& inst : instances) {
    auto baseline = bf::ApigFpConfig::pg_baseline();
    if (bf::apig_fp_run(inst, baseline, Vec::Zero(7)).base.status == SolveStatus::Converged)
      ++converged_baseline;
    auto tight = bf::ApigFpConfig::variant_a(2.0, 4.0);
    if (bf::apig_fp_run(inst, tight, Vec::Zero(7)).base.status == SolveStatus::Converged)
      ++converged_tight;
  }
  CHECK(converged_baseline >= 15);
  CHECK(converged_tight >= 15);
}
