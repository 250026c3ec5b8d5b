#include "apig/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apig/oracle.hpp"
#include "apig/prox.hpp"
#include "apig/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace apig::bench {

namespace {

constexpr double kReferenceRes = 1e-13;
constexpr double kGateObjectiveTol = 1e-6;
constexpr double kGateResidualTol = 1e-5;

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void ScenarioConfig::validate() const {
  require(problem_kind == "nnls" || problem_kind == "lasso" || problem_kind == "quartic" ||
              problem_kind == "beamforming",
          "problem_kind must be one of nnls, lasso, quartic, beamforming");
  require(n_instances >= 1, "n_instances must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  require(!algorithms.empty(), "at least one algorithm is required");
  require(jobs >= 1, "jobs must be positive");
  for (const auto& algo : algorithms) {
    const bool known = algo.name == "pg" || algo.name == "apig_fp_a" || algo.name == "apig_fp_r" ||
                       algo.name == "apig_a" || algo.name == "apig_r" || algo.name == "psg";
    require(known, "unknown algorithm: " + algo.name);
    if (algo.name == "apig_fp_a" || algo.name == "apig_fp_r" || algo.name == "apig_a" ||
        algo.name == "apig_r") {
      require(algo.delta2 > 1.0, "delta2 must exceed 1 so the residual sequences are summable");
    }
    if (algo.name == "psg") {
      require(problem_kind == "beamforming", "psg applies to the beamforming dual only");
    }
    if (problem_kind == "beamforming") {
      require(algo.name != "apig_a" && algo.name != "apig_r",
              "use apig_fp_a / apig_fp_r for beamforming scenarios");
    } else {
      require(algo.name != "apig_fp_a" && algo.name != "apig_fp_r",
              "apig_fp variants apply to beamforming scenarios only");
    }
  }
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig config;
  config.problem_kind = j.at("problem").get<std::string>();
  if (j.contains("instance")) {
    const auto& inst = j.at("instance");
    config.M = inst.value("M", config.M);
    config.K = inst.value("K", config.K);
    config.gamma_bar = inst.value("gamma_bar", config.gamma_bar);
    config.p_bar = inst.value("p_bar", config.p_bar);
    config.sigma2 = inst.value("sigma2", config.sigma2);
    config.m = inst.value("m", config.m);
    config.n = inst.value("n", config.n);
    config.lambda_l1 = inst.value("lambda_l1", config.lambda_l1);
  }
  config.n_instances = j.value("n_instances", config.n_instances);
  config.base_seed = j.value("base_seed", config.base_seed);
  config.epsilon = j.value("epsilon", config.epsilon);
  config.jobs = j.value("jobs", config.jobs);
  config.require_active_papc = j.value("require_active_papc", config.require_active_papc);
  config.lambda_max = j.value("lambda_max", config.lambda_max);
  for (const auto& a : j.at("algorithms")) {
    AlgorithmSpec spec;
    spec.name = a.at("name").get<std::string>();
    spec.delta1 = a.value("delta1", spec.delta1);
    spec.delta2 = a.value("delta2", spec.delta2);
    spec.delta3 = a.value("delta3", spec.delta3);
    if (a.contains("lambda_grid")) spec.lambda_grid = a.at("lambda_grid").get<std::vector<double>>();
    if (a.contains("delta_grid")) spec.delta_grid = a.at("delta_grid").get<std::vector<double>>();
    config.algorithms.push_back(std::move(spec));
  }
  config.validate();
  return config;
}

nlohmann::json config_to_json(const ScenarioConfig& config) {
  nlohmann::json j;
  j["problem"] = config.problem_kind;
  j["instance"] = {{"M", config.M},          {"K", config.K},
                   {"gamma_bar", config.gamma_bar}, {"p_bar", config.p_bar},
                   {"sigma2", config.sigma2}, {"m", config.m},
                   {"n", config.n},          {"lambda_l1", config.lambda_l1}};
  j["n_instances"] = config.n_instances;
  j["base_seed"] = config.base_seed;
  j["epsilon"] = config.epsilon;
  j["jobs"] = config.jobs;
  j["require_active_papc"] = config.require_active_papc;
  j["lambda_max"] = config.lambda_max;
  auto algos = nlohmann::json::array();
  for (const auto& a : config.algorithms) {
    algos.push_back({{"name", a.name},
                     {"delta1", a.delta1},
                     {"delta2", a.delta2},
                     {"delta3", a.delta3},
                     {"lambda_grid", a.lambda_grid},
                     {"delta_grid", a.delta_grid}});
  }
  j["algorithms"] = std::move(algos);
  return j;
}

namespace {

// SINR targets feasible, per-antenna budgets feasible (bounded dual), and --
// when requested -- at least one budget binding at the optimum. The second
// probe is a short dual solve: an unbounded dual never converges.
bool passes_instance_screen(const bf::NetworkInstance& inst, const ScenarioConfig& config) {
  try {
    const auto s1 = bf::solve_fp_stage1(inst, Vec::Zero(inst.M), Vec::Ones(inst.K), 1e-6, 2000);
    if (config.require_active_papc) {
      const auto s2 =
          bf::solve_fp_stage2(inst, Vec::Zero(inst.M), s1.value, Vec::Ones(inst.K), 1e-6, 50000);
      const auto sol = bf::recover_primal(inst, s1.value, s2.value, Vec::Zero(inst.M));
      if ((sol.realized_powers.array() <= inst.p_bar.array()).all()) return false;
    }
    auto probe = bf::ApigFpConfig::reference(std::max(config.epsilon, 1e-6));
    probe.base.lambda_max = config.lambda_max;
    probe.base.max_outer_iters = 150;
    return bf::apig_fp_run(inst, probe, Vec::Zero(inst.M)).base.status == SolveStatus::Converged;
  } catch (const FpDivergenceError&) {
    return false;
  }
}

}  // namespace

std::vector<bf::NetworkInstance> generate_beamforming_instances(const ScenarioConfig& config,
                                                                int* redraws) {
  std::vector<bf::NetworkInstance> instances;
  instances.reserve(config.n_instances);
  int attempts = 0;
  int discarded = 0;
  while (static_cast<int>(instances.size()) < config.n_instances) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(attempts);
    ++attempts;
    bf::NetworkInstance inst = bf::random_instance(config.M, config.K, config.gamma_bar,
                                                   config.p_bar, config.sigma2, seed);
    if (!passes_instance_screen(inst, config)) {
      ++discarded;
    } else {
      instances.push_back(std::move(inst));
    }
    if (attempts >= 20 && discarded > 0.9 * attempts) {
      throw std::invalid_argument(
          "over 90% of drawn instances are unusable; targets or budgets are too aggressive");
    }
  }
  if (redraws) *redraws = discarded;
  return instances;
}

std::vector<TestProblem> generate_test_problems(const ScenarioConfig& config) {
  std::vector<TestProblem> problems;
  problems.reserve(config.n_instances);
  for (int i = 0; i < config.n_instances; ++i) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    if (config.problem_kind == "nnls") {
      problems.push_back(make_nnls(config.m, config.n, seed));
    } else if (config.problem_kind == "lasso") {
      problems.push_back(make_lasso(config.m, config.n, config.lambda_l1, seed));
    } else {
      problems.push_back(make_nonconvex_quartic(config.n, seed));
    }
  }
  return problems;
}

namespace {

bf::ApigFpConfig fp_config_for(const AlgorithmSpec& algo, const ScenarioConfig& scenario) {
  bf::ApigFpConfig config;
  if (algo.name == "pg") {
    config = bf::ApigFpConfig::pg_baseline();
  } else if (algo.name == "apig_fp_a") {
    config = bf::ApigFpConfig::variant_a(algo.delta1, algo.delta2);
  } else {
    config = bf::ApigFpConfig::variant_r(algo.delta1, algo.delta2, algo.delta3);
  }
  config.base.epsilon = scenario.epsilon;
  config.base.lambda_max = scenario.lambda_max;
  return config;
}

struct BeamformingReference {
  Vec x_ref;
  double d_ref = 0.0;
};

BeamformingReference beamforming_reference(const bf::NetworkInstance& instance,
                                           const ScenarioConfig& scenario) {
  bf::ApigFpConfig config = bf::ApigFpConfig::reference(std::min(1e-8, scenario.epsilon * 1e-2));
  config.base.lambda_max = scenario.lambda_max;
  bf::ApigFpResult res = bf::apig_fp_run(instance, config, Vec::Zero(instance.M));
  BeamformingReference ref;
  ref.x_ref = res.base.x_final;
  ref.d_ref = bf::evaluate_dual(instance, ref.x_ref, kReferenceRes, 200000).d;
  return ref;
}

RunRow beamforming_row(const bf::NetworkInstance& instance, const BeamformingReference& ref,
                       const AlgorithmSpec& algo, const ScenarioConfig& scenario, int instance_id,
                       std::uint64_t* grad_evals_out) {
  RunRow row;
  row.instance_id = instance_id;
  row.algorithm = algo.name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    bf::ApigFpConfig config = fp_config_for(algo, scenario);
    bf::ApigFpResult res = bf::apig_fp_run(instance, config, Vec::Zero(instance.M));
    row.wall_ms = elapsed_ms(t0);
    row.outer_iters = res.base.trace.size();
    row.total_fp_iters = res.base.total_inner_cost();
    row.mean_fpi_per_outer =
        row.outer_iters ? static_cast<double>(row.total_fp_iters) / row.outer_iters : 0.0;
    row.final_delta = res.base.trace.empty() ? 0.0 : res.base.trace.back().delta_g;
    if (grad_evals_out) *grad_evals_out = row.outer_iters;

    const Vec& x = res.base.x_final;
    bf::DualEval precise = bf::evaluate_dual(instance, x, kReferenceRes, 200000);
    row.final_dual_value = precise.d;
    if (res.base.status != SolveStatus::Converged) {
      row.status = to_string(res.base.status);
      return row;
    }
    const double lambda_final = res.base.trace.back().lambda;
    const Vec g_exact = -precise.grad;  // gradient of f = -d
    const Vec x_step = (x - lambda_final * g_exact).cwiseMax(0.0);
    const double residual = (x - x_step).norm() / lambda_final;
    const bool admitted =
        std::abs(precise.d - ref.d_ref) <= kGateObjectiveTol && residual <= kGateResidualTol;
    row.status = admitted ? "converged" : "quality_fail";
  } catch (const FpDivergenceError&) {
    row.wall_ms = elapsed_ms(t0);
    row.status = "fp_divergence";
  }
  return row;
}

RunRow psg_row(const bf::NetworkInstance& instance, const BeamformingReference& ref,
               const AlgorithmSpec& algo, int instance_id, std::uint64_t budget_evals) {
  RunRow row;
  row.instance_id = instance_id;
  row.algorithm = algo.name;
  const int iters = static_cast<int>(std::max<std::uint64_t>(budget_evals, 10));
  const auto t0 = std::chrono::steady_clock::now();
  double best_value = -std::numeric_limits<double>::infinity();
  std::uint64_t best_cost = 0;
  try {
    for (double lambda : algo.lambda_grid) {
      for (double delta : algo.delta_grid) {
        const auto trace =
            bf::psg_run(instance, Vec::Zero(instance.M), lambda, delta, iters, 1e-10, 200000);
        double cell_best = -std::numeric_limits<double>::infinity();
        for (const auto& pt : trace) cell_best = std::max(cell_best, pt.dual_value);
        if (cell_best > best_value) {
          best_value = cell_best;
          best_cost = trace.back().cum_fp_iters;
        }
      }
    }
    row.wall_ms = elapsed_ms(t0);
    row.outer_iters = static_cast<std::uint64_t>(iters);
    row.total_fp_iters = best_cost;
    row.mean_fpi_per_outer = static_cast<double>(best_cost) / iters;
    row.final_dual_value = best_value;
    row.final_delta = std::abs(best_value - ref.d_ref);
    row.status = std::abs(best_value - ref.d_ref) <= kGateObjectiveTol ? "converged" : "quality_fail";
  } catch (const FpDivergenceError&) {
    row.wall_ms = elapsed_ms(t0);
    row.status = "fp_divergence";
  }
  return row;
}

ApigConfig framework_config_for(const AlgorithmSpec& algo, const TestProblem& problem,
                                double epsilon) {
  ApigConfig config;
  config.theta = 0.1;
  config.alpha = 0.5;
  config.lambda_min = 1e-8;
  config.lambda_max = 1e8;
  config.lambda0 = 1.0;
  config.epsilon = epsilon;
  config.ls_variant = problem.convex ? LsVariant::B2 : LsVariant::B1;
  config.max_outer_iters = 2000000;
  config.store_points = false;
  if (algo.name == "apig_a") {
    config.budget.eta_g = ErrorSequence::decade(algo.delta1, algo.delta2);
    config.budget.eta_f = ErrorSequence::decade(algo.delta1, algo.delta2);
  } else if (algo.name == "apig_r") {
    config.budget.a = std::pow(10.0, -algo.delta3);
    config.budget.eta_f = ErrorSequence::decade(algo.delta1, algo.delta2);
  }
  return config;
}

RunRow framework_row(const TestProblem& problem, const AlgorithmSpec& algo, double epsilon,
                     int instance_id, std::uint64_t seed) {
  RunRow row;
  row.instance_id = instance_id;
  row.algorithm = algo.name;
  const auto t0 = std::chrono::steady_clock::now();

  ApigConfig config = framework_config_for(algo, problem, epsilon);
  std::unique_ptr<SmoothOracle> oracle;
  if (algo.name == "pg") {
    oracle = std::make_unique<ExactOracle>(problem.f, problem.grad);
  } else {
    oracle = std::make_unique<NoisyOracle>(problem.f, problem.grad, config.budget, problem.h, seed);
  }
  Problem composite{oracle.get(), problem.h};
  ApigResult res = run(composite, config, Vec::Zero(problem.dim));
  row.wall_ms = elapsed_ms(t0);
  row.outer_iters = res.trace.size();
  row.total_fp_iters = res.total_inner_cost();
  row.mean_fpi_per_outer =
      row.outer_iters ? static_cast<double>(row.total_fp_iters) / row.outer_iters : 0.0;
  row.final_delta = res.trace.empty() ? 0.0 : res.trace.back().delta_g;
  row.final_dual_value = problem.objective(res.x_final);

  if (res.status != SolveStatus::Converged) {
    row.status = to_string(res.status);
    return row;
  }
  const double lambda_final = res.trace.back().lambda;
  const double residual =
      stationarity_residual(problem.h, lambda_final, res.x_final, problem.grad(res.x_final));
  const bool admitted = problem.f_star &&
                        std::abs(row.final_dual_value - *problem.f_star) <= kGateObjectiveTol &&
                        residual <= kGateResidualTol;
  row.status = admitted ? "converged" : "quality_fail";
  return row;
}

}  // namespace

RunReport run_suite(const ScenarioConfig& config) {
  config.validate();
  RunReport report;

  const bool beamforming = config.problem_kind == "beamforming";
  std::vector<bf::NetworkInstance> instances;
  std::vector<TestProblem> problems;
  if (beamforming) {
    instances = generate_beamforming_instances(config, &report.redraws);
  } else {
    problems = generate_test_problems(config);
  }

  std::vector<std::vector<RunRow>> per_instance(config.n_instances);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.jobs) if (config.jobs > 1)
#endif
  for (int idx = 0; idx < config.n_instances; ++idx) {
    std::vector<RunRow> rows;
    if (beamforming) {
      const BeamformingReference ref = beamforming_reference(instances[idx], config);
      std::uint64_t budget_evals = 200;
      for (const auto& algo : config.algorithms) {
        if (algo.name == "psg") {
          rows.push_back(psg_row(instances[idx], ref, algo, idx, budget_evals));
        } else {
          std::uint64_t evals = 0;
          rows.push_back(beamforming_row(instances[idx], ref, algo, config, idx, &evals));
          if (evals > 0) budget_evals = evals;
        }
      }
    } else {
      for (const auto& algo : config.algorithms) {
        rows.push_back(framework_row(problems[idx], algo, config.epsilon, idx,
                                     config.base_seed + static_cast<std::uint64_t>(idx)));
      }
    }
    per_instance[idx] = std::move(rows);
  }

  for (auto& rows : per_instance)
    for (auto& row : rows) report.rows.push_back(std::move(row));
  compute_aggregates(report);
  return report;
}

void compute_aggregates(RunReport& report) {
  std::map<std::string, AggregateRow> by_algo;
  std::vector<std::string> order;
  for (const auto& row : report.rows) {
    if (row.status != "converged") continue;
    auto [it, inserted] = by_algo.try_emplace(row.algorithm);
    if (inserted) {
      it->second.algorithm = row.algorithm;
      order.push_back(row.algorithm);
    }
    AggregateRow& agg = it->second;
    ++agg.runs;
    agg.mean_outer += static_cast<double>(row.outer_iters);
    agg.mean_total_fpi += static_cast<double>(row.total_fp_iters);
    agg.mean_fpi_per_outer += row.mean_fpi_per_outer;
    agg.mean_final_dual += row.final_dual_value;
    agg.mean_wall_ms += row.wall_ms;
  }
  report.aggregates.clear();
  for (const auto& name : order) {
    AggregateRow agg = by_algo[name];
    if (agg.runs > 0) {
      agg.mean_outer /= agg.runs;
      agg.mean_total_fpi /= agg.runs;
      agg.mean_fpi_per_outer /= agg.runs;
      agg.mean_final_dual /= agg.runs;
      agg.mean_wall_ms /= agg.runs;
    }
    report.aggregates.push_back(std::move(agg));
  }
}

void write_report_csv(const RunReport& report, std::ostream& os) {
  os << "instance_id,algorithm,outer_iters,total_fp_iters,mean_fpi_per_outer,final_delta,"
        "final_dual_value,status,wall_ms\n";
  os << std::setprecision(17);
  for (const auto& row : report.rows) {
    os << row.instance_id << ',' << row.algorithm << ',' << row.outer_iters << ','
       << row.total_fp_iters << ',' << row.mean_fpi_per_outer << ',' << row.final_delta << ','
       << row.final_dual_value << ',' << row.status << ',' << row.wall_ms << '\n';
  }
}

RunReport read_report_csv(std::istream& is) {
  RunReport report;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    RunRow row;
    std::getline(ss, field, ',');
    row.instance_id = std::stoi(field);
    std::getline(ss, row.algorithm, ',');
    std::getline(ss, field, ',');
    row.outer_iters = std::stoull(field);
    std::getline(ss, field, ',');
    row.total_fp_iters = std::stoull(field);
    std::getline(ss, field, ',');
    row.mean_fpi_per_outer = std::stod(field);
    std::getline(ss, field, ',');
    row.final_delta = std::stod(field);
    std::getline(ss, field, ',');
    row.final_dual_value = std::stod(field);
    std::getline(ss, row.status, ',');
    std::getline(ss, field, ',');
    row.wall_ms = std::stod(field);
    report.rows.push_back(std::move(row));
  }
  compute_aggregates(report);
  return report;
}

void write_report_markdown(const RunReport& report, std::ostream& os) {
  os << "# Benchmark summary\n\n";
  os << "Aggregates over quality-admitted runs (means per algorithm).\n\n";
  os << "| algorithm | runs | time (ms) | per-iteration FPIs | outer iterations | dual value |\n";
  os << "|---|---|---|---|---|---|\n";
  os << std::setprecision(6);
  for (const auto& agg : report.aggregates) {
    os << "| " << agg.algorithm << " | " << agg.runs << " | " << agg.mean_wall_ms << " | "
       << agg.mean_fpi_per_outer << " | " << agg.mean_outer << " | " << agg.mean_final_dual
       << " |\n";
  }
  os << "\nRows: " << report.rows.size() << "; infeasible redraws: " << report.redraws << "\n";
}

}  // namespace apig::bench
