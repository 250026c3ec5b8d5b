// Experiment runner: generates instances, sweeps the configured algorithms,
// and emits per-run CSV plus aggregate summaries.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apig/bench.hpp"

namespace fs = std::filesystem;

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, long seed_override,
                int jobs_override) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config file: " << config_path << "\n";
    return 2;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    std::cerr << "config parse error (" << config_path << "): " << e.what() << "\n";
    return 2;
  }

  apig::bench::ScenarioConfig config;
  try {
    config = apig::bench::config_from_json(j);
    if (seed_override >= 0) config.base_seed = static_cast<std::uint64_t>(seed_override);
    if (jobs_override >= 1) config.jobs = jobs_override;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    fs::create_directories(out_dir);
    const apig::bench::RunReport report = apig::bench::run_suite(config);
    {
      std::ofstream os(fs::path(out_dir) / "report.csv");
      if (!os) throw std::runtime_error("cannot write report.csv under " + out_dir);
      apig::bench::write_report_csv(report, os);
    }
    {
      std::ofstream os(fs::path(out_dir) / "config.json");
      os << apig::bench::config_to_json(config).dump(2) << "\n";
    }
    if (config.problem_kind == "beamforming") {
      auto instances = nlohmann::json::array();
      for (const auto& inst : apig::bench::generate_beamforming_instances(config)) {
        instances.push_back(apig::bf::instance_to_json(inst));
      }
      std::ofstream os(fs::path(out_dir) / "instances.json");
      os << instances.dump() << "\n";
    }
    std::cout << "wrote " << report.rows.size() << " rows to " << out_dir << "/report.csv";
    if (report.redraws > 0) std::cout << " (" << report.redraws << " infeasible redraws)";
    std::cout << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "suite failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int report_command(const std::string& in_dir, const std::string& format) {
  const fs::path csv = fs::path(in_dir) / "report.csv";
  std::ifstream is(csv);
  if (!is) {
    std::cerr << "cannot open " << csv.string() << "\n";
    return 2;
  }
  apig::bench::RunReport report;
  try {
    report = apig::bench::read_report_csv(is);
  } catch (const std::exception& e) {
    std::cerr << "failed reading " << csv.string() << ": " << e.what() << "\n";
    return 1;
  }
  if (format == "csv") {
    apig::bench::write_report_csv(report, std::cout);
  } else {
    apig::bench::write_report_markdown(report, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite-optimization benchmark runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "bench_out";
  long seed = -1;
  int jobs = -1;
  auto* run = app.add_subcommand("run", "run a benchmark scenario");
  run->add_option("--config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override base seed");
  run->add_option("--jobs", jobs, "worker threads for the instance sweep");

  std::string in_dir, format = "md";
  auto* rep = app.add_subcommand("report", "summarize an existing run directory");
  rep->add_option("--in", in_dir, "directory holding report.csv")->required();
  rep->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return run_command(config_path, out_dir, seed, jobs);
  return report_command(in_dir, format);
}
