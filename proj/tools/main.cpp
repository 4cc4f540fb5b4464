#include <cstdio>
#include <exception>
#include <iostream>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marksim/runner.hpp"
#include "marksim/scenario.hpp"

namespace {

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

void print_summary(const marksim::ExperimentResult& result) {
  // Per (marker, group) means across replications, as a quick comparison.
  struct Acc {
    double mean = 0, fi = 0, fi_in = 0;
    int n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const marksim::RunOutput& run : result.runs) {
    for (const marksim::GroupSummary& g : run.groups) {
      Acc& a = acc[run.marker + " / " + g.group];
      a.mean += g.mean_bps;
      a.fi += g.fi_throughput;
      a.fi_in += g.fi_in_tokens;
      ++a.n;
    }
  }
  std::printf("%-24s %14s %12s %12s\n", "marker / group", "mean_bps", "fi_tput", "fi_in");
  for (const auto& [key, a] : acc) {
    std::printf("%-24s %14.0f %12.4f %12.4f\n", key.c_str(), a.mean / a.n, a.fi / a.n,
                a.fi_in / a.n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marksim: DiffServ aggregate-marker comparison on a dumbbell topology"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string param_path;
  std::string values_list;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  bool do_trace = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run every configured marker and write CSVs");
  run_cmd->add_option("--config", config_path, "scenario config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed_override, "override the scenario seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  run_cmd->add_flag("--trace", do_trace, "write one event-trace file per run");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "re-run the experiment over parameter values");
  sweep_cmd->add_option("--config", config_path, "scenario config (JSON)")->required();
  sweep_cmd->add_option("--param", param_path, "JSON pointer of a numeric field, e.g. /sources/0/count")
      ->required();
  sweep_cmd->add_option("--values", values_list, "comma-separated values")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario config");
  validate_cmd->add_option("--config", config_path, "scenario config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    marksim::ScenarioConfig cfg = marksim::load_scenario(config_path);
    if (seed_given) cfg.seed = seed_override;

    if (validate_cmd->parsed()) {
      const std::vector<std::string> errors = marksim::validate_scenario(cfg);
      if (errors.empty()) {
        std::printf("ok: %s\n", cfg.name.c_str());
        return 0;
      }
      for (const std::string& e : errors) std::fprintf(stderr, "error: %s\n", e.c_str());
      return 1;
    }

    if (run_cmd->parsed()) {
      marksim::require_valid(cfg);
      marksim::ExperimentOptions opts;
      if (do_trace) {
        std::filesystem::create_directories(out_dir);
        opts.trace_dir = out_dir;
      }
      const marksim::ExperimentResult result = marksim::run_experiment(cfg, opts);
      marksim::write_experiment(result, cfg.name, out_dir);
      std::printf("wrote %s/%s_flows.csv and %s_summary.csv\n", out_dir.c_str(), cfg.name.c_str(),
                  cfg.name.c_str());
      print_summary(result);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      marksim::require_valid(cfg);
      const std::vector<double> values = parse_values(values_list);
      const marksim::SweepResult result = marksim::sweep(cfg, param_path, values);
      marksim::write_sweep(result, cfg.name, out_dir);
      std::printf("wrote %s/%s_sweep_flows.csv and %s_sweep_summary.csv\n", out_dir.c_str(),
                  cfg.name.c_str(), cfg.name.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
