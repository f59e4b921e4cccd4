#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sage/attack.hpp"
#include "sage/config.hpp"
#include "sage/errors.hpp"
#include "sage/graph.hpp"
#include "sage/harness.hpp"
#include "sage/measurement.hpp"
#include "sage/report.hpp"
#include "sage/resilience.hpp"

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw sage::ConfigError("cannot write " + path.string());
  return out;
}

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
};

sage::SimulationConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& trials,
                                           const std::optional<std::uint64_t>& seed) {
  auto c = sage::load_config(path);
  if (trials) {
    if (*trials < 1) throw sage::ConfigError("--trials must be >= 1");
    c.trials = *trials;
  }
  if (seed) c.seed = *seed;
  return c;
}

int cmd_run(const RunArgs& a) {
  const sage::Experiment experiment(load_with_overrides(a.config, a.trials, a.seed));
  const auto result = experiment.run();
  const fs::path dir(a.out);
  fs::create_directories(dir);
  {
    auto csv = open_output(dir / "metrics.csv");
    sage::write_metrics_csv(csv, result);
  }
  {
    auto js = open_output(dir / "summary.json");
    js << sage::summary_json(experiment, result).dump(2) << '\n';
  }
  for (const auto& agg : result.aggregates) {
    const auto& f = agg.final();
    std::cout << sage::to_string(agg.kind) << ": iter " << f.iter << ", median max_rmse "
              << sage::format_double(f.max_rmse.median) << " [q05 " << sage::format_double(f.max_rmse.q05) << ", q95 "
              << sage::format_double(f.max_rmse.q95) << "]\n";
  }
  return 0;
}

struct AnalyzeArgs {
  std::string model;
  std::string attack;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto model = sage::measurement_model_from_json(sage::read_json_file(a.model));
  const auto scenario = sage::attack_scenario_from_json(sage::read_json_file(a.attack), model);
  auto report = sage::to_json(sage::check_resilience(model, scenario.compromised()));
  report["streams"] = model.stream_count();
  report["lambda_min_all"] = sage::min_eigenvalue(sage::full_grammian(model));
  try {
    report["max_tolerable_s"] = sage::max_tolerable_s(model);
  } catch (const sage::TooLarge&) {
    report["max_tolerable_s"] = nullptr;
  } catch (const sage::NotObservable&) {
    report["max_tolerable_s"] = nullptr;
  }
  const std::string text = report.dump(2);
  if (a.out.empty()) {
    std::cout << text << '\n';
  } else {
    open_output(a.out) << text << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string param;
  std::vector<double> values;
  std::string out;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
};

int cmd_sweep(const SweepArgs& a) {
  const auto c = load_with_overrides(a.config, a.trials, a.seed);
  std::vector<sage::SweepRow> rows;
  if (a.param == "gamma") {
    rows = sage::sweep_gamma(c, a.values);
  } else {
    std::vector<std::size_t> counts;
    for (double v : a.values) {
      if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw sage::ConfigError("attack_count values must be non-negative integers");
      }
      counts.push_back(static_cast<std::size_t>(v));
    }
    rows = sage::sweep_attack_count(c, counts);
  }
  if (a.out.empty()) {
    sage::write_sweep_csv(std::cout, a.param, rows);
  } else {
    auto out = open_output(a.out);
    sage::write_sweep_csv(out, a.param, rows);
  }
  return 0;
}

struct GraphArgs {
  std::size_t n = 0;
  double radius = 0.0;
  std::uint64_t seed = 1;
};

int cmd_graph(const GraphArgs& a) {
  const auto g = sage::random_geometric(a.n, a.radius, a.seed);
  sage::write_edge_list(std::cout, g);
  const auto l = sage::laplacian(g);
  std::cerr << "connected " << (g.connected() ? "yes" : "no") << ", lambda_2 "
            << sage::format_double(sage::algebraic_connectivity(l)) << ", lambda_N "
            << sage::format_double(sage::max_laplacian_eigenvalue(l)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient distributed parameter estimation simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  run_cmd->add_option("--config", run.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--trials", run.trials, "Override the number of trials");
  run_cmd->add_option("--seed", run.seed, "Override the master seed");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Resilience report for a model and attack set");
  analyze_cmd->add_option("--model", analyze.model, "Measurement model JSON")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--attack", analyze.attack, "Attack scenario JSON")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", analyze.out, "Write the report here instead of stdout");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Final error versus Gamma or number of attacked agents");
  sweep_cmd->add_option("--config", sweep.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sweep.param, "gamma or attack_count")
      ->required()
      ->check(CLI::IsMember({"gamma", "attack_count"}));
  sweep_cmd->add_option("--values", sweep.values, "Values to sweep")->required()->expected(1, -1);
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--trials", sweep.trials, "Override the number of trials");
  sweep_cmd->add_option("--seed", sweep.seed, "Override the master seed");

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "Print a random geometric graph as an edge list");
  graph_cmd->add_option("--n", graph.n, "Vertices")->required()->check(CLI::PositiveNumber);
  graph_cmd->add_option("--radius", graph.radius, "Connection radius")->required()->check(CLI::PositiveNumber);
  graph_cmd->add_option("--seed", graph.seed, "Placement seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*analyze_cmd) return cmd_analyze(analyze);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*graph_cmd) return cmd_graph(graph);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
