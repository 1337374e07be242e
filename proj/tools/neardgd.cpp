#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "neardgd/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient descent with nested consensus rounds"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Execute an experiment and write CSV trajectories");
  std::string preset;
  std::string config_path;
  std::string out_dir;
  int case_index = 0;
  std::uint64_t seed = 0;
  run_cmd->add_option("--preset", preset, "Built-in experiment: regression or piecewise")
      ->check(CLI::IsMember({"regression", "piecewise"}));
  run_cmd->add_option("--config", config_path, "Experiment description file");
  run_cmd->add_option("--case", case_index, "Run a single schedule (1-based index)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", out_dir, "Override the output directory");

  auto* verify_cmd = app.add_subcommand("verify", "Run the numerical self-check battery");
  std::uint64_t verify_seed = 1;
  verify_cmd->add_option("--seed", verify_seed, "Seed for the randomized checks");

  auto* inspect_cmd =
      app.add_subcommand("inspect", "Print the instance constants and step-size caps");
  std::string inspect_path;
  inspect_cmd->add_option("--config", inspect_path, "Experiment description file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      if (preset.empty() == config_path.empty()) {
        std::cerr << "run: pass exactly one of --preset or --config\n";
        return 2;
      }
      neardgd::ExperimentConfig cfg = !preset.empty()
                                          ? (preset == "regression" ? neardgd::preset_regression()
                                                                    : neardgd::preset_piecewise())
                                          : neardgd::parse_config_file(config_path);
      if (seed_opt->count() > 0) cfg.seed = seed;
      if (!out_dir.empty()) cfg.out = out_dir;
      const neardgd::ExperimentResult res = neardgd::run_experiment(cfg, std::cerr, case_index);
      std::cout << res.summary;
      return res.monitors_ok ? 0 : 1;
    }
    if (verify_cmd->parsed()) return neardgd::run_verify(verify_seed, std::cout) ? 0 : 1;
    if (inspect_cmd->parsed()) {
      std::cout << neardgd::inspect_report(neardgd::parse_config_file(inspect_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
