#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmvno/errors.hpp"
#include "cmvno/harness.hpp"

namespace {

int run(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
        const std::vector<double>& tradeoffs, std::optional<std::uint64_t> horizon,
        std::optional<std::uint64_t> reps, std::optional<std::uint64_t> seed,
        const std::optional<std::string>& out, bool per_slot, unsigned threads) {
  cmvno::ExperimentConfig cfg =
      config_path ? cmvno::load_experiment(*config_path) : cmvno::make_preset(*preset);
  if (!tradeoffs.empty()) cfg.tradeoffs = tradeoffs;
  if (horizon) cfg.horizon = *horizon;
  if (reps) cfg.replications = *reps;
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  cfg.per_slot = per_slot;
  cfg.threads = threads;
  if (per_slot && !out) throw cmvno::ConfigError("--per-slot needs --out");

  const cmvno::AggregateReport report = cmvno::run_experiment(cfg);
  if (cfg.sweep) {
    cmvno::write_sweep_csv(report, std::cout);
  } else {
    cmvno::write_aggregate_csv(report, std::cout);
  }
  std::uint64_t violations = 0;
  for (const auto& row : report.rows) violations += row.bound_violations;
  if (violations > 0) {
    std::cerr << "error: " << violations << " slot(s) exceeded the queue or collision bound\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit-maximizing control simulator for a cognitive virtual network operator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and print its aggregate CSV");
  std::optional<std::string> config_path, preset, out;
  std::vector<double> tradeoffs;
  std::optional<std::uint64_t> horizon, reps, seed;
  bool per_slot = false;
  unsigned threads = 0;
  auto* cfg_opt = run_cmd->add_option("--config", config_path, "JSON experiment file");
  auto* preset_opt = run_cmd->add_option("--preset", preset, "Built-in preset name");
  cfg_opt->excludes(preset_opt);
  run_cmd->add_option("--V", tradeoffs, "Comma-separated V values")->delimiter(',');
  run_cmd->add_option("--horizon", horizon, "Slots per replication")->check(CLI::PositiveNumber);
  run_cmd->add_option("--reps", reps, "Replications per point")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Base seed");
  run_cmd->add_option("--out", out, "Directory for aggregate.csv, sweep.csv and per-slot files");
  run_cmd->add_flag("--per-slot", per_slot, "Write one per-slot CSV per replication");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");
  std::optional<std::string> dump;
  presets_cmd->add_option("--dump", dump, "Print the named preset as a JSON config");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config file without running it");
  std::string validate_path;
  validate_cmd->add_option("--config", validate_path, "JSON experiment file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (!config_path && !preset) throw cmvno::ConfigError("run needs --config or --preset");
      return run(config_path, preset, tradeoffs, horizon, reps, seed, out, per_slot, threads);
    }
    if (*presets_cmd) {
      if (dump) {
        std::cout << cmvno::to_json(cmvno::make_preset(*dump));
        return 0;
      }
      for (const auto& p : cmvno::list_presets()) {
        std::cout << p.name << "\t" << p.description << "\n";
      }
      return 0;
    }
    if (*validate_cmd) {
      const auto cfg = cmvno::load_experiment(validate_path);
      std::cout << "ok: " << cfg.name << " (" << cfg.tradeoffs.size() << " V value(s), "
                << cfg.policy.environment.sensing.size() << " sensing + "
                << cfg.policy.environment.leasing.size() << " leasing channels)\n";
      return 0;
    }
  } catch (const cmvno::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const cmvno::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
