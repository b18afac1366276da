#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmvno/controller.hpp"

namespace cmvno {

/// One curve of a sensing-strategy sweep: a pinned menu entry, or the
/// adaptive policy when `tech` is empty.
struct SweepStrategy {
  std::string name;
  std::optional<std::size_t> tech;
};

/// Re-runs the experiment for every idle probability and strategy.
struct SweepSpec {
  std::vector<double> p_idle;
  std::vector<SweepStrategy> strategies;
};

struct ExperimentConfig {
  std::string name = "custom";
  PolicyConfig policy;  // policy.tradeoff is replaced by each entry of `tradeoffs`
  std::vector<double> tradeoffs{100.0};
  std::uint64_t horizon = 100000;
  std::uint64_t replications = 1;
  std::uint64_t seed = 1;
  double burn_in = 0.1;  // fraction of slots excluded from averages
  std::optional<SweepSpec> sweep;
  std::optional<std::filesystem::path> output_dir;
  bool per_slot = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

void validate(const ExperimentConfig& config);

/// Post-burn-in averages of one replication.
struct ReplicationSummary {
  double avg_profit = 0.0;
  double avg_queue = 0.0;  // total backlog over queues
  double max_queue = 0.0;  // largest single-queue backlog, all slots
  double sensing_share = 0.0;  // fraction of slots that sensed any channel
  std::vector<double> collision_rates;
  std::vector<double> queue_rates;
  std::vector<double> queue_revenues;
  std::vector<double> queue_backlogs;
  std::vector<double> tech_share;  // fraction of sensing slots per menu entry
  std::uint64_t bound_violations = 0;
};

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t; NaN with a single replication
};

Estimate estimate(const std::vector<double>& samples);

struct AggregateRow {
  std::string preset;
  std::string strategy;  // empty outside a sweep
  std::optional<double> p_idle;
  double tradeoff = 0.0;
  std::uint64_t rep_count = 0;
  Estimate profit;
  Estimate queue;
  double max_queue_observed = 0.0;
  double queue_bound = 0.0;
  std::optional<double> collision_backlog_bound;
  std::vector<double> collision_rates;  // mean over replications
  std::vector<double> tolerances;
  std::vector<Estimate> queue_rates;
  std::vector<Estimate> queue_revenues;
  std::vector<Estimate> queue_backlogs;
  double sensing_share = 0.0;
  std::uint64_t bound_violations = 0;
  std::vector<ReplicationSummary> replications;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;
};

/// One replication at a fixed V. `sink`, when set, receives every slot.
ReplicationSummary run_replication(const PolicyConfig& policy, std::uint64_t horizon,
                                   double burn_in, std::uint64_t seed, std::uint64_t replication,
                                   std::ostream* sink = nullptr);

/// Runs every (V, sweep point, strategy) combination and, when an output
/// directory is configured, writes the aggregate CSV (and sweep / per-slot
/// CSVs). The directory is checked for writability before any simulation.
AggregateReport run_experiment(const ExperimentConfig& config);

void write_aggregate_csv(const AggregateReport& report, std::ostream& out);
void write_sweep_csv(const AggregateReport& report, std::ostream& out);
std::string per_slot_header(std::size_t queues);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();

/// Throws ConfigError naming the known presets when `name` is unknown.
ExperimentConfig make_preset(const std::string& name);

std::string to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const std::string& text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace cmvno
