#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmvno/demand.hpp"
#include "cmvno/environment.hpp"
#include "cmvno/power.hpp"
#include "cmvno/rng.hpp"
#include "cmvno/selection.hpp"

namespace cmvno {

enum class PolicyMode { kSingleQueue, kMultiQueue };
enum class OccupancyMode { kIid, kMarkov };

struct PolicyConfig {
  double tradeoff = 100.0;  // V
  std::vector<SensingTech> menu;
  std::optional<std::size_t> fixed_tech;  // pin one menu entry instead of optimizing
  DemandModel demand;
  EnvironmentModel environment;
  double p_max = 8.0;
  double rate_cap = 200.0;  // r_max, bits per slot
  PolicyMode mode = PolicyMode::kSingleQueue;
  OccupancyMode occupancy = OccupancyMode::kIid;
  bool strict_bounds = false;  // throw InternalError on a bound violation
};

void validate(const PolicyConfig& config);

/// Real backlogs Q_j and virtual collision queues Z_i.
struct SystemState {
  std::vector<double> backlogs;
  std::vector<double> collision_backlogs;
  std::uint64_t slot = 0;

  static SystemState initial(const PolicyConfig& config);
};

struct Decision {
  std::vector<PricingDecision> pricing;  // per queue
  std::size_t tech = 0;
  std::vector<std::size_t> sensing_set;  // sensing-band indices
  std::vector<std::size_t> leasing_set;  // leasing-band indices
  std::vector<double> sensing_power;     // per sensing-band channel
  std::vector<double> leasing_power;     // per leasing-band channel
  std::vector<int> sensing_queue;        // assigned queue per sensing channel, -1 if none
  std::vector<int> leasing_queue;        // assigned queue per leasing channel, -1 if none
};

struct SlotMetrics {
  std::uint64_t slot = 0;
  std::vector<double> markets;  // per queue
  double revenue = 0.0;
  double sensing_cost = 0.0;
  double leasing_cost = 0.0;
  double profit = 0.0;
  double rate = 0.0;
  double arrivals = 0.0;
  double tech_cost = 0.0;
  std::vector<double> queue_rates;
  std::vector<double> queue_arrivals;
  std::vector<double> queue_revenues;
  std::vector<int> collisions;  // per sensing channel
  std::vector<double> backlogs;  // after the update
  bool queue_bound_violated = false;
  bool collision_bound_violated = false;
};

/// Hard limits on the real and virtual queues. `collision_backlog_bound` is
/// empty when kappa is unbounded (a zero missed-detection probability or a
/// degenerate idle probability), in which case only the time-average
/// collision constraint is meaningful.
struct TheoremBounds {
  double queue_bound = 0.0;
  double kappa = 0.0;
  std::optional<double> collision_backlog_bound;
};

/// Q_max = V q_max + A_max; Z_max = kappa Q_max + 1 with
/// kappa = r_max * max over techs of p0 (1 - p_fa) / ((1 - p0) p_md).
/// Under Markov occupancy p0 / (1 - p0) is replaced by the largest
/// p_{s->1} / p_{s->0} over channels and previous states.
TheoremBounds theorem_bounds(const PolicyConfig& config);

/// (Q - r)^+ + O A
double update_queue(double backlog, double rate, bool admit, double arrivals);

/// (Z - eta)^+ + X
double update_virtual_queue(double collision_backlog, double tolerance, int collision);

struct StepResult {
  Decision decision;
  SlotMetrics metrics;
  SystemState state;
};

/// One slot of the single-queue policy: price, select, sense, allocate power,
/// transmit, admit arrivals, update queues, account profit.
StepResult pmc_step(const SystemState& state, const EnvSample& sample, const PolicyConfig& config,
                    RngStreams& rng);

/// One slot of the multi-queue policy. With one queue it produces the same
/// trajectory as `pmc_step`.
StepResult mpmc_step(const SystemState& state, const EnvSample& sample,
                     const PolicyConfig& config, RngStreams& rng);

/// A replication: environment, controller state and random streams together.
class Simulation {
 public:
  Simulation(PolicyConfig config, std::uint64_t seed, std::uint64_t replication);

  StepResult step();

  const SystemState& state() const { return state_; }
  const PolicyConfig& config() const { return config_; }
  const TheoremBounds& bounds() const { return bounds_; }

 private:
  PolicyConfig config_;
  TheoremBounds bounds_;
  Environment environment_;
  RngStreams rng_;
  SystemState state_;
};

}  // namespace cmvno
