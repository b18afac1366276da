#include <algorithm>

#include "cmvno/errors.hpp"
#include "cmvno/harness.hpp"

namespace cmvno {

namespace {

DiscreteDistribution uniform(std::vector<double> values) {
  DiscreteDistribution d;
  d.probabilities.assign(values.size(), 1.0 / static_cast<double>(values.size()));
  d.values = std::move(values);
  return d;
}

// Single-queue baseline: 20 sensing + 12 leasing channels, three sensing techs.
ExperimentConfig base_s7() {
  ExperimentConfig c;
  auto& p = c.policy;
  p.menu = {{0.0, 0.5, 0.5}, {0.1, 0.1, 0.08}, {0.5, 0.008, 0.005}};
  p.p_max = 8.0;
  p.rate_cap = 200.0;

  p.demand.family = DemandFamily::kQuadratic;
  p.demand.scale = 1.0;
  p.demand.q_max = 5.0;
  p.demand.a_max = 200.0;
  p.demand.applications = {{1.0, uniform({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})}};

  auto& env = p.environment;
  env.market = uniform({1.0, 2.0});
  env.leasing_price = uniform({0.5, 0.75, 1.0, 1.25, 1.5});
  env.gain_semantics = GainSemantics::kAmplitude;
  env.queues = 1;
  for (int i = 0; i < 20; ++i) {
    ChannelModel ch;
    ch.band = Band::kSensing;
    ch.occupancy = IidOccupancy{0.6};
    ch.collision_tolerance = i < 10 ? 0.001 : 0.005;
    ch.gain = {RayleighGain{4.5}};
    env.sensing.push_back(ch);
  }
  for (int i = 0; i < 12; ++i) {
    ChannelModel ch;
    ch.band = Band::kLeasing;
    ch.gain = {RayleighGain{4.5}};
    env.leasing.push_back(ch);
  }
  c.seed = 1;
  c.burn_in = 0.1;
  return c;
}

ExperimentConfig s7_pmc() {
  ExperimentConfig c = base_s7();
  c.name = "s7-pmc";
  c.tradeoffs = {5, 10, 50, 100, 200};
  c.horizon = 100000;
  c.replications = 5;
  return c;
}

ExperimentConfig s7_sensing_sweep() {
  ExperimentConfig c = base_s7();
  c.name = "s7-sensing-sweep";
  c.tradeoffs = {100};
  c.horizon = 20000;
  c.replications = 3;
  SweepSpec s;
  for (int k = 0; k <= 20; ++k) s.p_idle.push_back(k / 20.0);
  s.strategies = {{"zero", 0}, {"low", 1}, {"high", 2}, {"adaptive", std::nullopt}};
  c.sweep = s;
  return c;
}

ExperimentConfig s7_mpmc_2q() {
  ExperimentConfig c = base_s7();
  c.name = "s7-mpmc-2q";
  c.tradeoffs = {100};
  c.horizon = 100000;
  c.replications = 10;
  auto& p = c.policy;
  p.mode = PolicyMode::kMultiQueue;
  p.environment.queues = 2;
  for (auto* band : {&p.environment.sensing, &p.environment.leasing}) {
    for (auto& ch : *band) ch.gain = {RayleighGain{4.5}, RayleighGain{5.5}};
  }
  return c;
}

// Sticky primary users: stationary idle probability 0.4 / 0.65, about 0.615.
ExperimentConfig markov_demo() {
  ExperimentConfig c = base_s7();
  c.name = "markov-demo";
  c.tradeoffs = {100};
  c.horizon = 50000;
  c.replications = 3;
  c.policy.occupancy = OccupancyMode::kMarkov;
  for (auto& ch : c.policy.environment.sensing) ch.occupancy = MarkovOccupancy{0.4, 0.75, 1};
  return c;
}

struct Entry {
  const char* name;
  const char* description;
  ExperimentConfig (*make)();
};

const Entry kPresets[] = {
    {"s7-pmc", "single queue, 20 sensing + 12 leasing channels, V in {5,10,50,100,200}", s7_pmc},
    {"s7-sensing-sweep",
     "idle probability swept over 21 points for zero/low/high-cost sensing and the adaptive policy",
     s7_sensing_sweep},
    {"s7-mpmc-2q", "two queues with Rayleigh sigma 4.5 and 5.5, multi-queue policy at V=100",
     s7_mpmc_2q},
    {"markov-demo", "Markov primary users (p_0->1 = 0.4, p_1->1 = 0.75), adaptive policy",
     markov_demo},
};

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& e : kPresets) out.push_back({e.name, e.description});
  return out;
}

ExperimentConfig make_preset(const std::string& name) {
  for (const auto& e : kPresets) {
    if (name == e.name) {
      ExperimentConfig c = e.make();
      c.policy.tradeoff = c.tradeoffs.front();
      return c;
    }
  }
  std::string known;
  for (const auto& e : kPresets) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace cmvno
