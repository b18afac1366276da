#include "cmvno/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmvno/errors.hpp"

namespace cmvno {

namespace {

// Initial queue candidate for a channel: longest queue, then larger gain, then lower index.
std::size_t lead_queue(std::span<const double> backlogs, const GainMatrix& gains, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < backlogs.size(); ++j) {
    if (backlogs[j] > backlogs[best] ||
        (backlogs[j] == backlogs[best] && gains(row, j) > gains(row, best))) {
      best = j;
    }
  }
  return best;
}

double prior_idle(const PolicyConfig& config, const EnvSample& sample, std::size_t j) {
  return idle_probability(config.environment.sensing[j].occupancy, sample.prev_states[j]);
}

StepResult run_step(const SystemState& state, const EnvSample& sample, const PolicyConfig& config,
                    RngStreams& rng, bool multi) {
  const auto& env = config.environment;
  const std::size_t queues = env.queues;
  const std::size_t ns = env.sensing.size();
  const std::size_t nl = env.leasing.size();
  if (state.backlogs.size() != queues || state.collision_backlogs.size() != ns) {
    throw DomainError("system state does not match the configuration");
  }
  if (sample.markets.size() != queues || sample.true_states.size() != ns ||
      sample.sensing_gains.rows != ns || sample.leasing_gains.rows != nl) {
    throw DomainError("environment sample does not match the configuration");
  }

  StepResult out;
  Decision& d = out.decision;
  SlotMetrics& m = out.metrics;

  // Revenue side: one price per queue.
  d.pricing.reserve(queues);
  for (std::size_t j = 0; j < queues; ++j) {
    d.pricing.push_back(optimal_price(config.demand, sample.markets[j], state.backlogs[j],
                                      config.tradeoff));
  }

  // Cost side, first stage. Multiple queues are ranked against the longest one.
  std::size_t lead = 0;
  for (std::size_t j = 1; j < queues; ++j) {
    if (state.backlogs[j] > state.backlogs[lead]) lead = j;
  }
  SelectionInstance inst;
  inst.backlog = state.backlogs[lead];
  inst.tradeoff = config.tradeoff;
  inst.p_max = config.p_max;
  inst.menu = config.menu;
  inst.leasing.reserve(nl);
  for (std::size_t i = 0; i < nl; ++i) {
    const std::size_t j = multi ? lead_queue(state.backlogs, sample.leasing_gains, i) : 0;
    inst.leasing.push_back({sample.leasing_gains(i, j), sample.leasing_price});
  }
  inst.sensing.reserve(ns);
  std::vector<double> p_idle(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t j = multi ? lead_queue(state.backlogs, sample.sensing_gains, i) : 0;
    p_idle[i] = prior_idle(config, sample, i);
    inst.sensing.push_back({sample.sensing_gains(i, j), state.collision_backlogs[i],
                            env.sensing[i].collision_tolerance, p_idle[i]});
  }

  SelectionResult sel;
  if (config.occupancy == OccupancyMode::kMarkov) {
    sel = markov_select_channels(inst, config.fixed_tech);
  } else if (config.fixed_tech) {
    sel = select_channels(inst, *config.fixed_tech);
  } else {
    sel = optimize_sensing_and_channels(inst);
  }
  d.tech = sel.tech;
  d.sensing_set = sel.sensing;
  d.leasing_set = sel.leasing;
  const SensingTech& tech = config.menu[d.tech];

  // Sensing.
  const SensingOutcome sensed = sense(tech, sample.true_states, d.sensing_set,
                                      rng.get(Stream::kSensing));

  // Second stage: leased channels plus sensed-idle ones.
  std::vector<int> flags;
  std::vector<double> weights;
  std::vector<std::size_t> band_index;
  std::vector<bool> is_leasing;
  for (std::size_t i : d.leasing_set) {
    weights.push_back(1.0);
    flags.push_back(1);
    band_index.push_back(i);
    is_leasing.push_back(true);
  }
  for (std::size_t k = 0; k < sensed.channels.size(); ++k) {
    if (!sensed.sensed_idle[k]) continue;
    const std::size_t i = sensed.channels[k];
    weights.push_back(posterior_weights(tech, p_idle[i]).omega);
    flags.push_back(sample.true_states[i]);
    band_index.push_back(i);
    is_leasing.push_back(false);
  }
  const std::size_t na = weights.size();
  GainMatrix gains(na, queues);
  for (std::size_t k = 0; k < na; ++k) {
    const GainMatrix& src = is_leasing[k] ? sample.leasing_gains : sample.sensing_gains;
    for (std::size_t j = 0; j < queues; ++j) gains(k, j) = src(band_index[k], j);
  }

  std::vector<double> powers(na, 0.0);
  std::vector<int> queue_of(na, -1);
  if (!multi) {
    std::vector<WeightedChannel> wc(na);
    for (std::size_t k = 0; k < na; ++k) wc[k] = {k, weights[k], gains(k, 0)};
    const PowerPlan plan = waterfill(wc, config.p_max);
    powers = plan.powers;
    for (std::size_t k = 0; k < na; ++k) {
      if (powers[k] > 0.0) queue_of[k] = 0;
    }
  } else {
    const AssignmentPlan ap = assign_and_waterfill(state.backlogs, gains, weights, config.p_max);
    powers = ap.plan.powers;
    queue_of = ap.assignment.queue_of;
  }

  d.sensing_power.assign(ns, 0.0);
  d.leasing_power.assign(nl, 0.0);
  d.sensing_queue.assign(ns, -1);
  d.leasing_queue.assign(nl, -1);
  m.queue_rates.assign(queues, 0.0);
  for (std::size_t k = 0; k < na; ++k) {
    auto& pw = is_leasing[k] ? d.leasing_power : d.sensing_power;
    auto& qv = is_leasing[k] ? d.leasing_queue : d.sensing_queue;
    pw[band_index[k]] = powers[k];
    qv[band_index[k]] = queue_of[k];
    if (queue_of[k] >= 0 && flags[k]) {
      const auto j = static_cast<std::size_t>(queue_of[k]);
      m.queue_rates[j] += std::log2(1.0 + gains(k, j) * powers[k]);
    }
  }
  for (double& r : m.queue_rates) r = std::min(r, config.rate_cap);

  // Arrivals and queue updates.
  const TheoremBounds bounds = theorem_bounds(config);
  SystemState& next = out.state;
  next.slot = state.slot + 1;
  next.backlogs.resize(queues);
  m.queue_arrivals.assign(queues, 0.0);
  m.queue_revenues.assign(queues, 0.0);
  for (std::size_t j = 0; j < queues; ++j) {
    const auto& p = d.pricing[j];
    const Arrivals a = sample_arrivals(config.demand, sample.markets[j], p.price, p.admit,
                                       rng.get(Stream::kArrivals, j));
    m.queue_arrivals[j] = a.packets;
    m.queue_revenues[j] = p.admit ? p.price * a.packets : 0.0;
    next.backlogs[j] = update_queue(state.backlogs[j], m.queue_rates[j], p.admit, a.packets);
    m.rate += m.queue_rates[j];
    m.arrivals += a.packets;
    m.revenue += m.queue_revenues[j];
    if (next.backlogs[j] > bounds.queue_bound) m.queue_bound_violated = true;
  }

  m.collisions.assign(ns, 0);
  for (std::size_t k = 0; k < sensed.channels.size(); ++k) {
    m.collisions[sensed.channels[k]] = sensed.collisions[k];
  }
  next.collision_backlogs.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    next.collision_backlogs[i] = update_virtual_queue(
        state.collision_backlogs[i], env.sensing[i].collision_tolerance, m.collisions[i]);
    if (bounds.collision_backlog_bound && next.collision_backlogs[i] > *bounds.collision_backlog_bound) {
      m.collision_bound_violated = true;
    }
  }

  m.slot = state.slot;
  m.markets = sample.markets;
  m.sensing_cost = tech.cost * static_cast<double>(d.sensing_set.size());
  m.leasing_cost = sample.leasing_price * static_cast<double>(d.leasing_set.size());
  m.profit = m.revenue - m.sensing_cost - m.leasing_cost;
  m.tech_cost = tech.cost;
  m.backlogs = next.backlogs;

  if (config.strict_bounds && (m.queue_bound_violated || m.collision_bound_violated)) {
    throw InternalError("theorem bound violated at slot " + std::to_string(state.slot));
  }
  return out;
}

}  // namespace

void validate(const PolicyConfig& config) {
  if (!(config.tradeoff > 0.0)) throw ConfigError("V must be positive");
  if (!(config.rate_cap > 0.0)) throw ConfigError("r_max must be positive");
  if (!(config.p_max > 0.0)) throw ConfigError("P_max must be positive");
  validate_menu(config.menu);
  if (config.fixed_tech && *config.fixed_tech >= config.menu.size()) {
    throw ConfigError("fixed sensing technology is not in the menu");
  }
  validate(config.demand);
  validate(config.environment);
  if (config.mode == PolicyMode::kSingleQueue && config.environment.queues != 1) {
    throw ConfigError("single-queue mode needs exactly one queue");
  }
  for (const auto& ch : config.environment.sensing) {
    const bool markov = std::holds_alternative<MarkovOccupancy>(ch.occupancy);
    if (markov != (config.occupancy == OccupancyMode::kMarkov)) {
      throw ConfigError("channel occupancy models must match the occupancy mode");
    }
  }
}

SystemState SystemState::initial(const PolicyConfig& config) {
  SystemState s;
  s.backlogs.assign(config.environment.queues, 0.0);
  s.collision_backlogs.assign(config.environment.sensing.size(), 0.0);
  return s;
}

TheoremBounds theorem_bounds(const PolicyConfig& config) {
  TheoremBounds b;
  b.queue_bound = config.tradeoff * config.demand.q_max + config.demand.a_max;
  const auto& sensing = config.environment.sensing;
  if (sensing.empty()) {
    b.collision_backlog_bound = 0.0;
    return b;
  }
  // Largest idle-to-busy odds over channels (and previous states).
  double odds = 0.0;
  bool unbounded = false;
  auto add_odds = [&](double p) {
    if (p <= 0.0 || p >= 1.0) {
      unbounded = true;
    } else {
      odds = std::max(odds, p / (1.0 - p));
    }
  };
  for (const auto& ch : sensing) {
    if (const auto* iid = std::get_if<IidOccupancy>(&ch.occupancy)) {
      add_odds(iid->p_idle);
    } else {
      const auto& mk = std::get<MarkovOccupancy>(ch.occupancy);
      add_odds(mk.p_busy_to_idle);
      add_odds(mk.p_idle_to_idle);
    }
  }
  double ratio = 0.0;
  for (const auto& t : config.menu) {
    if (t.p_missed_detection <= 0.0) {
      unbounded = true;
    } else {
      ratio = std::max(ratio, (1.0 - t.p_false_alarm) / t.p_missed_detection);
    }
  }
  if (unbounded) {
    b.kappa = std::numeric_limits<double>::infinity();
    return b;
  }
  b.kappa = config.rate_cap * odds * ratio;
  b.collision_backlog_bound = b.kappa * b.queue_bound + 1.0;
  return b;
}

double update_queue(double backlog, double rate, bool admit, double arrivals) {
  return std::max(backlog - rate, 0.0) + (admit ? arrivals : 0.0);
}

double update_virtual_queue(double collision_backlog, double tolerance, int collision) {
  return std::max(collision_backlog - tolerance, 0.0) + collision;
}

StepResult pmc_step(const SystemState& state, const EnvSample& sample, const PolicyConfig& config,
                    RngStreams& rng) {
  if (config.environment.queues != 1) throw DomainError("single-queue step needs one queue");
  return run_step(state, sample, config, rng, false);
}

StepResult mpmc_step(const SystemState& state, const EnvSample& sample, const PolicyConfig& config,
                     RngStreams& rng) {
  return run_step(state, sample, config, rng, true);
}

Simulation::Simulation(PolicyConfig config, std::uint64_t seed, std::uint64_t replication)
    : config_((validate(config), std::move(config))),
      bounds_(theorem_bounds(config_)),
      environment_(config_.environment),
      rng_(seed, replication, config_.environment.queues),
      state_(SystemState::initial(config_)) {}

StepResult Simulation::step() {
  const EnvSample sample = environment_.sample_slot(rng_);
  StepResult r = config_.mode == PolicyMode::kSingleQueue
                     ? pmc_step(state_, sample, config_, rng_)
                     : mpmc_step(state_, sample, config_, rng_);
  state_ = r.state;
  return r;
}

}  // namespace cmvno
