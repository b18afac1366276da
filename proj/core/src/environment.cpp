#include "cmvno/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmvno/demand.hpp"
#include "cmvno/errors.hpp"

namespace cmvno {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Uniform in [0, 1) built from the top 53 bits of one engine draw.
double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool bernoulli(double p, Engine& rng) { return uniform01(rng) < p; }

void validate_gain(const GainDistribution& gain) {
  if (const auto* r = std::get_if<RayleighGain>(&gain)) {
    if (!(r->sigma > 0.0)) throw ConfigError("Rayleigh sigma must be positive");
  } else if (const auto* f = std::get_if<FixedGain>(&gain)) {
    if (!(f->value > 0.0)) throw ConfigError("fixed channel gain must be positive");
  }
}

}  // namespace

RngStreams::RngStreams(std::uint64_t seed, std::uint64_t replication, std::size_t queues)
    : occupancy_(make(seed, replication, Stream::kOccupancy, 0)),
      gains_(make(seed, replication, Stream::kGains, 0)),
      price_(make(seed, replication, Stream::kLeasingPrice, 0)),
      sensing_(make(seed, replication, Stream::kSensing, 0)) {
  if (queues == 0) throw ConfigError("at least one queue is required");
  for (std::size_t j = 0; j < queues; ++j) {
    market_.push_back(make(seed, replication, Stream::kMarket, j));
    arrivals_.push_back(make(seed, replication, Stream::kArrivals, j));
  }
}

Engine RngStreams::make(std::uint64_t seed, std::uint64_t replication, Stream stream,
                        std::size_t queue) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(queue)};
  return Engine(seq);
}

Engine& RngStreams::get(Stream stream, std::size_t queue) {
  switch (stream) {
    case Stream::kOccupancy:
      return occupancy_;
    case Stream::kGains:
      return gains_;
    case Stream::kLeasingPrice:
      return price_;
    case Stream::kSensing:
      return sensing_;
    case Stream::kMarket:
      return market_.at(queue);
    case Stream::kArrivals:
      return arrivals_.at(queue);
  }
  throw DomainError("unknown random stream");
}

void validate_menu(std::span<const SensingTech> menu) {
  if (menu.empty()) throw ConfigError("sensing technology menu is empty");
  for (const auto& tech : menu) {
    if (!(tech.cost >= 0.0)) throw ConfigError("sensing cost must be non-negative");
    if (!is_probability(tech.p_false_alarm) || !is_probability(tech.p_missed_detection)) {
      throw ConfigError("sensing error probabilities must lie in [0, 1]");
    }
  }
  for (const auto& a : menu) {
    for (const auto& b : menu) {
      if (a.cost > b.cost &&
          (a.p_false_alarm > b.p_false_alarm || a.p_missed_detection > b.p_missed_detection)) {
        throw ConfigError("sensing menu is not monotone: a costlier tech has larger errors");
      }
    }
  }
}

double idle_probability(const Occupancy& occupancy, int prev_state) {
  if (const auto* iid = std::get_if<IidOccupancy>(&occupancy)) return iid->p_idle;
  const auto& m = std::get<MarkovOccupancy>(occupancy);
  return prev_state == 1 ? m.p_idle_to_idle : m.p_busy_to_idle;
}

void validate(const DiscreteDistribution& dist, const char* what) {
  if (dist.values.empty() || dist.values.size() != dist.probabilities.size()) {
    throw ConfigError(std::string(what) + ": values and probabilities must be non-empty and equal length");
  }
  double total = 0.0;
  for (double p : dist.probabilities) {
    if (!(p >= 0.0)) throw ConfigError(std::string(what) + ": negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError(std::string(what) + ": probabilities must sum to 1");
  }
}

void validate(const EnvironmentModel& model) {
  if (model.queues == 0) throw ConfigError("at least one queue is required");
  if (model.sensing.empty() && model.leasing.empty()) throw ConfigError("no channels configured");
  auto check_gains = [&](const ChannelModel& ch) {
    if (ch.gain.size() != model.queues) {
      throw ConfigError("each channel needs one gain distribution per queue");
    }
    for (const auto& g : ch.gain) validate_gain(g);
  };
  for (const auto& ch : model.sensing) {
    if (ch.band != Band::kSensing) throw ConfigError("sensing list holds a non-sensing channel");
    if (!(ch.collision_tolerance > 0.0)) {
      throw ConfigError("collision tolerance must be positive for sensing channels");
    }
    if (const auto* iid = std::get_if<IidOccupancy>(&ch.occupancy)) {
      if (!is_probability(iid->p_idle)) throw ConfigError("idle probability outside [0, 1]");
    } else {
      const auto& m = std::get<MarkovOccupancy>(ch.occupancy);
      if (!is_probability(m.p_busy_to_idle) || !is_probability(m.p_idle_to_idle)) {
        throw ConfigError("Markov transition probability outside [0, 1]");
      }
      if (m.prev_state != 0 && m.prev_state != 1) throw ConfigError("Markov state must be 0 or 1");
    }
    check_gains(ch);
  }
  for (const auto& ch : model.leasing) {
    if (ch.band != Band::kLeasing) throw ConfigError("leasing list holds a non-leasing channel");
    check_gains(ch);
  }
  validate(model.market, "market");
  for (double m : model.market.values) {
    if (!(m > 0.0)) throw ConfigError("market states must be positive");
  }
  validate(model.leasing_price, "leasing_price");
  for (double c : model.leasing_price.values) {
    if (!(c >= 0.0)) throw ConfigError("leasing prices must be non-negative");
  }
}

double draw(const DiscreteDistribution& dist, Engine& rng) {
  double u = uniform01(rng);
  for (std::size_t k = 0; k + 1 < dist.values.size(); ++k) {
    if (u < dist.probabilities[k]) return dist.values[k];
    u -= dist.probabilities[k];
  }
  return dist.values.back();
}

double draw_gain(const GainDistribution& dist, GainSemantics semantics, Engine& rng) {
  if (const auto* fixed = std::get_if<FixedGain>(&dist)) return fixed->value;
  const double sigma = std::get<RayleighGain>(dist).sigma;
  // |h|^2 of a Rayleigh(sigma) amplitude is exponential with mean 2 sigma^2.
  const double u = uniform01(rng);
  const double power = -2.0 * sigma * sigma * std::log1p(-u);
  const double h = semantics == GainSemantics::kPower ? power : std::sqrt(power);
  // Keep gains strictly positive; u = 0 has probability 2^-53.
  return std::max(h, 1e-300);
}

Environment::Environment(EnvironmentModel model) : model_(std::move(model)) {
  validate(model_);
  markov_state_.resize(model_.sensing.size(), 1);
  for (std::size_t i = 0; i < model_.sensing.size(); ++i) {
    if (const auto* m = std::get_if<MarkovOccupancy>(&model_.sensing[i].occupancy)) {
      markov_state_[i] = m->prev_state;
    }
  }
}

EnvSample Environment::sample_slot(RngStreams& rng) {
  const std::size_t queues = model_.queues;
  const std::size_t ns = model_.sensing.size();
  const std::size_t nl = model_.leasing.size();

  EnvSample s;
  s.markets.resize(queues);
  for (std::size_t j = 0; j < queues; ++j) s.markets[j] = draw(model_.market, rng.get(Stream::kMarket, j));

  auto& gain_rng = rng.get(Stream::kGains);
  s.sensing_gains = GainMatrix(ns, queues);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < queues; ++j) {
      s.sensing_gains(i, j) = draw_gain(model_.sensing[i].gain[j], model_.gain_semantics, gain_rng);
    }
  }
  s.leasing_gains = GainMatrix(nl, queues);
  for (std::size_t i = 0; i < nl; ++i) {
    for (std::size_t j = 0; j < queues; ++j) {
      s.leasing_gains(i, j) = draw_gain(model_.leasing[i].gain[j], model_.gain_semantics, gain_rng);
    }
  }

  s.leasing_price = draw(model_.leasing_price, rng.get(Stream::kLeasingPrice));

  auto& occ_rng = rng.get(Stream::kOccupancy);
  s.true_states.resize(ns);
  s.prev_states = markov_state_;
  for (std::size_t i = 0; i < ns; ++i) {
    const double p = idle_probability(model_.sensing[i].occupancy, markov_state_[i]);
    s.true_states[i] = bernoulli(p, occ_rng) ? 1 : 0;
    markov_state_[i] = s.true_states[i];
  }
  return s;
}

SensingOutcome sense(const SensingTech& tech, std::span<const int> true_states,
                     std::span<const std::size_t> sensing_set, Engine& rng) {
  SensingOutcome out;
  out.channels.assign(sensing_set.begin(), sensing_set.end());
  out.sensed_idle.reserve(sensing_set.size());
  out.collisions.reserve(sensing_set.size());
  for (std::size_t ch : sensing_set) {
    if (ch >= true_states.size()) throw DomainError("channel outside the sensing band");
    const int idle = true_states[ch];
    const bool w = idle ? !bernoulli(tech.p_false_alarm, rng) : bernoulli(tech.p_missed_detection, rng);
    out.sensed_idle.push_back(w ? 1 : 0);
    out.collisions.push_back((1 - idle) * (w ? 1 : 0));
  }
  return out;
}

Arrivals sample_arrivals(const DemandModel& demand, double market, double price, bool admit,
                         Engine& rng) {
  Arrivals out;
  if (!admit) return out;
  const double rate = expected_users(demand, market, price);
  if (!(rate > 0.0)) return out;
  std::poisson_distribution<int> users(rate);
  const int n = users(rng);

  std::vector<double> shares;
  shares.reserve(demand.applications.size());
  for (const auto& app : demand.applications) shares.push_back(app.share);
  for (int u = 0; u < n; ++u) {
    // Pick the application, then the file length.
    double pick = uniform01(rng);
    std::size_t k = 0;
    while (k + 1 < shares.size() && pick >= shares[k]) {
      pick -= shares[k];
      ++k;
    }
    const int length = static_cast<int>(draw(demand.applications[k].file_length, rng));
    if (out.packets + length > demand.a_max) break;
    out.packets += length;
    out.file_lengths.push_back(length);
    ++out.users;
  }
  return out;
}

}  // namespace cmvno
