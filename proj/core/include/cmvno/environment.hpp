#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cmvno/rng.hpp"

namespace cmvno {

struct DemandModel;

/// A sensing technology: per-channel cost and its error probabilities.
struct SensingTech {
  double cost = 0.0;
  double p_false_alarm = 0.0;       // Pr{sensed busy | idle}
  double p_missed_detection = 0.0;  // Pr{sensed idle | busy}
};

/// Throws ConfigError unless probabilities are in [0,1], costs are
/// non-negative, and a costlier tech never has larger error probabilities.
void validate_menu(std::span<const SensingTech> menu);

enum class Band { kSensing, kLeasing };

struct IidOccupancy {
  double p_idle = 0.5;
};

/// Two-state primary-user chain. `prev_state` is the state of the slot before
/// the first sampled one.
struct MarkovOccupancy {
  double p_busy_to_idle = 0.5;
  double p_idle_to_idle = 0.5;
  int prev_state = 1;
};

using Occupancy = std::variant<IidOccupancy, MarkovOccupancy>;

/// Probability that the channel is idle in the next slot given the last state.
double idle_probability(const Occupancy& occupancy, int prev_state);

struct RayleighGain {
  double sigma = 1.0;
};

struct FixedGain {
  double value = 1.0;
};

using GainDistribution = std::variant<RayleighGain, FixedGain>;

/// Whether a Rayleigh draw is used as the channel gain directly or squared.
enum class GainSemantics { kAmplitude, kPower };

struct ChannelModel {
  Band band = Band::kLeasing;
  Occupancy occupancy = IidOccupancy{1.0};  // ignored for leasing channels
  double collision_tolerance = 0.0;         // eta, sensing channels only
  std::vector<GainDistribution> gain;       // one entry per queue
};

/// Finite discrete distribution over real values.
struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;
};

void validate(const DiscreteDistribution& dist, const char* what);

struct EnvironmentModel {
  std::vector<ChannelModel> sensing;
  std::vector<ChannelModel> leasing;
  DiscreteDistribution market;         // market state M, drawn per queue
  DiscreteDistribution leasing_price;  // C^l, shared by every leasing channel
  GainSemantics gain_semantics = GainSemantics::kAmplitude;
  std::size_t queues = 1;
};

void validate(const EnvironmentModel& model);

/// Row-major channel x queue matrix.
struct GainMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  GainMatrix() = default;
  GainMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// One slot of exogenous randomness. `true_states` is simulator ground truth
/// and must not reach the controller's decision logic; `prev_states` is the
/// observable history S(t-1) used by the Markov extension.
struct EnvSample {
  std::vector<double> markets;  // per queue
  GainMatrix sensing_gains;     // [sensing channel][queue]
  GainMatrix leasing_gains;     // [leasing channel][queue]
  double leasing_price = 0.0;
  std::vector<int> true_states;  // per sensing channel, 1 = idle
  std::vector<int> prev_states;  // per sensing channel
};

struct SensingOutcome {
  std::vector<std::size_t> channels;  // sensing-band indices that were sensed
  std::vector<int> sensed_idle;       // W
  std::vector<int> collisions;        // (1 - S) * W
};

struct Arrivals {
  double packets = 0.0;
  std::size_t users = 0;
  std::vector<int> file_lengths;
};

/// Owns the channel models and the Markov chain state for one replication.
class Environment {
 public:
  explicit Environment(EnvironmentModel model);

  const EnvironmentModel& model() const { return model_; }

  EnvSample sample_slot(RngStreams& rng);

 private:
  EnvironmentModel model_;
  std::vector<int> markov_state_;
};

double draw(const DiscreteDistribution& dist, Engine& rng);
double draw_gain(const GainDistribution& dist, GainSemantics semantics, Engine& rng);

/// Imperfect sensing of `sensing_set` (indices into the sensing band).
SensingOutcome sense(const SensingTech& tech, std::span<const int> true_states,
                     std::span<const std::size_t> sensing_set, Engine& rng);

/// Users and packets arriving in one slot for one queue. The user count is
/// Poisson with the model's expected-user rate, truncated so that the packet
/// total never exceeds the model's A_max.
Arrivals sample_arrivals(const DemandModel& demand, double market, double price, bool admit,
                         Engine& rng);

}  // namespace cmvno
