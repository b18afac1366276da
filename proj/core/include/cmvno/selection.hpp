#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmvno/environment.hpp"

namespace cmvno {

// First-stage decisions: which sensing technology to use and which channels to
// sense and lease, before any sensing result is known.
//
// Rates are valued in bits, so the per-channel value of a selected channel is
// (Q/V) * alpha * log2(w h / lambda). Written with natural logs this is the
// familiar (Q/V) * alpha * ln(...) form with Q/V divided by ln 2; the virtual
// gains below carry the same factor as a base-2 exponent.

struct LeasingCandidate {
  double gain = 1.0;
  double cost = 0.0;  // C^l for this slot
};

struct SensingCandidate {
  double gain = 1.0;
  double collision_backlog = 0.0;  // Z_i
  double tolerance = 0.0;          // eta_i
  double p_idle = 0.5;             // prior idle probability for this slot
};

struct SelectionInstance {
  std::vector<LeasingCandidate> leasing;
  std::vector<SensingCandidate> sensing;
  double backlog = 0.0;   // Q
  double tradeoff = 1.0;  // V
  double p_max = 1.0;
  std::vector<SensingTech> menu;
};

struct SelectionResult {
  std::size_t tech = 0;              // index into the menu
  std::vector<std::size_t> sensing;  // sensing candidate indices
  std::vector<std::size_t> leasing;  // leasing candidate indices
  double objective = 0.0;            // costs minus valued expected rate
  std::optional<double> water_level;
};

/// C^s + Z * Pr{busy} * p_md / V: the sensing cost inflated by collision history.
double virtual_sensing_cost(double sensing_cost, double collision_backlog, double tradeoff,
                            double busy_probability, double p_missed_detection);

struct PosteriorWeights {
  double omega = 0.0;  // Pr{idle | sensed idle}
  double alpha = 0.0;  // Pr{idle and sensed idle}
};

/// Posterior weights for a channel whose prior idle probability is `p_idle`
/// (p0 in the i.i.d. model, p_{s->1} under the Markov model). A zero
/// denominator yields omega = 0.
PosteriorWeights posterior_weights(const SensingTech& tech, double p_idle);

/// A candidate prepared for ranking under one sensing technology.
struct RankedCandidate {
  std::size_t index = 0;        // position in the instance's candidate list
  double weight = 1.0;          // omega (1 for leasing)
  double gain = 1.0;            // h
  double availability = 1.0;    // alpha (1 for leasing)
  double cost = 0.0;            // C^l or virtual sensing cost
  double virtual_gain = 0.0;    // g
};

struct RankedInstance {
  std::vector<RankedCandidate> leasing;  // descending g, ties by index
  std::vector<RankedCandidate> sensing;  // descending g, ties by index
  double rate_value = 0.0;               // Q / V, currency per bit
};

/// Virtual gains g = w h 2^(-C / ((Q/V) alpha)), sorted per band. Requires Q > 0.
RankedInstance virtual_gains(const SelectionInstance& instance, std::size_t tech);

/// Largest prefix length m whose weakest channel still beats the water level
/// of the prefix; 0 if even the best candidate does not.
std::size_t search_threshold(std::span<const RankedCandidate> sorted, double p_max);

/// Objective for an arbitrary set: selected costs minus (Q/V) times the
/// expected log2 rate after waterfilling over the whole set.
double selection_objective(const SelectionInstance& instance, std::size_t tech,
                           std::span<const std::size_t> sensing,
                           std::span<const std::size_t> leasing);

/// Best prefix pair for a fixed technology (i.i.d. occupancy: every sensing
/// candidate must share the same p_idle).
SelectionResult select_channels(const SelectionInstance& instance, std::size_t tech);

/// Runs `select_channels` for every technology in the menu and keeps the
/// cheapest objective; ties go to the lower sensing cost.
SelectionResult optimize_sensing_and_channels(const SelectionInstance& instance);

/// Selection when sensing candidates have channel-specific priors (Markov
/// occupancy). With at most two distinct priors each group keeps its own
/// prefix structure; otherwise sensing subsets are enumerated exhaustively,
/// which is capped at `kMaxExhaustiveSensing` channels.
inline constexpr std::size_t kMaxExhaustiveSensing = 16;
SelectionResult markov_select_channels(const SelectionInstance& instance,
                                       std::optional<std::size_t> tech = std::nullopt);

}  // namespace cmvno
