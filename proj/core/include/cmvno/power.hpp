#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmvno/environment.hpp"

namespace cmvno {

/// A channel entering the power allocation: `weight` is the posterior idle
/// probability for a sensed channel (1 for a leased one), or that weight times
/// the queue backlog in multi-queue mode.
struct WeightedChannel {
  std::size_t id = 0;
  double weight = 1.0;
  double gain = 1.0;
};

/// Result of waterfilling. Vectors are aligned with the input order.
///
/// The algebra is done in natural log; `rates` are in bits per slot
/// (log2(1 + h P)). Both maximize the same weighted sum because they differ by
/// the constant factor 1/ln 2.
struct PowerPlan {
  std::optional<double> water_level;  // empty when there are no channels
  std::vector<double> powers;
  std::vector<double> rates;
};

/// Weighted waterfilling: maximize sum w_i ln(1 + h_i P_i) s.t. sum P_i <= p_max.
/// Channels are sorted by w*h, and the active prefix is shrunk from the full
/// set until the water level drops below the weakest active channel.
PowerPlan waterfill(std::span<const WeightedChannel> channels, double p_max);

/// Sum over channels of I_i * log2(1 + h_i P_i), capped at `rate_cap`.
/// `transmitted[i]` is 1 when channel i actually carried data.
double realized_rate(const PowerPlan& plan, std::span<const int> transmitted,
                     double rate_cap);

/// Channel-to-queue assignment. `queue_of[i]` is -1 for an unassigned channel.
struct Assignment {
  std::vector<int> queue_of;

  bool assigned(std::size_t channel, std::size_t queue) const {
    return queue_of[channel] == static_cast<int>(queue);
  }
};

struct AssignmentPlan {
  Assignment assignment;
  PowerPlan plan;        // powers per channel for its assigned queue
  double objective = 0;  // sum_i w_i Q_j(i) ln(1 + h_ij P_i)
  std::size_t iterations = 0;
};

/// Greedy channel assignment for multiple queues followed by waterfilling.
///
/// Every channel starts at the longest queue (ties: larger gain, then lower
/// index). After each waterfill, a priced-out channel moves to the longest
/// lower-ranked queue on which it would clear the water level. The loop stops
/// at a fixed point. Channel weights are scaled by Q_j / max_k Q_k so that a
/// single queue reproduces `waterfill` bit for bit; `water_level` is reported
/// in those scaled units.
AssignmentPlan assign_and_waterfill(std::span<const double> backlogs, const GainMatrix& gains,
                                    std::span<const double> weights, double p_max);

/// Value of sum_i w_i Q_j ln(1 + h_ij P_i) for a given assignment and powers.
double assignment_objective(std::span<const double> backlogs, const GainMatrix& gains,
                            std::span<const double> weights, const Assignment& assignment,
                            std::span<const double> powers);

}  // namespace cmvno
