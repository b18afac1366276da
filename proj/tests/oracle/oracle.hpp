#pragma once

// Brute-force references for the optimizers in cmvno::core. Nothing here calls
// the selection, waterfilling, assignment or pricing routines it checks.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmvno/demand.hpp"
#include "cmvno/power.hpp"
#include "cmvno/selection.hpp"

namespace cmvno::oracle {

inline constexpr std::size_t kMaxSelectionChannels = 16;
inline constexpr std::size_t kMaxAssignmentChannels = 6;
inline constexpr std::size_t kMaxAssignmentQueues = 3;

/// Water level by bisection on the (decreasing) total power
/// sum_i (w_i / lambda - 1 / h_i)^+, then recomputed in closed form over the
/// channels that are active at the bisected level.
double bisect_waterfill(std::span<const WeightedChannel> channels, double p_max);

/// Exact first-stage optimum: every leasing x sensing subset, for the given
/// tech or every tech in the menu. Ties prefer fewer channels, then cheaper
/// tech. Throws CapabilityError above kMaxSelectionChannels.
SelectionResult brute_force_selection(const SelectionInstance& instance,
                                      std::optional<std::size_t> tech = std::nullopt);

/// First-stage objective of one set, evaluated with the bisection water level.
double set_objective(const SelectionInstance& instance, std::size_t tech,
                     std::span<const std::size_t> sensing, std::span<const std::size_t> leasing);

/// Argmax of (q - Q/V) D(M, q) over `grid_steps` evenly spaced prices on [0, q_max].
/// Each zoom round re-grids the two cells around the incumbent with the same
/// number of points; the incumbent is kept, so zooming never lowers the value.
PricingDecision grid_price(const DemandModel& demand, double market, double backlog,
                           double tradeoff, std::size_t grid_steps, int zoom_rounds = 0);

struct AssignmentOptimum {
  Assignment assignment;
  double objective = 0.0;  // sum_i w_i Q_j ln(1 + h_ij P_i)
};

/// Every channel-to-queue map, each followed by waterfilling with weights
/// w_i Q_j. Throws CapabilityError above 6 channels or 3 queues.
AssignmentOptimum exhaustive_assignment(std::span<const double> backlogs, const GainMatrix& gains,
                                        std::span<const double> weights, double p_max);

}  // namespace cmvno::oracle
