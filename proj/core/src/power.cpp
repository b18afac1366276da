#include "cmvno/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmvno/errors.hpp"

namespace cmvno {

PowerPlan waterfill(std::span<const WeightedChannel> channels, double p_max) {
  if (!(p_max > 0.0)) throw DomainError("power budget must be positive");
  PowerPlan plan;
  const std::size_t n = channels.size();
  plan.powers.assign(n, 0.0);
  plan.rates.assign(n, 0.0);
  if (n == 0) return plan;

  for (const auto& ch : channels) {
    if (!(ch.gain > 0.0)) throw DomainError("channel gains must be positive");
    if (!(ch.weight >= 0.0)) throw DomainError("channel weights must be non-negative");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return channels[a].weight * channels[a].gain > channels[b].weight * channels[b].gain;
  });

  // Prefix sums make each water level O(1).
  std::vector<double> sum_w(n + 1, 0.0);
  std::vector<double> sum_inv_h(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    sum_w[k + 1] = sum_w[k] + channels[order[k]].weight;
    sum_inv_h[k + 1] = sum_inv_h[k] + 1.0 / channels[order[k]].gain;
  }
  auto level = [&](std::size_t m) { return sum_w[m] / (p_max + sum_inv_h[m]); };

  std::size_t m = n;
  while (m > 0) {
    const auto& last = channels[order[m - 1]];
    if (level(m) < last.weight * last.gain) break;
    --m;
  }
  if (m == 0) {
    plan.water_level = level(1);
    return plan;
  }

  const double lambda = level(m);
  plan.water_level = lambda;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = order[k];
    const double p = channels[i].weight / lambda - 1.0 / channels[i].gain;
    plan.powers[i] = std::max(p, 0.0);
    plan.rates[i] = std::log2(1.0 + channels[i].gain * plan.powers[i]);
  }
  return plan;
}

double realized_rate(const PowerPlan& plan, std::span<const int> transmitted, double rate_cap) {
  if (transmitted.size() != plan.rates.size()) {
    throw DomainError("transmission flags must cover every planned channel");
  }
  double r = 0.0;
  for (std::size_t i = 0; i < transmitted.size(); ++i) {
    if (transmitted[i]) r += plan.rates[i];
  }
  return std::min(r, rate_cap);
}

AssignmentPlan assign_and_waterfill(std::span<const double> backlogs, const GainMatrix& gains,
                                    std::span<const double> weights, double p_max) {
  const std::size_t queues = backlogs.size();
  const std::size_t n = gains.rows;
  if (queues == 0) throw DomainError("at least one queue is required");
  if (gains.cols != queues || weights.size() != n || gains.data.size() != n * queues) {
    throw DomainError("gain matrix, weights and backlogs have inconsistent dimensions");
  }
  for (double q : backlogs) {
    if (!(q >= 0.0)) throw DomainError("backlogs must be non-negative");
  }

  AssignmentPlan out;
  out.assignment.queue_of.assign(n, -1);
  out.plan.powers.assign(n, 0.0);
  out.plan.rates.assign(n, 0.0);
  if (n == 0) return out;

  const double q_top = *std::max_element(backlogs.begin(), backlogs.end());
  if (!(q_top > 0.0)) {
    // Nothing is queued, so no channel carries value.
    return out;
  }

  // Per-channel queue preference: longer queue first, then larger gain, then lower index.
  std::vector<std::vector<std::size_t>> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rank[i];
    r.resize(queues);
    std::iota(r.begin(), r.end(), 0);
    std::sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
      if (backlogs[a] != backlogs[b]) return backlogs[a] > backlogs[b];
      if (gains(i, a) != gains(i, b)) return gains(i, a) > gains(i, b);
      return a < b;
    });
  }
  auto scaled_weight = [&](std::size_t i, std::size_t j) {
    return weights[i] * (backlogs[j] / q_top);
  };

  std::vector<std::size_t> pos(n, 0);  // position of the candidate in rank[i]
  std::vector<WeightedChannel> wc(n);
  const std::size_t cap = n * queues;
  PowerPlan plan;
  for (;;) {
    if (++out.iterations > cap) throw InternalError("channel assignment did not converge");
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = rank[i][pos[i]];
      wc[i] = WeightedChannel{i, scaled_weight(i, j), gains(i, j)};
    }
    plan = waterfill(wc, p_max);
    const double lambda = *plan.water_level;

    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (plan.powers[i] > 0.0) continue;
      for (std::size_t k = pos[i] + 1; k < queues; ++k) {
        const std::size_t j = rank[i][k];
        if (scaled_weight(i, j) * gains(i, j) > lambda) {
          pos[i] = k;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;
  }

  out.plan = std::move(plan);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.plan.powers[i] > 0.0) out.assignment.queue_of[i] = static_cast<int>(rank[i][pos[i]]);
  }
  out.objective = assignment_objective(backlogs, gains, weights, out.assignment, out.plan.powers);
  return out;
}

double assignment_objective(std::span<const double> backlogs, const GainMatrix& gains,
                            std::span<const double> weights, const Assignment& assignment,
                            std::span<const double> powers) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.queue_of.size(); ++i) {
    const int j = assignment.queue_of[i];
    if (j < 0) continue;
    const auto q = static_cast<std::size_t>(j);
    total += weights[i] * backlogs[q] * std::log1p(gains(i, q) * powers[i]);
  }
  return total;
}

}  // namespace cmvno
