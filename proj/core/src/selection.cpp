#include "cmvno/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cmvno/errors.hpp"
#include "cmvno/power.hpp"

namespace cmvno {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_instance(const SelectionInstance& instance) {
  if (!(instance.tradeoff > 0.0)) throw DomainError("tradeoff V must be positive");
  if (!(instance.backlog >= 0.0)) throw DomainError("backlog must be non-negative");
  if (!(instance.p_max > 0.0)) throw DomainError("power budget must be positive");
  if (instance.menu.empty()) throw DomainError("sensing technology menu is empty");
  for (const auto& c : instance.leasing) {
    if (!(c.gain > 0.0)) throw DomainError("channel gains must be positive");
  }
  for (const auto& c : instance.sensing) {
    if (!(c.gain > 0.0)) throw DomainError("channel gains must be positive");
  }
}

double virtual_gain(double weight, double gain, double availability, double cost,
                    double rate_value) {
  if (!(weight > 0.0) || !(availability > 0.0)) return 0.0;
  return weight * gain * std::exp2(-cost / (rate_value * availability));
}

RankedCandidate rank_sensing(const SelectionInstance& instance, const SensingTech& tech,
                             std::size_t j, double rate_value) {
  const auto& c = instance.sensing[j];
  const auto pw = posterior_weights(tech, c.p_idle);
  RankedCandidate r;
  r.index = j;
  r.weight = pw.omega;
  r.gain = c.gain;
  r.availability = pw.alpha;
  r.cost = virtual_sensing_cost(tech.cost, c.collision_backlog, instance.tradeoff, 1.0 - c.p_idle,
                                tech.p_missed_detection);
  r.virtual_gain = virtual_gain(r.weight, r.gain, r.availability, r.cost, rate_value);
  return r;
}

RankedCandidate rank_leasing(const SelectionInstance& instance, std::size_t i, double rate_value) {
  const auto& c = instance.leasing[i];
  RankedCandidate r;
  r.index = i;
  r.gain = c.gain;
  r.cost = c.cost;
  r.virtual_gain = virtual_gain(1.0, c.gain, 1.0, c.cost, rate_value);
  return r;
}

void sort_by_virtual_gain(std::vector<RankedCandidate>& v) {
  std::sort(v.begin(), v.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.virtual_gain != b.virtual_gain) return a.virtual_gain > b.virtual_gain;
    return a.index < b.index;
  });
}

// Costs minus valued expected rate for an arbitrary candidate set, with the
// water level taken from a full waterfill over the set.
double direct_objective(std::span<const RankedCandidate> set, double rate_value, double p_max,
                        std::optional<double>* level = nullptr) {
  if (set.empty()) {
    if (level) level->reset();
    return 0.0;
  }
  std::vector<WeightedChannel> wc;
  wc.reserve(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) wc.push_back({k, set[k].weight, set[k].gain});
  const PowerPlan plan = waterfill(wc, p_max);
  const double lambda = *plan.water_level;
  double u = 0.0;
  for (const auto& c : set) {
    u += c.cost;
    if (c.weight > 0.0 && c.weight * c.gain > lambda) {
      u -= rate_value * c.availability * std::log2(c.weight * c.gain / lambda);
    }
  }
  if (level) *level = lambda;
  return u;
}

// Prefix sums over one g-sorted group of candidates.
struct PrefixGroup {
  std::vector<RankedCandidate> items;
  std::size_t limit = 0;  // largest prefix worth trying
  std::vector<double> cost, weight, inv_gain, avail, avail_log;

  void build() {
    const std::size_t n = items.size();
    cost.assign(n + 1, 0.0);
    weight.assign(n + 1, 0.0);
    inv_gain.assign(n + 1, 0.0);
    avail.assign(n + 1, 0.0);
    avail_log.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& c = items[k];
      cost[k + 1] = cost[k] + c.cost;
      weight[k + 1] = weight[k] + c.weight;
      inv_gain[k + 1] = inv_gain[k] + 1.0 / c.gain;
      avail[k + 1] = avail[k] + c.availability;
      const double lg = c.weight > 0.0 ? c.availability * std::log2(c.weight * c.gain) : 0.0;
      avail_log[k + 1] = avail_log[k] + lg;
    }
  }
};

struct PrefixChoice {
  std::vector<std::size_t> lengths;
  double objective = 0.0;
  std::optional<double> water_level;
};

// Enumerates every combination of per-group prefix lengths. A combination is
// admissible when the last channel of each non-empty prefix beats the joint
// water level; then every chosen channel is active and the objective has a
// closed form in the prefix sums. Ties go to the smaller total set.
PrefixChoice prefix_search(std::vector<PrefixGroup>& groups, double rate_value, double p_max) {
  for (auto& g : groups) {
    g.build();
    g.limit = search_threshold(g.items, p_max);
  }
  const std::size_t ng = groups.size();
  PrefixChoice best;
  best.lengths.assign(ng, 0);
  std::size_t best_total = 0;

  std::vector<std::size_t> m(ng, 0);
  for (;;) {
    std::size_t total = 0;
    double w = 0.0, ih = 0.0, cost = 0.0, av = 0.0, avlog = 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
      const auto& grp = groups[g];
      total += m[g];
      w += grp.weight[m[g]];
      ih += grp.inv_gain[m[g]];
      cost += grp.cost[m[g]];
      av += grp.avail[m[g]];
      avlog += grp.avail_log[m[g]];
    }
    if (total > 0) {
      const double lambda = w / (p_max + ih);
      bool ok = lambda > 0.0;
      for (std::size_t g = 0; ok && g < ng; ++g) {
        if (m[g] > 0 && !(groups[g].items[m[g] - 1].virtual_gain > lambda)) ok = false;
      }
      if (ok) {
        const double u = cost - rate_value * (avlog - av * std::log2(lambda));
        if (u < best.objective || (u == best.objective && total < best_total)) {
          best.objective = u;
          best.lengths = m;
          best.water_level = lambda;
          best_total = total;
        }
      }
    }
    std::size_t g = 0;
    while (g < ng && m[g] == groups[g].limit) m[g++] = 0;
    if (g == ng) break;
    ++m[g];
  }
  return best;
}

std::vector<std::size_t> menu_by_cost(std::span<const SensingTech> menu) {
  std::vector<std::size_t> order(menu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return menu[a].cost < menu[b].cost; });
  return order;
}

SelectionResult empty_result(const SelectionInstance& instance) {
  SelectionResult r;
  r.tech = menu_by_cost(instance.menu).front();
  return r;
}

SelectionResult grouped_select(const SelectionInstance& instance, std::size_t tech,
                               const std::vector<std::vector<std::size_t>>& sensing_groups) {
  const double rate_value = instance.backlog / instance.tradeoff;
  const auto& t = instance.menu[tech];
  std::vector<PrefixGroup> groups(1 + sensing_groups.size());
  for (std::size_t i = 0; i < instance.leasing.size(); ++i) {
    groups[0].items.push_back(rank_leasing(instance, i, rate_value));
  }
  for (std::size_t g = 0; g < sensing_groups.size(); ++g) {
    for (std::size_t j : sensing_groups[g]) {
      groups[g + 1].items.push_back(rank_sensing(instance, t, j, rate_value));
    }
  }
  for (auto& g : groups) sort_by_virtual_gain(g.items);

  const PrefixChoice choice = prefix_search(groups, rate_value, instance.p_max);
  SelectionResult out;
  out.tech = tech;
  out.objective = choice.objective;
  out.water_level = choice.water_level;
  for (std::size_t k = 0; k < choice.lengths[0]; ++k) out.leasing.push_back(groups[0].items[k].index);
  for (std::size_t g = 1; g < groups.size(); ++g) {
    for (std::size_t k = 0; k < choice.lengths[g]; ++k) out.sensing.push_back(groups[g].items[k].index);
  }
  std::sort(out.leasing.begin(), out.leasing.end());
  std::sort(out.sensing.begin(), out.sensing.end());
  return out;
}

SelectionResult exhaustive_sensing_select(const SelectionInstance& instance, std::size_t tech) {
  const double rate_value = instance.backlog / instance.tradeoff;
  const auto& t = instance.menu[tech];
  const std::size_t ns = instance.sensing.size();
  std::vector<RankedCandidate> leasing;
  for (std::size_t i = 0; i < instance.leasing.size(); ++i) {
    leasing.push_back(rank_leasing(instance, i, rate_value));
  }
  sort_by_virtual_gain(leasing);
  std::vector<RankedCandidate> sensing;
  for (std::size_t j = 0; j < ns; ++j) sensing.push_back(rank_sensing(instance, t, j, rate_value));

  SelectionResult best;
  best.tech = tech;
  std::size_t best_total = 0;
  std::vector<RankedCandidate> set;
  for (std::uint32_t mask = 0; mask < (1u << ns); ++mask) {
    for (std::size_t l = 0; l <= leasing.size(); ++l) {
      set.assign(leasing.begin(), leasing.begin() + static_cast<std::ptrdiff_t>(l));
      for (std::size_t j = 0; j < ns; ++j) {
        if (mask & (1u << j)) set.push_back(sensing[j]);
      }
      std::optional<double> level;
      const double u = direct_objective(set, rate_value, instance.p_max, &level);
      if (u < best.objective || (u == best.objective && set.size() < best_total)) {
        best.objective = u;
        best.water_level = level;
        best_total = set.size();
        best.leasing.clear();
        best.sensing.clear();
        for (std::size_t k = 0; k < l; ++k) best.leasing.push_back(leasing[k].index);
        for (std::size_t j = 0; j < ns; ++j) {
          if (mask & (1u << j)) best.sensing.push_back(j);
        }
      }
    }
  }
  std::sort(best.leasing.begin(), best.leasing.end());
  return best;
}

}  // namespace

double virtual_sensing_cost(double sensing_cost, double collision_backlog, double tradeoff,
                            double busy_probability, double p_missed_detection) {
  return sensing_cost + collision_backlog * busy_probability * p_missed_detection / tradeoff;
}

PosteriorWeights posterior_weights(const SensingTech& tech, double p_idle) {
  PosteriorWeights w;
  w.alpha = p_idle * (1.0 - tech.p_false_alarm);
  const double den = w.alpha + (1.0 - p_idle) * tech.p_missed_detection;
  w.omega = den > 0.0 ? w.alpha / den : 0.0;
  return w;
}

RankedInstance virtual_gains(const SelectionInstance& instance, std::size_t tech) {
  check_instance(instance);
  if (tech >= instance.menu.size()) throw DomainError("sensing technology index out of range");
  if (!(instance.backlog > 0.0)) throw DomainError("virtual gains need a positive backlog");
  RankedInstance out;
  out.rate_value = instance.backlog / instance.tradeoff;
  for (std::size_t i = 0; i < instance.leasing.size(); ++i) {
    out.leasing.push_back(rank_leasing(instance, i, out.rate_value));
  }
  for (std::size_t j = 0; j < instance.sensing.size(); ++j) {
    out.sensing.push_back(rank_sensing(instance, instance.menu[tech], j, out.rate_value));
  }
  sort_by_virtual_gain(out.leasing);
  sort_by_virtual_gain(out.sensing);
  return out;
}

std::size_t search_threshold(std::span<const RankedCandidate> sorted, double p_max) {
  std::size_t m = sorted.size();
  if (m == 0) return 0;
  double sum_w = 0.0, sum_ih = 0.0;
  for (const auto& c : sorted) {
    sum_w += c.weight;
    sum_ih += 1.0 / c.gain;
  }
  for (;;) {
    const double lambda = sum_w / (p_max + sum_ih);
    if (lambda < sorted[m - 1].virtual_gain) return m;
    if (m == 1) return 0;
    sum_w -= sorted[m - 1].weight;
    sum_ih -= 1.0 / sorted[m - 1].gain;
    --m;
  }
}

double selection_objective(const SelectionInstance& instance, std::size_t tech,
                           std::span<const std::size_t> sensing,
                           std::span<const std::size_t> leasing) {
  check_instance(instance);
  if (tech >= instance.menu.size()) throw DomainError("sensing technology index out of range");
  const double rate_value = instance.backlog / instance.tradeoff;
  std::vector<RankedCandidate> set;
  for (std::size_t i : leasing) {
    if (i >= instance.leasing.size()) throw DomainError("leasing index out of range");
    set.push_back(rank_leasing(instance, i, rate_value));
  }
  for (std::size_t j : sensing) {
    if (j >= instance.sensing.size()) throw DomainError("sensing index out of range");
    set.push_back(rank_sensing(instance, instance.menu[tech], j, rate_value));
  }
  return direct_objective(set, rate_value, instance.p_max);
}

SelectionResult select_channels(const SelectionInstance& instance, std::size_t tech) {
  check_instance(instance);
  if (tech >= instance.menu.size()) throw DomainError("sensing technology index out of range");
  if (!(instance.backlog > 0.0)) {
    SelectionResult r;
    r.tech = tech;
    return r;
  }
  std::vector<std::size_t> all(instance.sensing.size());
  std::iota(all.begin(), all.end(), 0);
  return grouped_select(instance, tech, {all});
}

SelectionResult optimize_sensing_and_channels(const SelectionInstance& instance) {
  check_instance(instance);
  if (!(instance.backlog > 0.0)) return empty_result(instance);
  std::optional<SelectionResult> best;
  for (std::size_t t : menu_by_cost(instance.menu)) {
    SelectionResult r = select_channels(instance, t);
    if (!best || r.objective < best->objective) best = std::move(r);
  }
  return *best;
}

SelectionResult markov_select_channels(const SelectionInstance& instance,
                                       std::optional<std::size_t> tech) {
  check_instance(instance);
  if (tech && *tech >= instance.menu.size()) throw DomainError("sensing technology index out of range");
  if (!(instance.backlog > 0.0)) {
    SelectionResult r = empty_result(instance);
    if (tech) r.tech = *tech;
    return r;
  }

  std::map<double, std::vector<std::size_t>> by_prior;
  for (std::size_t j = 0; j < instance.sensing.size(); ++j) {
    by_prior[instance.sensing[j].p_idle].push_back(j);
  }
  const bool exhaustive = by_prior.size() > 2;
  if (exhaustive && instance.sensing.size() > kMaxExhaustiveSensing) {
    throw CapabilityError("sensing channels have more than two distinct idle priors and the band "
                          "exceeds the exhaustive-search limit; use channel-uniform transitions "
                          "or a smaller sensing band");
  }
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [p, members] : by_prior) groups.push_back(members);

  std::vector<std::size_t> techs = tech ? std::vector<std::size_t>{*tech} : menu_by_cost(instance.menu);
  std::optional<SelectionResult> best;
  for (std::size_t t : techs) {
    SelectionResult r = exhaustive ? exhaustive_sensing_select(instance, t)
                                   : grouped_select(instance, t, groups);
    if (!best || r.objective < best->objective) best = std::move(r);
  }
  return *best;
}

}  // namespace cmvno
