#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmvno/errors.hpp"
#include "cmvno/selection.hpp"
#include "generators.hpp"
#include "oracle.hpp"

namespace cmvno {
namespace {

using testing::random_selection;

TEST(VirtualCost, InflatesByCollisionHistory) {
  EXPECT_DOUBLE_EQ(virtual_sensing_cost(0.1, 0.0, 100.0, 0.4, 0.08), 0.1);
  EXPECT_NEAR(virtual_sensing_cost(0.1, 10.0, 100.0, 0.4, 0.08), 0.1032, 1e-15);
  EXPECT_DOUBLE_EQ(virtual_sensing_cost(0.1, 1e6, 100.0, 0.4, 0.0), 0.1);
}

TEST(Posterior, ImperfectTech) {
  const auto w = posterior_weights({0.1, 0.1, 0.08}, 0.6);
  EXPECT_NEAR(w.alpha, 0.54, 1e-15);
  EXPECT_NEAR(w.omega, 0.54 / 0.572, 1e-12);
  EXPECT_NEAR(w.omega, 0.94406, 1e-5);
}

TEST(Posterior, PerfectTech) {
  const auto w = posterior_weights({0.5, 0.0, 0.0}, 0.3);
  EXPECT_DOUBLE_EQ(w.omega, 1.0);
  EXPECT_DOUBLE_EQ(w.alpha, 0.3);
}

TEST(Posterior, MarkovPrior) {
  const auto w = posterior_weights({0.1, 0.1, 0.08}, idle_probability(MarkovOccupancy{0.2, 0.9, 1}, 1));
  EXPECT_NEAR(w.omega, 0.81 / 0.818, 1e-12);
}

TEST(Posterior, AlwaysBusyHasZeroWeight) {
  const auto w = posterior_weights({0.1, 0.1, 0.0}, 0.0);
  EXPECT_EQ(w.omega, 0.0);
  EXPECT_EQ(w.alpha, 0.0);
}

TEST(VirtualGains, FreeLeasingSortsByRawGain) {
  SelectionInstance inst;
  inst.menu = testing::default_menu();
  inst.backlog = 10;
  inst.tradeoff = 10;
  inst.leasing = {{1.0, 0.0}, {3.0, 0.0}, {2.0, 0.0}};
  const auto r = virtual_gains(inst, 0);
  ASSERT_EQ(r.leasing.size(), 3u);
  EXPECT_EQ(r.leasing[0].index, 1u);
  EXPECT_EQ(r.leasing[0].virtual_gain, 3.0);
  EXPECT_EQ(r.leasing[2].virtual_gain, 1.0);
}

TEST(VirtualGains, TwinChannelsTie) {
  const double p0 = 0.7, lease = 0.9, h = 5.0;
  SelectionInstance inst;
  inst.menu = {{p0 * lease, 0.0, 0.0}};
  inst.backlog = 37;
  inst.tradeoff = 20;
  inst.leasing = {{h, lease}};
  inst.sensing = {{h, 123.0, 0.001, p0}};
  const auto r = virtual_gains(inst, 0);
  EXPECT_NEAR(r.sensing[0].virtual_gain, r.leasing[0].virtual_gain, 1e-12);
  EXPECT_NEAR(r.leasing[0].virtual_gain, h * std::exp2(-lease / (37.0 / 20.0)), 1e-12);
}

TEST(VirtualGains, DependOnBacklogOverTradeoff) {
  std::mt19937_64 rng(1);
  auto a = random_selection(rng, {});
  a.backlog = std::max(a.backlog, 1.0);
  for (auto& c : a.sensing) c.collision_backlog = 0.0;
  auto b = a;
  b.backlog *= 2;
  b.tradeoff *= 2;
  for (std::size_t t = 0; t < a.menu.size(); ++t) {
    const auto x = virtual_gains(a, t), y = virtual_gains(b, t);
    for (std::size_t i = 0; i < x.sensing.size(); ++i) {
      EXPECT_NEAR(x.sensing[i].virtual_gain, y.sensing[i].virtual_gain, 1e-12 * x.sensing[i].virtual_gain);
    }
    for (std::size_t i = 0; i < x.leasing.size(); ++i) {
      EXPECT_EQ(x.leasing[i].virtual_gain, y.leasing[i].virtual_gain);
    }
  }
}

TEST(SearchThreshold, TrivialCases) {
  EXPECT_EQ(search_threshold({}, 8.0), 0u);
  std::vector<RankedCandidate> one(1);
  one[0].virtual_gain = 1.0;
  one[0].weight = 1.0;
  one[0].gain = 1.0;
  EXPECT_EQ(search_threshold(one, 8.0), 1u);
}

TEST(SearchThreshold, MatchesLinearScan) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 500; ++k) {
    auto inst = random_selection(rng, {6, 0, false});
    inst.backlog = std::max(inst.backlog, 0.5);
    const auto r = virtual_gains(inst, 0);
    std::size_t expected = 0;
    double sw = 0.0, sih = 0.0;
    for (std::size_t m = 1; m <= r.leasing.size(); ++m) {
      sw += r.leasing[m - 1].weight;
      sih += 1.0 / r.leasing[m - 1].gain;
      const double lam = sw / (inst.p_max + sih);
      if (r.leasing[m - 1].virtual_gain > lam) expected = m;
    }
    EXPECT_EQ(search_threshold(r.leasing, inst.p_max), expected);
  }
}

TEST(Selection, EmptyInstance) {
  SelectionInstance inst;
  inst.menu = testing::default_menu();
  inst.backlog = 5;
  const auto r = optimize_sensing_and_channels(inst);
  EXPECT_TRUE(r.sensing.empty());
  EXPECT_TRUE(r.leasing.empty());
  EXPECT_EQ(r.objective, 0.0);
}

TEST(Selection, ZeroBacklogSelectsNothing) {
  std::mt19937_64 rng(3);
  auto inst = random_selection(rng, {});
  inst.backlog = 0.0;
  const auto r = optimize_sensing_and_channels(inst);
  EXPECT_TRUE(r.sensing.empty() && r.leasing.empty());
}

TEST(Selection, FreeChannelIsSelected) {
  SelectionInstance inst;
  inst.menu = testing::default_menu();
  inst.backlog = 1;
  inst.tradeoff = 100;
  inst.p_max = 8;
  inst.leasing = {{2.0, 0.0}};
  const auto r = select_channels(inst, 1);
  EXPECT_EQ(r.leasing, (std::vector<std::size_t>{0}));
}

TEST(Selection, SelectedChannelsPayForThemselves) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    const auto inst = random_selection(rng, {});
    const auto r = optimize_sensing_and_channels(inst);
    if (!r.water_level) continue;
    const auto ranked = virtual_gains(inst, r.tech);
    for (const auto& c : ranked.leasing) {
      if (std::count(r.leasing.begin(), r.leasing.end(), c.index)) {
        EXPECT_GT(c.virtual_gain, *r.water_level);
      }
    }
    for (const auto& c : ranked.sensing) {
      if (std::count(r.sensing.begin(), r.sensing.end(), c.index)) {
        EXPECT_GT(c.virtual_gain, *r.water_level);
      }
    }
  }
}

TEST(Selection, MatchesBruteForcePerTech) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    const auto inst = random_selection(rng, {6, 6, true});
    for (std::size_t t = 0; t < inst.menu.size(); ++t) {
      const auto mine = select_channels(inst, t);
      const auto ref = oracle::brute_force_selection(inst, t);
      EXPECT_NEAR(mine.objective, ref.objective, 1e-9 * std::max(1.0, std::abs(ref.objective)));
    }
  }
}

TEST(Selection, MatchesBruteForceOverMenu) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_selection(rng, {4, 6, false});
    const auto mine = optimize_sensing_and_channels(inst);
    const auto ref = oracle::brute_force_selection(inst);
    EXPECT_NEAR(mine.objective, ref.objective, 1e-9 * std::max(1.0, std::abs(ref.objective)));
    EXPECT_NEAR(mine.objective, oracle::set_objective(inst, mine.tech, mine.sensing, mine.leasing),
                1e-9 * std::max(1.0, std::abs(mine.objective)));
  }
}

TEST(Selection, SingleTechMenuEqualsFixedSelection) {
  std::mt19937_64 rng(7);
  auto inst = random_selection(rng, {});
  inst.menu = {inst.menu[1]};
  const auto a = optimize_sensing_and_channels(inst);
  const auto b = select_channels(inst, 0);
  EXPECT_EQ(a.sensing, b.sensing);
  EXPECT_EQ(a.leasing, b.leasing);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Selection, ScaleInvariant) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 200; ++k) {
    auto a = random_selection(rng, {});
    for (auto& c : a.sensing) c.collision_backlog = 0.0;
    auto b = a;
    b.backlog *= 4;
    b.tradeoff *= 4;
    const auto x = optimize_sensing_and_channels(a), y = optimize_sensing_and_channels(b);
    EXPECT_EQ(x.tech, y.tech);
    EXPECT_EQ(x.sensing, y.sensing);
    EXPECT_EQ(x.leasing, y.leasing);
  }
}

TEST(Selection, AlmostAlwaysBusyMeansLeasingOnly) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    auto inst = random_selection(rng, {});
    for (auto& c : inst.sensing) c.p_idle = 1e-6;
    for (std::size_t t = 0; t < inst.menu.size(); ++t) EXPECT_TRUE(select_channels(inst, t).sensing.empty());
  }
}

TEST(MarkovSelection, SharedPriorMatchesIid) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_selection(rng, {});
    const auto a = optimize_sensing_and_channels(inst);
    const auto b = markov_select_channels(inst);
    EXPECT_EQ(a.tech, b.tech);
    EXPECT_EQ(a.sensing, b.sensing);
    EXPECT_EQ(a.leasing, b.leasing);
  }
}

TEST(MarkovSelection, DistinctPriorsMatchBruteForce) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    auto inst = random_selection(rng, {4, 8, false});
    for (auto& c : inst.sensing) c.p_idle = (rng() % 2) ? 0.9 : 0.2 + 0.1 * static_cast<double>(rng() % 3);
    const auto mine = markov_select_channels(inst);
    const auto ref = oracle::brute_force_selection(inst);
    EXPECT_NEAR(mine.objective, ref.objective, 1e-9 * std::max(1.0, std::abs(ref.objective)));
  }
}

TEST(MarkovSelection, CertainIdleBehavesLikeLeasing) {
  SelectionInstance inst;
  inst.menu = {{0.2, 0.0, 0.0}};
  inst.backlog = 50;
  inst.tradeoff = 100;
  inst.p_max = 8;
  inst.sensing = {{3.0, 0.0, 0.001, 1.0}, {1.0, 0.0, 0.001, 1.0}};
  SelectionInstance lease = inst;
  lease.sensing.clear();
  lease.leasing = {{3.0, 0.2}, {1.0, 0.2}};
  const auto a = markov_select_channels(inst, 0);
  const auto b = select_channels(lease, 0);
  EXPECT_EQ(a.sensing, b.leasing);
  EXPECT_NEAR(a.objective, b.objective, 1e-12);
}

TEST(MarkovSelection, TooManyDistinctPriors) {
  SelectionInstance inst;
  inst.menu = testing::default_menu();
  inst.backlog = 10;
  for (int i = 0; i < 17; ++i) inst.sensing.push_back({1.0, 0.0, 0.001, 0.05 + 0.05 * i});
  EXPECT_THROW(markov_select_channels(inst), CapabilityError);
}

}  // namespace
}  // namespace cmvno
