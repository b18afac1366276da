#include <gtest/gtest.h>

#include <random>

#include "cmvno/errors.hpp"
#include "cmvno/harness.hpp"
#include "generators.hpp"
#include "oracle.hpp"

namespace cmvno {
namespace {

TEST(OracleWaterfill, ClosedForms) {
  const std::vector<WeightedChannel> one = {{0, 0.7, 3.0}};
  EXPECT_NEAR(oracle::bisect_waterfill(one, 8.0), 0.7 / (8.0 + 1.0 / 3.0), 1e-12);
  const std::vector<WeightedChannel> two = {{0, 1, 1}, {1, 1, 1}};
  EXPECT_NEAR(oracle::bisect_waterfill(two, 8.0), 0.2, 1e-12);
  EXPECT_THROW(oracle::bisect_waterfill({}, 1.0), DomainError);
}

TEST(OracleSelection, EmptyAndFree) {
  SelectionInstance inst;
  inst.menu = testing::default_menu();
  inst.backlog = 3;
  inst.tradeoff = 10;
  inst.p_max = 8;
  EXPECT_EQ(oracle::brute_force_selection(inst).objective, 0.0);
  inst.leasing = {{2.0, 0.0}};
  EXPECT_EQ(oracle::brute_force_selection(inst).leasing, (std::vector<std::size_t>{0}));
}

TEST(OracleSelection, CapEnforced) {
  std::mt19937_64 rng(1);
  const auto inst = testing::random_selection(rng, {9, 8, false});
  EXPECT_THROW(oracle::brute_force_selection(inst), CapabilityError);
}

TEST(OracleSelection, Deterministic) {
  std::mt19937_64 rng(2);
  const auto inst = testing::random_selection(rng, {});
  const auto a = oracle::brute_force_selection(inst), b = oracle::brute_force_selection(inst);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.sensing, b.sensing);
  EXPECT_EQ(a.leasing, b.leasing);
}

TEST(OracleSelection, ObjectiveIsMinimumOverSets) {
  std::mt19937_64 rng(3);
  const auto inst = testing::random_selection(rng, {3, 3, false});
  const auto best = oracle::brute_force_selection(inst, 1);
  for (std::uint32_t lm = 0; lm < 8; ++lm) {
    for (std::uint32_t sm = 0; sm < 8; ++sm) {
      std::vector<std::size_t> l, s;
      for (std::size_t i = 0; i < 3; ++i) {
        if (lm >> i & 1u) l.push_back(i);
        if (sm >> i & 1u) s.push_back(i);
      }
      EXPECT_GE(oracle::set_objective(inst, 1, s, l), best.objective - 1e-12);
    }
  }
}

TEST(OraclePrice, EmptyQueueStationaryPoint) {
  const auto d = make_preset("s7-pmc").policy.demand;
  const auto p = oracle::grid_price(d, 1.0, 0.0, 100.0, 100001);
  EXPECT_NEAR(p.price, 5.0 / 3.0, 5.0 / 100000);
}

TEST(OraclePrice, RefinementNeverHurts) {
  const auto d = make_preset("s7-pmc").policy.demand;
  const double exact = 256.0 / 27.0;
  double prev = 1e300;
  for (std::size_t steps : {11, 21, 41, 81, 161, 321}) {
    const double err = exact - oracle::grid_price(d, 1.0, 100.0, 100.0, steps).objective;
    EXPECT_LE(err, prev + 1e-15);
    prev = err;
  }
}

TEST(OraclePrice, ZoomingNeverLowersObjective) {
  const auto d = make_preset("s7-pmc").policy.demand;
  for (double shift : {0.0, 2.0, 4.99}) {
    double prev = -1.0;
    for (int rounds = 0; rounds < 4; ++rounds) {
      const double v = oracle::grid_price(d, 1.0, shift * 10, 10.0, 101, rounds).objective;
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(OraclePrice, ZeroDemandRejects) {
  auto d = make_preset("s7-pmc").policy.demand;
  d.family = DemandFamily::kTable;
  d.table = {{0.0, 0.0}, {5.0, 0.0}};
  EXPECT_FALSE(oracle::grid_price(d, 1.0, 0.0, 1.0, 101).admit);
}

TEST(OracleAssignment, SingleQueueIsWaterfillObjective) {
  std::mt19937_64 rng(4);
  const auto a = testing::random_assignment(rng, 4, 1);
  std::vector<WeightedChannel> ch;
  for (std::size_t i = 0; i < 4; ++i) ch.push_back({i, a.weights[i] * a.backlogs[0], a.gains(i, 0)});
  const double lambda = oracle::bisect_waterfill(ch, a.p_max);
  double expected = 0.0;
  for (const auto& c : ch) {
    if (c.weight * c.gain > lambda) expected += c.weight * std::log(c.weight * c.gain / lambda);
  }
  EXPECT_NEAR(oracle::exhaustive_assignment(a.backlogs, a.gains, a.weights, a.p_max).objective, expected,
              1e-9 * expected);
}

TEST(OracleAssignment, DominantQueue) {
  GainMatrix gains(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    gains(i, 0) = 50.0;
    gains(i, 1) = 1.0;
  }
  const std::vector<double> backlogs = {10.0, 2.0}, weights = {1.0, 1.0, 1.0};
  const auto best = oracle::exhaustive_assignment(backlogs, gains, weights, 8.0);
  EXPECT_EQ(best.assignment.queue_of, (std::vector<int>{0, 0, 0}));
}

TEST(OracleAssignment, CapEnforced) {
  std::mt19937_64 rng(5);
  const auto a = testing::random_assignment(rng, 7, 2);
  EXPECT_THROW(oracle::exhaustive_assignment(a.backlogs, a.gains, a.weights, a.p_max), CapabilityError);
}

}  // namespace
}  // namespace cmvno
