#include <gtest/gtest.h>

#include <numeric>

#include "cmvno/demand.hpp"
#include "cmvno/environment.hpp"
#include "cmvno/errors.hpp"
#include "cmvno/harness.hpp"

namespace cmvno {
namespace {

EnvironmentModel one_channel(Occupancy occ) {
  EnvironmentModel m;
  ChannelModel ch;
  ch.band = Band::kSensing;
  ch.occupancy = occ;
  ch.collision_tolerance = 0.001;
  ch.gain = {RayleighGain{4.5}};
  m.sensing.push_back(ch);
  m.market = {{1.0}, {1.0}};
  m.leasing_price = {{1.0}, {1.0}};
  return m;
}

double idle_frequency(Occupancy occ, int slots) {
  Environment env(one_channel(occ));
  RngStreams rng(5, 0);
  double idle = 0;
  for (int t = 0; t < slots; ++t) idle += env.sample_slot(rng).true_states[0];
  return idle / slots;
}

TEST(Occupancy, AlwaysIdleAtProbabilityOne) {
  EXPECT_EQ(idle_frequency(IidOccupancy{1.0}, 1000), 1.0);
}

TEST(Occupancy, MarkovIdleStateIsAbsorbing) {
  EXPECT_EQ(idle_frequency(MarkovOccupancy{0.3, 1.0, 1}, 1000), 1.0);
}

TEST(Occupancy, IidFrequencyMatchesProbability) {
  EXPECT_NEAR(idle_frequency(IidOccupancy{0.6}, 100000), 0.6, 0.01);
}

TEST(Occupancy, SymmetricMarkovChainHasIidMarginal) {
  EXPECT_NEAR(idle_frequency(MarkovOccupancy{0.6, 0.6, 0}, 100000), 0.6, 0.01);
}

TEST(Occupancy, IdleProbabilityFollowsPreviousState) {
  const Occupancy m = MarkovOccupancy{0.2, 0.9, 1};
  EXPECT_DOUBLE_EQ(idle_probability(m, 1), 0.9);
  EXPECT_DOUBLE_EQ(idle_probability(m, 0), 0.2);
  EXPECT_DOUBLE_EQ(idle_probability(IidOccupancy{0.6}, 0), 0.6);
}

TEST(Sensing, PerfectTechReportsTruth) {
  Engine rng(1);
  const std::vector<int> states = {1, 0};
  const std::vector<std::size_t> set = {0, 1};
  const auto out = sense({0.0, 0.0, 0.0}, states, set, rng);
  EXPECT_EQ(out.sensed_idle, (std::vector<int>{1, 0}));
  EXPECT_EQ(out.collisions, (std::vector<int>{0, 0}));
}

TEST(Sensing, CoinFlipTechIgnoresState) {
  Engine rng(2);
  for (int state : {0, 1}) {
    const std::vector<int> states = {state};
    const std::vector<std::size_t> set = {0};
    double idle = 0;
    for (int k = 0; k < 100000; ++k) idle += sense({0.0, 0.5, 0.5}, states, set, rng).sensed_idle[0];
    EXPECT_NEAR(idle / 100000, 0.5, 0.01);
  }
}

TEST(Sensing, CollisionFrequencyIsMissedDetectionRate) {
  Engine rng(3);
  const std::vector<int> states = {0};
  const std::vector<std::size_t> set = {0};
  double hits = 0;
  for (int k = 0; k < 100000; ++k) {
    const auto out = sense({0.1, 0.1, 0.08}, states, set, rng);
    EXPECT_EQ(out.collisions[0], (1 - states[0]) * out.sensed_idle[0]);
    hits += out.collisions[0];
  }
  EXPECT_NEAR(hits / 100000, 0.08, 0.005);
}

TEST(Sensing, RejectsChannelOutsideBand) {
  Engine rng(4);
  const std::vector<int> states = {1};
  const std::vector<std::size_t> set = {3};
  EXPECT_THROW(sense({0.1, 0.1, 0.08}, states, set, rng), DomainError);
}

DemandModel preset_demand() { return make_preset("s7-pmc").policy.demand; }

TEST(Arrivals, RejectedSlotHasNoUsers) {
  Engine rng(5);
  const auto a = sample_arrivals(preset_demand(), 1.0, 1.0, false, rng);
  EXPECT_EQ(a.packets, 0.0);
  EXPECT_EQ(a.users, 0u);
}

TEST(Arrivals, PriceAtCapHasNoDemand) {
  Engine rng(6);
  const auto d = preset_demand();
  for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_arrivals(d, 1.0, d.q_max, true, rng).packets, 0.0);
}

TEST(Arrivals, MeanMatchesExpectedDemand) {
  Engine rng(7);
  const auto d = preset_demand();
  double total = 0;
  for (int k = 0; k < 100000; ++k) total += sample_arrivals(d, 1.0, 3.0, true, rng).packets;
  EXPECT_NEAR(total / 100000, expected_demand(d, 1.0, 3.0), 0.02 * 4.0);
}

TEST(Arrivals, PacketsAreSumOfFileLengthsAndCapped) {
  Engine rng(8);
  auto d = preset_demand();
  d.a_max = 20;
  for (int k = 0; k < 2000; ++k) {
    const auto a = sample_arrivals(d, 1.0, 0.0, true, rng);
    EXPECT_EQ(a.users, a.file_lengths.size());
    EXPECT_EQ(a.packets, std::accumulate(a.file_lengths.begin(), a.file_lengths.end(), 0.0));
    EXPECT_LE(a.packets, 20.0);
  }
}

TEST(Environment, SameSeedReplaysSamples) {
  const auto model = make_preset("s7-pmc").policy.environment;
  Environment a(model), b(model);
  RngStreams ra(9, 2), rb(9, 2);
  for (int t = 0; t < 200; ++t) {
    const auto x = a.sample_slot(ra);
    const auto y = b.sample_slot(rb);
    EXPECT_EQ(x.markets, y.markets);
    EXPECT_EQ(x.sensing_gains.data, y.sensing_gains.data);
    EXPECT_EQ(x.leasing_gains.data, y.leasing_gains.data);
    EXPECT_EQ(x.leasing_price, y.leasing_price);
    EXPECT_EQ(x.true_states, y.true_states);
  }
}

TEST(Environment, DifferentReplicationsDiffer) {
  const auto model = make_preset("s7-pmc").policy.environment;
  Environment a(model), b(model);
  RngStreams ra(9, 0), rb(9, 1);
  EXPECT_NE(a.sample_slot(ra).sensing_gains.data, b.sample_slot(rb).sensing_gains.data);
}

TEST(Environment, GainSemanticsSquareTheDraw) {
  Engine a(10), b(10);
  const double amp = draw_gain(RayleighGain{2.0}, GainSemantics::kAmplitude, a);
  const double pow = draw_gain(RayleighGain{2.0}, GainSemantics::kPower, b);
  EXPECT_NEAR(pow, amp * amp, 1e-12 * pow);
  Engine c(11);
  EXPECT_EQ(draw_gain(FixedGain{3.0}, GainSemantics::kAmplitude, c), 3.0);
}

TEST(Validation, MenuMustBeMonotoneInCost) {
  const std::vector<SensingTech> bad = {{0.0, 0.1, 0.1}, {0.5, 0.2, 0.05}};
  EXPECT_THROW(validate_menu(bad), ConfigError);
  const std::vector<SensingTech> out_of_range = {{0.0, 1.5, 0.1}};
  EXPECT_THROW(validate_menu(out_of_range), ConfigError);
  const std::vector<SensingTech> ok = {{0.0, 0.5, 0.5}, {0.1, 0.1, 0.08}};
  EXPECT_NO_THROW(validate_menu(ok));
}

TEST(Validation, DistributionMustSumToOne) {
  EXPECT_THROW(validate(DiscreteDistribution{{1, 2}, {0.5, 0.6}}, "market"), ConfigError);
  EXPECT_THROW(validate(DiscreteDistribution{{1, 2}, {1.0}}, "market"), ConfigError);
  EXPECT_NO_THROW(validate(DiscreteDistribution{{1, 2}, {0.5, 0.5}}, "market"));
}

TEST(Validation, ModelRejectsMissingQueueGains) {
  auto model = one_channel(IidOccupancy{0.5});
  model.queues = 2;
  EXPECT_THROW(validate(model), ConfigError);
  model.queues = 1;
  std::get<IidOccupancy>(model.sensing[0].occupancy).p_idle = 1.2;
  EXPECT_THROW(validate(model), ConfigError);
}

}  // namespace
}  // namespace cmvno
