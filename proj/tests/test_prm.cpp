#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dsm;
using dsm::testing::order;
using dsm::testing::make_instance;
using dsm::testing::prm_fixture;

namespace {

// c_m straight from the definition: canonical assignment with m's users
// dropped, then the user at location size - 4 gamma.
ExtendedScalar threshold_oracle(const MarketInstance& inst, AgentId m, std::uint32_t gamma) {
  std::vector<User> rest;
  for (const auto& u : inst.users()) {
    if (u.mediator != m) rest.push_back(u);
  }
  const auto canon = canonical_assignment(rest, inst.slots());
  if (canon.tau <= 4 * gamma) return ExtendedScalar::neg_inf();
  return canon.ordered_users[canon.tau - 4 * gamma - 1].cost;
}

}  // namespace

TEST(Prm, FixtureTrace) {
  const auto inst = prm_fixture();
  const auto [out, trace] = run_prm(inst, {1});
  const long expected[] = {4, 4, 4, 3, 3, 3, 3, 3};
  for (std::uint32_t i = 0; i < 8; ++i) {
    EXPECT_EQ(trace.thresholds.at(AgentId::mediator(i)).amount(), Money(expected[i])) << i;
    EXPECT_EQ(trace.tradable.at(AgentId::mediator(i)).size(), i < 3 ? 1u : 0u);
  }
  EXPECT_EQ(trace.dummy_value.amount(), Money(4));
  EXPECT_EQ(trace.dummy_capacity, 3u);
  ASSERT_EQ(out.assignment.size(), 3u);
  for (std::uint32_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out.units_won(AgentId::advertiser(i)), 1u);
    EXPECT_EQ(out.charge(AgentId::advertiser(i)), 13);
    EXPECT_EQ(out.payment(AgentId::mediator(i)), 4);
  }
  for (std::uint32_t i = 3; i < 8; ++i) {
    EXPECT_EQ(out.charge(AgentId::advertiser(i)), 0);
    EXPECT_EQ(out.payment(AgentId::mediator(i)), 0);
  }
  EXPECT_EQ(gain_from_trade(out.assignment), 39);
  EXPECT_EQ(out.total_charges() - out.total_payments(), 27);
  // The cheapest user meets the most valuable slot.
  for (const auto& p : out.assignment.pairs) {
    EXPECT_EQ(p.user.amount().value() + p.slot.amount().value(), 17);
  }
}

TEST(Prm, EmptyAndThinMarkets) {
  const auto [out, trace] = run_prm(MarketInstance{}, {1});
  EXPECT_TRUE(out.assignment.empty());
  // Four trades available: every c_m is -inf and nothing is sold.
  const auto inst = make_instance({{1}, {2}, {3}, {4}, {5}}, {{10, 1}, {9, 1}, {8, 1}, {7, 1}, {6, 1}});
  const auto [out2, trace2] = run_prm(inst, {1});
  EXPECT_TRUE(out2.assignment.empty());
  EXPECT_TRUE(trace2.dummy_value.is_neg_inf());
  EXPECT_EQ(out2.total_charges(), 0);
}

TEST(Prm, GammaPromiseIsEnforced) {
  const auto inst = make_instance({{1, 2}}, {{5, 1}});
  EXPECT_THROW(run_prm(inst, {1}), ConfigError);
  EXPECT_NO_THROW(run_prm(inst, {2}));
  const auto wide = make_instance({{1}}, {{5, 3}});
  EXPECT_THROW(run_prm(wide, {2}), ConfigError);
  EXPECT_THROW(run_prm(wide, {0}), ConfigError);
}

TEST(Prm, ThresholdsMatchDefinition) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t gamma = 1 + t % 3;
    const auto inst = dsm::testing::random_small(rng, 12, 12, gamma, 20);
    const auto [out, trace] = run_prm(inst, {gamma});
    for (const auto& m : inst.mediators()) {
      const auto expected = threshold_oracle(inst, m.id, gamma);
      EXPECT_EQ(order(trace.thresholds.at(m.id), expected), 0);
      EXPECT_EQ(order(removal_threshold(inst, m.id, gamma), expected), 0);
      for (const auto& p : trace.tradable.at(m.id)) EXPECT_LT(order(p.cost, expected), 0);
    }
  }
}

TEST(Prm, OutcomeShape) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 300; ++t) {
    const std::uint32_t gamma = 1 + t % 3;
    const auto inst = dsm::testing::random_small(rng, 12, 12, gamma, 20);
    const auto [out, trace] = run_prm(inst, {gamma});
    EXPECT_TRUE(out.assignment.valid());
    std::map<AgentId, std::size_t> assigned;
    for (const auto& p : out.assignment.pairs) {
      ++assigned[p.user.mediator];
      // Every assigned pair trades at the threshold prices.
      EXPECT_LE(trace.thresholds.at(p.user.mediator).amount(), p.slot.amount());
      EXPECT_GE(trace.thresholds.at(p.user.mediator).amount(), p.user.amount());
    }
    for (const auto& m : inst.mediators()) {
      const Rational per_user = trace.thresholds.at(m.id).finite() ? trace.thresholds.at(m.id).amount().value() : 0;
      EXPECT_EQ(out.payment(m.id), per_user * static_cast<unsigned long>(assigned[m.id]));
    }
    EXPECT_GE(sgn(out.total_charges() - out.total_payments()), 0);
  }
}
