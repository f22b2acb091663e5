#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dsm;
using dsm::testing::order;
using dsm::testing::make_instance;

TEST(Tpm, Rates) {
  const auto r8 = tpm_rates(Rational(1, 8));
  EXPECT_EQ(r8.cube_root, Rational(1, 2));
  EXPECT_EQ(r8.low_probability, 1);
  EXPECT_EQ(r8.kept_fraction, -1);
  const auto r = tpm_rates(Rational(1, 1000));
  EXPECT_EQ(r.cube_root, Rational(1, 10));
  EXPECT_EQ(r.low_probability, 1);
  EXPECT_EQ(r.kept_fraction, Rational(3, 5));
  const auto small = tpm_rates(Rational(1, 200000));
  EXPECT_GE(small.cube_root * small.cube_root * small.cube_root, Rational(1, 200000));
  EXPECT_LT(small.low_probability, 1);
  EXPECT_THROW(tpm_rates(Rational(0)), ConfigError);
  EXPECT_THROW(tpm_rates(Rational(3, 2)), ConfigError);
}

TEST(Tpm, BernoulliIsExact) {
  const Bernoulli half(Rational(1, 2));
  EXPECT_TRUE(half((1ULL << 63) - 1));
  EXPECT_FALSE(half(1ULL << 63));
  const Bernoulli third(Rational(1, 3));
  // ceil(2^64 / 3) = 6148914691236517206
  EXPECT_TRUE(third(6148914691236517205ULL));
  EXPECT_FALSE(third(6148914691236517206ULL));
  EXPECT_TRUE(Bernoulli(Rational(1))(~0ULL));
  EXPECT_FALSE(Bernoulli(Rational(0))(0));
}

TEST(Tpm, SideThresholdLocation) {
  std::vector<std::vector<long>> costs;
  std::vector<std::pair<long, std::uint32_t>> as;
  for (long i = 0; i < 10; ++i) {
    costs.push_back({i});
    as.push_back({100 - i, 1});
  }
  const auto inst = make_instance(costs, as);
  const auto t = side_thresholds(inst.users(), inst.slots(), Rational(1, 1000));
  EXPECT_EQ(t.opposite_size, 10u);
  ASSERT_TRUE(t.location.has_value());
  EXPECT_EQ(*t.location, 6u);
  EXPECT_EQ(t.phat.amount(), Money(5));
  EXPECT_EQ(t.bhat.amount(), Money(95));
  const auto d = side_thresholds(inst.users(), inst.slots(), Rational(1, 8));
  EXPECT_TRUE(d.dummy());
  EXPECT_TRUE(d.phat.is_neg_inf());
  EXPECT_TRUE(d.bhat.is_pos_inf());
  EXPECT_TRUE(side_thresholds({}, {}, Rational(1, 1000)).dummy());
}

TEST(Tpm, MatchAndPriceFollowsSigma) {
  const auto inst = make_instance({{1, 2}, {3}}, {{10, 2}, {9, 1}});
  SideThresholds t;
  t.location = 1;
  t.phat = ExtendedScalar::cost(Money(4), 0, 0);
  t.bhat = ExtendedScalar::value(Money(8), 0, 0);
  const std::vector<AgentId> sm{AgentId::mediator(1), AgentId::mediator(0)};
  const std::vector<AgentId> sa{AgentId::advertiser(1), AgentId::advertiser(0)};
  const std::vector<User> users(inst.users().begin(), inst.users().end());
  const std::vector<Slot> slots(inst.slots().begin(), inst.slots().end());
  const auto r = match_and_price(users, slots, sm, sa, t);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.pairs[0].user.mediator, AgentId::mediator(1));
  EXPECT_EQ(r.pairs[0].slot.advertiser, AgentId::advertiser(1));
  EXPECT_EQ(r.pairs[1].user.mediator, AgentId::mediator(0));
  EXPECT_EQ(r.pairs[1].user.index, 0u);
  EXPECT_EQ(r.pairs[1].slot.advertiser, AgentId::advertiser(0));
  EXPECT_EQ(r.pairs[1].slot.index, 0u);
  EXPECT_EQ(r.charges.at(AgentId::advertiser(0)), 16);
  EXPECT_EQ(r.payments.at(AgentId::mediator(0)), 8);
  EXPECT_THROW(match_and_price(users, slots, sm, sa, SideThresholds{}), std::logic_error);
}

TEST(Tpm, HalvesAreFair) {
  std::vector<std::vector<long>> costs(10, std::vector<long>{1});
  const auto inst = make_instance(costs, {{2, 1}});
  std::size_t first = 0, low = 0, total = 0;
  const Rational alpha(1, 1000000);  // low-priority probability 17/100
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto part = sample_partition(inst, {alpha, seed});
    for (std::size_t i = 0; i < part.mediator_side.size(); ++i) {
      first += part.mediator_side[i] == 1;
      low += part.mediator_low[i];
      ++total;
    }
  }
  const double share = static_cast<double>(first) / static_cast<double>(total);
  EXPECT_GE(share, 0.49);
  EXPECT_LE(share, 0.51);
  const double low_share = static_cast<double>(low) / static_cast<double>(total);
  EXPECT_NEAR(low_share, 0.17, 0.01);
}

TEST(Tpm, CoinsIgnoreReports) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 50; ++t) {
    const auto inst = dsm::testing::random_small(rng, 6, 6, 3, 10, 1);
    const auto dev = inst.with_advertiser(inst.advertisers()[0].id, Money(3), 5);
    const TpmConfig config{Rational(1, 1000), static_cast<std::uint64_t>(t)};
    const auto a = sample_partition(inst, config);
    const auto b = sample_partition(dev, config);
    EXPECT_EQ(a.mediator_side, b.mediator_side);
    EXPECT_EQ(a.advertiser_side, b.advertiser_side);
    EXPECT_EQ(a.sigma_m, b.sigma_m);
    EXPECT_EQ(a.sigma_a, b.sigma_a);
  }
}

TEST(Tpm, LowPriorityAgentsGoLast) {
  std::vector<std::vector<long>> costs(20, std::vector<long>{1});
  const auto inst = make_instance(costs, {{2, 1}});
  const auto part = sample_partition(inst, {Rational(1, 1000000), 3});
  bool seen_low = false;
  for (const auto& id : part.sigma_m) {
    const bool low = part.mediator_low[*inst.mediator_index(id)];
    if (seen_low) EXPECT_TRUE(low);
    seen_low = seen_low || low;
  }
  EXPECT_EQ(part.sigma_m.size(), 20u);
}

TEST(Tpm, OneByOneNeverTrades) {
  const auto inst = make_instance({{1}}, {{10, 1}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [out, trace] = run_tpm(inst, {Rational(1, 1000), seed});
    EXPECT_TRUE(out.assignment.empty());
  }
}

TEST(Tpm, SidesUseOppositeThresholds) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 300; ++t) {
    const auto inst = dsm::testing::random_small(rng, 10, 10, 3, 20);
    const TpmConfig config{Rational(1, 8000), static_cast<std::uint64_t>(t)};
    const auto [out, trace] = run_tpm(inst, config);
    EXPECT_EQ(run_tpm(inst, config).first.assignment.size(), out.assignment.size());
    EXPECT_TRUE(out.assignment.valid());
    const auto& part = trace.partition;
    for (int s = 0; s < 2; ++s) {
      const auto& side = trace.sides[s];
      const int own = s + 1, other = 2 - s;
      std::vector<User> ou;
      std::vector<Slot> os;
      std::size_t expect_users = 0, expect_slots = 0;
      for (const auto& u : inst.users()) {
        const auto half = part.mediator_side[*inst.mediator_index(u.mediator)];
        if (half == other) ou.push_back(u);
        if (half == own && order(u.cost, side.thresholds.phat) < 0) ++expect_users;
      }
      for (const auto& b : inst.slots()) {
        const auto half = part.advertiser_side[*inst.advertiser_index(b.advertiser)];
        if (half == other) os.push_back(b);
        if (half == own && order(b.value, side.thresholds.bhat) > 0) ++expect_slots;
      }
      const auto canon = canonical_assignment(ou, os);
      EXPECT_EQ(side.thresholds.opposite_size, canon.tau);
      EXPECT_EQ(side.phat.size(), expect_users);
      EXPECT_EQ(side.bhat.size(), expect_slots);
      EXPECT_EQ(side.matched.size(), std::min(expect_users, expect_slots));
      if (!side.thresholds.dummy()) EXPECT_LT(order(side.thresholds.phat, side.thresholds.bhat), 0);
    }
    EXPECT_GE(sgn(out.total_charges() - out.total_payments()), 0);
  }
}
