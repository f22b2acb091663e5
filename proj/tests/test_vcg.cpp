#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dsm;
using dsm::testing::order;

namespace {

Bidder bidder(std::uint32_t n, long value, std::uint64_t cap, std::uint32_t sigma_pos) {
  return {AgentId::advertiser(n), ExtendedScalar::value(Money(value), sigma_pos, 0), cap};
}

// Best welfare over every integer allocation, optionally without one bidder.
Rational best_welfare(std::uint64_t items, const std::vector<Bidder>& bs, std::optional<std::size_t> skip) {
  Rational best = 0;
  std::function<void(std::size_t, std::uint64_t, Rational)> rec = [&](std::size_t i, std::uint64_t left, Rational w) {
    if (i == bs.size()) {
      if (w > best) best = w;
      return;
    }
    if ((skip && *skip == i) || !bs[i].value.finite()) {
      rec(i + 1, left, w);
      return;
    }
    for (std::uint64_t u = 0; u <= std::min(left, bs[i].capacity); ++u) {
      rec(i + 1, left - u, w + bs[i].value.amount().value() * u);
    }
  };
  rec(0, items, 0);
  return best;
}

}  // namespace

TEST(Vcg, SingleItemSecondPrice) {
  std::vector<Bidder> bs{bidder(0, 10, 1, 0), bidder(1, 7, 1, 1), bidder(2, 3, 1, 2)};
  const auto r = vcg_charges(1, bs);
  EXPECT_EQ(r.units_won.at(AgentId::advertiser(0)), 1u);
  EXPECT_EQ(r.charges.at(AgentId::advertiser(0)), 7);
  EXPECT_EQ(r.charges.at(AgentId::advertiser(1)), 0);
  EXPECT_EQ(r.welfare, 10);
}

TEST(Vcg, FixtureAuction) {
  // Three items; advertisers valued 16..9 and a dummy valued 4 with capacity 3.
  std::vector<Bidder> bs;
  for (std::uint32_t i = 0; i < 8; ++i) bs.push_back(bidder(i, 16 - i, 1, 8 + i));
  bs.push_back({AgentId::dummy(), ExtendedScalar::cost(Money(4), 3, 0), 3});
  const auto r = vcg_charges(3, bs);
  for (std::uint32_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.units_won.at(AgentId::advertiser(i)), 1u);
    EXPECT_EQ(r.charges.at(AgentId::advertiser(i)), 13);
  }
  EXPECT_EQ(r.units_won.at(AgentId::dummy()), 0u);
}

TEST(Vcg, NegInfBidderGetsNothing) {
  std::vector<Bidder> bs{bidder(0, 5, 1, 0), {AgentId::dummy(), ExtendedScalar::neg_inf(), 4}};
  const auto r = vcg_charges(3, bs);
  EXPECT_EQ(r.units_won.at(AgentId::dummy()), 0u);
  EXPECT_EQ(r.units_won.at(AgentId::advertiser(0)), 1u);
  EXPECT_EQ(r.charges.at(AgentId::advertiser(0)), 0);
}

TEST(Vcg, RejectsMalformedBidders) {
  std::vector<Bidder> two_dummies{{AgentId::dummy(0), ExtendedScalar::neg_inf(), 1},
                                  {AgentId::dummy(1), ExtendedScalar::neg_inf(), 1}};
  EXPECT_THROW(vcg_charges(1, two_dummies), ModelError);
  std::vector<Bidder> inf{{AgentId::advertiser(0), ExtendedScalar::pos_inf(), 1}};
  EXPECT_THROW(vcg_charges(1, inf), ModelError);
}

TEST(Vcg, MatchesExhaustiveClarkePivot) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<long> value(0, 6);
  std::uniform_int_distribution<std::uint64_t> cap(0, 3), items(0, 7), count(1, 5);
  for (int t = 0; t < 500; ++t) {
    std::vector<Bidder> bs;
    const auto n = count(rng);
    for (std::uint32_t i = 0; i < n; ++i) bs.push_back(bidder(i, value(rng), cap(rng), i));
    const auto m = items(rng);
    const auto r = vcg_charges(m, bs);
    const auto w = best_welfare(m, bs, std::nullopt);
    EXPECT_EQ(r.welfare, w);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const auto won = r.units_won.at(bs[i].id);
      const Rational own = bs[i].value.amount().value() * won;
      const Rational expected = best_welfare(m, bs, i) - (w - own);
      EXPECT_EQ(r.charges.at(bs[i].id), expected);
      EXPECT_GE(own, r.charges.at(bs[i].id));
      EXPECT_GE(sgn(r.charges.at(bs[i].id)), 0);
    }
  }
}

TEST(Vcg, TruthfulBiddingIsOptimal) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<long> value(1, 8);
  std::uniform_int_distribution<std::uint64_t> cap(1, 2), items(1, 5), count(2, 5);
  for (int t = 0; t < 200; ++t) {
    std::vector<Bidder> bs;
    const auto n = count(rng);
    for (std::uint32_t i = 0; i < n; ++i) bs.push_back(bidder(i, value(rng), cap(rng), i));
    const auto m = items(rng);
    const auto truthful = vcg_charges(m, bs);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const Rational v = bs[i].value.amount().value();
      const Rational u_true = v * truthful.units_won.at(bs[i].id) - truthful.charges.at(bs[i].id);
      for (long dev = 0; dev <= 9; ++dev) {
        auto moved = bs;
        moved[i] = bidder(static_cast<std::uint32_t>(i), dev, bs[i].capacity, static_cast<std::uint32_t>(i));
        const auto r = vcg_charges(m, moved);
        EXPECT_LE(v * r.units_won.at(bs[i].id) - r.charges.at(bs[i].id), u_true);
      }
    }
  }
}
