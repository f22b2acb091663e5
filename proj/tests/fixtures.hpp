#pragma once

#include "dsm/dsm.hpp"

#include <random>
#include <vector>

namespace dsm::testing {

/// compare() as -1, 0 or 1.
inline int order(const ExtendedScalar& x, const ExtendedScalar& y) {
  const auto c = compare(x, y);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

inline MarketInstance make_instance(const std::vector<std::vector<long>>& costs,
                                    const std::vector<std::pair<long, std::uint32_t>>& advertisers) {
  std::vector<Mediator> ms;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    Mediator m{AgentId::mediator(static_cast<std::uint32_t>(i)), {}};
    for (long c : costs[i]) m.costs.emplace_back(c);
    ms.push_back(std::move(m));
  }
  std::vector<Advertiser> as;
  for (std::size_t i = 0; i < advertisers.size(); ++i) {
    as.push_back({AgentId::advertiser(static_cast<std::uint32_t>(i)), Money(advertisers[i].first),
                  advertisers[i].second});
  }
  return MarketInstance(std::move(ms), std::move(as));
}

/// The 8x8 fixture: mediator i holds one user of cost i + 1, advertiser i
/// holds one slot of value 16 - i.
inline MarketInstance prm_fixture() {
  std::vector<std::vector<long>> costs;
  std::vector<std::pair<long, std::uint32_t>> as;
  for (long i = 0; i < 8; ++i) {
    costs.push_back({i + 1});
    as.push_back({16 - i, 1});
  }
  return make_instance(costs, as);
}

/// Small instance with integer amounts in [0, max_amount], so ties are common.
/// The sigma order is shuffled.
inline MarketInstance random_small(std::mt19937_64& rng, std::uint32_t max_mediators, std::uint32_t max_advertisers,
                                   std::uint32_t gamma, long max_amount = 10, std::uint32_t min_agents = 0) {
  std::uniform_int_distribution<std::uint32_t> nm(min_agents, max_mediators), na(min_agents, max_advertisers);
  std::uniform_int_distribution<std::uint32_t> size(1, gamma);
  std::uniform_int_distribution<long> amount(0, max_amount);
  std::vector<Mediator> ms;
  std::vector<Advertiser> as;
  const auto n_m = nm(rng), n_a = na(rng);
  std::vector<AgentId> sigma;
  for (std::uint32_t i = 0; i < n_m; ++i) {
    Mediator m{AgentId::mediator(i), {}};
    const auto k = size(rng);
    for (std::uint32_t j = 0; j < k; ++j) m.costs.emplace_back(amount(rng));
    ms.push_back(std::move(m));
    sigma.push_back(AgentId::mediator(i));
  }
  for (std::uint32_t i = 0; i < n_a; ++i) {
    as.push_back({AgentId::advertiser(i), Money(amount(rng)), size(rng)});
    sigma.push_back(AgentId::advertiser(i));
  }
  std::shuffle(sigma.begin(), sigma.end(), rng);
  return MarketInstance(std::move(ms), std::move(as), SigmaOrder(std::move(sigma)));
}

/// Total number of users and slots.
inline std::pair<std::size_t, std::size_t> sizes(const MarketInstance& inst) {
  return {inst.users().size(), inst.slots().size()};
}

}  // namespace dsm::testing
