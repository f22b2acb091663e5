#pragma once

// VCG auction of identical items among bidders with a uniform per-unit value
// and a unit capacity.

#include "dsm/market.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

namespace dsm {

struct Bidder {
  AgentId id;
  ExtendedScalar value;  // per unit
  std::uint64_t capacity = 0;
};

struct VcgResult {
  std::map<AgentId, std::uint64_t> units_won;
  std::map<AgentId, Rational> charges;
  Rational welfare = 0;
};

namespace detail {

inline void validate_bidders(std::span<const Bidder> bidders) {
  std::size_t dummies = 0;
  std::vector<AgentId> ids;
  for (const auto& b : bidders) {
    if (b.id.kind == AgentKind::Dummy) ++dummies;
    if (b.value.is_pos_inf()) throw ModelError("bidder " + b.id.str() + " has an infinite value");
    ids.push_back(b.id);
  }
  if (dummies > 1) throw ModelError("at most one dummy bidder is allowed");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ModelError("duplicate bidder id");
}

// Bidders with finite values, by decreasing value.
inline std::vector<std::size_t> bidder_order(std::span<const Bidder> bidders) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < bidders.size(); ++i) {
    if (bidders[i].value.finite() && bidders[i].capacity > 0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return compare(bidders[x].value, bidders[y].value) > 0; });
  return order;
}

}  // namespace detail

/// Fills capacities in decreasing value order until the items run out.
/// Bidders valued at -inf receive nothing.
inline std::map<AgentId, std::uint64_t> allocate_welfare_max(std::uint64_t item_count,
                                                             std::span<const Bidder> bidders) {
  detail::validate_bidders(bidders);
  std::map<AgentId, std::uint64_t> won;
  for (const auto& b : bidders) won[b.id] = 0;
  std::uint64_t left = item_count;
  for (auto i : detail::bidder_order(bidders)) {
    if (left == 0) break;
    const auto take = std::min(left, bidders[i].capacity);
    won[bidders[i].id] = take;
    left -= take;
  }
  return won;
}

/// Welfare-maximizing allocation plus Clarke pivot charges:
/// charge(a) = W(without a) - (W - won(a) * value(a)).
inline VcgResult vcg_charges(std::uint64_t item_count, std::span<const Bidder> bidders) {
  VcgResult r;
  r.units_won = allocate_welfare_max(item_count, bidders);
  for (const auto& b : bidders) r.charges[b.id] = 0;

  const auto order = detail::bidder_order(bidders);
  std::vector<std::uint64_t> won(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& b = bidders[order[k]];
    won[k] = r.units_won[b.id];
    r.welfare += b.value.amount().value() * won[k];
  }
  // Removing a winner releases its units to the best unfilled capacity of
  // the others, taken in the same value order.
  std::size_t first_leftover = 0;
  while (first_leftover < order.size() && won[first_leftover] == bidders[order[first_leftover]].capacity) {
    ++first_leftover;
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::uint64_t need = won[k];
    if (need == 0) continue;
    Rational displaced = 0;
    for (std::size_t j = first_leftover; j < order.size() && need > 0; ++j) {
      if (j == k) continue;
      const auto& other = bidders[order[j]];
      const auto take = std::min(need, other.capacity - won[j]);
      displaced += other.value.amount().value() * take;
      need -= take;
    }
    r.charges[bidders[order[k]].id] = displaced;
  }
  return r;
}

}  // namespace dsm
