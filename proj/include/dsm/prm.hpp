#pragma once

// Price by Removal: deterministic mechanism for publicly known advertiser
// capacities.
//
//  1. c_m is the cost of the user at location |S_c(P \ P(m), B)| - 4*gamma of
//     S_c(P \ P(m), B), or -inf when that assignment has at most 4*gamma pairs.
//  2. P^(m) holds the users of m cheaper than c_m.
//  3. The users of all P^(m) are sold by VCG to the advertisers plus a dummy
//     bidder valued max_m c_m with capacity sum_m |P^(m)|.
//  4. Real advertisers pay their VCG charge; m receives c_m per assigned user.

#include "dsm/market.hpp"
#include "dsm/vcg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace dsm {

struct PrmConfig {
  std::uint32_t gamma = 1;
};

struct PrmTrace {
  std::map<AgentId, ExtendedScalar> thresholds;    // c_m
  std::map<AgentId, std::size_t> removal_sizes;    // |S_c(P \ P(m), B)|
  std::map<AgentId, std::vector<User>> tradable;   // P^(m), increasing cost
  ExtendedScalar dummy_value = ExtendedScalar::neg_inf();
  std::uint64_t dummy_capacity = 0;
  VcgResult vcg;
};

namespace detail {

// Full sorted orders of an instance, shared by all single-mediator removals.
struct RemovalView {
  std::vector<User> users;  // increasing cost
  std::vector<Slot> slots;  // decreasing value
  std::vector<std::vector<std::size_t>> positions;  // per mediator, ascending
};

inline RemovalView make_removal_view(const MarketInstance& inst) {
  RemovalView v;
  v.users = sorted_users(inst.users());
  v.slots = sorted_slots(inst.slots());
  v.positions.resize(inst.mediators().size());
  for (std::size_t pos = 0; pos < v.users.size(); ++pos) {
    v.positions[*inst.mediator_index(v.users[pos].mediator)].push_back(pos);
  }
  return v;
}

struct Removal {
  std::size_t size = 0;                  // |S_c(P \ P(m), B)|
  std::optional<std::size_t> threshold;  // position in view.users of p_m
};

// Position in view.users of the i-th (0-based) user not in `excluded`.
inline std::size_t nth_remaining(std::size_t i, const std::vector<std::size_t>& excluded) {
  std::size_t pos = i;
  for (auto e : excluded) {
    if (e > pos) break;
    ++pos;
  }
  return pos;
}

inline Removal removal_for(const RemovalView& v, std::size_t mediator_index, std::uint32_t gamma) {
  const auto& excluded = v.positions[mediator_index];
  const std::size_t n = std::min(v.users.size() - excluded.size(), v.slots.size());
  // The matched locations of a canonical assignment form a prefix, so the
  // size is found by bisection.
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (trades(v.users[nth_remaining(mid - 1, excluded)], v.slots[mid - 1])) lo = mid;
    else hi = mid - 1;
  }
  Removal r{lo, std::nullopt};
  const std::size_t reduction = 4 * static_cast<std::size_t>(gamma);
  if (r.size > reduction) r.threshold = nth_remaining(r.size - reduction - 1, excluded);
  return r;
}

inline void validate_gamma(const MarketInstance& inst, std::uint32_t gamma) {
  if (gamma < 1) throw ConfigError("gamma must be at least 1");
  for (const auto& m : inst.mediators()) {
    if (m.costs.size() > gamma) {
      throw ConfigError("mediator " + m.id.str() + " reports " + std::to_string(m.costs.size()) +
                        " users, above gamma = " + std::to_string(gamma));
    }
  }
  for (const auto& a : inst.advertisers()) {
    if (a.capacity > gamma) {
      throw ConfigError("advertiser " + a.id.str() + " has capacity " + std::to_string(a.capacity) +
                        ", above gamma = " + std::to_string(gamma));
    }
  }
}

}  // namespace detail

/// Threshold cost c_m computed with mediator m removed.
inline ExtendedScalar removal_threshold(const MarketInstance& inst, AgentId m, std::uint32_t gamma) {
  const auto idx = inst.mediator_index(m);
  if (!idx) throw ModelError("unknown mediator " + m.str());
  if (gamma < 1) throw ConfigError("gamma must be at least 1");
  const auto view = detail::make_removal_view(inst);
  const auto r = detail::removal_for(view, *idx, gamma);
  return r.threshold ? view.users[*r.threshold].cost : ExtendedScalar::neg_inf();
}

/// Runs the mechanism on reported data. Capacities are taken as public.
inline std::pair<Outcome, PrmTrace> run_prm(const MarketInstance& reported, const PrmConfig& config) {
  detail::validate_gamma(reported, config.gamma);
  Outcome out = Outcome::empty_for(reported);
  PrmTrace trace;

  const auto view = detail::make_removal_view(reported);
  std::vector<User> items;
  for (std::size_t i = 0; i < reported.mediators().size(); ++i) {
    const auto id = reported.mediators()[i].id;
    const auto r = detail::removal_for(view, i, config.gamma);
    trace.removal_sizes[id] = r.size;
    auto c_m = r.threshold ? view.users[*r.threshold].cost : ExtendedScalar::neg_inf();
    auto& tradable = trace.tradable[id];
    if (r.threshold) {
      const auto cutoff = view.users[*r.threshold].rank;
      for (auto pos : view.positions[i]) {
        if (view.users[pos].rank < cutoff) tradable.push_back(view.users[pos]);
      }
    }
    items.insert(items.end(), tradable.begin(), tradable.end());
    if (compare(c_m, trace.dummy_value) > 0) trace.dummy_value = c_m;
    trace.thresholds.emplace(id, std::move(c_m));
  }
  trace.dummy_capacity = items.size();
  if (items.empty()) return {std::move(out), std::move(trace)};

  std::vector<Bidder> bidders;
  for (std::size_t i = 0; i < reported.advertisers().size(); ++i) {
    const auto& a = reported.advertisers()[i];
    bidders.push_back({a.id, reported.slots_of(i).front().value, a.capacity});
  }
  const auto dummy = AgentId::dummy();
  bidders.push_back({dummy, trace.dummy_value, trace.dummy_capacity});
  trace.vcg = vcg_charges(items.size(), bidders);

  // Winning units, most valuable first, meet the cheapest tradable users.
  std::sort(items.begin(), items.end(), [](const User& a, const User& b) { return a.rank < b.rank; });
  std::vector<std::size_t> by_value(bidders.size());
  std::iota(by_value.begin(), by_value.end(), 0u);
  std::sort(by_value.begin(), by_value.end(),
            [&](std::size_t x, std::size_t y) { return compare(bidders[x].value, bidders[y].value) > 0; });
  std::size_t next_user = 0;
  for (auto bi : by_value) {
    const auto& b = bidders[bi];
    const auto units = trace.vcg.units_won.at(b.id);
    if (b.id.kind == AgentKind::Dummy) {
      next_user += units;  // left unassigned
      continue;
    }
    const auto slots = reported.slots_of(*reported.advertiser_index(b.id));
    for (std::uint64_t u = 0; u < units; ++u) {
      const User& p = items[next_user++];
      out.assignment.pairs.push_back({p, slots[u]});
      out.payments[p.mediator] += trace.thresholds.at(p.mediator).amount().value();
    }
    out.charges[b.id] = trace.vcg.charges.at(b.id);
  }
  return {std::move(out), std::move(trace)};
}

}  // namespace dsm
