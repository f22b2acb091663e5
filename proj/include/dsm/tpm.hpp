#pragma once

// Threshold by Partition: randomized, universally truthful mechanism in which
// advertiser capacities are private.
//
// Low-priority sets are drawn with probability min(17 * alpha^(1/3), 1),
// mediators and advertisers are split into random halves, and each half is
// priced from the canonical assignment of the opposite half at location
// ceil((1 - 4 * alpha^(1/3)) * size).

#include "dsm/market.hpp"
#include "dsm/rng.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dsm {

struct TpmConfig {
  Rational alpha = 1;
  std::uint64_t seed = 0;
};

/// alpha^(1/3) is replaced by a rational upper bound within 10^-12, so the
/// low-priority probability rounds up and the kept fraction rounds down.
struct TpmRates {
  Rational cube_root;         // upper bound on alpha^(1/3)
  Rational low_probability;   // min(17 * cube_root, 1)
  Rational kept_fraction;     // 1 - 4 * cube_root
};

inline TpmRates tpm_rates(const Rational& alpha) {
  if (sgn(alpha) <= 0 || cmp(alpha, 1) > 0) {
    throw ConfigError("alpha must lie in (0, 1], got " + format_rational(alpha));
  }
  TpmRates r;
  r.cube_root = cube_root_bounds(alpha).upper;
  r.low_probability = 17 * r.cube_root;
  if (cmp(r.low_probability, 1) > 0) r.low_probability = 1;
  r.kept_fraction = 1 - 4 * r.cube_root;
  return r;
}

struct TpmPartition {
  // Indexed like the instance's mediator / advertiser lists; side is 1 or 2.
  std::vector<std::uint8_t> mediator_side;
  std::vector<std::uint8_t> advertiser_side;
  std::vector<bool> mediator_low;
  std::vector<bool> advertiser_low;
  std::vector<AgentId> sigma_m;  // low-priority mediators last
  std::vector<AgentId> sigma_a;  // low-priority advertisers last

  std::vector<AgentId> mediators_on(const MarketInstance& inst, int side) const {
    std::vector<AgentId> out;
    for (std::size_t i = 0; i < mediator_side.size(); ++i) {
      if (mediator_side[i] == side) out.push_back(inst.mediators()[i].id);
    }
    return out;
  }
  std::vector<AgentId> advertisers_on(const MarketInstance& inst, int side) const {
    std::vector<AgentId> out;
    for (std::size_t i = 0; i < advertiser_side.size(); ++i) {
      if (advertiser_side[i] == side) out.push_back(inst.advertisers()[i].id);
    }
    return out;
  }
};

struct SideThresholds {
  ExtendedScalar phat = ExtendedScalar::neg_inf();
  ExtendedScalar bhat = ExtendedScalar::pos_inf();
  std::optional<std::size_t> location;  // 1-based; empty for dummies
  std::size_t opposite_size = 0;        // |S_c| of the opposite half
  std::uint32_t phat_rank = kUnranked;
  std::uint32_t bhat_rank = kUnranked;

  bool dummy() const { return !location.has_value(); }
};

struct SideMatch {
  std::vector<TradePair> pairs;
  std::map<AgentId, Rational> charges;
  std::map<AgentId, Rational> payments;
};

struct TpmSide {
  SideThresholds thresholds;
  std::vector<User> phat;
  std::vector<Slot> bhat;
  std::vector<TradePair> matched;
};

struct TpmTrace {
  TpmPartition partition;
  TpmRates rates;
  std::array<TpmSide, 2> sides;  // sides[0] handles (M1, A1)
};

inline TpmPartition sample_partition(const MarketInstance& inst, const TpmConfig& config) {
  const auto rates = tpm_rates(config.alpha);
  const Bernoulli low(rates.low_probability);
  const Bernoulli first(Rational(1, 2));

  TpmPartition part;
  const auto& ms = inst.mediators();
  const auto& as = inst.advertisers();
  part.mediator_side.resize(ms.size());
  part.mediator_low.resize(ms.size());
  part.advertiser_side.resize(as.size());
  part.advertiser_low.resize(as.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    part.mediator_low[i] = low(coin_word(config.seed, ms[i].id, DrawPurpose::LowPriority));
    part.mediator_side[i] = first(coin_word(config.seed, ms[i].id, DrawPurpose::Half)) ? 1 : 2;
  }
  for (std::size_t i = 0; i < as.size(); ++i) {
    part.advertiser_low[i] = low(coin_word(config.seed, as[i].id, DrawPurpose::LowPriority));
    part.advertiser_side[i] = first(coin_word(config.seed, as[i].id, DrawPurpose::Half)) ? 1 : 2;
  }

  std::vector<AgentId> m_low, a_low;
  for (const auto& id : inst.sigma().agents()) {
    if (id.kind == AgentKind::Mediator) {
      (part.mediator_low[*inst.mediator_index(id)] ? m_low : part.sigma_m).push_back(id);
    } else {
      (part.advertiser_low[*inst.advertiser_index(id)] ? a_low : part.sigma_a).push_back(id);
    }
  }
  part.sigma_m.insert(part.sigma_m.end(), m_low.begin(), m_low.end());
  part.sigma_a.insert(part.sigma_a.end(), a_low.begin(), a_low.end());
  return part;
}

inline SideThresholds side_thresholds(std::span<const User> opposite_users,
                                      std::span<const Slot> opposite_slots, const Rational& alpha) {
  const auto rates = tpm_rates(alpha);
  const auto canon = canonical_assignment(opposite_users, opposite_slots);
  SideThresholds t;
  t.opposite_size = canon.tau;
  const Rational scaled = rates.kept_fraction * static_cast<unsigned long>(canon.tau);
  if (sgn(scaled) <= 0) return t;
  const auto location = static_cast<std::size_t>(ceil_rational(scaled).get_ui());
  t.location = location;
  const auto& p = canon.ordered_users[location - 1];
  const auto& b = canon.ordered_slots[location - 1];
  t.phat = p.cost;
  t.bhat = b.value;
  t.phat_rank = p.rank;
  t.bhat_rank = b.rank;
  return t;
}

/// Serves mediators in sigma_m order and advertisers in sigma_a order. Each
/// step gives the current mediator's cheapest unassigned user the current
/// advertiser's lowest-index unassigned slot; the advertiser pays v(b^) and
/// the mediator receives c(p^).
inline SideMatch match_and_price(std::span<const User> phat, std::span<const Slot> bhat,
                                 std::span<const AgentId> sigma_m, std::span<const AgentId> sigma_a,
                                 const SideThresholds& thresholds) {
  SideMatch r;
  const std::size_t n = std::min(phat.size(), bhat.size());
  if (n == 0) return r;
  if (thresholds.dummy()) throw std::logic_error("non-empty threshold sets with dummy thresholds");

  std::unordered_map<AgentId, std::size_t, AgentIdHash> m_pos, a_pos;
  for (std::size_t i = 0; i < sigma_m.size(); ++i) m_pos.emplace(sigma_m[i], i);
  for (std::size_t i = 0; i < sigma_a.size(); ++i) a_pos.emplace(sigma_a[i], i);

  std::vector<User> users(phat.begin(), phat.end());
  std::vector<Slot> slots(bhat.begin(), bhat.end());
  const bool ranked = detail::all_ranked(phat);
  std::sort(users.begin(), users.end(), [&](const User& x, const User& y) {
    const auto px = m_pos.at(x.mediator), py = m_pos.at(y.mediator);
    if (px != py) return px < py;
    return ranked ? x.rank < y.rank : compare(x.cost, y.cost) < 0;
  });
  std::sort(slots.begin(), slots.end(), [&](const Slot& x, const Slot& y) {
    const auto px = a_pos.at(x.advertiser), py = a_pos.at(y.advertiser);
    if (px != py) return px < py;
    return x.index < y.index;
  });

  const Rational& charge = thresholds.bhat.amount().value();
  const Rational& payment = thresholds.phat.amount().value();
  for (std::size_t k = 0; k < n; ++k) {
    r.pairs.push_back({users[k], slots[k]});
    r.charges[slots[k].advertiser] += charge;
    r.payments[users[k].mediator] += payment;
  }
  return r;
}

inline std::pair<Outcome, TpmTrace> run_tpm(const MarketInstance& reported, const TpmConfig& config) {
  TpmTrace trace;
  trace.rates = tpm_rates(config.alpha);
  trace.partition = sample_partition(reported, config);
  Outcome out = Outcome::empty_for(reported);

  const auto& part = trace.partition;
  std::array<std::vector<User>, 2> users;
  std::array<std::vector<Slot>, 2> slots;
  for (std::size_t i = 0; i < reported.mediators().size(); ++i) {
    auto span = reported.users_of(i);
    auto& dst = users[part.mediator_side[i] - 1];
    dst.insert(dst.end(), span.begin(), span.end());
  }
  for (std::size_t i = 0; i < reported.advertisers().size(); ++i) {
    auto span = reported.slots_of(i);
    auto& dst = slots[part.advertiser_side[i] - 1];
    dst.insert(dst.end(), span.begin(), span.end());
  }

  for (int s = 0; s < 2; ++s) {
    const int other = 1 - s;
    TpmSide& side = trace.sides[s];
    side.thresholds = side_thresholds(users[other], slots[other], config.alpha);
    const auto& t = side.thresholds;
    if (!t.dummy()) {
      for (const auto& p : users[s]) {
        const bool below = t.phat_rank != kUnranked ? p.rank < t.phat_rank : compare(p.cost, t.phat) < 0;
        if (below) side.phat.push_back(p);
      }
      for (const auto& b : slots[s]) {
        const bool above = t.bhat_rank != kUnranked ? b.rank > t.bhat_rank : compare(b.value, t.bhat) > 0;
        if (above) side.bhat.push_back(b);
      }
    }
    auto match = match_and_price(side.phat, side.bhat, part.sigma_m, part.sigma_a, t);
    for (auto& [a, c] : match.charges) out.charges[a] += c;
    for (auto& [m, p] : match.payments) out.payments[m] += p;
    out.assignment.pairs.insert(out.assignment.pairs.end(), match.pairs.begin(), match.pairs.end());
    side.matched = std::move(match.pairs);
  }
  return {std::move(out), std::move(trace)};
}

}  // namespace dsm
