#pragma once

// Independent oracles and property checks for both mechanisms. Every verdict
// is computed in exact arithmetic.

#include "dsm/market.hpp"
#include "dsm/prm.hpp"
#include "dsm/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace dsm {

class OracleScaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kOracleLimit = 8;

/// Maximum gain from trade over all injective user-to-slot matchings,
/// by exhaustive enumeration.
inline Rational brute_force_optimal(std::span<const User> users, std::span<const Slot> slots) {
  if (users.size() > kOracleLimit || slots.size() > kOracleLimit) {
    throw OracleScaleError("brute-force oracle limited to " + std::to_string(kOracleLimit) + " users and slots");
  }
  std::vector<bool> used(slots.size(), false);
  Rational best = 0;
  Rational current = 0;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == users.size()) {
      if (current > best) best = current;
      return;
    }
    go(i + 1);  // user i stays unmatched
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      const Rational gain = slots[j].amount().value() - users[i].amount().value();
      current += gain;
      go(i + 1);
      current -= gain;
      used[j] = false;
    }
  };
  go(0);
  return best;
}

// ---------------------------------------------------------------------------
// Mechanisms under audit
// ---------------------------------------------------------------------------

enum class MechanismKind { Prm, Tpm, PrmPayYourBid };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::Prm;
  std::uint32_t gamma = 1;
  Rational alpha = 1;
  std::uint64_t seed = 0;

  std::string name() const {
    switch (kind) {
      case MechanismKind::Prm: return "prm";
      case MechanismKind::Tpm: return "tpm";
      case MechanismKind::PrmPayYourBid: return "prm-pay-your-bid";
    }
    return "?";
  }
  /// Whether advertisers may misreport their capacity.
  bool strategic_capacity() const { return kind == MechanismKind::Tpm; }
};

/// Negative control: the PRM allocation with every winner charged its own
/// bid per unit. Not truthful.
inline Outcome run_prm_pay_your_bid(const MarketInstance& reported, const PrmConfig& config) {
  auto [out, trace] = run_prm(reported, config);
  for (const auto& a : reported.advertisers()) {
    out.charges[a.id] = a.value.value() * static_cast<unsigned long>(out.units_won(a.id));
  }
  return out;
}

inline Outcome run_mechanism(const MechanismSpec& spec, const MarketInstance& reported) {
  switch (spec.kind) {
    case MechanismKind::Prm: return run_prm(reported, {spec.gamma}).first;
    case MechanismKind::Tpm: return run_tpm(reported, {spec.alpha, spec.seed}).first;
    case MechanismKind::PrmPayYourBid: return run_prm_pay_your_bid(reported, {spec.gamma});
  }
  throw std::logic_error("unknown mechanism");
}

// ---------------------------------------------------------------------------
// Utilities, budget balance and individual rationality
// ---------------------------------------------------------------------------

/// Mediator utility: payment minus the true costs of his assigned users.
/// true_index maps each reported user to the true user it stands for.
inline Rational mediator_utility(const Outcome& out, AgentId m, std::span<const Money> true_costs,
                                 std::span<const std::uint32_t> true_index) {
  Rational u = out.payment(m);
  for (const auto& p : out.assignment.pairs) {
    if (p.user.mediator != m) continue;
    const auto j = true_index.empty() ? p.user.index : true_index[p.user.index];
    u -= true_costs[j].value();
  }
  return u;
}

/// Advertiser utility: value for at most `capacity` assigned users minus the charge.
inline Rational advertiser_utility(const Outcome& out, AgentId a, const Money& value, std::uint32_t capacity) {
  const auto units = std::min<std::uint64_t>(out.units_won(a), capacity);
  return value.value() * static_cast<unsigned long>(units) - out.charge(a);
}

struct BbVerdict {
  bool holds = true;
  Rational surplus = 0;
};

inline BbVerdict check_bb(const Outcome& out) {
  BbVerdict v;
  v.surplus = out.total_charges() - out.total_payments();
  v.holds = sgn(v.surplus) >= 0;
  return v;
}

struct IrVerdict {
  bool holds = true;
  std::map<AgentId, Rational> utilities;
};

/// `out` must come from a truthful run on `truth`.
inline IrVerdict check_ir(const MarketInstance& truth, const Outcome& out) {
  IrVerdict v;
  for (const auto& m : truth.mediators()) {
    v.utilities[m.id] = mediator_utility(out, m.id, m.costs, {});
  }
  for (const auto& a : truth.advertisers()) {
    v.utilities[a.id] = advertiser_utility(out, a.id, a.value, a.capacity);
  }
  for (const auto& [_, u] : v.utilities) {
    if (sgn(u) < 0) v.holds = false;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Deviation grids and incentive compatibility
// ---------------------------------------------------------------------------

struct AdvertiserDeviation {
  Money value;
  std::uint32_t capacity = 1;
};

struct MediatorDeviation {
  std::vector<std::uint32_t> users;  // true user indices, in reported order
  std::vector<Money> costs;          // reported cost of each
};

struct DeviationGrid {
  AgentId agent;
  std::vector<AdvertiserDeviation> advertiser_points;
  std::vector<MediatorDeviation> mediator_points;

  std::size_t size() const { return advertiser_points.size() + mediator_points.size(); }
};

struct GridOptions {
  // Cap on structured mediator points; a larger structured grid is sampled
  // down to this size.
  std::size_t mediator_budget = 5000;
  // Subsets whose full cost product has at most this many vectors are
  // enumerated completely; larger ones get constant and one-coordinate
  // deviations only.
  std::size_t full_product_limit = 4096;
  // Extra random reports (random subset, order and costs) per mediator.
  std::size_t random_points = 200;
  std::uint64_t sample_seed = 0;
};

/// Every distinct reported number, the same number shifted by +-eps, zero and
/// one value above everything. eps is half the smallest gap between distinct
/// reported numbers.
inline std::vector<Money> value_grid(const MarketInstance& inst) {
  std::vector<Rational> xs;
  for (const auto& m : inst.mediators()) {
    for (const auto& c : m.costs) xs.push_back(c.value());
  }
  for (const auto& a : inst.advertisers()) xs.push_back(a.value.value());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  Rational eps(1, 2);  // used when there is no gap to halve
  for (std::size_t i = 1; i < xs.size(); ++i) {
    Rational half_gap = (xs[i] - xs[i - 1]) / 2;
    if (i == 1 || half_gap < eps) eps = half_gap;
  }
  std::vector<Rational> grid{Rational(0)};
  for (const auto& x : xs) {
    grid.push_back(x);
    grid.push_back(x + eps);
    if (x - eps >= 0) grid.push_back(x - eps);
  }
  grid.push_back((xs.empty() ? Rational(0) : xs.back()) * 2 + 1);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<Money> out;
  out.reserve(grid.size());
  for (auto& g : grid) out.emplace_back(g);
  return out;
}

namespace detail {

inline std::vector<std::vector<std::uint32_t>> candidate_subsets(std::uint32_t k, std::mt19937_64& rng,
                                                                 std::size_t budget) {
  std::vector<std::vector<std::uint32_t>> out;
  if (k <= 4) {
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<std::uint32_t> s;
      for (std::uint32_t j = 0; j < k; ++j) {
        if (mask & (1u << j)) s.push_back(j);
      }
      out.push_back(std::move(s));
    }
    return out;
  }
  std::set<std::vector<std::uint32_t>> seen;
  auto add = [&](std::vector<std::uint32_t> s) {
    if (seen.insert(s).second) out.push_back(std::move(s));
  };
  std::vector<std::uint32_t> all(k);
  std::iota(all.begin(), all.end(), 0u);
  add(all);
  add({});
  for (std::uint32_t j = 0; j < k; ++j) {
    add({j});
    auto drop = all;
    drop.erase(drop.begin() + j);
    add(drop);
  }
  std::bernoulli_distribution coin(0.5);
  for (std::size_t t = 0; t < budget; ++t) {
    std::vector<std::uint32_t> s;
    for (std::uint32_t j = 0; j < k; ++j) {
      if (coin(rng)) s.push_back(j);
    }
    add(std::move(s));
  }
  return out;
}

}  // namespace detail

inline DeviationGrid make_grid(const MarketInstance& truth, const MechanismSpec& spec, AgentId agent,
                               const GridOptions& opts = {}) {
  DeviationGrid g;
  g.agent = agent;
  const auto values = value_grid(truth);

  if (agent.kind == AgentKind::Advertiser) {
    const auto& a = truth.advertiser(agent);
    std::vector<std::uint32_t> caps{a.capacity};
    if (spec.strategic_capacity()) {
      caps.clear();
      for (std::uint32_t c = 1; c <= 2 * a.capacity; ++c) caps.push_back(c);
    }
    g.advertiser_points.push_back({a.value, a.capacity});  // truthful first
    for (const auto& v : values) {
      for (auto c : caps) g.advertiser_points.push_back({v, c});
    }
    return g;
  }

  const auto& m = truth.mediator(agent);
  const auto k = static_cast<std::uint32_t>(m.costs.size());
  std::mt19937_64 rng(splitmix64(opts.sample_seed ^ (static_cast<std::uint64_t>(agent.ordinal) << 1)));

  std::vector<std::uint32_t> all(k);
  std::iota(all.begin(), all.end(), 0u);

  std::vector<MediatorDeviation> structured;
  for (const auto& subset : detail::candidate_subsets(k, rng, opts.mediator_budget / 4)) {
    std::vector<Money> own;
    for (auto j : subset) own.push_back(m.costs[j]);
    structured.push_back({subset, own});
    if (subset.empty()) continue;

    std::size_t product = 1;
    for (std::size_t j = 0; j < subset.size() && product <= opts.full_product_limit; ++j) product *= values.size();
    if (product <= opts.full_product_limit) {
      std::vector<std::size_t> digits(subset.size(), 0);
      for (std::size_t n = 0; n < product; ++n) {
        std::vector<Money> costs;
        for (auto d : digits) costs.push_back(values[d]);
        structured.push_back({subset, std::move(costs)});
        for (std::size_t j = 0; j < digits.size() && ++digits[j] == values.size(); ++j) digits[j] = 0;
      }
      continue;
    }
    for (const auto& v : values) {
      structured.push_back({subset, std::vector<Money>(subset.size(), v)});
      for (std::size_t j = 0; j < subset.size(); ++j) {
        auto costs = own;
        costs[j] = v;
        structured.push_back({subset, std::move(costs)});
      }
    }
  }
  if (structured.size() > opts.mediator_budget) {
    std::shuffle(structured.begin(), structured.end(), rng);
    structured.resize(opts.mediator_budget);
  }
  if (k >= 1 && !values.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t t = 0; t < opts.random_points; ++t) {
      std::vector<std::uint32_t> subset;
      for (std::uint32_t j = 0; j < k; ++j) {
        if (coin(rng)) subset.push_back(j);
      }
      std::shuffle(subset.begin(), subset.end(), rng);
      std::vector<Money> costs;
      for (std::size_t j = 0; j < subset.size(); ++j) costs.push_back(values[pick(rng)]);
      structured.push_back({std::move(subset), std::move(costs)});
    }
  }
  g.mediator_points.push_back({all, m.costs});  // truthful first
  g.mediator_points.insert(g.mediator_points.end(), structured.begin(), structured.end());
  return g;
}

struct IcVerdict {
  AgentId agent;
  Rational truthful_utility = 0;
  Rational best_utility = 0;
  std::string best_deviation = "truthful";
  std::size_t points = 0;
  bool violated = false;
};

namespace detail {

inline std::string describe(const AdvertiserDeviation& d) {
  return "value=" + d.value.str() + " capacity=" + std::to_string(d.capacity);
}

inline std::string describe(const MediatorDeviation& d) {
  std::string s = "users=[";
  for (std::size_t i = 0; i < d.users.size(); ++i) s += (i ? "," : "") + std::to_string(d.users[i]);
  s += "] costs=[";
  for (std::size_t i = 0; i < d.costs.size(); ++i) s += (i ? "," : "") + d.costs[i].str();
  return s + "]";
}

}  // namespace detail

/// Runs the mechanism once per grid point with only `grid.agent`'s report
/// changed and compares true utilities. Ties with truthful are allowed.
inline IcVerdict check_ic(const MarketInstance& truth, const MechanismSpec& spec, const DeviationGrid& grid) {
  IcVerdict v;
  v.agent = grid.agent;
  const auto truthful_out = run_mechanism(spec, truth);

  auto consider = [&](const Rational& u, const std::string& what) {
    ++v.points;
    if (u > v.best_utility) {
      v.best_utility = u;
      v.best_deviation = what;
    }
  };

  if (grid.agent.kind == AgentKind::Advertiser) {
    const auto& a = truth.advertiser(grid.agent);
    v.truthful_utility = advertiser_utility(truthful_out, a.id, a.value, a.capacity);
    v.best_utility = v.truthful_utility;
    for (const auto& d : grid.advertiser_points) {
      const auto deviated = truth.with_advertiser(a.id, d.value, d.capacity);
      Outcome out;
      try {
        out = run_mechanism(spec, deviated);
      } catch (const ConfigError&) {
        continue;  // report outside the mechanism's admissible range
      }
      consider(advertiser_utility(out, a.id, a.value, a.capacity), detail::describe(d));
    }
  } else {
    const auto& m = truth.mediator(grid.agent);
    v.truthful_utility = mediator_utility(truthful_out, m.id, m.costs, {});
    v.best_utility = v.truthful_utility;
    for (const auto& d : grid.mediator_points) {
      const auto deviated = truth.with_mediator_costs(m.id, d.costs);
      Outcome out;
      try {
        out = run_mechanism(spec, deviated);
      } catch (const ConfigError&) {
        continue;
      }
      consider(mediator_utility(out, m.id, m.costs, d.users), detail::describe(d));
    }
  }
  v.violated = v.best_utility > v.truthful_utility;
  return v;
}

// ---------------------------------------------------------------------------
// Competitive ratio
// ---------------------------------------------------------------------------

/// 1 - 5 gamma / tau; zero when tau is zero.
inline Rational prm_ratio_bound(std::uint32_t gamma, std::size_t tau) {
  if (tau == 0) return 0;
  return 1 - Rational(5 * static_cast<unsigned long>(gamma), static_cast<unsigned long>(tau));
}

/// Rational upper bound (within ~1e-12) of 1 - 28 alpha^(1/3) - 20 exp(-2 / alpha^(1/3)).
/// Rounding up keeps a ratio check at least as strict as the exact bound.
inline Rational tpm_ratio_bound(const Rational& alpha) {
  const auto r = cube_root_bounds(alpha).lower;
  Rational bound = 1 - 28 * r;
  if (sgn(r) > 0) {
    const long double e = std::exp(-2.0L / static_cast<long double>(r.get_d()));
    const double e_low = static_cast<double>(e * (1.0L - 1e-15L));
    if (e_low > 0) bound -= 20 * Rational(e_low);
  }
  return bound;
}

struct RatioVerdict {
  Rational gft = 0;
  Rational opt = 0;
  std::optional<Rational> ratio;  // empty when opt is zero
  Rational bound = 0;
  bool holds = true;
  bool vacuous = false;
};

inline RatioVerdict competitive_ratio(const Rational& gft, const Rational& opt, const Rational& bound) {
  RatioVerdict v{gft, opt, std::nullopt, bound, true, false};
  if (sgn(opt) > 0) v.ratio = Rational(gft / opt);
  if (sgn(opt) <= 0 || sgn(bound) <= 0) {
    v.vacuous = true;
    return v;
  }
  v.holds = gft >= bound * opt;
  return v;
}

inline RatioVerdict competitive_ratio(const Outcome& out, const MarketInstance& truth, const Rational& bound) {
  const auto opt = gain_from_trade(canonical_assignment(truth.users(), truth.slots()).pairs);
  return competitive_ratio(gain_from_trade(out.assignment), opt, bound);
}

/// Verdict on the mean gain over several trials of a randomized mechanism.
inline RatioVerdict competitive_ratio_mean(std::span<const Rational> gfts, const Rational& opt,
                                           const Rational& bound) {
  Rational mean = 0;
  for (const auto& g : gfts) mean += g;
  if (!gfts.empty()) mean /= static_cast<unsigned long>(gfts.size());
  return competitive_ratio(mean, opt, bound);
}

// ---------------------------------------------------------------------------
// Structural invariants
// ---------------------------------------------------------------------------

enum class CheckStatus { Pass, Fail, NotApplicable };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

struct InvariantResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

inline bool all_hold(std::span<const InvariantResult> rs) {
  return std::none_of(rs.begin(), rs.end(), [](const InvariantResult& r) { return r.status == CheckStatus::Fail; });
}

namespace detail {

inline InvariantResult verdict(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, ok ? std::string{} : std::move(detail)};
}

inline std::uint64_t user_key(const User& p) { return (static_cast<std::uint64_t>(p.mediator.ordinal) << 32) | p.index; }
inline std::uint64_t slot_key(const Slot& b) { return (static_cast<std::uint64_t>(b.advertiser.ordinal) << 32) | b.index; }

}  // namespace detail

/// PRM statements checked on a truthful run: removal never lengthens the
/// canonical assignment, other mediators' optimal users stay assigned after a
/// removal, tradable users and threshold users are assigned by
/// S_c(P, B), PRM assigns every tradable user, and c_m >= c_e when tau > 5 gamma.
inline std::vector<InvariantResult> invariant_suite(const MarketInstance& inst, const PrmConfig& config,
                                                    const Outcome& out, const PrmTrace& trace) {
  std::vector<InvariantResult> rs;
  const auto canon = canonical_assignment(inst.users(), inst.slots());
  const auto tau = canon.tau;

  bool shortens = true;
  std::string why;
  for (const auto& [m, k] : trace.removal_sizes) {
    if (k > tau) {
      shortens = false;
      why = m.str() + ": " + std::to_string(k) + " > tau=" + std::to_string(tau);
    }
  }
  rs.push_back(detail::verdict("med_removal_shortens", shortens, why));

  // A user at location j of S_c(P,B) sits at j minus the number of m's users
  // ahead of it once m is removed. Only the last optimal user outside P(m)
  // needs checking, and everything behind it up to tau belongs to m.
  std::map<AgentId, std::size_t> optimal_count;
  for (std::size_t i = 0; i < tau; ++i) ++optimal_count[canon.ordered_users[i].mediator];
  bool stays = true;
  why.clear();
  for (const auto& [m, k] : trace.removal_sizes) {
    std::size_t j = tau;
    while (j > 0 && canon.ordered_users[j - 1].mediator == m) --j;
    if (j == 0) continue;
    const std::size_t ahead = optimal_count[m] - (tau - j);
    if (j - ahead > k) {
      stays = false;
      why = m.str() + ": user at location " + std::to_string(j) + " drops out of S_c(P \\ P(m), B)";
    }
  }
  rs.push_back(detail::verdict("stay_assigned", stays, why));

  std::unordered_set<std::uint64_t> optimal_users;
  for (std::size_t i = 0; i < tau; ++i) optimal_users.insert(detail::user_key(canon.ordered_users[i]));
  bool subset = true;
  why.clear();
  for (const auto& [m, c_m] : trace.thresholds) {
    if (c_m.finite() && (tau == 0 || compare(c_m, canon.ordered_users[tau - 1].cost) > 0)) {
      subset = false;
      why = "threshold user of " + m.str() + " is not assigned by S_c(P,B)";
    }
  }
  for (const auto& [m, ps] : trace.tradable) {
    for (const auto& p : ps) {
      if (!optimal_users.contains(detail::user_key(p))) {
        subset = false;
        why = "tradable user " + m.str() + "/" + std::to_string(p.index) + " outside S_c(P,B)";
      }
    }
  }
  rs.push_back(detail::verdict("subset_users", subset, why));

  std::unordered_set<std::uint64_t> assigned;
  for (const auto& p : out.assignment.pairs) assigned.insert(detail::user_key(p.user));
  bool all = true;
  why.clear();
  for (const auto& [m, ps] : trace.tradable) {
    for (const auto& p : ps) {
      if (!assigned.contains(detail::user_key(p))) {
        all = false;
        why = "tradable user " + m.str() + "/" + std::to_string(p.index) + " unassigned";
      }
    }
  }
  rs.push_back(detail::verdict("all_assigned", all, why));

  const auto slack = 5 * static_cast<std::size_t>(config.gamma);
  if (tau > slack) {
    const auto& c_e = canon.ordered_users[tau - slack - 1].cost;
    bool bound = true;
    why.clear();
    for (const auto& [m, c_m] : trace.thresholds) {
      if (compare(c_m, c_e) < 0) {
        bound = false;
        why = m.str() + ": c_m=" + c_m.str() + " < c_e=" + c_e.str();
      }
    }
    rs.push_back(detail::verdict("c_e_bound", bound, why));
  } else {
    rs.push_back({"c_e_bound", CheckStatus::NotApplicable, "tau <= 5 gamma"});
  }
  return rs;
}

/// Concentration event E': the optimal users and slots, and the top
/// ceil((1 - 11 r) tau) of each, split between the halves within r * tau of
/// evenly, where r is the mechanism's rounded alpha^(1/3).
struct ConcentrationEvent {
  bool holds = false;
  std::size_t tilde_size = 0;
};

inline ConcentrationEvent concentration_event(const MarketInstance& inst, const TpmTrace& trace,
                                              const CanonicalResult& canon) {
  const auto tau = canon.tau;
  const Rational& r = trace.rates.cube_root;
  ConcentrationEvent ev;
  const Rational tilde_fraction = 1 - 11 * r;
  if (sgn(tilde_fraction) > 0) {
    ev.tilde_size = ceil_rational(tilde_fraction * static_cast<unsigned long>(tau)).get_ui();
  }
  const auto& part = trace.partition;
  auto user_side = [&](const User& p) { return part.mediator_side[*inst.mediator_index(p.mediator)]; };
  auto slot_side = [&](const Slot& b) { return part.advertiser_side[*inst.advertiser_index(b.advertiser)]; };
  std::size_t po2 = 0, bo2 = 0, pt2 = 0, bt2 = 0;
  for (std::size_t i = 0; i < tau; ++i) {
    const bool u2 = user_side(canon.ordered_users[i]) == 2;
    const bool s2 = slot_side(canon.ordered_slots[i]) == 2;
    po2 += u2;
    bo2 += s2;
    if (i < ev.tilde_size) {
      pt2 += u2;
      bt2 += s2;
    }
  }
  const Rational tol = r * static_cast<unsigned long>(tau);
  auto close = [&](std::size_t part_count, std::size_t whole) {
    Rational d = Rational(static_cast<unsigned long>(part_count)) - Rational(static_cast<unsigned long>(whole), 2);
    return abs(d) <= tol;
  };
  ev.holds = close(po2, tau) && close(bo2, tau) && close(pt2, ev.tilde_size) && close(bt2, ev.tilde_size);
  return ev;
}

/// TPM statements checked on a truthful run. Inclusion statements are only
/// applicable when alpha >= 1/tau and the concentration event holds.
inline std::vector<InvariantResult> invariant_suite(const MarketInstance& inst, const TpmConfig& config,
                                                    const Outcome& out, const TpmTrace& trace) {
  std::vector<InvariantResult> rs;
  const auto canon = canonical_assignment(inst.users(), inst.slots());
  const auto tau = canon.tau;
  const auto& part = trace.partition;

  // Threshold pair: b^ above p^ under the tie order, and not below as numbers.
  bool pair_ok = true;
  std::string why;
  for (const auto& side : trace.sides) {
    const auto& t = side.thresholds;
    if (t.dummy()) continue;
    if (compare(t.phat, t.bhat) >= 0 || t.bhat.amount() < t.phat.amount()) {
      pair_ok = false;
      why = "threshold pair " + t.phat.str() + " / " + t.bhat.str();
    }
  }
  rs.push_back(detail::verdict("threshold_pair_bb", pair_ok, why));

  bool ir_ok = true;
  why.clear();
  for (const auto& side : trace.sides) {
    for (const auto& p : side.matched) {
      if (p.user.amount() > side.thresholds.phat.amount() || p.slot.amount() < side.thresholds.bhat.amount()) {
        ir_ok = false;
        why = "pair priced outside its own cost/value";
      }
    }
  }
  rs.push_back(detail::verdict("threshold_ir", ir_ok, why));

  // Size of the opposite half's canonical assignment is bracketed by the
  // optimal users and slots that landed in that half.
  bool length_ok = true;
  why.clear();
  for (int s = 0; s < 2; ++s) {
    const int other = 2 - s;  // sides[0] is priced from half 2
    std::size_t po = 0, bo = 0;
    for (std::size_t i = 0; i < tau; ++i) {
      po += part.mediator_side[*inst.mediator_index(canon.ordered_users[i].mediator)] == other;
      bo += part.advertiser_side[*inst.advertiser_index(canon.ordered_slots[i].advertiser)] == other;
    }
    const auto size = trace.sides[s].thresholds.opposite_size;
    if (size < std::min(po, bo) || size > std::max(po, bo)) {
      length_ok = false;
      why = "half " + std::to_string(other) + ": |S_c|=" + std::to_string(size) + " outside [" +
            std::to_string(std::min(po, bo)) + "," + std::to_string(std::max(po, bo)) + "]";
    }
  }
  rs.push_back(detail::verdict("length_characterization", length_ok, why));

  const char* names[] = {"upper_inclusion", "lower_inclusion", "middle_value"};
  std::string inapplicable;
  if (tau == 0) {
    inapplicable = "tau = 0";
  } else if (config.alpha * static_cast<unsigned long>(tau) < 1) {
    inapplicable = "alpha < 1/tau";
  }
  ConcentrationEvent ev;
  if (inapplicable.empty()) {
    ev = concentration_event(inst, trace, canon);
    if (!ev.holds) inapplicable = "concentration event fails";
  }
  if (!inapplicable.empty()) {
    for (auto n : names) rs.push_back({n, CheckStatus::NotApplicable, inapplicable});
    return rs;
  }

  std::unordered_set<std::uint64_t> po, bo, pt, bt;
  for (std::size_t i = 0; i < tau; ++i) {
    po.insert(detail::user_key(canon.ordered_users[i]));
    bo.insert(detail::slot_key(canon.ordered_slots[i]));
    if (i < ev.tilde_size) {
      pt.insert(detail::user_key(canon.ordered_users[i]));
      bt.insert(detail::slot_key(canon.ordered_slots[i]));
    }
  }

  bool upper = true, lower = true, middle = true;
  std::string why_u, why_l, why_m;
  const auto& ell = canon.ordered_slots[tau - 1].value;
  for (int s = 0; s < 2; ++s) {
    const auto& side = trace.sides[s];
    std::unordered_set<std::uint64_t> phat, bhat;
    for (const auto& p : side.phat) {
      phat.insert(detail::user_key(p));
      if (!po.contains(detail::user_key(p))) {
        upper = false;
        why_u = "user outside P_o in side " + std::to_string(s + 1);
      }
      if (compare(p.cost, ell) > 0) {
        middle = false;
        why_m = "user cost above l(P,B)";
      }
    }
    for (const auto& b : side.bhat) {
      bhat.insert(detail::slot_key(b));
      if (!bo.contains(detail::slot_key(b))) {
        upper = false;
        why_u = "slot outside B_o in side " + std::to_string(s + 1);
      }
      if (compare(b.value, ell) < 0) {
        middle = false;
        why_m = "slot value below l(P,B)";
      }
    }
    for (std::size_t i = 0; i < ev.tilde_size; ++i) {
      const auto& p = canon.ordered_users[i];
      const auto& b = canon.ordered_slots[i];
      if (part.mediator_side[*inst.mediator_index(p.mediator)] == s + 1 && !phat.contains(detail::user_key(p))) {
        lower = false;
        why_l = "top user missing from side " + std::to_string(s + 1);
      }
      if (part.advertiser_side[*inst.advertiser_index(b.advertiser)] == s + 1 && !bhat.contains(detail::slot_key(b))) {
        lower = false;
        why_l = "top slot missing from side " + std::to_string(s + 1);
      }
    }
  }
  rs.push_back(detail::verdict(names[0], upper, why_u));
  rs.push_back(detail::verdict(names[1], lower, why_l));
  rs.push_back(detail::verdict(names[2], middle, why_m));
  (void)out;
  return rs;
}

}  // namespace dsm
