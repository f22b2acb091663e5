#pragma once

// Market model: agents, the tie-breaking total order over costs and values,
// canonical assignments and gain from trade.

#include "dsm/money.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dsm {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class AgentKind : std::uint8_t { Mediator, Advertiser, Dummy };

struct AgentId {
  AgentKind kind = AgentKind::Mediator;
  std::uint32_t ordinal = 0;

  static constexpr AgentId mediator(std::uint32_t n) { return {AgentKind::Mediator, n}; }
  static constexpr AgentId advertiser(std::uint32_t n) { return {AgentKind::Advertiser, n}; }
  static constexpr AgentId dummy(std::uint32_t n = 0) { return {AgentKind::Dummy, n}; }

  std::string str() const {
    const char prefix = kind == AgentKind::Mediator ? 'm' : (kind == AgentKind::Advertiser ? 'a' : 'd');
    return prefix + std::to_string(ordinal);
  }

  /// Inverse of str(): "m<n>", "a<n>" or "d<n>".
  static AgentId parse(std::string_view s) {
    if (s.size() < 2) throw ParseError("malformed agent id: '" + std::string(s) + "'");
    AgentKind kind;
    switch (s[0]) {
      case 'm': kind = AgentKind::Mediator; break;
      case 'a': kind = AgentKind::Advertiser; break;
      case 'd': kind = AgentKind::Dummy; break;
      default: throw ParseError("malformed agent id: '" + std::string(s) + "'");
    }
    std::uint64_t n = 0;
    for (char c : s.substr(1)) {
      if (c < '0' || c > '9') throw ParseError("malformed agent id: '" + std::string(s) + "'");
      n = n * 10 + static_cast<std::uint64_t>(c - '0');
      if (n > std::numeric_limits<std::uint32_t>::max()) throw ParseError("agent ordinal overflow");
    }
    return {kind, static_cast<std::uint32_t>(n)};
  }

  auto operator<=>(const AgentId&) const = default;
};

struct AgentIdHash {
  std::size_t operator()(const AgentId& id) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.kind) << 32) | id.ordinal);
  }
};

// ---------------------------------------------------------------------------
// Extended scalars and the tie-breaking order
// ---------------------------------------------------------------------------

enum class ScalarRole : std::uint8_t { Cost, Value };

/// Identifies which user (cost) or slot (value) a scalar belongs to.
/// sigma_pos is the owner's position in the instance's sigma order and
/// intra is the position of the user (slot) within its owner.
struct TieKey {
  ScalarRole role = ScalarRole::Cost;
  std::uint32_t sigma_pos = 0;
  std::uint32_t intra = 0;
  bool operator==(const TieKey&) const = default;
};

/// A cost or value together with the key that makes the order strict.
/// NegInf and PosInf stand in for dummy users and slots.
class ExtendedScalar {
 public:
  enum class Tag : std::uint8_t { NegInf, Finite, PosInf };

  ExtendedScalar() = default;

  static ExtendedScalar neg_inf() { return ExtendedScalar(Tag::NegInf); }
  static ExtendedScalar pos_inf() { return ExtendedScalar(Tag::PosInf); }
  static ExtendedScalar cost(Money amount, std::uint32_t sigma_pos, std::uint32_t intra) {
    return ExtendedScalar(std::move(amount), {ScalarRole::Cost, sigma_pos, intra});
  }
  static ExtendedScalar value(Money amount, std::uint32_t sigma_pos, std::uint32_t intra) {
    return ExtendedScalar(std::move(amount), {ScalarRole::Value, sigma_pos, intra});
  }

  Tag tag() const { return tag_; }
  bool finite() const { return tag_ == Tag::Finite; }
  bool is_neg_inf() const { return tag_ == Tag::NegInf; }
  bool is_pos_inf() const { return tag_ == Tag::PosInf; }

  const Money& amount() const {
    if (!finite()) throw std::logic_error("amount() of an infinite scalar");
    return amount_;
  }
  const TieKey& key() const { return key_; }

  std::string str() const {
    if (tag_ == Tag::NegInf) return "-inf";
    if (tag_ == Tag::PosInf) return "+inf";
    return amount_.str();
  }

 private:
  explicit ExtendedScalar(Tag t) : tag_(t) {}
  ExtendedScalar(Money amount, TieKey key) : tag_(Tag::Finite), amount_(std::move(amount)), key_(key) {}

  Tag tag_ = Tag::NegInf;
  Money amount_;
  TieKey key_;
};

/// Strict total order over costs and values.
///
/// Equal amounts are ordered by the owner's sigma position, so a user's cost
/// is below an equal slot value exactly when the user's mediator precedes the
/// slot's advertiser in sigma. Within one mediator a lower list index means a
/// lower cost; within one advertiser a lower slot index means a higher value.
inline std::strong_ordering compare(const ExtendedScalar& x, const ExtendedScalar& y) {
  using Tag = ExtendedScalar::Tag;
  if (x.tag() != y.tag()) return x.tag() <=> y.tag();
  if (x.tag() != Tag::Finite) return std::strong_ordering::equal;
  if (auto c = x.amount() <=> y.amount(); c != 0) return c;
  const TieKey& a = x.key();
  const TieKey& b = y.key();
  if (a.sigma_pos != b.sigma_pos) return a.sigma_pos <=> b.sigma_pos;
  // Same owner implies same role for well-formed instances.
  if (a.role != b.role) return a.role <=> b.role;
  if (a.role == ScalarRole::Cost) return a.intra <=> b.intra;
  return b.intra <=> a.intra;
}

inline bool operator==(const ExtendedScalar& x, const ExtendedScalar& y) { return compare(x, y) == 0; }
inline std::strong_ordering operator<=>(const ExtendedScalar& x, const ExtendedScalar& y) {
  return compare(x, y);
}

// ---------------------------------------------------------------------------
// Agents, users and slots
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kUnranked = std::numeric_limits<std::uint32_t>::max();

struct User {
  AgentId mediator;
  std::uint32_t index = 0;
  ExtendedScalar cost;
  // Position in the owning instance's joint order of users and slots.
  std::uint32_t rank = kUnranked;

  const Money& amount() const { return cost.amount(); }
  bool same(const User& o) const { return mediator == o.mediator && index == o.index; }
};

struct Slot {
  AgentId advertiser;
  std::uint32_t index = 0;
  ExtendedScalar value;
  std::uint32_t rank = kUnranked;

  const Money& amount() const { return value.amount(); }
  bool same(const Slot& o) const { return advertiser == o.advertiser && index == o.index; }
};

struct Mediator {
  AgentId id;
  std::vector<Money> costs;  // list order is the intra-mediator tie order
};

struct Advertiser {
  AgentId id;
  Money value;
  std::uint32_t capacity = 1;
};

class SigmaOrder {
 public:
  SigmaOrder() = default;
  explicit SigmaOrder(std::vector<AgentId> agents) : agents_(std::move(agents)) {}

  /// Mediators then advertisers, each by ascending ordinal.
  static SigmaOrder default_for(std::span<const Mediator> mediators,
                                std::span<const Advertiser> advertisers) {
    std::vector<AgentId> ms, as;
    for (const auto& m : mediators) ms.push_back(m.id);
    for (const auto& a : advertisers) as.push_back(a.id);
    std::sort(ms.begin(), ms.end());
    std::sort(as.begin(), as.end());
    ms.insert(ms.end(), as.begin(), as.end());
    return SigmaOrder(std::move(ms));
  }

  const std::vector<AgentId>& agents() const { return agents_; }
  bool operator==(const SigmaOrder&) const = default;

 private:
  std::vector<AgentId> agents_;
};

/// Immutable market: mediators with ordered user costs, advertisers with
/// value and capacity, and the report-independent order sigma.
class MarketInstance {
 public:
  MarketInstance() = default;

  MarketInstance(std::vector<Mediator> mediators, std::vector<Advertiser> advertisers,
                 std::optional<SigmaOrder> sigma = std::nullopt)
      : mediators_(std::move(mediators)), advertisers_(std::move(advertisers)) {
    sigma_ = sigma ? std::move(*sigma) : SigmaOrder::default_for(mediators_, advertisers_);
    validate_and_index();
    materialize();
  }

  const std::vector<Mediator>& mediators() const { return mediators_; }
  const std::vector<Advertiser>& advertisers() const { return advertisers_; }
  const SigmaOrder& sigma() const { return sigma_; }

  /// All users, grouped by mediator in list order.
  std::span<const User> users() const { return users_; }
  /// All slots, grouped by advertiser, slot index ascending.
  std::span<const Slot> slots() const { return slots_; }

  std::span<const User> users_of(std::size_t mediator_index) const {
    return std::span<const User>(users_).subspan(user_offsets_[mediator_index],
                                                 mediators_[mediator_index].costs.size());
  }
  std::span<const Slot> slots_of(std::size_t advertiser_index) const {
    return std::span<const Slot>(slots_).subspan(slot_offsets_[advertiser_index],
                                                 advertisers_[advertiser_index].capacity);
  }

  std::uint32_t sigma_position(AgentId id) const {
    auto it = sigma_pos_.find(id);
    if (it == sigma_pos_.end()) throw ModelError("unknown agent " + id.str());
    return it->second;
  }

  std::optional<std::size_t> mediator_index(AgentId id) const {
    auto it = index_.find(id);
    if (it == index_.end() || id.kind != AgentKind::Mediator) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> advertiser_index(AgentId id) const {
    auto it = index_.find(id);
    if (it == index_.end() || id.kind != AgentKind::Advertiser) return std::nullopt;
    return it->second;
  }

  const Mediator& mediator(AgentId id) const {
    auto i = mediator_index(id);
    if (!i) throw ModelError("unknown mediator " + id.str());
    return mediators_[*i];
  }
  const Advertiser& advertiser(AgentId id) const {
    auto i = advertiser_index(id);
    if (!i) throw ModelError("unknown advertiser " + id.str());
    return advertisers_[*i];
  }

  /// Copy of this instance with one mediator's reported cost list replaced.
  MarketInstance with_mediator_costs(AgentId id, std::vector<Money> costs) const {
    auto ms = mediators_;
    auto i = mediator_index(id);
    if (!i) throw ModelError("unknown mediator " + id.str());
    ms[*i].costs = std::move(costs);
    return MarketInstance(std::move(ms), advertisers_, sigma_);
  }

  /// Copy of this instance with one advertiser's report replaced.
  MarketInstance with_advertiser(AgentId id, Money value, std::uint32_t capacity) const {
    auto as = advertisers_;
    auto i = advertiser_index(id);
    if (!i) throw ModelError("unknown advertiser " + id.str());
    as[*i].value = std::move(value);
    as[*i].capacity = capacity;
    return MarketInstance(mediators_, std::move(as), sigma_);
  }

  bool operator==(const MarketInstance& o) const {
    if (sigma_ != o.sigma_ || mediators_.size() != o.mediators_.size() ||
        advertisers_.size() != o.advertisers_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < mediators_.size(); ++i) {
      if (mediators_[i].id != o.mediators_[i].id || mediators_[i].costs != o.mediators_[i].costs) return false;
    }
    for (std::size_t i = 0; i < advertisers_.size(); ++i) {
      const auto& a = advertisers_[i];
      const auto& b = o.advertisers_[i];
      if (a.id != b.id || a.value != b.value || a.capacity != b.capacity) return false;
    }
    return true;
  }

 private:
  void validate_and_index() {
    for (std::size_t i = 0; i < mediators_.size(); ++i) {
      const auto id = mediators_[i].id;
      if (id.kind != AgentKind::Mediator) throw ModelError("mediator list holds non-mediator " + id.str());
      if (!index_.emplace(id, i).second) throw ModelError("duplicate agent id " + id.str());
    }
    for (std::size_t i = 0; i < advertisers_.size(); ++i) {
      const auto& a = advertisers_[i];
      if (a.id.kind != AgentKind::Advertiser) throw ModelError("advertiser list holds non-advertiser " + a.id.str());
      if (a.capacity < 1) throw ModelError("advertiser " + a.id.str() + " has zero capacity");
      if (!index_.emplace(a.id, i).second) throw ModelError("duplicate agent id " + a.id.str());
    }
    const auto& order = sigma_.agents();
    if (order.size() != index_.size()) throw ModelError("sigma does not cover exactly the listed agents");
    sigma_pos_.reserve(order.size());
    for (std::size_t p = 0; p < order.size(); ++p) {
      if (!index_.contains(order[p])) throw ModelError("sigma names unknown agent " + order[p].str());
      if (!sigma_pos_.emplace(order[p], static_cast<std::uint32_t>(p)).second) {
        throw ModelError("sigma repeats agent " + order[p].str());
      }
    }
  }

  void materialize() {
    std::size_t n_users = 0, n_slots = 0;
    for (const auto& m : mediators_) n_users += m.costs.size();
    for (const auto& a : advertisers_) n_slots += a.capacity;
    if (n_users + n_slots >= kUnranked) throw ModelError("instance too large");
    users_.reserve(n_users);
    slots_.reserve(n_slots);
    for (const auto& m : mediators_) {
      user_offsets_.push_back(users_.size());
      const auto pos = sigma_pos_.at(m.id);
      for (std::uint32_t j = 0; j < m.costs.size(); ++j) {
        users_.push_back(User{m.id, j, ExtendedScalar::cost(m.costs[j], pos, j), kUnranked});
      }
    }
    for (const auto& a : advertisers_) {
      slot_offsets_.push_back(slots_.size());
      const auto pos = sigma_pos_.at(a.id);
      for (std::uint32_t j = 0; j < a.capacity; ++j) {
        slots_.push_back(Slot{a.id, j, ExtendedScalar::value(a.value, pos, j), kUnranked});
      }
    }
    // Joint rank over users and slots: integer comparisons stand in for
    // compare() on anything drawn from this instance.
    std::vector<std::uint32_t> order(n_users + n_slots);
    std::iota(order.begin(), order.end(), 0u);
    auto scalar = [&](std::uint32_t k) -> const ExtendedScalar& {
      return k < n_users ? users_[k].cost : slots_[k - n_users].value;
    };
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t x, std::uint32_t y) { return compare(scalar(x), scalar(y)) < 0; });
    for (std::uint32_t r = 0; r < order.size(); ++r) {
      const auto k = order[r];
      if (k < n_users) users_[k].rank = r;
      else slots_[k - n_users].rank = r;
    }
  }

  std::vector<Mediator> mediators_;
  std::vector<Advertiser> advertisers_;
  SigmaOrder sigma_;
  std::unordered_map<AgentId, std::size_t, AgentIdHash> index_;
  std::unordered_map<AgentId, std::uint32_t, AgentIdHash> sigma_pos_;
  std::vector<User> users_;
  std::vector<Slot> slots_;
  std::vector<std::size_t> user_offsets_;
  std::vector<std::size_t> slot_offsets_;
};

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

struct TradePair {
  User user;
  Slot slot;
};

struct Assignment {
  std::vector<TradePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  /// No user and no slot appears twice.
  bool valid() const {
    std::unordered_set<std::uint64_t> users, slots;
    auto key = [](AgentId id, std::uint32_t idx) {
      return (static_cast<std::uint64_t>(id.ordinal) << 32) | idx;
    };
    for (const auto& p : pairs) {
      if (!users.insert(key(p.user.mediator, p.user.index)).second) return false;
      if (!slots.insert(key(p.slot.advertiser, p.slot.index)).second) return false;
    }
    return true;
  }
};

/// Sum of v(b) - c(p) over the pairs, as exact numbers.
inline Rational gain_from_trade(const Assignment& s) {
  Rational total = 0;
  for (const auto& p : s.pairs) total += p.slot.amount().value() - p.user.amount().value();
  return total;
}

namespace detail {

template <typename T>
bool all_ranked(std::span<const T> xs) {
  return std::all_of(xs.begin(), xs.end(), [](const T& x) { return x.rank != kUnranked; });
}

// User cost strictly below slot value.
inline bool trades(const User& p, const Slot& b) {
  if (p.rank != kUnranked && b.rank != kUnranked) return p.rank < b.rank;
  return compare(p.cost, b.value) < 0;
}

}  // namespace detail

/// Users in increasing cost order.
inline std::vector<User> sorted_users(std::span<const User> users) {
  std::vector<User> out(users.begin(), users.end());
  if (detail::all_ranked(users)) {
    std::sort(out.begin(), out.end(), [](const User& a, const User& b) { return a.rank < b.rank; });
  } else {
    std::sort(out.begin(), out.end(), [](const User& a, const User& b) { return compare(a.cost, b.cost) < 0; });
  }
  return out;
}

/// Slots in decreasing value order.
inline std::vector<Slot> sorted_slots(std::span<const Slot> slots) {
  std::vector<Slot> out(slots.begin(), slots.end());
  if (detail::all_ranked(slots)) {
    std::sort(out.begin(), out.end(), [](const Slot& a, const Slot& b) { return a.rank > b.rank; });
  } else {
    std::sort(out.begin(), out.end(), [](const Slot& a, const Slot& b) { return compare(a.value, b.value) > 0; });
  }
  return out;
}

struct CanonicalResult {
  std::vector<User> ordered_users;  // increasing cost
  std::vector<Slot> ordered_slots;  // decreasing value
  Assignment pairs;                 // (p_i, b_i) for i <= tau
  std::size_t tau = 0;
};

/// Pairs the i-th cheapest user with the i-th most valuable slot while the
/// value exceeds the cost. Users and slots must come from one instance (or
/// all be unranked).
inline CanonicalResult canonical_assignment(std::span<const User> users, std::span<const Slot> slots) {
  CanonicalResult r;
  r.ordered_users = sorted_users(users);
  r.ordered_slots = sorted_slots(slots);
  const std::size_t n = std::min(r.ordered_users.size(), r.ordered_slots.size());
  while (r.tau < n && detail::trades(r.ordered_users[r.tau], r.ordered_slots[r.tau])) {
    r.pairs.pairs.push_back({r.ordered_users[r.tau], r.ordered_slots[r.tau]});
    ++r.tau;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mechanism output
// ---------------------------------------------------------------------------

struct Outcome {
  Assignment assignment;
  std::map<AgentId, Rational> charges;   // advertiser -> amount charged
  std::map<AgentId, Rational> payments;  // mediator -> amount paid

  /// Zero charges and payments for every agent of the instance.
  static Outcome empty_for(const MarketInstance& inst) {
    Outcome o;
    for (const auto& m : inst.mediators()) o.payments[m.id] = 0;
    for (const auto& a : inst.advertisers()) o.charges[a.id] = 0;
    return o;
  }

  Rational total_charges() const {
    Rational t = 0;
    for (const auto& [_, c] : charges) t += c;
    return t;
  }
  Rational total_payments() const {
    Rational t = 0;
    for (const auto& [_, p] : payments) t += p;
    return t;
  }
  std::uint64_t units_won(AgentId advertiser) const {
    return static_cast<std::uint64_t>(std::count_if(assignment.pairs.begin(), assignment.pairs.end(),
                                                    [&](const TradePair& p) { return p.slot.advertiser == advertiser; }));
  }
  Rational charge(AgentId a) const {
    auto it = charges.find(a);
    return it == charges.end() ? Rational(0) : it->second;
  }
  Rational payment(AgentId m) const {
    auto it = payments.find(m);
    return it == payments.end() ? Rational(0) : it->second;
  }
};

}  // namespace dsm
