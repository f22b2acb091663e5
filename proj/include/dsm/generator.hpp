#pragma once

// Seeded random instances. Numbers are k / D for integer k, so every draw is
// an exact rational with denominator dividing D.

#include "dsm/market.hpp"

#include <cstdint>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

namespace dsm {

/// Uniform over the multiples of 1/denominator in [lo, hi], with either end
/// optionally open.
struct UniformRational {
  std::int64_t lo = 0;
  std::int64_t hi = 1;
  std::uint64_t denominator = 1'000'000'000;
  bool lo_open = false;
  bool hi_open = true;

  std::string interval() const {
    return std::string(lo_open ? "(" : "[") + (hi_open ? ")" : "]");
  }
};

/// Count drawn uniformly from [lo, hi]; lo == hi gives a fixed count.
struct CountDistribution {
  std::uint32_t lo = 1;
  std::uint32_t hi = 1;

  static CountDistribution fixed(std::uint32_t k) { return {k, k}; }
  static CountDistribution uniform(std::uint32_t lo, std::uint32_t hi) { return {lo, hi}; }
};

struct GeneratorSpec {
  std::uint32_t n_mediators = 0;
  std::uint32_t n_advertisers = 0;
  CountDistribution users_per_mediator;
  CountDistribution capacity;
  UniformRational cost{0, 1, 1'000'000'000, false, true};   // [0, 1)
  UniformRational value{0, 1, 1'000'000'000, true, false};  // (0, 1]
  std::uint64_t seed = 0;

  /// n single-user mediators and n unit-capacity advertisers, costs on
  /// [0, 1) and values on (0, 1].
  static GeneratorSpec gamma1_double_auction(std::uint32_t n, std::uint64_t seed) {
    GeneratorSpec s;
    s.n_mediators = n;
    s.n_advertisers = n;
    s.seed = seed;
    return s;
  }
};

namespace detail {

inline void validate(const UniformRational& u, const char* what) {
  if (u.denominator == 0) throw ConfigError(std::string(what) + ": denominator must be positive");
  if (u.lo < 0) throw ConfigError(std::string(what) + ": lower end must be nonnegative");
  std::int64_t first = u.lo * static_cast<std::int64_t>(u.denominator) + (u.lo_open ? 1 : 0);
  std::int64_t last = u.hi * static_cast<std::int64_t>(u.denominator) - (u.hi_open ? 1 : 0);
  if (first > last) throw ConfigError(std::string(what) + ": empty interval");
}

inline void validate(const CountDistribution& c, const char* what, std::uint32_t min) {
  if (c.lo < min) throw ConfigError(std::string(what) + " must be at least " + std::to_string(min));
  if (c.lo > c.hi) throw ConfigError(std::string(what) + ": lo above hi");
}

inline Money draw(const UniformRational& u, std::mt19937_64& rng) {
  const auto d = static_cast<std::int64_t>(u.denominator);
  std::uniform_int_distribution<std::int64_t> k(u.lo * d + (u.lo_open ? 1 : 0), u.hi * d - (u.hi_open ? 1 : 0));
  Rational q(static_cast<long>(k(rng)), static_cast<unsigned long>(u.denominator));
  q.canonicalize();
  return Money(q);
}

inline std::uint32_t draw(const CountDistribution& c, std::mt19937_64& rng) {
  if (c.lo == c.hi) return c.lo;
  return std::uniform_int_distribution<std::uint32_t>(c.lo, c.hi)(rng);
}

}  // namespace detail

inline MarketInstance generate(const GeneratorSpec& spec) {
  detail::validate(spec.cost, "cost");
  detail::validate(spec.value, "value");
  detail::validate(spec.users_per_mediator, "users_per_mediator", 0);
  detail::validate(spec.capacity, "capacity", 1);

  std::mt19937_64 rng(spec.seed);
  std::vector<Mediator> ms;
  std::vector<Advertiser> as;
  ms.reserve(spec.n_mediators);
  as.reserve(spec.n_advertisers);
  for (std::uint32_t i = 0; i < spec.n_mediators; ++i) {
    Mediator m{AgentId::mediator(i), {}};
    const auto k = detail::draw(spec.users_per_mediator, rng);
    for (std::uint32_t j = 0; j < k; ++j) m.costs.push_back(detail::draw(spec.cost, rng));
    ms.push_back(std::move(m));
  }
  for (std::uint32_t i = 0; i < spec.n_advertisers; ++i) {
    const auto cap = detail::draw(spec.capacity, rng);
    as.push_back({AgentId::advertiser(i), detail::draw(spec.value, rng), cap});
  }
  return MarketInstance(std::move(ms), std::move(as));
}

// ---------------------------------------------------------------------------
// JSON form of a generator spec
// ---------------------------------------------------------------------------
//
// {"preset": "gamma1-double-auction", "n": 1000, "seed": 7}
// or
// {"mediators": 10, "advertisers": 8, "seed": 7,
//  "users_per_mediator": {"fixed": 2} | {"uniform": [1, 3]},
//  "capacity": {"fixed": 1} | {"uniform": [1, 3]},
//  "cost":  {"lo": 0, "hi": 1, "denominator": 1000, "interval": "[)"},
//  "value": {"lo": 0, "hi": 1, "denominator": 1000, "interval": "(]"}}

namespace detail {

inline CountDistribution count_from_json(const nlohmann::json& j, const char* what) {
  if (j.contains("fixed")) return CountDistribution::fixed(j.at("fixed").get<std::uint32_t>());
  if (j.contains("uniform")) {
    const auto& r = j.at("uniform");
    if (!r.is_array() || r.size() != 2) throw ParseError(std::string(what) + ".uniform must be [lo, hi]");
    return CountDistribution::uniform(r[0].get<std::uint32_t>(), r[1].get<std::uint32_t>());
  }
  throw ParseError(std::string(what) + " needs \"fixed\" or \"uniform\"");
}

inline nlohmann::json count_to_json(const CountDistribution& c) {
  if (c.lo == c.hi) return {{"fixed", c.lo}};
  return {{"uniform", {c.lo, c.hi}}};
}

inline UniformRational uniform_from_json(const nlohmann::json& j, UniformRational u) {
  if (j.contains("lo")) u.lo = j.at("lo").get<std::int64_t>();
  if (j.contains("hi")) u.hi = j.at("hi").get<std::int64_t>();
  if (j.contains("denominator")) u.denominator = j.at("denominator").get<std::uint64_t>();
  if (j.contains("interval")) {
    const auto s = j.at("interval").get<std::string>();
    if (s.size() != 2 || (s[0] != '[' && s[0] != '(') || (s[1] != ']' && s[1] != ')')) {
      throw ParseError("interval must be one of [], [), (], ()");
    }
    u.lo_open = s[0] == '(';
    u.hi_open = s[1] == ')';
  }
  return u;
}

inline nlohmann::json uniform_to_json(const UniformRational& u) {
  return {{"lo", u.lo}, {"hi", u.hi}, {"denominator", u.denominator}, {"interval", u.interval()}};
}

}  // namespace detail

inline GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ParseError("generator spec must be an object");
    if (j.contains("preset")) {
      const auto name = j.at("preset").get<std::string>();
      if (name != "gamma1-double-auction") throw ParseError("unknown preset '" + name + "'");
      return GeneratorSpec::gamma1_double_auction(j.at("n").get<std::uint32_t>(), j.value("seed", std::uint64_t{0}));
    }
    GeneratorSpec s;
    s.n_mediators = j.at("mediators").get<std::uint32_t>();
    s.n_advertisers = j.at("advertisers").get<std::uint32_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("users_per_mediator")) s.users_per_mediator = detail::count_from_json(j.at("users_per_mediator"), "users_per_mediator");
    if (j.contains("capacity")) s.capacity = detail::count_from_json(j.at("capacity"), "capacity");
    if (j.contains("cost")) s.cost = detail::uniform_from_json(j.at("cost"), s.cost);
    if (j.contains("value")) s.value = detail::uniform_from_json(j.at("value"), s.value);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator spec: ") + e.what());
  }
}

inline nlohmann::json generator_spec_to_json(const GeneratorSpec& s) {
  return {{"mediators", s.n_mediators},
          {"advertisers", s.n_advertisers},
          {"seed", s.seed},
          {"users_per_mediator", detail::count_to_json(s.users_per_mediator)},
          {"capacity", detail::count_to_json(s.capacity)},
          {"cost", detail::uniform_to_json(s.cost)},
          {"value", detail::uniform_to_json(s.value)}};
}

}  // namespace dsm
