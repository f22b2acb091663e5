#pragma once

// Instance files, run/audit reports and Monte Carlo CSV. Exact numbers are
// written as "num/den" strings; reports pair them with a decimal approximation.

#include "dsm/audit.hpp"
#include "dsm/market.hpp"
#include "dsm/prm.hpp"
#include "dsm/tpm.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dsm {

using nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kInstanceFileVersion = 1;

// ---------------------------------------------------------------------------
// Instance files
// ---------------------------------------------------------------------------

inline ordered_json instance_to_json(const MarketInstance& inst) {
  ordered_json j;
  j["version"] = kInstanceFileVersion;
  auto& sigma = j["sigma"] = ordered_json::array();
  for (const auto& id : inst.sigma().agents()) sigma.push_back(id.str());
  auto& ms = j["mediators"] = ordered_json::array();
  for (const auto& m : inst.mediators()) {
    ordered_json costs = ordered_json::array();
    for (const auto& c : m.costs) costs.push_back(c.str());
    ms.push_back({{"id", m.id.str()}, {"costs", std::move(costs)}});
  }
  auto& as = j["advertisers"] = ordered_json::array();
  for (const auto& a : inst.advertisers()) {
    as.push_back({{"id", a.id.str()}, {"value", a.value.str()}, {"capacity", a.capacity}});
  }
  return j;
}

inline MarketInstance instance_from_json(const ordered_json& j) {
  try {
    if (!j.is_object()) throw ParseError("instance must be an object");
    const int version = j.at("version").get<int>();
    if (version != kInstanceFileVersion) throw ParseError("unsupported instance version " + std::to_string(version));
    std::vector<Mediator> ms;
    for (const auto& m : j.at("mediators")) {
      Mediator med{AgentId::parse(m.at("id").get<std::string>()), {}};
      for (const auto& c : m.at("costs")) med.costs.push_back(Money::parse(c.get<std::string>()));
      ms.push_back(std::move(med));
    }
    std::vector<Advertiser> as;
    for (const auto& a : j.at("advertisers")) {
      const auto cap = a.at("capacity").get<std::int64_t>();
      if (cap < 1 || cap > std::numeric_limits<std::uint32_t>::max()) {
        throw ParseError("capacity out of range: " + std::to_string(cap));
      }
      as.push_back({AgentId::parse(a.at("id").get<std::string>()), Money::parse(a.at("value").get<std::string>()),
                    static_cast<std::uint32_t>(cap)});
    }
    std::optional<SigmaOrder> sigma;
    if (j.contains("sigma")) {
      std::vector<AgentId> order;
      for (const auto& id : j.at("sigma")) order.push_back(AgentId::parse(id.get<std::string>()));
      sigma = SigmaOrder(std::move(order));
    }
    return MarketInstance(std::move(ms), std::move(as), std::move(sigma));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    // ModelError and negative Money land here too.
    if (dynamic_cast<const ParseError*>(&e)) throw;
    throw ParseError(std::string("instance file: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

inline ordered_json parse_json(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline MarketInstance load_instance(const std::string& path) {
  return instance_from_json(parse_json(read_file(path), path));
}

inline void save_instance(const MarketInstance& inst, const std::string& path) {
  write_file(path, instance_to_json(inst).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Decimal rendering of q rounded half away from zero to `digits` places.
inline std::string decimal_string(const Rational& q, unsigned digits = 12) {
  mpz_class scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(q) * scale + Rational(1, 2);
  mpz_class n = scaled.get_num() / scaled.get_den();
  std::string s = n.get_str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  if (digits > 0) s.insert(s.size() - digits, ".");
  if (sgn(q) < 0 && n != 0) s.insert(0, "-");
  return s;
}

inline ordered_json number_json(const Rational& q) {
  return {{"exact", format_rational(q)}, {"approx", q.get_d()}};
}

inline ordered_json scalar_json(const ExtendedScalar& x) {
  if (!x.finite()) return x.str();
  return number_json(x.amount().value());
}

inline ordered_json assignment_json(const Assignment& s) {
  ordered_json pairs = ordered_json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"mediator", p.user.mediator.str()},
                     {"user", p.user.index},
                     {"cost", p.user.amount().str()},
                     {"advertiser", p.slot.advertiser.str()},
                     {"slot", p.slot.index},
                     {"value", p.slot.amount().str()}});
  }
  return pairs;
}

inline ordered_json outcome_json(const Outcome& out, const MarketInstance& inst) {
  ordered_json j;
  j["assignment"] = assignment_json(out.assignment);
  auto& charges = j["charges"] = ordered_json::object();
  for (const auto& [a, c] : out.charges) charges[a.str()] = number_json(c);
  auto& payments = j["payments"] = ordered_json::object();
  for (const auto& [m, p] : out.payments) payments[m.str()] = number_json(p);
  const auto gft = gain_from_trade(out.assignment);
  const auto opt = gain_from_trade(canonical_assignment(inst.users(), inst.slots()).pairs);
  j["gft"] = number_json(gft);
  j["opt"] = number_json(opt);
  j["surplus"] = number_json(out.total_charges() - out.total_payments());
  return j;
}

inline ordered_json trace_json(const PrmTrace& t) {
  ordered_json j;
  auto& ms = j["mediators"] = ordered_json::array();
  for (const auto& [m, c] : t.thresholds) {
    ms.push_back({{"id", m.str()},
                  {"threshold", scalar_json(c)},
                  {"removal_size", t.removal_sizes.at(m)},
                  {"tradable", t.tradable.at(m).size()}});
  }
  j["dummy_value"] = scalar_json(t.dummy_value);
  j["dummy_capacity"] = t.dummy_capacity;
  j["dummy_units"] = t.vcg.units_won.contains(AgentId::dummy()) ? t.vcg.units_won.at(AgentId::dummy()) : 0;
  return j;
}

inline ordered_json trace_json(const TpmTrace& t, const MarketInstance& inst) {
  ordered_json j;
  j["cube_root"] = number_json(t.rates.cube_root);
  j["low_probability"] = number_json(t.rates.low_probability);
  j["kept_fraction"] = number_json(t.rates.kept_fraction);
  auto ids = [](const std::vector<AgentId>& xs) {
    ordered_json a = ordered_json::array();
    for (const auto& x : xs) a.push_back(x.str());
    return a;
  };
  auto& sides = j["sides"] = ordered_json::array();
  for (int s = 0; s < 2; ++s) {
    const auto& side = t.sides[s];
    const auto& th = side.thresholds;
    sides.push_back({{"half", s + 1},
                     {"mediators", ids(t.partition.mediators_on(inst, s + 1))},
                     {"advertisers", ids(t.partition.advertisers_on(inst, s + 1))},
                     {"opposite_size", th.opposite_size},
                     {"location", th.location ? ordered_json(*th.location) : ordered_json(nullptr)},
                     {"phat", scalar_json(th.phat)},
                     {"bhat", scalar_json(th.bhat)},
                     {"threshold_users", side.phat.size()},
                     {"threshold_slots", side.bhat.size()},
                     {"matched", side.matched.size()}});
  }
  j["sigma_m"] = ids(t.partition.sigma_m);
  j["sigma_a"] = ids(t.partition.sigma_a);
  return j;
}

inline ordered_json prm_report(const MarketInstance& inst, const PrmConfig& config, const Outcome& out,
                               const PrmTrace& trace) {
  ordered_json j;
  j["mechanism"] = "prm";
  j["gamma"] = config.gamma;
  j["outcome"] = outcome_json(out, inst);
  j["trace"] = trace_json(trace);
  return j;
}

inline ordered_json tpm_report(const MarketInstance& inst, const TpmConfig& config, const Outcome& out,
                               const TpmTrace& trace) {
  ordered_json j;
  j["mechanism"] = "tpm";
  j["alpha"] = format_rational(config.alpha);
  j["seed"] = config.seed;
  j["outcome"] = outcome_json(out, inst);
  j["trace"] = trace_json(trace, inst);
  return j;
}

inline ordered_json invariants_json(const std::vector<InvariantResult>& rs) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rs) {
    ordered_json e{{"name", r.name}, {"status", to_string(r.status)}};
    if (!r.detail.empty()) e["detail"] = r.detail;
    a.push_back(std::move(e));
  }
  return a;
}

inline ordered_json ratio_json(const RatioVerdict& v) {
  return {{"gft", number_json(v.gft)},
          {"opt", number_json(v.opt)},
          {"ratio", v.ratio ? number_json(*v.ratio) : ordered_json(nullptr)},
          {"bound", number_json(v.bound)},
          {"holds", v.holds},
          {"vacuous", v.vacuous}};
}

// ---------------------------------------------------------------------------
// Monte Carlo CSV
// ---------------------------------------------------------------------------

struct TrialRow {
  std::uint64_t seed = 0;
  Rational gft = 0;
  Rational opt = 0;
};

inline constexpr const char* kCsvHeader = "seed,gft_num,gft_den,opt_num,opt_den,ratio_decimal";

/// One row per trial, then a "mean" row when there is at least one trial.
/// ratio_decimal is left empty when opt is zero.
inline std::string trials_csv(const std::vector<TrialRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  auto line = [&](const std::string& seed, const Rational& gft, const Rational& opt) {
    out += seed + "," + gft.get_num().get_str() + "," + gft.get_den().get_str() + "," + opt.get_num().get_str() +
           "," + opt.get_den().get_str() + ",";
    if (sgn(opt) != 0) out += decimal_string(gft / opt);
    out += "\n";
  };
  Rational gft_sum = 0, opt_sum = 0;
  for (const auto& r : rows) {
    line(std::to_string(r.seed), r.gft, r.opt);
    gft_sum += r.gft;
    opt_sum += r.opt;
  }
  if (!rows.empty()) {
    const auto n = static_cast<unsigned long>(rows.size());
    line("mean", gft_sum / n, opt_sum / n);
  }
  return out;
}

}  // namespace dsm
