#pragma once

// Command-line front end: generate, run, audit and montecarlo.
//
// Exit codes: 0 when everything requested succeeded (for audit, every check
// passed), 1 when an audit check failed, 2 for malformed input or flags.

#include "dsm/audit.hpp"
#include "dsm/generator.hpp"
#include "dsm/io.hpp"
#include "dsm/parallel.hpp"
#include "dsm/prm.hpp"
#include "dsm/tpm.hpp"

#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace dsm {

namespace detail {

struct CliOptions {
  std::string spec_path;
  std::string instance_path;
  std::string out_path;
  std::string mechanism;
  std::string checks = "bb,ir,ic,ratio,invariants";
  std::uint32_t gamma = 0;  // 0: smallest gamma the instance satisfies
  std::string alpha;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  std::size_t grid_budget = 5000;
};

inline std::uint32_t smallest_gamma(const MarketInstance& inst) {
  std::size_t g = 1;
  for (const auto& m : inst.mediators()) g = std::max(g, m.costs.size());
  for (const auto& a : inst.advertisers()) g = std::max<std::size_t>(g, a.capacity);
  return static_cast<std::uint32_t>(g);
}

inline Rational alpha_of(const CliOptions& o) {
  if (o.alpha.empty()) throw ConfigError("--alpha is required for tpm");
  return parse_rational(o.alpha);
}

inline void emit(const CliOptions& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty()) out << text;
  else write_file(o.out_path, text);
}

inline int cmd_generate(const CliOptions& o, std::ostream& out) {
  const auto spec = generator_spec_from_json(parse_json(read_file(o.spec_path), o.spec_path));
  emit(o, instance_to_json(generate(spec)).dump(2) + "\n", out);
  return 0;
}

inline int cmd_run(const CliOptions& o, std::ostream& out) {
  const auto inst = load_instance(o.instance_path);
  ordered_json report;
  if (o.mechanism == "prm") {
    const PrmConfig config{o.gamma ? o.gamma : smallest_gamma(inst)};
    const auto [outcome, trace] = run_prm(inst, config);
    report = prm_report(inst, config, outcome, trace);
  } else {
    const TpmConfig config{alpha_of(o), o.seed};
    const auto [outcome, trace] = run_tpm(inst, config);
    report = tpm_report(inst, config, outcome, trace);
  }
  emit(o, report.dump(2) + "\n", out);
  return 0;
}

inline std::set<std::string> parse_checks(const std::string& list) {
  static const std::set<std::string> known{"bb", "ir", "ic", "ratio", "invariants"};
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (!known.contains(item)) throw ConfigError("unknown check '" + item + "'");
    out.insert(item);
  }
  if (out.empty()) throw ConfigError("no checks requested");
  return out;
}

inline int cmd_audit(const CliOptions& o, std::ostream& out) {
  const auto inst = load_instance(o.instance_path);
  const auto checks = parse_checks(o.checks);
  MechanismSpec spec;
  if (o.mechanism == "prm" || o.mechanism == "broken-prm") {
    spec.kind = o.mechanism == "prm" ? MechanismKind::Prm : MechanismKind::PrmPayYourBid;
    spec.gamma = o.gamma ? o.gamma : smallest_gamma(inst);
  } else {
    spec.kind = MechanismKind::Tpm;
    spec.alpha = alpha_of(o);
    spec.seed = o.seed;
  }

  ordered_json report;
  report["mechanism"] = spec.name();
  if (spec.kind == MechanismKind::Tpm) {
    report["alpha"] = format_rational(spec.alpha);
    report["seed"] = spec.seed;
  } else {
    report["gamma"] = spec.gamma;
  }
  bool pass = true;
  const auto outcome = run_mechanism(spec, inst);

  if (checks.contains("bb")) {
    const auto v = check_bb(outcome);
    report["bb"] = {{"holds", v.holds}, {"surplus", number_json(v.surplus)}};
    pass = pass && v.holds;
  }
  if (checks.contains("ir")) {
    const auto v = check_ir(inst, outcome);
    ordered_json us = ordered_json::object();
    for (const auto& [id, u] : v.utilities) us[id.str()] = number_json(u);
    report["ir"] = {{"holds", v.holds}, {"utilities", std::move(us)}};
    pass = pass && v.holds;
  }
  if (checks.contains("ic")) {
    std::vector<AgentId> agents;
    for (const auto& m : inst.mediators()) agents.push_back(m.id);
    for (const auto& a : inst.advertisers()) agents.push_back(a.id);
    std::vector<IcVerdict> verdicts(agents.size());
    parallel_for(agents.size(), [&](std::size_t i) {
      GridOptions g;
      g.mediator_budget = o.grid_budget;
      g.sample_seed = o.seed;
      verdicts[i] = check_ic(inst, spec, make_grid(inst, spec, agents[i], g));
    });
    ordered_json ic = ordered_json::object();
    bool holds = true;
    for (const auto& v : verdicts) {
      ic[v.agent.str()] = {{"violated", v.violated},
                           {"truthful_utility", number_json(v.truthful_utility)},
                           {"best_utility", number_json(v.best_utility)},
                           {"best_deviation", v.best_deviation},
                           {"points", v.points}};
      holds = holds && !v.violated;
    }
    report["ic"] = {{"holds", holds}, {"agents", std::move(ic)}};
    pass = pass && holds;
  }
  if (checks.contains("ratio")) {
    RatioVerdict v;
    if (spec.kind == MechanismKind::Tpm) {
      const auto opt = gain_from_trade(canonical_assignment(inst.users(), inst.slots()).pairs);
      std::vector<Rational> gfts(o.trials);
      parallel_for(gfts.size(), [&](std::size_t t) {
        gfts[t] = gain_from_trade(run_tpm(inst, {spec.alpha, spec.seed + t}).first.assignment);
      });
      v = competitive_ratio_mean(gfts, opt, tpm_ratio_bound(spec.alpha));
      report["ratio"] = ratio_json(v);
      report["ratio"]["trials"] = o.trials;
    } else {
      const auto tau = canonical_assignment(inst.users(), inst.slots()).tau;
      v = competitive_ratio(outcome, inst, prm_ratio_bound(spec.gamma, tau));
      report["ratio"] = ratio_json(v);
    }
    pass = pass && v.holds;
  }
  if (checks.contains("invariants")) {
    std::vector<InvariantResult> rs;
    if (spec.kind == MechanismKind::Tpm) {
      const TpmConfig config{spec.alpha, spec.seed};
      const auto [res, trace] = run_tpm(inst, config);
      rs = invariant_suite(inst, config, res, trace);
    } else {
      const PrmConfig config{spec.gamma};
      const auto [res, trace] = run_prm(inst, config);
      rs = invariant_suite(inst, config, res, trace);
    }
    report["invariants"] = invariants_json(rs);
    pass = pass && all_hold(rs);
  }
  report["pass"] = pass;
  emit(o, report.dump(2) + "\n", out);
  return pass ? 0 : 1;
}

inline int cmd_montecarlo(const CliOptions& o, std::ostream& out) {
  const auto inst = load_instance(o.instance_path);
  const auto alpha = alpha_of(o);
  tpm_rates(alpha);  // reject a bad alpha before starting any trial
  const auto opt = gain_from_trade(canonical_assignment(inst.users(), inst.slots()).pairs);
  std::vector<TrialRow> rows(o.trials);
  parallel_for(rows.size(), [&](std::size_t t) {
    const auto seed = o.seed + t;
    rows[t] = {seed, gain_from_trade(run_tpm(inst, {alpha, seed}).first.assignment), opt};
  });
  emit(o, trials_csv(rows), out);
  return 0;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Double-sided market mechanisms: generation, runs and audits", "dsm"};
  app.require_subcommand(1);
  detail::CliOptions o;

  auto* gen = app.add_subcommand("generate", "Draw a random instance from a generator spec");
  gen->add_option("--spec", o.spec_path, "Generator spec (JSON)")->required();
  gen->add_option("--out", o.out_path, "Instance file to write (default: stdout)");

  auto* run = app.add_subcommand("run", "Run a mechanism on an instance");
  run->add_option("--mechanism", o.mechanism)->required()->check(CLI::IsMember({"prm", "tpm"}));
  run->add_option("--instance", o.instance_path)->required();
  run->add_option("--gamma", o.gamma, "PRM size bound (default: smallest valid)");
  run->add_option("--alpha", o.alpha, "TPM parameter as num/den");
  run->add_option("--seed", o.seed, "TPM coin seed");
  run->add_option("--out", o.out_path, "Report file (default: stdout)");

  auto* audit = app.add_subcommand("audit", "Check BB, IR, IC, ratio and invariants");
  audit->add_option("--mechanism", o.mechanism)->required()->check(CLI::IsMember({"prm", "tpm", "broken-prm"}));
  audit->add_option("--instance", o.instance_path)->required();
  audit->add_option("--checks", o.checks, "Comma-separated subset of bb,ir,ic,ratio,invariants");
  audit->add_option("--gamma", o.gamma);
  audit->add_option("--alpha", o.alpha);
  audit->add_option("--seed", o.seed);
  audit->add_option("--trials", o.trials, "TPM trials for the ratio check, seeds seed..seed+trials-1");
  audit->add_option("--grid-budget", o.grid_budget, "Structured deviation points per mediator");
  audit->add_option("--out", o.out_path);

  auto* mc = app.add_subcommand("montecarlo", "Repeated TPM trials written as CSV");
  mc->add_option("--mechanism", o.mechanism)->required()->check(CLI::IsMember({"tpm"}));
  mc->add_option("--instance", o.instance_path)->required();
  mc->add_option("--alpha", o.alpha)->required();
  mc->add_option("--trials", o.trials)->required();
  mc->add_option("--seeds", o.seed, "First seed; trial t uses seeds + t")->required();
  mc->add_option("--out", o.out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return detail::cmd_generate(o, out);
    if (run->parsed()) return detail::cmd_run(o, out);
    if (audit->parsed()) return detail::cmd_audit(o, out);
    return detail::cmd_montecarlo(o, out);
  } catch (const std::exception& e) {
    err << "dsm: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dsm
