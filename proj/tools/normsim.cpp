// Command-line front end: best responses, protocol design sweeps, exact chains,
// simulations and the cross-module verification suites.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "normsim/bestresponse.hpp"
#include "normsim/chain.hpp"
#include "normsim/config.hpp"
#include "normsim/design.hpp"
#include "normsim/sim.hpp"
#include "normsim/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace normsim;

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse integer list '" + text + "'");
    }
  }
  return out;
}

json optional_ints(const std::vector<std::optional<int>>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(x ? json(*x) : json(nullptr));
  return out;
}

json bestresponse_json(const NormConfig& cfg, const std::vector<int>& eta_counts, bool fair_coin) {
  const SocialNorm norm = cfg.norm();
  const OpponentConfig eta(eta_counts);
  eta.check_against(norm);
  SolveOptions opts;
  opts.tie_break = fair_coin ? TieBreak::FairCoin : TieBreak::FewerServices;
  const BestResponseSolution sol = solve_value_iteration(norm, eta, opts);
  const StructureReport sr = check_structure(norm, sol);
  const ThresholdCheck tc = verify_threshold_structure(norm, eta);
  return {{"schema_version", kSchemaVersion},
          {"params", to_json(cfg.params, cfg.h)},
          {"eta", eta_counts},
          {"policy", sol.policy},
          {"values", sol.values},
          {"tied_alternative", optional_ints(sol.tied_alternative)},
          {"iterations", sol.iterations},
          {"residual", sol.residual},
          {"structure", {{"threshold_policy", tc.ok()},
                         {"above_rule", sr.above_rule},
                         {"monotone_groups", sr.monotone_groups},
                         {"monotone_values", sr.monotone_values}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string region_csv(const std::string& delta_grid, const std::string& cb_grid, int L, bool lenient) {
  std::ostringstream os;
  write_region_csv(os, feasible_region_grid(parse_grid(delta_grid), parse_grid(cb_grid), L, lenient));
  return os.str();
}

void run_chain(const NormConfig& cfg, const std::vector<double>& ladder, bool fair_coin, const fs::path& out) {
  const SocialNorm norm = cfg.norm();
  const ConfigSpace space(cfg.params.N, cfg.params.L);
  const TieBreak tb = fair_coin ? TieBreak::FairCoin : TieBreak::FewerServices;
  const AbsorbingReport absorbing = classify_absorbing(norm, space);
  const LimitingResult lim = limiting_distribution(norm, space, ladder, tb);

  const auto configs_json = [&](const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (std::size_t i : idx) a.push_back(space.at(i).counts());
    return a;
  };
  json classes = json::array();
  for (const auto& cls : absorbing.closed_classes) classes.push_back(configs_json(cls));
  json tables = json::array();
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    tables.push_back({{"epsilon", ladder[k]},
                      {"omega_mu_N", lim.omegas[k][space.index_all_top()]},
                      {"omega_mu_0", lim.omegas[k][space.index_all_zero()]},
                      {"interior_mass", interior_mass(space, lim.omegas[k])},
                      {"omega", lim.omegas[k]}});
  }
  const DesignVerdict verdict = design_verdict(norm);
  const json doc = {{"schema_version", kSchemaVersion},
                    {"params", to_json(cfg.params, cfg.h)},
                    {"design", {{"delta_above_c_over_b", verdict.delta_ok},
                                {"H", verdict.H ? json(*verdict.H) : json(nullptr)},
                                {"max_feasible_h", verdict.max_feasible_h ? json(*verdict.max_feasible_h) : json(nullptr)},
                                {"predicts_unique_mu_N", verdict.unique_ssc_is_muN}}},
                    {"states", space.size()},
                    {"configurations", [&] {
                       json a = json::array();
                       for (const auto& c : space.configs()) a.push_back(c.counts());
                       return a;
                     }()},
                    {"absorbing", {{"analytic", configs_json(absorbing.analytic)},
                                   {"numeric", configs_json(absorbing.numeric)},
                                   {"agree", absorbing.agree()},
                                   {"closed_classes", classes}}},
                    {"stochastically_stable", configs_json(lim.stochastically_stable)},
                    {"warnings", lim.warnings},
                    {"ladder", tables}};
  std::ostringstream csv;
  csv << "index";
  for (int r = 0; r <= cfg.params.L; ++r) csv << ",n" << r;
  for (double e : ladder) csv << ",omega_eps_" << e;
  csv << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < space.size(); ++i) {
    csv << i;
    for (int r = 0; r <= cfg.params.L; ++r) csv << ',' << space.at(i).count(r);
    for (const auto& w : lim.omegas) csv << ',' << w[i];
    csv << '\n';
  }
  fs::create_directories(out);
  write_text(out / "chain.json", doc.dump(2) + "\n");
  write_text(out / "omega.csv", csv.str());
  std::cout << "stochastically stable: " << configs_json(lim.stochastically_stable).dump()
            << "; absorbing analytic/numeric agree: " << (absorbing.agree() ? "yes" : "no") << '\n';
  if (!absorbing.agree()) throw InvariantViolation("analytic and numeric absorbing sets disagree");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reputation-based social norms: best responses, protocol design, exact chains and simulation"};
  app.require_subcommand(1);

  std::string config_path, eta_text;
  bool fair_coin = false;
  auto* br = app.add_subcommand("bestresponse", "Solve one user's best response against an opponent census");
  br->add_option("--config", config_path, "JSON file with N, L, b, c, delta, epsilon, gamma, h")->required();
  br->add_option("--eta", eta_text, "Opponent census n(0),...,n(L) summing to N-1, e.g. 2,0,0,7")->required();
  br->add_flag("--fair-coin", fair_coin, "Report the alternative threshold at exact ties");

  std::string delta_grid, cb_grid, out_path;
  int L = 3;
  bool lenient = false;
  auto* design = app.add_subcommand("design", "Tabulate H and the largest feasible h over a (delta, c/b) grid");
  design->add_option("--delta-grid", delta_grid, "lo:hi:step or comma list")->required();
  design->add_option("--cb-grid", cb_grid, "lo:hi:step or comma list of c/b ratios")->required();
  design->add_option("--L", L, "Highest reputation")->check(CLI::PositiveNumber);
  design->add_option("--out", out_path, "CSV output path (stdout when omitted)");
  design->add_flag("--boundary-lenient", lenient, "Accept g(h) = 0 as feasible");

  std::string chain_config, ladder_text = "1e-2,1e-3,1e-4,1e-5", chain_out = "chain_out";
  int chain_N = 0;
  bool chain_coin = false;
  auto* chain = app.add_subcommand("chain", "Exact configuration chain: absorbing sets and limiting distribution");
  chain->add_option("--config", chain_config, "JSON norm configuration")->required();
  chain->add_option("--N", chain_N, "Override the population size");
  chain->add_option("--eps-ladder", ladder_text, "Strictly decreasing error rates")->capture_default_str();
  chain->add_option("--out", chain_out, "Output directory for chain.json and omega.csv")->capture_default_str();
  chain->add_flag("--fair-coin", chain_coin, "Mix tied best responses 50/50");

  std::string spec_path, sim_out = "sim_out";
  std::uint64_t seed = 1;
  bool seed_given = false;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment spec (JSON)");
  simulate->add_option("--spec", spec_path, "Experiment spec file")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Master seed (overrides the spec's seed)");
  simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "Run the cross-module oracle suites");
  verify->add_flag("--quick", quick, "Small grids and shorter runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*br) {
      std::cout << bestresponse_json(load_norm_config(config_path), parse_int_list(eta_text), fair_coin).dump(2) << '\n';
    } else if (*design) {
      const std::string csv = region_csv(delta_grid, cb_grid, L, lenient);
      if (out_path.empty()) std::cout << csv;
      else write_text(out_path, csv);
    } else if (*chain) {
      NormConfig cfg = load_norm_config(chain_config);
      if (chain_N > 0) cfg.params.N = chain_N;
      cfg.params.validate();
      run_chain(cfg, parse_grid(ladder_text), chain_coin, chain_out);
    } else if (*simulate) {
      seed_given = seed_opt->count() > 0;
      const ExperimentSpec spec = load_experiment_spec(spec_path);
      const std::uint64_t s = seed_given ? seed : spec.seed.value_or(seed);
      const fs::path out(sim_out);
      NormConfig cfg{spec.params, spec.h};
      if (spec.mode == "design") {
        write_text(out / "region.csv", region_csv(spec.delta_grid, spec.cb_grid, spec.params.L, spec.boundary_lenient));
      } else if (spec.mode == "chain") {
        run_chain(cfg, spec.eps_ladder, false, out);
      } else if (spec.mode == "bestresponse") {
        write_text(out / "bestresponse.json", bestresponse_json(cfg, spec.eta, false).dump(2) + "\n");
      } else {
        const ExperimentResult result = run_experiment(spec, s);
        write_experiment_outputs(out, result);
        for (const ExperimentRun& run : result.runs) {
          std::cout << run.label << ": tail n(L)/N=" << run.result.tail_mean_fraction.back()
                    << " U=" << run.result.tail_mean_welfare << '\n';
        }
      }
    } else if (*verify) {
      bool ok = true;
      for (const CheckResult& r : run_verify_suites(quick)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        for (const std::string& n : r.notes) std::cout << "    " << n << '\n';
        ok = ok && r.passed;
      }
      if (!ok) return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
