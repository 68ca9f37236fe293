#include "normsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "normsim/belief.hpp"
#include "normsim/bestresponse.hpp"
#include "normsim/chain.hpp"
#include "normsim/design.hpp"
#include "normsim/sim.hpp"

namespace normsim {

namespace {

constexpr std::size_t kMaxNotes = 12;

void note(CheckResult& r, const std::string& text) {
  r.passed = false;
  if (r.notes.size() < kMaxNotes) r.notes.push_back(text);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

CommunityParams make_params(int N, int L, double b_over_c, double delta, double epsilon = 0.0) {
  CommunityParams p;
  p.N = N;
  p.L = L;
  p.c = 1.0;
  p.b = b_over_c;
  p.delta = delta;
  p.epsilon = epsilon;
  return p;
}

std::string cell_name(const CommunityParams& p, int h) {
  std::ostringstream os;
  os << "N=" << p.N << " delta=" << p.delta << " b/c=" << p.b / p.c << " h=" << h;
  return os.str();
}

std::string join_configs(const ConfigSpace& space, const std::vector<std::size_t>& idx) {
  std::string out = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) out += (i ? " " : "") + space.at(idx[i]).str();
  return out + "}";
}

}  // namespace

CheckResult verify_closed_form(const ClosedFormGrid& grid) {
  CheckResult r{"closed-form oracle", true, "", {}};
  std::size_t cases = 0, boundary = 0;
  double worst = 0.0;
  for (int N : grid.N) {
    for (int h : grid.h) {
      for (double delta : grid.delta) {
        for (double bc : grid.b_over_c) {
          const SocialNorm norm(make_params(N, grid.L, bc, delta), h);
          for (int k = 0; k <= N; ++k) {
            const Configuration mu = Configuration::bimodal(N, grid.L, k);
            for (Reputation own : {0, grid.L}) {
              if (mu.count(own) == 0) continue;
              ++cases;
              const BestResponseSolution vi = solve_value_iteration(norm, opponent_of(mu, own));
              const ClosedFormSolution cf = closed_form_bimodal(norm, N - k, k, own);
              for (std::size_t s = 0; s < vi.values.size(); ++s) {
                const double gap = std::abs(vi.values[s] - cf.values[s]);
                worst = std::max(worst, gap);
                if (gap > grid.value_tol) {
                  note(r, cell_name(norm.params(), h) + " n(L)=" + std::to_string(k) + " own=" + std::to_string(own) +
                              ": V[" + std::to_string(s) + "] differs by " + fmt(gap));
                }
              }
              if (cf.on_boundary) {
                ++boundary;
              } else if (vi.policy != cf.policy) {
                note(r, cell_name(norm.params(), h) + " n(L)=" + std::to_string(k) + " own=" + std::to_string(own) +
                            ": policies differ off the indifference boundary");
              }
            }
          }
        }
      }
    }
  }
  r.detail = std::to_string(cases) + " cases, " + std::to_string(boundary) + " on an indifference boundary, max |dV| " +
             fmt(worst);
  return r;
}

CheckResult verify_policy_structure(int draws, std::uint64_t seed, int L) {
  CheckResult r{"policy structure", true, "", {}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_N(3, 40), pick_h(1, L);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int threshold_fail = 0, rule_fail = 0, group_fail = 0, value_fail = 0;
  for (int d = 0; d < draws; ++d) {
    CommunityParams p;
    p.N = pick_N(rng);
    p.L = L;
    p.c = 1.0;
    p.b = 1.1 + 5.0 * unit(rng);
    p.delta = 0.02 + 0.96 * unit(rng);
    p.epsilon = unit(rng) < 0.2 ? 0.0 : 0.3 * unit(rng);
    const SocialNorm norm(p, pick_h(rng));
    // Skewed censuses: random level weights, then a multinomial draw of the N-1 opponents.
    std::vector<double> weight(static_cast<std::size_t>(L + 1));
    for (double& w : weight) w = std::pow(unit(rng), 3.0);
    std::discrete_distribution<int> level(weight.begin(), weight.end());
    std::vector<int> counts(static_cast<std::size_t>(L + 1), 0);
    for (int i = 0; i < p.N - 1; ++i) ++counts[static_cast<std::size_t>(level(rng))];
    const OpponentConfig eta(counts);

    const ThresholdCheck tc = verify_threshold_structure(norm, eta);
    const BestResponseSolution sol = solve_value_iteration(norm, eta);
    const StructureReport sr = check_structure(norm, sol);
    const std::string where = cell_name(p, norm.h()) + " eps=" + fmt(p.epsilon) + " eta=" + eta.str();
    if (!tc.ok()) {
      ++threshold_fail;
      note(r, where + ": unrestricted solve is not a threshold policy (gap " + fmt(tc.max_value_gap) + ")");
    }
    if (!sr.above_rule) ++rule_fail;
    if (!sr.monotone_groups) ++group_fail;
    if (!sr.monotone_values) ++value_fail;
    if (!sr.ok()) note(r, where + ": " + sr.detail);
  }
  r.detail = std::to_string(draws) + " draws; counterexamples: threshold " + std::to_string(threshold_fail) +
             ", above-rule " + std::to_string(rule_fail) + ", group-monotone " + std::to_string(group_fail) +
             ", value-monotone " + std::to_string(value_fail);
  return r;
}

std::vector<ChainCell> interior_mass_cells(int N) {
  return {
      {make_params(N, 3, 3.0, 0.6), 1},  // feasible
      {make_params(N, 3, 5.0, 0.8), 2},  // feasible
      {make_params(N, 3, 3.0, 0.3), 1},  // delta < c/b
      {make_params(N, 3, 2.0, 0.6), 3},  // g(h) < 0
  };
}

CheckResult verify_interior_mass(const std::vector<ChainCell>& cells, const std::vector<double>& ladder,
                                 double bottom_limit) {
  CheckResult r{"interior mass vanishes", true, "", {}};
  std::ostringstream detail;
  for (const ChainCell& cell : cells) {
    const SocialNorm norm(cell.params, cell.h);
    const ConfigSpace space(cell.params.N, cell.params.L);
    const LimitingResult lim = limiting_distribution(norm, space, ladder);
    std::vector<double> mass;
    for (const auto& omega : lim.omegas) {
      double m = 0.0;
      for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.at(i).has_interior_mass()) m += omega[i];
      }
      mass.push_back(m);
    }
    detail << cell_name(cell.params, cell.h) << ": [";
    for (std::size_t i = 0; i < mass.size(); ++i) detail << (i ? ", " : "") << mass[i];
    detail << "]; ";
    for (std::size_t i = 1; i < mass.size(); ++i) {
      if (!(mass[i] < mass[i - 1])) note(r, cell_name(cell.params, cell.h) + ": interior mass does not fall at eps=" + fmt(ladder[i]));
    }
    if (!(mass.back() < bottom_limit)) note(r, cell_name(cell.params, cell.h) + ": bottom-rung interior mass " + fmt(mass.back()));
    for (std::size_t i : lim.stochastically_stable) {
      if (space.at(i).has_interior_mass()) note(r, cell_name(cell.params, cell.h) + ": stable census " + space.at(i).str() + " has interior mass");
    }
    for (const std::string& w : lim.warnings) r.notes.push_back("warning: " + w);
  }
  r.detail = detail.str();
  return r;
}

CheckResult verify_design_against_chain(const DesignCheckGrid& grid) {
  CheckResult r{"design verdict vs exact chain", true, "", {}};
  int agree = 0, total = 0, skipped = 0;
  for (int N : grid.N) {
    const ConfigSpace space(N, grid.L);
    const std::size_t top = space.index_all_top();
    for (double delta : grid.delta) {
      for (double bc : grid.b_over_c) {
        for (int h : grid.h) {
          const CommunityParams p = make_params(N, grid.L, bc, delta);
          if (std::abs(design_gap(p, h)) < grid.boundary_gap) {
            ++skipped;
            continue;
          }
          ++total;
          const bool verdict = feasibility_test(p, h);
          const LimitingResult lim = limiting_distribution(SocialNorm(p, h), space, grid.ladder);
          const bool numeric = lim.stochastically_stable == std::vector<std::size_t>{top};
          if (verdict == numeric) {
            ++agree;
          } else {
            note(r, cell_name(p, h) + ": analytic " + (verdict ? "mu_N unique" : "not unique") + ", chain stable set " +
                        join_configs(space, lim.stochastically_stable));
          }
        }
      }
    }
  }
  r.detail = std::to_string(agree) + "/" + std::to_string(total) + " cells agree (" + std::to_string(skipped) +
             " boundary cells skipped)";
  return r;
}

CheckResult verify_absorbing(const DesignCheckGrid& grid) {
  CheckResult r{"absorbing censuses: analytic vs chain", true, "", {}};
  int agree = 0, total = 0;
  for (int N : grid.N) {
    const ConfigSpace space(N, grid.L);
    for (double delta : grid.delta) {
      for (double bc : grid.b_over_c) {
        for (int h : grid.h) {
          const CommunityParams p = make_params(N, grid.L, bc, delta);
          const AbsorbingReport rep = classify_absorbing(SocialNorm(p, h), space);
          ++total;
          if (rep.agree()) {
            ++agree;
          } else {
            note(r, cell_name(p, h) + ": analytic " + join_configs(space, rep.analytic) + " vs chain " +
                        join_configs(space, rep.numeric));
          }
          for (const auto& cls : rep.closed_classes) {
            if (cls.size() > 1 && r.notes.size() < kMaxNotes) {
              r.notes.push_back("info: " + cell_name(p, h) + " has a closed class of size " + std::to_string(cls.size()));
            }
          }
        }
      }
    }
  }
  r.detail = std::to_string(agree) + "/" + std::to_string(total) + " cells agree";
  return r;
}

CheckResult verify_design_region(int n, int L) {
  CheckResult r{"feasible region shape", true, "", {}};
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = (i + 0.5) / n;
  const std::vector<RegionCell> cells = feasible_region_grid(grid, grid, L);
  const auto at = [&](int i, int j) -> const RegionCell& { return cells[static_cast<std::size_t>(i * n + j)]; };
  const auto h_of = [](const RegionCell& c) { return c.H ? *c.H : 0.0; };
  int feasible = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const RegionCell& c = at(i, j);
      if (c.max_feasible_h) ++feasible;
      if (c.delta <= c.c_over_b && (c.H || c.max_feasible_h)) {
        note(r, "cell delta=" + fmt(c.delta) + " c/b=" + fmt(c.c_over_b) + " is feasible although delta <= c/b");
      }
      if (i + 1 < n && h_of(at(i + 1, j)) < h_of(c) - 1e-9) {
        note(r, "H decreases in delta at c/b=" + fmt(c.c_over_b) + " delta=" + fmt(c.delta));
      }
      if (j + 1 < n && h_of(at(i, j + 1)) > h_of(c) + 1e-9) {
        note(r, "H increases in c/b at delta=" + fmt(c.delta) + " c/b=" + fmt(c.c_over_b));
      }
    }
  }
  r.detail = std::to_string(n) + "x" + std::to_string(n) + " grid, " + std::to_string(feasible) + " cells admit some h";
  return r;
}

CheckResult verify_bridge(const BridgeOptions& o) {
  CheckResult r{o.chain_only ? "chain trajectory occupancy" : "simulation vs exact chain", true, "", {}};
  const SocialNorm norm(o.params, o.h);
  const ConfigSpace space(o.params.N, o.params.L);
  const TransitionMatrix P = build_transition_matrix(norm, space);
  const std::vector<double> omega = stationary_distribution(P).weights;

  std::vector<std::uint64_t> counts(space.size(), 0);
  if (o.chain_only) {
    std::mt19937_64 rng(o.seed);
    counts = simulate_chain(P, space.index_all_top(), o.periods, rng);
  } else {
    CommunitySpec spec;
    spec.params = o.params;
    spec.h = o.h;
    spec.initial = InitialMode::AllTop;
    RunOptions run;
    run.periods = o.periods + o.burn_in;
    run.burn_in = o.burn_in;
    run.sample_stride = run.periods;
    run.record_occupancy = true;
    const RunResult res = run_community(spec, run, o.seed);
    for (const auto& [c, n] : res.occupancy) counts[space.index_of(Configuration(c))] += n;
  }
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) tv += std::abs(static_cast<double>(counts[i]) / total - omega[i]);
  tv *= 0.5;

  const OccupancyTest test = occupancy_chi_square(P, omega, counts);
  r.passed = test.passed;
  std::ostringstream os;
  os << "chi2=" << test.statistic << " on " << test.dof << " dof (99% critical " << test.critical
     << "), total variation " << tv << ", omega(mu_N)=" << omega[space.index_all_top()];
  r.detail = os.str();
  if (!test.passed) r.notes.push_back("occupancy departs from the exact stationary distribution");
  return r;
}

CheckResult verify_belief_fuzz(int sequences, int steps, std::uint64_t seed, int L) {
  CheckResult r{"belief rows stay stochastic", true, "", {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rep(0, L), bit(0, 1);
  double worst = 0.0;
  for (int s = 0; s < sequences; ++s) {
    std::vector<double> rows(static_cast<std::size_t>((L + 1) * (L + 2)));
    for (int i = 0; i <= L; ++i) {
      double sum = 0.0;
      for (int l = 0; l <= L + 1; ++l) sum += rows[static_cast<std::size_t>(i * (L + 2) + l)] = unit(rng);
      for (int l = 0; l <= L + 1; ++l) rows[static_cast<std::size_t>(i * (L + 2) + l)] /= sum;
    }
    BeliefMatrix O(L, rows);
    for (int t = 0; t < steps; ++t) {
      const Reputation server = rep(rng);
      const std::uint64_t count = ++O.observations(server);
      O = belief_update(std::move(O), server, rep(rng), bit(rng), count);
      worst = std::max(worst, O.max_row_error());
      bool negative = false;
      for (double x : O.data()) negative = negative || x < 0.0;
      if (negative) note(r, "negative belief entry in sequence " + std::to_string(s));
    }
  }
  if (!(worst <= 1e-9)) note(r, "row sum drifted by " + fmt(worst));
  r.detail = std::to_string(sequences) + " sequences x " + std::to_string(steps) + " updates, max row error " + fmt(worst);
  return r;
}

std::vector<CheckResult> run_verify_suites(bool quick) {
  std::vector<CheckResult> out;
  if (quick) {
    ClosedFormGrid cf;
    cf.N = {5, 11};
    cf.delta = {0.5, 0.8};
    cf.b_over_c = {2.0, 3.0};
    out.push_back(verify_closed_form(cf));
    out.push_back(verify_policy_structure(100, 1));
    out.push_back(verify_interior_mass(interior_mass_cells(4), {1e-2, 1e-3, 1e-4}));
    DesignCheckGrid tg;
    tg.N = {4, 6};
    tg.delta = {0.4, 0.6, 0.8};
    tg.b_over_c = {2.0, 5.0};
    tg.h = {1, 2};
    out.push_back(verify_absorbing(tg));
    out.push_back(verify_design_against_chain(tg));
    out.push_back(verify_design_region(20));
    BridgeOptions bridge;
    bridge.periods = 200'000;
    out.push_back(verify_bridge(bridge));
    out.push_back(verify_belief_fuzz(200, 100));
  } else {
    out.push_back(verify_closed_form());
    out.push_back(verify_policy_structure(500, 1));
    out.push_back(verify_interior_mass(interior_mass_cells(6), {1e-2, 1e-3, 1e-4, 1e-5}));
    out.push_back(verify_absorbing());
    out.push_back(verify_design_against_chain());
    out.push_back(verify_design_region(20));
    out.push_back(verify_bridge());
    out.push_back(verify_belief_fuzz());
  }
  return out;
}

}  // namespace normsim
