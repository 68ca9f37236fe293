#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "normsim/norms.hpp"

namespace normsim {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;               // one-line summary
  std::vector<std::string> notes;   // failures or per-part findings

  void fail(std::string note) {
    passed = false;
    notes.push_back(std::move(note));
  }
};

struct ClosedFormGrid {
  std::vector<int> N{5, 11, 51};
  std::vector<int> h{1, 2, 3};
  std::vector<double> delta{0.3, 0.5, 0.6, 0.8};
  std::vector<double> b_over_c{2.0, 3.0, 5.0};
  int L = 3;
  double value_tol = 1e-7;
};
// Value iteration against the hand-derived piecewise solution on every census with users
// only at 0 and L, errors off.
CheckResult verify_closed_form(const ClosedFormGrid& grid = {});

// Random opponent censuses and parameters: unrestricted subset solve yields thresholds,
// thresholds sit at or above the rule, are monotone within each group, values monotone.
CheckResult verify_policy_structure(int draws = 500, std::uint64_t seed = 1, int L = 3);

struct ChainCell {
  CommunityParams params;
  int h = 1;
};

// Two feasible and two infeasible parameter cells at population N, L=3.
std::vector<ChainCell> interior_mass_cells(int N = 6);

// Mass on censuses with interior occupancy decreases along the ladder and is small at the bottom.
CheckResult verify_interior_mass(const std::vector<ChainCell>& cells, const std::vector<double>& ladder,
                                 double bottom_limit = 1e-2);

struct DesignCheckGrid {
  std::vector<double> delta{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> b_over_c{2.0, 3.0, 5.0};
  std::vector<int> h{1, 2, 3};
  std::vector<int> N{4, 6, 8};
  int L = 3;
  std::vector<double> ladder{1e-2, 1e-3, 1e-4, 1e-5};
  double boundary_gap = 1e-6;
};
// Analytic design verdict against the exact chain's stochastically stable set.
CheckResult verify_design_against_chain(const DesignCheckGrid& grid = {});
// Closed-form absorbing censuses against the error-free chain.
CheckResult verify_absorbing(const DesignCheckGrid& grid = {});

// Shape of the feasible region on an n x n grid of (delta, c/b).
CheckResult verify_design_region(int n = 20, int L = 3);

struct BridgeOptions {
  CommunityParams params{6, 3, 3.0, 1.0, 0.6, 0.01, 1.0};
  int h = 1;
  std::uint64_t periods = 1'000'000;
  std::uint64_t burn_in = 1'000;
  std::uint64_t seed = 7;
  bool chain_only = false;  // simulate the exact chain instead of the agent model
};
// Occupancy of a long run against the exact stationary distribution.
CheckResult verify_bridge(const BridgeOptions& options = {});

// Fuzzed belief-update sequences keep every row on the simplex.
CheckResult verify_belief_fuzz(int sequences = 1000, int steps = 200, std::uint64_t seed = 3, int L = 3);

std::vector<CheckResult> run_verify_suites(bool quick);

}  // namespace normsim
