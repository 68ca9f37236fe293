#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "normsim/belief.hpp"
#include "normsim/norms.hpp"
#include "normsim/payoff.hpp"

namespace normsim {

// How exact ties between actions with different realizations are resolved.
//   FewerServices: pick the action that serves fewer opponents (deterministic).
//   FairCoin: same primary pick, but the runner-up is recorded so callers can mix 50/50.
enum class TieBreak { FewerServices, FairCoin };

struct SolveOptions {
  double tolerance = 1e-10;  // sup-norm optimality gap of the returned values
  std::size_t max_iterations = 1'000'000;
  TieBreak tie_break = TieBreak::FewerServices;
  const BeliefMatrix* beliefs = nullptr;  // adaptive-belief benefit model when set
  bool record_residuals = false;
};

struct BestResponseSolution {
  std::vector<int> policy;     // service threshold per own reputation, canonicalized
  std::vector<double> values;  // long-term utility per own reputation
  // For FairCoin: alternative threshold at reputations where two realizations tie.
  std::vector<std::optional<int>> tied_alternative;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

// Actions a and a' are interchangeable against eta when no occupied reputation lies in
// [min(a,a'), max(a,a')). Returns the inclusive threshold interval containing a.
struct ThresholdClass {
  int lo;
  int hi;
};
ThresholdClass threshold_class(const OpponentConfig& eta, int threshold);

// Representative reported for a class: L+1 if it serves nobody, else the rule's own
// threshold for own_rep, else h, else the largest member.
int canonical_threshold(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta, int threshold);

// Value iteration on the reputation chain of one user against a fixed opponent census.
BestResponseSolution solve_value_iteration(const SocialNorm& norm, const OpponentConfig& eta,
                                           const SolveOptions& options = {});

// Unrestricted action space: every subset of the occupied reputations may be served.
struct SubsetSolution {
  std::vector<std::uint32_t> policy;  // bitmask over reputations 0..L
  std::vector<double> values;
  std::size_t iterations = 0;
};
SubsetSolution solve_subset_actions(const SocialNorm& norm, const OpponentConfig& eta,
                                    const SolveOptions& options = {});

struct ThresholdCheck {
  bool is_threshold = true;  // every chosen subset is upward-closed on the occupied levels
  bool values_agree = true;  // subset and threshold optima coincide within tolerance
  double max_value_gap = 0.0;
  std::optional<Reputation> counterexample_rep;
  std::uint32_t counterexample_mask = 0;
  bool ok() const { return is_threshold && values_agree; }
};
ThresholdCheck verify_threshold_structure(const SocialNorm& norm, const OpponentConfig& eta,
                                          double tolerance = 1e-8);

// Structural properties of a solved policy against a census.
struct StructureReport {
  bool above_rule = true;        // policy[r] >= rule threshold for r
  bool monotone_groups = true;   // nonincreasing within bad and within good reputations
  bool monotone_values = true;   // values nondecreasing in reputation
  std::string detail;
  bool ok() const { return above_rule && monotone_groups && monotone_values; }
};
StructureReport check_structure(const SocialNorm& norm, const BestResponseSolution& sol,
                                double value_tol = 1e-9);

// Piecewise solution for a census with users only at 0 and L, errors taken to zero.
struct ClosedFormSolution {
  int k = -1;            // reputations 0..k defect
  int good_action = 0;   // h or L+1
  std::vector<int> policy;
  std::vector<double> values;
  bool on_boundary = false;  // some reputation is indifferent between two realizations
};
ClosedFormSolution closed_form_bimodal(const SocialNorm& norm, int n0, int nL, Reputation own_rep);

}  // namespace normsim
