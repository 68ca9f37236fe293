#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "normsim/bestresponse.hpp"
#include "normsim/norms.hpp"
#include "normsim/payoff.hpp"

namespace normsim {

// Every census of N users over reputations 0..L, in lexicographic order of counts.
class ConfigSpace {
 public:
  static constexpr std::size_t kDefaultCap = 100'000;

  ConfigSpace(int N, int L, std::size_t cap = kDefaultCap);

  int N() const { return N_; }
  int L() const { return L_; }
  std::size_t size() const { return configs_.size(); }
  const Configuration& at(std::size_t i) const { return configs_.at(i); }
  const std::vector<Configuration>& configs() const { return configs_; }
  std::size_t index_of(const Configuration& mu) const;

  std::size_t index_all_zero() const;
  std::size_t index_all_top() const;

 private:
  int N_;
  int L_;
  std::vector<Configuration> configs_;
  std::map<std::vector<int>, std::size_t> index_;
};

// binomial(N+L, L), saturating at SIZE_MAX.
std::size_t config_space_size(int N, int L);

ConfigSpace enumerate_configs(int N, int L, std::size_t cap = ConfigSpace::kDefaultCap);

struct StrategyProfile {
  std::vector<int> thresholds;                      // per reputation
  std::vector<std::optional<int>> alternatives;     // coin-flip partner on exact ties
};

// Best-response threshold of a user at each occupied reputation; empty levels get the
// rule's own threshold.
StrategyProfile strategy_configuration(const SocialNorm& norm, const Configuration& mu,
                                       TieBreak tie_break = TieBreak::FewerServices);

// Sparse row-stochastic matrix over a ConfigSpace.
struct TransitionMatrix {
  double epsilon = 0.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  std::size_t size() const { return rows.size(); }
  double at(std::size_t from, std::size_t to) const;
  double max_row_error() const;
  Eigen::MatrixXd dense() const;
  std::vector<double> left_multiply(const std::vector<double>& v) const;
};

// Row of the chain for one census: users reset independently with their best-response
// probability and otherwise climb one level, capped at L.
std::vector<std::pair<std::size_t, double>> transition_row(const SocialNorm& norm, const ConfigSpace& space,
                                                           const Configuration& mu, const StrategyProfile& profile);

TransitionMatrix build_transition_matrix(const SocialNorm& norm, const ConfigSpace& space,
                                         TieBreak tie_break = TieBreak::FewerServices);

enum class StationaryMethod { Auto, Power, Dense, GTH };

struct StationaryDist {
  std::vector<double> weights;
  std::size_t iterations = 0;  // power iteration only
  double residual = 0.0;       // sup-norm of wP - w
};

StationaryDist stationary_distribution(const TransitionMatrix& P, StationaryMethod method = StationaryMethod::Auto,
                                       double tolerance = 1e-12, std::size_t max_iterations = 5'000'000);

StationaryDist power_iteration(const TransitionMatrix& P, std::vector<double> start, double tolerance = 1e-12,
                               std::size_t max_iterations = 5'000'000);

// Power iteration from several random starts; returns the worst sup-norm distance to omega.
double stability_check(const TransitionMatrix& P, const std::vector<double>& omega, std::mt19937_64& rng,
                       int starts = 3, double tolerance = 1e-12);

// Simulates a trajectory of the chain itself and returns the visit counts per state.
std::vector<std::uint64_t> simulate_chain(const TransitionMatrix& P, std::size_t start, std::uint64_t steps,
                                          std::mt19937_64& rng);

// Chi-square test of observed occupation counts against omega that accounts for the
// serial correlation of a Markov trajectory (covariance from the fundamental matrix).
struct OccupancyTest {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;  // 99% quantile
  bool passed = false;
  std::size_t bins = 0;
};
OccupancyTest occupancy_chi_square(const TransitionMatrix& P, const std::vector<double>& omega,
                                   const std::vector<std::uint64_t>& counts, double min_expected = 20.0,
                                   double level = 0.99);

struct LimitingResult {
  std::vector<double> ladder;
  std::vector<std::vector<double>> omegas;        // one stationary vector per rung
  std::vector<std::size_t> stochastically_stable; // configuration indices
  std::vector<std::string> warnings;
  const std::vector<double>& bottom() const { return omegas.back(); }
};

// Stationary vector at each error rate of a strictly decreasing positive ladder. A
// configuration counts as stochastically stable when its weight exceeds
// max(100 eps, 1e-3) on each of the last two rungs.
LimitingResult limiting_distribution(const SocialNorm& norm, const ConfigSpace& space,
                                     const std::vector<double>& eps_ladder,
                                     TieBreak tie_break = TieBreak::FewerServices);

double interior_mass(const ConfigSpace& space, const std::vector<double>& omega);

struct AbsorbingReport {
  std::vector<std::size_t> analytic;                 // from the closed-form bounds
  std::vector<std::size_t> numeric;                  // self-loop 1 in the error-free chain
  std::vector<std::vector<std::size_t>> closed_classes;  // irreducible absorbing classes
  bool agree() const { return analytic == numeric; }
};

AbsorbingReport classify_absorbing(const SocialNorm& norm, const ConfigSpace& space);

// Strongly connected components with no outgoing edge (threshold on edge weight).
std::vector<std::vector<std::size_t>> closed_classes(const TransitionMatrix& P, double edge_tol = 0.0);

}  // namespace normsim
