#pragma once

#include <compare>
#include <string>
#include <vector>

#include "normsim/belief.hpp"
#include "normsim/norms.hpp"

namespace normsim {

// Community census n(0..L); the state of the configuration chain.
class Configuration {
 public:
  explicit Configuration(std::vector<int> counts);

  // All N users at a single reputation.
  static Configuration all_at(int N, int L, Reputation rep);
  // n(0) = N - k, n(L) = k.
  static Configuration bimodal(int N, int L, int k);

  int L() const { return static_cast<int>(counts_.size()) - 1; }
  int total() const { return total_; }
  int count(Reputation rep) const { return counts_.at(static_cast<std::size_t>(rep)); }
  const std::vector<int>& counts() const { return counts_; }

  // Some user sits strictly between 0 and L.
  bool has_interior_mass() const;

  std::string str() const;
  auto operator<=>(const Configuration&) const = default;

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

// Census seen by one user with the user itself removed; sums to N-1.
class OpponentConfig {
 public:
  explicit OpponentConfig(std::vector<int> counts);

  int L() const { return static_cast<int>(counts_.size()) - 1; }
  int total() const { return total_; }
  int count(Reputation rep) const { return counts_.at(static_cast<std::size_t>(rep)); }
  double fraction(Reputation rep) const { return static_cast<double>(count(rep)) / total_; }
  const std::vector<int>& counts() const { return counts_; }

  // Throws std::invalid_argument unless the opponents fit the norm (N-1 users over 0..L).
  void check_against(const SocialNorm& norm) const;

  std::string str() const;
  auto operator<=>(const OpponentConfig&) const = default;

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

OpponentConfig opponent_of(const Configuration& mu, Reputation own_rep);

// Probability that a matched server of reputation server_rep serves a client of
// reputation own_rep under the fixed belief: servers above reputation 0 comply with
// the rule w.p. 1-eps (else defect); reputation-0 servers defect w.p. 1-eps (else comply).
double believed_serve_probability(const SocialNorm& norm, Reputation server_rep, Reputation own_rep);

double expected_benefit(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta);
double expected_benefit(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                        const BeliefMatrix& beliefs);

// Expected cost c * P[client is served] for the user's own strategy.
double expected_cost(const SocialNorm& norm, const ThresholdStrategy& sigma, const OpponentConfig& eta);

double expected_one_period_utility(const SocialNorm& norm, const ThresholdStrategy& sigma,
                                   Reputation own_rep, const OpponentConfig& eta);
double expected_one_period_utility(const SocialNorm& norm, const ThresholdStrategy& sigma,
                                   Reputation own_rep, const OpponentConfig& eta,
                                   const BeliefMatrix& beliefs);

// Probability of being reset to 0 this period; otherwise the user moves to min(L, own_rep+1).
double prob_reset(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                  const ThresholdStrategy& action);

// Same quantity for a user holding adaptive beliefs. Beliefs do not enter the reputation
// update, only validation: rows must be stochastic.
double prob_reset_under_belief(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                               const ThresholdStrategy& action, const BeliefMatrix& beliefs);

// Served-set variants: served[r] says whether clients of reputation r get service.
double expected_cost(const SocialNorm& norm, const std::vector<bool>& served, const OpponentConfig& eta);
double prob_reset(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                  const std::vector<bool>& served);

}  // namespace normsim
