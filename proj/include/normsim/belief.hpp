#pragma once

#include <cstdint>
#include <vector>

#include "normsim/norms.hpp"

namespace normsim {

// Row-stochastic (L+1) x (L+2) matrix: row = opponent reputation, column = the
// service threshold the user believes that opponent plays. Each row carries its
// own observation counter for the running average.
class BeliefMatrix {
 public:
  BeliefMatrix(int L, std::vector<double> rows);

  // Everyone complies with the social rule: threshold 0 below h, h at or above h.
  static BeliefMatrix compliant(const SocialNorm& norm);
  static BeliefMatrix uniform(int L);

  int L() const { return L_; }
  int cols() const { return L_ + 2; }
  double at(Reputation rep, int threshold) const { return rows_[index(rep, threshold)]; }
  double& at(Reputation rep, int threshold) { return rows_[index(rep, threshold)]; }
  const std::vector<double>& data() const { return rows_; }

  std::uint64_t observations(Reputation rep) const { return counts_.at(rep); }
  std::uint64_t& observations(Reputation rep) { return counts_.at(rep); }

  // Believed probability that a server of reputation server_rep serves a client of client_rep.
  double serve_probability(Reputation server_rep, Reputation client_rep) const;

  // Largest |row sum - 1| over all rows.
  double max_row_error() const;
  // Throws std::invalid_argument when a row is negative or off the simplex by more than tol.
  void check_stochastic(double tol = 1e-9) const;

  std::uint64_t hash() const;

 private:
  std::size_t index(Reputation rep, int threshold) const;

  int L_;
  std::vector<double> rows_;
  std::vector<std::uint64_t> counts_;
};

// Running-average update after the t-th observation of a server of reputation server_rep.
// A served client (z=1) spreads weight over thresholds 0..own_rep, a refused client
// spreads it over own_rep+1..L+1.
BeliefMatrix belief_update(BeliefMatrix O, Reputation server_rep, Reputation own_rep,
                           Contribution observed_z, std::uint64_t t);

}  // namespace normsim
