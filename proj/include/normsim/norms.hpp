#pragma once

#include <stdexcept>
#include <string>

namespace normsim {

using Reputation = int;
using Contribution = int;  // 0 = refuse, 1 = serve

// Bad user input (config file, CLI flags, spec fields). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checked property of the model failed. Maps to exit code 1.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommunityParams {
  int N = 2;             // population size
  int L = 1;             // highest reputation
  double b = 2.0;        // service benefit
  double c = 1.0;        // service cost
  double delta = 0.5;    // discount factor
  double epsilon = 0.0;  // report-flip probability
  double gamma = 1.0;    // adaptation rate

  // Throws ConfigError on the first violated constraint.
  void validate() const;
};

// Threshold service strategy: serve exactly the clients with reputation >= threshold.
// threshold 0 serves everyone, threshold L+1 serves no one.
class ThresholdStrategy {
 public:
  constexpr explicit ThresholdStrategy(int threshold) : threshold_(threshold) {}
  static constexpr ThresholdStrategy cooperate() { return ThresholdStrategy(0); }
  static constexpr ThresholdStrategy defect(int L) { return ThresholdStrategy(L + 1); }

  constexpr int threshold() const { return threshold_; }
  friend constexpr bool operator==(ThresholdStrategy, ThresholdStrategy) = default;

 private:
  int threshold_;
};

// The protocol: social rule with threshold h plus the reset-to-zero reputation scheme.
class SocialNorm {
 public:
  SocialNorm(CommunityParams params, int h);

  const CommunityParams& params() const { return params_; }
  int h() const { return h_; }
  int L() const { return params_.L; }
  int N() const { return params_.N; }

  // Threshold prescribed to a server of the given reputation: 0 below h, h otherwise.
  int prescribed_threshold(Reputation server_rep) const;
  bool is_good(Reputation rep) const { return rep >= h_; }

  // Same norm with a different discount factor / benefit (per-user heterogeneity).
  SocialNorm with_delta(double delta) const;
  SocialNorm with_benefit(double b) const;
  SocialNorm with_epsilon(double epsilon) const;

  void check_reputation(Reputation rep) const;

 private:
  CommunityParams params_;
  int h_;
};

Contribution strategy_serves(const ThresholdStrategy& s, Reputation client_rep, int L);

// phi(server, client)
Contribution social_rule(const SocialNorm& norm, Reputation server_rep, Reputation client_rep);

// tau(server, client, reported z)
Reputation reputation_update(const SocialNorm& norm, Reputation server_rep, Reputation client_rep,
                             Contribution reported_z);

}  // namespace normsim
