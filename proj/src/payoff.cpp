#include "normsim/payoff.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace normsim {

namespace {

int checked_sum(const std::vector<int>& counts, const char* what) {
  if (counts.size() < 2) throw std::invalid_argument(std::string(what) + " needs at least two reputation levels");
  int sum = 0;
  for (int n : counts) {
    if (n < 0) throw std::invalid_argument(std::string(what) + " has a negative count");
    sum += n;
  }
  return sum;
}

std::string join(const std::vector<int>& counts) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < counts.size(); ++i) os << (i ? "," : "") << counts[i];
  os << ')';
  return os.str();
}

}  // namespace

Configuration::Configuration(std::vector<int> counts)
    : counts_(std::move(counts)), total_(checked_sum(counts_, "configuration")) {}

Configuration Configuration::all_at(int N, int L, Reputation rep) {
  std::vector<int> counts(static_cast<std::size_t>(L + 1), 0);
  counts.at(static_cast<std::size_t>(rep)) = N;
  return Configuration(std::move(counts));
}

Configuration Configuration::bimodal(int N, int L, int k) {
  if (k < 0 || k > N) throw std::invalid_argument("bimodal configuration needs 0 <= k <= N");
  std::vector<int> counts(static_cast<std::size_t>(L + 1), 0);
  counts.front() = N - k;
  counts.back() = k;
  return Configuration(std::move(counts));
}

bool Configuration::has_interior_mass() const {
  for (std::size_t r = 1; r + 1 < counts_.size(); ++r) {
    if (counts_[r] > 0) return true;
  }
  return false;
}

std::string Configuration::str() const { return join(counts_); }

OpponentConfig::OpponentConfig(std::vector<int> counts)
    : counts_(std::move(counts)), total_(checked_sum(counts_, "opponent configuration")) {
  if (total_ < 1) throw std::invalid_argument("opponent configuration must contain at least one user");
}

void OpponentConfig::check_against(const SocialNorm& norm) const {
  if (L() != norm.L()) throw std::invalid_argument("opponent configuration has the wrong number of levels");
  if (total_ != norm.N() - 1) {
    throw std::invalid_argument("opponent configuration must sum to N-1=" + std::to_string(norm.N() - 1) +
                                ", got " + std::to_string(total_));
  }
}

std::string OpponentConfig::str() const { return join(counts_); }

OpponentConfig opponent_of(const Configuration& mu, Reputation own_rep) {
  if (own_rep < 0 || own_rep > mu.L()) throw std::out_of_range("own reputation out of range");
  if (mu.count(own_rep) < 1) {
    throw std::invalid_argument("configuration " + mu.str() + " has no user at reputation " +
                                std::to_string(own_rep));
  }
  std::vector<int> counts = mu.counts();
  --counts[static_cast<std::size_t>(own_rep)];
  return OpponentConfig(std::move(counts));
}

double believed_serve_probability(const SocialNorm& norm, Reputation server_rep, Reputation own_rep) {
  const double eps = norm.params().epsilon;
  const double comply = social_rule(norm, server_rep, own_rep);
  return server_rep > 0 ? (1.0 - eps) * comply : eps * comply;
}

double expected_benefit(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta) {
  eta.check_against(norm);
  double served = 0.0;
  for (Reputation r = 0; r <= norm.L(); ++r) {
    if (eta.count(r) > 0) served += eta.count(r) * believed_serve_probability(norm, r, own_rep);
  }
  return norm.params().b * served / eta.total();
}

double expected_benefit(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                        const BeliefMatrix& beliefs) {
  eta.check_against(norm);
  beliefs.check_stochastic();
  norm.check_reputation(own_rep);
  double served = 0.0;
  for (Reputation r = 0; r <= norm.L(); ++r) {
    if (eta.count(r) > 0) served += eta.count(r) * beliefs.serve_probability(r, own_rep);
  }
  return norm.params().b * served / eta.total();
}

double expected_cost(const SocialNorm& norm, const ThresholdStrategy& sigma, const OpponentConfig& eta) {
  eta.check_against(norm);
  int served = 0;
  for (Reputation r = 0; r <= norm.L(); ++r) {
    if (strategy_serves(sigma, r, norm.L())) served += eta.count(r);
  }
  return norm.params().c * served / eta.total();
}

double expected_cost(const SocialNorm& norm, const std::vector<bool>& served, const OpponentConfig& eta) {
  eta.check_against(norm);
  int n = 0;
  for (Reputation r = 0; r <= norm.L(); ++r) {
    if (served.at(static_cast<std::size_t>(r))) n += eta.count(r);
  }
  return norm.params().c * n / eta.total();
}

double expected_one_period_utility(const SocialNorm& norm, const ThresholdStrategy& sigma,
                                   Reputation own_rep, const OpponentConfig& eta) {
  return expected_benefit(norm, own_rep, eta) - expected_cost(norm, sigma, eta);
}

double expected_one_period_utility(const SocialNorm& norm, const ThresholdStrategy& sigma,
                                   Reputation own_rep, const OpponentConfig& eta,
                                   const BeliefMatrix& beliefs) {
  return expected_benefit(norm, own_rep, eta, beliefs) - expected_cost(norm, sigma, eta);
}

double prob_reset(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                  const std::vector<bool>& served) {
  eta.check_against(norm);
  norm.check_reputation(own_rep);
  const double eps = norm.params().epsilon;
  double mismatched = 0.0;
  double matched = 0.0;
  for (Reputation r = 0; r <= norm.L(); ++r) {
    if (eta.count(r) == 0) continue;
    const bool serves = served.at(static_cast<std::size_t>(r));
    if (static_cast<int>(serves) != social_rule(norm, own_rep, r)) mismatched += eta.count(r);
    else matched += eta.count(r);
  }
  return ((1.0 - eps) * mismatched + eps * matched) / eta.total();
}

double prob_reset(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                  const ThresholdStrategy& action) {
  std::vector<bool> served(static_cast<std::size_t>(norm.L() + 1));
  for (Reputation r = 0; r <= norm.L(); ++r) served[static_cast<std::size_t>(r)] = r >= action.threshold();
  return prob_reset(norm, own_rep, eta, served);
}

double prob_reset_under_belief(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta,
                               const ThresholdStrategy& action, const BeliefMatrix& beliefs) {
  beliefs.check_stochastic();
  return prob_reset(norm, own_rep, eta, action);
}

}  // namespace normsim
