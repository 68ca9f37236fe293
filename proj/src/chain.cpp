#include "normsim/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "normsim/design.hpp"
#include "normsim/parallel.hpp"

namespace normsim {

namespace {

void enumerate_into(int remaining, int level, std::vector<int>& counts, std::vector<Configuration>& out) {
  const int L = static_cast<int>(counts.size()) - 1;
  if (level == L) {
    counts[static_cast<std::size_t>(L)] = remaining;
    out.emplace_back(counts);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    counts[static_cast<std::size_t>(level)] = k;
    enumerate_into(remaining - k, level + 1, counts, out);
  }
}

double binomial_pmf(int n, int k, double q) {
  double coeff = 1.0;
  for (int i = 1; i <= k; ++i) coeff = coeff * (n - k + i) / i;
  return coeff * std::pow(q, k) * std::pow(1.0 - q, n - k);
}

}  // namespace

std::size_t config_space_size(int N, int L) {
  // binomial(N+L, L) computed incrementally; each partial product is itself a binomial.
  long double value = 1.0L;
  for (int i = 1; i <= L; ++i) {
    value = value * (N + i) / i;
    if (value > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max();
    }
  }
  return static_cast<std::size_t>(std::llround(value));
}

ConfigSpace::ConfigSpace(int N, int L, std::size_t cap) : N_(N), L_(L) {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (L < 1) throw ConfigError("L must be >= 1");
  const std::size_t n = config_space_size(N, L);
  if (n > cap) {
    throw ConfigError("configuration space has " + std::to_string(n) + " states, above the cap of " +
                      std::to_string(cap) + "; use the agent simulator instead");
  }
  configs_.reserve(n);
  std::vector<int> counts(static_cast<std::size_t>(L + 1), 0);
  enumerate_into(N, 0, counts, configs_);
  for (std::size_t i = 0; i < configs_.size(); ++i) index_.emplace(configs_[i].counts(), i);
}

std::size_t ConfigSpace::index_of(const Configuration& mu) const {
  const auto it = index_.find(mu.counts());
  if (it == index_.end()) throw std::out_of_range("configuration " + mu.str() + " is not in the space");
  return it->second;
}

std::size_t ConfigSpace::index_all_zero() const { return index_of(Configuration::all_at(N_, L_, 0)); }
std::size_t ConfigSpace::index_all_top() const { return index_of(Configuration::all_at(N_, L_, L_)); }

ConfigSpace enumerate_configs(int N, int L, std::size_t cap) { return ConfigSpace(N, L, cap); }

StrategyProfile strategy_configuration(const SocialNorm& norm, const Configuration& mu, TieBreak tie_break) {
  if (mu.total() != norm.N() || mu.L() != norm.L()) throw std::invalid_argument("configuration does not fit the norm");
  const int L = norm.L();
  StrategyProfile profile;
  profile.thresholds.resize(static_cast<std::size_t>(L + 1));
  profile.alternatives.assign(static_cast<std::size_t>(L + 1), std::nullopt);
  SolveOptions opts;
  opts.tie_break = tie_break;
  for (int r = 0; r <= L; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    if (mu.count(r) == 0) {
      profile.thresholds[idx] = norm.prescribed_threshold(r);
      continue;
    }
    const BestResponseSolution sol = solve_value_iteration(norm, opponent_of(mu, r), opts);
    profile.thresholds[idx] = sol.policy[idx];
    profile.alternatives[idx] = sol.tied_alternative[idx];
  }
  return profile;
}

double TransitionMatrix::at(std::size_t from, std::size_t to) const {
  for (const auto& [j, p] : rows.at(from)) {
    if (j == to) return p;
  }
  return 0.0;
}

double TransitionMatrix::max_row_error() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    double s = 0.0;
    for (const auto& e : row) {
      if (e.second < 0.0) return std::numeric_limits<double>::infinity();
      s += e.second;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

Eigen::MatrixXd TransitionMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, p] : rows[i]) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += p;
  }
  return M;
}

std::vector<double> TransitionMatrix::left_multiply(const std::vector<double>& v) const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (v[i] == 0.0) continue;
    for (const auto& [j, p] : rows[i]) out[j] += v[i] * p;
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> transition_row(const SocialNorm& norm, const ConfigSpace& space,
                                                           const Configuration& mu, const StrategyProfile& profile) {
  const int L = norm.L();
  // Distribution of the next census, built one source level at a time.
  std::map<std::vector<int>, double> partial{{std::vector<int>(static_cast<std::size_t>(L + 1), 0), 1.0}};
  for (int r = 0; r <= L; ++r) {
    const int n = mu.count(r);
    if (n == 0) continue;
    const OpponentConfig eta = opponent_of(mu, r);
    const auto idx = static_cast<std::size_t>(r);
    double q = prob_reset(norm, r, eta, ThresholdStrategy(profile.thresholds[idx]));
    if (profile.alternatives[idx]) {
      q = 0.5 * (q + prob_reset(norm, r, eta, ThresholdStrategy(*profile.alternatives[idx])));
    }
    const int up = std::min(L, r + 1);
    std::map<std::vector<int>, double> next;
    for (const auto& [counts, weight] : partial) {
      for (int resets = 0; resets <= n; ++resets) {
        const double p = binomial_pmf(n, resets, q);
        if (p == 0.0) continue;
        std::vector<int> c = counts;
        c[0] += resets;
        c[static_cast<std::size_t>(up)] += n - resets;
        next[c] += weight * p;
      }
    }
    partial.swap(next);
  }
  std::vector<std::pair<std::size_t, double>> row;
  row.reserve(partial.size());
  for (const auto& [counts, weight] : partial) row.emplace_back(space.index_of(Configuration(counts)), weight);
  std::sort(row.begin(), row.end());
  return row;
}

TransitionMatrix build_transition_matrix(const SocialNorm& norm, const ConfigSpace& space, TieBreak tie_break) {
  if (space.N() != norm.N() || space.L() != norm.L()) throw std::invalid_argument("space does not match the norm");
  TransitionMatrix P;
  P.epsilon = norm.params().epsilon;
  P.rows.resize(space.size());
  parallel_for(space.size(), [&](std::size_t i) {
    const Configuration& mu = space.at(i);
    P.rows[i] = transition_row(norm, space, mu, strategy_configuration(norm, mu, tie_break));
  });
  const double err = P.max_row_error();
  if (!(err < 1e-12)) {
    std::ostringstream os;
    os << "transition matrix rows deviate from 1 by " << err;
    throw InvariantViolation(os.str());
  }
  return P;
}

std::vector<std::uint64_t> simulate_chain(const TransitionMatrix& P, std::size_t start, std::uint64_t steps,
                                          std::mt19937_64& rng) {
  if (start >= P.size()) throw std::out_of_range("start state out of range");
  std::vector<std::uint64_t> visits(P.size(), 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t state = start;
  for (std::uint64_t t = 0; t < steps; ++t) {
    const auto& row = P.rows[state];
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t next = row.back().first;
    for (const auto& [j, p] : row) {
      acc += p;
      if (u < acc) {
        next = j;
        break;
      }
    }
    state = next;
    ++visits[state];
  }
  return visits;
}

double interior_mass(const ConfigSpace& space, const std::vector<double>& omega) {
  double mass = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration& mu = space.at(i);
    double inner = 0.0;
    for (int r = 1; r < space.L(); ++r) inner += mu.count(r);
    mass += omega[i] * inner / space.N();
  }
  return mass;
}

LimitingResult limiting_distribution(const SocialNorm& norm, const ConfigSpace& space,
                                     const std::vector<double>& eps_ladder, TieBreak tie_break) {
  if (eps_ladder.size() < 2) throw ConfigError("error-rate ladder needs at least two rungs");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0 && eps_ladder[i] < 1.0)) throw ConfigError("ladder rates must lie in (0,1)");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) throw ConfigError("ladder must be strictly decreasing");
  }
  LimitingResult out;
  out.ladder = eps_ladder;
  for (double eps : eps_ladder) {
    const TransitionMatrix P = build_transition_matrix(norm.with_epsilon(eps), space, tie_break);
    StationaryDist dist = stationary_distribution(P);
    double smallest = std::numeric_limits<double>::infinity();
    for (double w : dist.weights) {
      if (w > 0.0) smallest = std::min(smallest, w);
    }
    if (smallest < 1e-290) {
      std::ostringstream os;
      os << "eps=" << eps << ": stationary weights down to " << smallest << " are near underflow";
      out.warnings.push_back(os.str());
    }
    out.omegas.push_back(std::move(dist.weights));
  }
  const std::size_t last = out.omegas.size() - 1;
  for (std::size_t i = 0; i < space.size(); ++i) {
    bool stable = true;
    for (std::size_t k : {last - 1, last}) {
      if (!(out.omegas[k][i] > std::max(100.0 * eps_ladder[k], 1e-3))) stable = false;
    }
    if (stable) out.stochastically_stable.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> closed_classes(const TransitionMatrix& P, double edge_tol) {
  const std::size_t n = P.size();
  // Tarjan's algorithm, iterative.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  int counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& row = P.rows[v];
      if (pos < row.size()) {
        const auto [w, p] = row[pos++];
        if (p <= edge_tol) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> c;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = static_cast<int>(comps.size());
          c.push_back(w);
        } while (w != done);
        std::sort(c.begin(), c.end());
        comps.push_back(std::move(c));
      }
    }
  }
  std::vector<std::vector<std::size_t>> closed;
  for (const auto& c : comps) {
    bool leaves = false;
    for (std::size_t v : c) {
      for (const auto& [w, p] : P.rows[v]) {
        if (p > edge_tol && comp[w] != comp[v]) leaves = true;
      }
    }
    if (!leaves) closed.push_back(c);
  }
  std::sort(closed.begin(), closed.end());
  return closed;
}

AbsorbingReport classify_absorbing(const SocialNorm& norm, const ConfigSpace& space) {
  const CommunityParams& p = norm.params();
  const int N = p.N;
  const int L = p.L;
  AbsorbingReport report;

  const AbsorbingBounds bounds = absorbing_bounds(norm);
  constexpr double margin = 1e-9;
  const double upper = std::min(static_cast<double>(N), bounds.b_upper);
  for (int k = 0; k <= N; ++k) {
    bool absorbing = false;
    if (k == 0) absorbing = true;
    else if (k == N) absorbing = p.delta * p.b > p.c;
    // A lone good user has no good opponents, so complying and defecting coincide and it
    // keeps its reputation for free; the good-user incentive bound is vacuous there.
    else absorbing = (k == 1 || k > bounds.b_lower + margin) && k < upper - margin;
    if (absorbing) report.analytic.push_back(space.index_of(Configuration::bimodal(N, L, k)));
  }
  std::sort(report.analytic.begin(), report.analytic.end());

  // Error-free chain; exact ties mix 50/50 so boundary censuses are not absorbing.
  const TransitionMatrix P0 = build_transition_matrix(norm.with_epsilon(0.0), space, TieBreak::FairCoin);
  for (std::size_t i = 0; i < P0.size(); ++i) {
    if (P0.at(i, i) >= 1.0 - 1e-12) report.numeric.push_back(i);
  }
  report.closed_classes = closed_classes(P0, 1e-15);
  return report;
}

}  // namespace normsim
