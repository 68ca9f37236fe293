#include "normsim/bestresponse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace normsim {

namespace {

struct Tables {
  int L;
  std::vector<double> benefit;          // per own reputation
  std::vector<std::vector<double>> r;   // [rep][action]
  std::vector<std::vector<double>> q;   // reset probability [rep][action]
};

double stop_threshold(double tolerance, double delta) {
  if (delta <= 0.0) return std::numeric_limits<double>::infinity();
  return tolerance * (1.0 - delta) / delta;
}

double q_value(const Tables& t, const std::vector<double>& V, int rep, std::size_t a, double delta) {
  const int next = std::min(t.L, rep + 1);
  const double reset = t.q[static_cast<std::size_t>(rep)][a];
  return t.r[static_cast<std::size_t>(rep)][a] +
         delta * (reset * V[0] + (1.0 - reset) * V[static_cast<std::size_t>(next)]);
}

// Runs the Bellman iteration over a precomputed action table.
std::size_t iterate(const Tables& t, double delta, const SolveOptions& options, std::vector<double>& V,
                    double& residual, std::vector<double>* history) {
  const std::size_t states = static_cast<std::size_t>(t.L + 1);
  const std::size_t actions = t.r.front().size();
  std::vector<double> next(states);
  const double stop = stop_threshold(options.tolerance, delta);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    residual = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < actions; ++a) best = std::max(best, q_value(t, V, static_cast<int>(s), a, delta));
      next[s] = best;
      residual = std::max(residual, std::abs(best - V[s]));
    }
    V.swap(next);
    if (history) history->push_back(residual);
    if (residual < stop) return it;
  }
  throw InvariantViolation("value iteration did not converge within " + std::to_string(options.max_iterations) +
                           " iterations (residual " + std::to_string(residual) + ")");
}

double tie_tolerance(double q) { return 1e-9 * std::max(1.0, std::abs(q)); }

}  // namespace

ThresholdClass threshold_class(const OpponentConfig& eta, int threshold) {
  const int L = eta.L();
  if (threshold < 0 || threshold > L + 1) throw std::out_of_range("threshold out of range");
  int lo = 0;
  for (int r = threshold - 1; r >= 0; --r) {
    if (eta.count(r) > 0) {
      lo = r + 1;
      break;
    }
  }
  int hi = L + 1;
  for (int r = threshold; r <= L; ++r) {
    if (eta.count(r) > 0) {
      hi = r;
      break;
    }
  }
  return {lo, hi};
}

int canonical_threshold(const SocialNorm& norm, Reputation own_rep, const OpponentConfig& eta, int threshold) {
  const ThresholdClass cls = threshold_class(eta, threshold);
  const auto contains = [&](int a) { return cls.lo <= a && a <= cls.hi; };
  if (cls.hi == norm.L() + 1) return norm.L() + 1;
  const int rule = norm.prescribed_threshold(own_rep);
  if (contains(rule)) return rule;
  if (contains(norm.h())) return norm.h();
  return cls.hi;
}

BestResponseSolution solve_value_iteration(const SocialNorm& norm, const OpponentConfig& eta,
                                           const SolveOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  eta.check_against(norm);
  if (options.beliefs) options.beliefs->check_stochastic();

  const int L = norm.L();
  const double delta = norm.params().delta;
  const std::size_t states = static_cast<std::size_t>(L + 1);
  const std::size_t actions = static_cast<std::size_t>(L + 2);

  Tables t{L, std::vector<double>(states), std::vector<std::vector<double>>(states, std::vector<double>(actions)),
           std::vector<std::vector<double>>(states, std::vector<double>(actions))};
  std::vector<double> cost(actions);
  for (std::size_t a = 0; a < actions; ++a) cost[a] = expected_cost(norm, ThresholdStrategy(static_cast<int>(a)), eta);
  for (std::size_t s = 0; s < states; ++s) {
    const Reputation rep = static_cast<Reputation>(s);
    t.benefit[s] = options.beliefs ? expected_benefit(norm, rep, eta, *options.beliefs)
                                   : expected_benefit(norm, rep, eta);
    for (std::size_t a = 0; a < actions; ++a) {
      t.r[s][a] = t.benefit[s] - cost[a];
      t.q[s][a] = prob_reset(norm, rep, eta, ThresholdStrategy(static_cast<int>(a)));
    }
  }

  BestResponseSolution sol;
  sol.values.assign(states, 0.0);
  sol.iterations = iterate(t, delta, options, sol.values, sol.residual,
                           options.record_residuals ? &sol.residual_history : nullptr);

  sol.policy.resize(states);
  sol.tied_alternative.assign(states, std::nullopt);
  for (std::size_t s = 0; s < states; ++s) {
    const Reputation rep = static_cast<Reputation>(s);
    std::vector<double> q(actions);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < actions; ++a) {
      q[a] = q_value(t, sol.values, rep, a, delta);
      best = std::max(best, q[a]);
    }
    const double tol = tie_tolerance(best);
    int largest = -1;
    int smallest = -1;
    for (std::size_t a = 0; a < actions; ++a) {
      if (q[a] >= best - tol) {
        if (smallest < 0) smallest = static_cast<int>(a);
        largest = static_cast<int>(a);
      }
    }
    sol.policy[s] = canonical_threshold(norm, rep, eta, largest);
    if (options.tie_break == TieBreak::FairCoin) {
      const int alt = canonical_threshold(norm, rep, eta, smallest);
      if (alt != sol.policy[s]) sol.tied_alternative[s] = alt;
    }
  }
  return sol;
}

SubsetSolution solve_subset_actions(const SocialNorm& norm, const OpponentConfig& eta, const SolveOptions& options) {
  eta.check_against(norm);
  const int L = norm.L();
  const double delta = norm.params().delta;
  const std::size_t states = static_cast<std::size_t>(L + 1);

  std::uint32_t support = 0;
  for (int r = 0; r <= L; ++r) {
    if (eta.count(r) > 0) support |= 1U << r;
  }
  // Subsets of the occupied levels only; serving an empty level changes nothing.
  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = support;; m = (m - 1) & support) {
    masks.push_back(m);
    if (m == 0) break;
  }
  std::sort(masks.begin(), masks.end());

  Tables t{L, std::vector<double>(states), std::vector<std::vector<double>>(states, std::vector<double>(masks.size())),
           std::vector<std::vector<double>>(states, std::vector<double>(masks.size()))};
  std::vector<int> served_mass(masks.size(), 0);
  for (std::size_t a = 0; a < masks.size(); ++a) {
    std::vector<bool> served(states);
    for (int r = 0; r <= L; ++r) {
      served[static_cast<std::size_t>(r)] = (masks[a] >> r) & 1U;
      if (served[static_cast<std::size_t>(r)]) served_mass[a] += eta.count(r);
    }
    const double cost = expected_cost(norm, served, eta);
    for (std::size_t s = 0; s < states; ++s) {
      if (a == 0) t.benefit[s] = expected_benefit(norm, static_cast<Reputation>(s), eta);
      t.r[s][a] = t.benefit[s] - cost;
      t.q[s][a] = prob_reset(norm, static_cast<Reputation>(s), eta, served);
    }
  }

  SubsetSolution sol;
  sol.values.assign(states, 0.0);
  double residual = 0.0;
  sol.iterations = iterate(t, delta, options, sol.values, residual, nullptr);
  sol.policy.resize(states);
  for (std::size_t s = 0; s < states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < masks.size(); ++a) best = std::max(best, q_value(t, sol.values, static_cast<int>(s), a, delta));
    const double tol = tie_tolerance(best);
    std::size_t pick = masks.size();
    for (std::size_t a = 0; a < masks.size(); ++a) {
      if (q_value(t, sol.values, static_cast<int>(s), a, delta) < best - tol) continue;
      if (pick == masks.size() || served_mass[a] < served_mass[pick]) pick = a;
    }
    sol.policy[s] = masks[pick];
  }
  return sol;
}

ThresholdCheck verify_threshold_structure(const SocialNorm& norm, const OpponentConfig& eta, double tolerance) {
  SolveOptions opts;
  opts.tolerance = std::min(1e-10, tolerance * 1e-2);
  const SubsetSolution subset = solve_subset_actions(norm, eta, opts);
  const BestResponseSolution thresh = solve_value_iteration(norm, eta, opts);
  const int L = norm.L();

  ThresholdCheck check;
  for (int s = 0; s <= L; ++s) {
    const double gap = std::abs(subset.values[static_cast<std::size_t>(s)] - thresh.values[static_cast<std::size_t>(s)]);
    check.max_value_gap = std::max(check.max_value_gap, gap);
    if (gap >= tolerance && check.values_agree) {
      check.values_agree = false;
      if (!check.counterexample_rep) {
        check.counterexample_rep = s;
        check.counterexample_mask = subset.policy[static_cast<std::size_t>(s)];
      }
    }
    // Upward-closed on the occupied levels: once a served level appears, every occupied level above is served.
    const std::uint32_t mask = subset.policy[static_cast<std::size_t>(s)];
    bool seen_served = false;
    for (int r = 0; r <= L; ++r) {
      if (eta.count(r) == 0) continue;
      const bool served = (mask >> r) & 1U;
      if (seen_served && !served) {
        check.is_threshold = false;
        if (!check.counterexample_rep) {
          check.counterexample_rep = s;
          check.counterexample_mask = mask;
        }
      }
      seen_served = seen_served || served;
    }
  }
  return check;
}

StructureReport check_structure(const SocialNorm& norm, const BestResponseSolution& sol, double value_tol) {
  StructureReport rep;
  std::ostringstream why;
  const int L = norm.L();
  const int h = norm.h();
  for (int s = 0; s <= L; ++s) {
    if (sol.policy[static_cast<std::size_t>(s)] < norm.prescribed_threshold(s)) {
      rep.above_rule = false;
      why << "policy[" << s << "]=" << sol.policy[static_cast<std::size_t>(s)] << " below rule; ";
    }
    if (s > 0) {
      const bool same_group = (s - 1 < h) == (s < h);
      if (same_group && sol.policy[static_cast<std::size_t>(s - 1)] < sol.policy[static_cast<std::size_t>(s)]) {
        rep.monotone_groups = false;
        why << "policy increases from " << s - 1 << " to " << s << "; ";
      }
      if (sol.values[static_cast<std::size_t>(s - 1)] > sol.values[static_cast<std::size_t>(s)] + value_tol) {
        rep.monotone_values = false;
        why << "value decreases from " << s - 1 << " to " << s << "; ";
      }
    }
  }
  rep.detail = why.str();
  return rep;
}

}  // namespace normsim
