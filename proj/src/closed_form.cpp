// Closed-form best response for a census with users only at reputations 0 and L, in
// the zero-error limit. Kept independent of the value-iteration path: every reward,
// reset probability and value below is written out by hand rather than taken from the
// payoff module, so the two can be compared against each other.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "normsim/bestresponse.hpp"

namespace normsim {

namespace {

struct Candidate {
  int k;
  int good_action;
  double x;   // common value of every good reputation
  double v0;  // value at reputation 0
};

}  // namespace

ClosedFormSolution closed_form_bimodal(const SocialNorm& norm, int n0, int nL, Reputation own_rep) {
  const CommunityParams& p = norm.params();
  const int N = p.N;
  const int L = p.L;
  const int h = norm.h();
  if (n0 < 0 || nL < 0 || n0 + nL != N) {
    throw std::invalid_argument("closed form needs n0 + nL = N with every user at 0 or L");
  }
  if (own_rep != 0 && own_rep != L) throw std::invalid_argument("closed form needs own reputation 0 or L");
  if ((own_rep == 0 ? n0 : nL) < 1) throw std::invalid_argument("own reputation bucket is empty");

  const double b = p.b;
  const double c = p.c;
  const double d = p.delta;
  const int m0 = n0 - (own_rep == 0 ? 1 : 0);
  const int mL = nL - (own_rep == L ? 1 : 0);
  const double p0 = static_cast<double>(m0) / (N - 1);
  const double pL = static_cast<double>(mL) / (N - 1);

  // Cost of climbing from reputation r to h by serving everyone: sum_{j<h-r} delta^j c.
  const auto climb_cost = [&](int r) {
    return d == 1.0 ? c * (h - r) : (1.0 - std::pow(d, h - r)) / (1.0 - d) * c;
  };
  const double dh = std::pow(d, h);

  const auto build = [&](int k, int g) {
    Candidate cand{k, g, 0.0, 0.0};
    const bool comply = g == h;
    if (k >= 0) {
      cand.v0 = 0.0;
      cand.x = comply ? pL * (b - c) / (1.0 - d) : pL * b / (1.0 - d * p0);
    } else {
      // Reputation 0 climbs, so the good-state value feeds back through resets.
      cand.x = comply ? pL * (b - c) / (1.0 - d)
                      : pL * (b - d * climb_cost(0)) / (1.0 - d * p0 - d * dh * pL);
      cand.v0 = dh * cand.x - climb_cost(0);
    }
    return cand;
  };

  const auto values_of = [&](const Candidate& cand) {
    std::vector<double> V(static_cast<std::size_t>(L + 1));
    for (int r = 0; r <= L; ++r) {
      if (r >= h) V[static_cast<std::size_t>(r)] = cand.x;
      else if (r <= cand.k) V[static_cast<std::size_t>(r)] = 0.0;
      else V[static_cast<std::size_t>(r)] = std::pow(d, h - r) * cand.x - climb_cost(r);
    }
    return V;
  };

  // Q-values of the three distinct realizations: serve all, serve only good clients, serve none.
  enum Act { kAll = 0, kGood = 1, kNone = 2 };
  const auto q_values = [&](const std::vector<double>& V, int r) {
    const double vn = V[static_cast<std::size_t>(std::min(L, r + 1))];
    const double v0 = V[0];
    std::array<double, 3> q{};
    if (r < h) {
      q[kAll] = -c + d * vn;
      q[kGood] = -c * pL + d * (p0 * v0 + pL * vn);
      q[kNone] = d * v0;
    } else {
      const double benefit = pL * b;
      q[kGood] = benefit - c * pL + d * vn;
      q[kNone] = benefit + d * (pL * v0 + p0 * vn);
      q[kAll] = benefit - c + d * (p0 * v0 + pL * vn);
    }
    return q;
  };
  // Realizations that coincide because a level is empty.
  const auto same = [&](int a, int b2) {
    if (a == b2) return true;
    if (m0 == 0 && ((a == kAll && b2 == kGood) || (a == kGood && b2 == kAll))) return true;
    if (mL == 0 && ((a == kGood && b2 == kNone) || (a == kNone && b2 == kGood))) return true;
    return false;
  };

  ClosedFormSolution best;
  bool found = false;
  for (int g : {L + 1, h}) {
    for (int k = h - 1; k >= -1; --k) {
      const Candidate cand = build(k, g);
      const std::vector<double> V = values_of(cand);
      bool optimal = true;
      bool boundary = false;
      for (int r = 0; r <= L && optimal; ++r) {
        const auto q = q_values(V, r);
        const int chosen = r < h ? (r <= k ? kNone : kAll) : (g == h ? kGood : kNone);
        const double top = *std::max_element(q.begin(), q.end());
        const double tol = 1e-9 * std::max(1.0, std::abs(top));
        if (q[static_cast<std::size_t>(chosen)] < top - tol) optimal = false;
        for (int a = 0; a < 3; ++a) {
          if (!same(a, chosen) && q[static_cast<std::size_t>(a)] >= q[static_cast<std::size_t>(chosen)] - tol) boundary = true;
        }
      }
      if (!optimal) continue;
      ClosedFormSolution sol;
      sol.k = k;
      sol.good_action = g;
      sol.values = V;
      sol.on_boundary = boundary;
      sol.policy.resize(static_cast<std::size_t>(L + 1));
      for (int r = 0; r <= L; ++r) {
        int a;
        if (r < h) a = r <= k ? L + 1 : 0;
        else a = (g == h && mL > 0) ? h : L + 1;
        sol.policy[static_cast<std::size_t>(r)] = a;
      }
      if (!found) {
        best = sol;
        found = true;
      } else if (sol.policy != best.policy) {
        best.on_boundary = true;
      }
    }
  }
  if (!found) throw InvariantViolation("no piecewise candidate satisfies the optimality conditions");
  return best;
}

}  // namespace normsim
