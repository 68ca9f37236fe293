#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "normsim/chain.hpp"
#include "normsim/design.hpp"

using namespace normsim;
using doctest::Approx;

namespace {

SocialNorm make_norm(int N, int h, double delta, double b = 3.0, double c = 1.0, int L = 3, double eps = 0.0) {
  CommunityParams p;
  p.N = N;
  p.L = L;
  p.b = b;
  p.c = c;
  p.delta = delta;
  p.epsilon = eps;
  return SocialNorm(p, h);
}

TransitionMatrix two_state() {
  TransitionMatrix P;
  P.rows = {{{0, 0.9}, {1, 0.1}}, {{0, 0.1}, {1, 0.9}}};
  return P;
}

StrategyProfile compliant_profile(const SocialNorm& norm) {
  StrategyProfile profile;
  for (int r = 0; r <= norm.L(); ++r) profile.thresholds.push_back(norm.prescribed_threshold(r));
  profile.alternatives.assign(profile.thresholds.size(), std::nullopt);
  return profile;
}

}  // namespace

TEST_CASE("configuration space sizes and order") {
  CHECK(enumerate_configs(5, 3).size() == 56);
  CHECK(config_space_size(5, 3) == 56);
  CHECK(enumerate_configs(2, 3).size() == 10);
  const ConfigSpace tiny = enumerate_configs(1, 1);
  REQUIRE(tiny.size() == 2);
  CHECK(tiny.at(0).counts() == std::vector<int>{1, 0});
  CHECK(tiny.at(1).counts() == std::vector<int>{0, 1});
  CHECK(tiny.index_all_zero() == 0);
  CHECK(tiny.index_all_top() == 1);
  const ConfigSpace space(6, 3);
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.index_of(space.at(i)) == i);
  CHECK_THROWS_AS(ConfigSpace(500, 3), ConfigError);
  CHECK_THROWS_AS(ConfigSpace(0, 3), ConfigError);
  CHECK_THROWS_AS(ConfigSpace(5, 0), ConfigError);
}

TEST_CASE("strategy configuration at the end points") {
  const SocialNorm norm = make_norm(6, 1, 0.6);
  const StrategyProfile top = strategy_configuration(norm, Configuration::all_at(6, 3, 3));
  CHECK(top.thresholds[3] == 1);
  const StrategyProfile zero = strategy_configuration(norm, Configuration::all_at(6, 3, 0));
  CHECK(zero.thresholds[0] == 4);
  // Unoccupied levels get the rule's own threshold.
  CHECK(zero.thresholds[2] == 1);
}

TEST_CASE("bimodal census between the bounds: bad users defect, good users comply") {
  const SocialNorm norm = make_norm(11, 2, 0.5);
  const AbsorbingBounds bounds = absorbing_bounds(norm);
  int tested = 0;
  for (int k = 1; k < 11; ++k) {
    if (!(k > bounds.b_lower + 1e-9 && k < bounds.b_upper - 1e-9)) continue;
    const StrategyProfile s = strategy_configuration(norm, Configuration::bimodal(11, 3, k));
    CHECK(s.thresholds[0] == 4);
    CHECK(s.thresholds[3] == 2);
    ++tested;
  }
  CHECK(tested > 0);
}

TEST_CASE("error-free end points are fixed") {
  const SocialNorm norm = make_norm(5, 1, 0.6);
  const ConfigSpace space(5, 3);
  const TransitionMatrix P = build_transition_matrix(norm, space);
  CHECK(P.at(space.index_all_top(), space.index_all_top()) == Approx(1.0));
  CHECK(P.at(space.index_all_zero(), space.index_all_zero()) == Approx(1.0));
  CHECK(P.max_row_error() < 1e-12);
}

TEST_CASE("hand-computed transition row") {
  const SocialNorm norm = make_norm(2, 1, 0.6, 3.0, 1.0, 3, 0.1);
  const ConfigSpace space(2, 3);
  const auto row = transition_row(norm, space, Configuration({1, 1, 0, 0}), compliant_profile(norm));
  const auto prob = [&](std::vector<int> counts) {
    const std::size_t j = space.index_of(Configuration(std::move(counts)));
    for (const auto& [k, p] : row) {
      if (k == j) return p;
    }
    return 0.0;
  };
  CHECK(prob({0, 1, 1, 0}) == Approx(0.81));
  CHECK(prob({1, 0, 1, 0}) == Approx(0.09));
  CHECK(prob({1, 1, 0, 0}) == Approx(0.09));
  CHECK(prob({2, 0, 0, 0}) == Approx(0.01));
  CHECK(row.size() == 4);
}

TEST_CASE("stationary distribution of a symmetric two-state chain") {
  const TransitionMatrix P = two_state();
  for (StationaryMethod m : {StationaryMethod::Auto, StationaryMethod::Power, StationaryMethod::Dense, StationaryMethod::GTH}) {
    const StationaryDist d = stationary_distribution(P, m);
    CHECK(d.weights[0] == Approx(0.5));
    CHECK(d.weights[1] == Approx(0.5));
  }
}

TEST_CASE("stationary vector is a fixed point, unique, and stable from random starts") {
  const SocialNorm norm = make_norm(6, 1, 0.6, 3.0, 1.0, 3, 0.01);
  const ConfigSpace space(6, 3);
  const TransitionMatrix P = build_transition_matrix(norm, space);
  const StationaryDist gth = stationary_distribution(P, StationaryMethod::GTH);
  const StationaryDist dense = stationary_distribution(P, StationaryMethod::Dense);
  CHECK(gth.residual < 1e-10);
  double sum = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    sum += gth.weights[i];
    CHECK(gth.weights[i] >= 0.0);
    CHECK(std::abs(gth.weights[i] - dense.weights[i]) < 1e-10);
  }
  CHECK(sum == Approx(1.0));
  std::mt19937_64 rng(2);
  CHECK(stability_check(P, gth.weights, rng, 3, 1e-14) < 1e-8);
}

TEST_CASE("trajectory occupancy matches the stationary vector") {
  const SocialNorm norm = make_norm(4, 1, 0.6, 3.0, 1.0, 2, 0.1);
  const ConfigSpace space(4, 2);
  const TransitionMatrix P = build_transition_matrix(norm, space);
  const std::vector<double> omega = stationary_distribution(P).weights;
  std::mt19937_64 rng(9);
  const std::vector<std::uint64_t> visits = simulate_chain(P, space.index_all_zero(), 200000, rng);
  const OccupancyTest test = occupancy_chi_square(P, omega, visits);
  CHECK(test.dof > 0);
  CHECK(test.passed);
  // A clearly wrong reference distribution is rejected.
  std::vector<double> uniform(space.size(), 1.0 / static_cast<double>(space.size()));
  CHECK_FALSE(occupancy_chi_square(P, uniform, visits).passed);
}

TEST_CASE("limiting distribution concentrates on full cooperation when the norm is feasible") {
  const SocialNorm norm = make_norm(6, 1, 0.6);
  const ConfigSpace space(6, 3);
  const LimitingResult res = limiting_distribution(norm, space, {1e-2, 1e-3, 1e-4});
  CHECK(res.bottom()[space.index_all_top()] > 0.99);
  REQUIRE(res.stochastically_stable.size() == 1);
  CHECK(res.stochastically_stable[0] == space.index_all_top());
  CHECK(interior_mass(space, res.bottom()) < 1e-2);
}

TEST_CASE("impatient users never settle at full cooperation") {
  const SocialNorm norm = make_norm(6, 1, 0.3);  // delta < c/b
  const ConfigSpace space(6, 3);
  const LimitingResult res = limiting_distribution(norm, space, {1e-2, 1e-3, 1e-4});
  for (std::size_t i : res.stochastically_stable) CHECK(i != space.index_all_top());
  CHECK(res.bottom()[space.index_all_top()] < 1e-3);
}

TEST_CASE("stochastically stable configurations are absorbing") {
  for (double delta : {0.4, 0.6, 0.8}) {
    for (int h = 1; h <= 3; ++h) {
      const SocialNorm norm = make_norm(5, h, delta, 4.0);
      const ConfigSpace space(5, 3);
      const LimitingResult res = limiting_distribution(norm, space, {1e-3, 1e-4, 1e-5});
      const AbsorbingReport absorbing = classify_absorbing(norm, space);
      for (std::size_t i : res.stochastically_stable) {
        CHECK(std::find(absorbing.numeric.begin(), absorbing.numeric.end(), i) != absorbing.numeric.end());
        CHECK_FALSE(space.at(i).has_interior_mass());
      }
    }
  }
}

TEST_CASE("ladder validation") {
  const SocialNorm norm = make_norm(3, 1, 0.6);
  const ConfigSpace space(3, 3);
  CHECK_THROWS_AS(limiting_distribution(norm, space, {1e-2}), ConfigError);
  CHECK_THROWS_AS(limiting_distribution(norm, space, {1e-3, 1e-2}), ConfigError);
  CHECK_THROWS_AS(limiting_distribution(norm, space, {1e-2, 0.0}), ConfigError);
}

TEST_CASE("absorbing configurations") {
  const SocialNorm norm = make_norm(11, 1, 0.6);
  const ConfigSpace space(11, 3);
  const AbsorbingReport report = classify_absorbing(norm, space);
  CHECK(report.agree());
  // Besides the two end points, a lone good user has nobody it must serve.
  std::vector<std::size_t> expected{space.index_all_zero(), space.index_all_top(),
                                    space.index_of(Configuration::bimodal(11, 3, 1))};
  std::sort(expected.begin(), expected.end());
  CHECK(report.numeric == expected);

  // delta b < c: full cooperation is not absorbing.
  const SocialNorm impatient = make_norm(11, 1, 0.3);
  const AbsorbingReport none = classify_absorbing(impatient, space);
  CHECK(none.agree());
  CHECK(std::find(none.numeric.begin(), none.numeric.end(), space.index_all_top()) == none.numeric.end());
}

TEST_CASE("a lone good user is absorbed with no one to serve") {
  // With one user at L and the rest at 0 the good user's only opponents are bad, so the
  // rule asks it to refuse everyone and compliance is free.
  const SocialNorm norm = make_norm(5, 1, 0.5, 1.5);
  const ConfigSpace space(5, 3);
  const AbsorbingReport report = classify_absorbing(norm, space);
  CHECK(report.agree());
  const std::size_t lone = space.index_of(Configuration::bimodal(5, 3, 1));
  CHECK(std::find(report.numeric.begin(), report.numeric.end(), lone) != report.numeric.end());
}

TEST_CASE("closed classes and reducible chains") {
  TransitionMatrix P;
  P.rows = {{{0, 1.0}}, {{0, 0.5}, {2, 0.5}}, {{2, 1.0}}};
  const auto classes = closed_classes(P);
  REQUIRE(classes.size() == 2);
  CHECK_THROWS_AS(stationary_distribution(P, StationaryMethod::GTH), InvariantViolation);
  CHECK_THROWS_AS(stationary_distribution(P, StationaryMethod::Dense), InvariantViolation);
}
