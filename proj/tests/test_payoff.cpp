#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "normsim/belief.hpp"
#include "normsim/payoff.hpp"

using namespace normsim;
using doctest::Approx;

namespace {

SocialNorm make_norm(int N, int h, double eps, double b = 3.0, double c = 1.0, int L = 3) {
  CommunityParams p;
  p.N = N;
  p.L = L;
  p.b = b;
  p.c = c;
  p.delta = 0.5;
  p.epsilon = eps;
  return SocialNorm(p, h);
}

}  // namespace

TEST_CASE("opponent census removes the user itself") {
  CHECK(opponent_of(Configuration({2, 0, 0, 3}), 3).counts() == std::vector<int>{2, 0, 0, 2});
  CHECK(opponent_of(Configuration({1, 0, 0, 1}), 0).counts() == std::vector<int>{0, 0, 0, 1});
  CHECK_THROWS_AS(opponent_of(Configuration({0, 2, 0, 3}), 0), std::invalid_argument);
  CHECK_THROWS_AS(Configuration({-1, 2}), std::invalid_argument);
}

TEST_CASE("one-period utility examples") {
  const SocialNorm norm = make_norm(5, 1, 0.0);
  const OpponentConfig all_top({0, 0, 0, 4});
  CHECK(expected_one_period_utility(norm, ThresholdStrategy(1), 3, all_top) == Approx(2.0));
  CHECK(expected_one_period_utility(norm, ThresholdStrategy(1), 0, all_top) == Approx(-1.0));
  const OpponentConfig all_zero({4, 0, 0, 0});
  for (int rep = 0; rep <= 3; ++rep) {
    CHECK(expected_one_period_utility(norm, ThresholdStrategy::defect(3), rep, all_zero) == Approx(0.0));
  }
}

TEST_CASE("everyone good and compliant yields b - c") {
  for (int h = 1; h <= 3; ++h) {
    const SocialNorm norm = make_norm(7, h, 0.0, 4.0, 1.5);
    const OpponentConfig eta({0, 0, 0, 6});
    CHECK(expected_one_period_utility(norm, ThresholdStrategy(h), 3, eta) == Approx(2.5));
  }
}

TEST_CASE("fixed-belief benefit counts good, bad and reputation-0 servers") {
  // h=2, eps=0.1: a rep-3 client is served by rep-3 and rep-1 servers w.p. 0.9 and by
  // rep-0 servers w.p. 0.1.
  const SocialNorm norm = make_norm(8, 2, 0.1, 3.0);
  const OpponentConfig eta({2, 2, 0, 3});
  CHECK(expected_benefit(norm, 3, eta) == Approx(3.0 * (2 * 0.1 + 2 * 0.9 + 3 * 0.9) / 7));
  // A rep-1 client is refused by the good servers.
  CHECK(expected_benefit(norm, 1, eta) == Approx(3.0 * (2 * 0.1 + 2 * 0.9) / 7));
}

TEST_CASE("utility is affine in each opponent count") {
  const SocialNorm norm = make_norm(12, 2, 0.07, 3.5, 1.0);
  const ThresholdStrategy sigma(2);
  for (int rep = 0; rep <= 3; ++rep) {
    // Moving one opponent from level 0 to level j changes N-1 times the utility by the
    // per-opponent difference, independent of where the rest sit.
    for (int j = 1; j <= 3; ++j) {
      std::vector<int> a{5, 2, 2, 2}, b2 = a;
      --b2[0];
      ++b2[static_cast<std::size_t>(j)];
      std::vector<int> c{8, 1, 1, 1}, d = c;
      --d[0];
      ++d[static_cast<std::size_t>(j)];
      const double diff1 = expected_one_period_utility(norm, sigma, rep, OpponentConfig(b2)) -
                           expected_one_period_utility(norm, sigma, rep, OpponentConfig(a));
      const double diff2 = expected_one_period_utility(norm, sigma, rep, OpponentConfig(d)) -
                           expected_one_period_utility(norm, sigma, rep, OpponentConfig(c));
      CHECK(diff1 == Approx(diff2));
    }
  }
}

TEST_CASE("reset probability examples") {
  const SocialNorm norm = make_norm(5, 1, 0.1);
  CHECK(prob_reset(norm, 2, OpponentConfig({2, 0, 0, 2}), ThresholdStrategy::defect(3)) == Approx(0.5));
  const SocialNorm exact = make_norm(5, 1, 0.0);
  CHECK(prob_reset(exact, 3, OpponentConfig({0, 1, 1, 2}), ThresholdStrategy::defect(3)) == Approx(1.0));
}

TEST_CASE("compliant action resets with probability exactly eps; eps <-> 1-eps symmetry") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> c(4);
    int total = 0;
    for (int& x : c) total += x = count(rng);
    if (total == 0) c[0] = total = 1;
    const int h = 1 + trial % 3;
    const double eps = 0.01 * (trial % 40);
    const SocialNorm norm = make_norm(total + 1, h, eps);
    const SocialNorm exact = make_norm(total + 1, h, 0.0);
    const OpponentConfig eta(c);
    for (int rep = 0; rep <= 3; ++rep) {
      CHECK(prob_reset(norm, rep, eta, ThresholdStrategy(norm.prescribed_threshold(rep))) == Approx(eps));
      for (int a = 0; a <= 4; ++a) {
        // With eps = 0 the reset probability is the mismatched mass m; flipping reports
        // mixes it as (1-eps) m + eps (1-m), so swapping eps and 1-eps sums to one.
        const double m = prob_reset(exact, rep, eta, ThresholdStrategy(a));
        const double q = prob_reset(norm, rep, eta, ThresholdStrategy(a));
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
        CHECK(q == Approx((1.0 - eps) * m + eps * (1.0 - m)));
        CHECK(q + (eps * m + (1.0 - eps) * (1.0 - m)) == Approx(1.0));
      }
    }
  }
}

TEST_CASE("belief-based benefit") {
  const SocialNorm norm = make_norm(6, 1, 0.0);
  const OpponentConfig eta({1, 1, 1, 2});
  const BeliefMatrix compliant = BeliefMatrix::compliant(norm);
  // Compliant beliefs match the fixed belief for servers above reputation 0; the fixed
  // belief has reputation-0 servers defect, the compliant one has them serve everyone.
  const OpponentConfig no_zero({0, 1, 2, 2});
  for (int rep = 0; rep <= 3; ++rep) {
    for (int a = 0; a <= 4; ++a) {
      CHECK(expected_one_period_utility(norm, ThresholdStrategy(a), rep, no_zero, compliant) ==
            Approx(expected_one_period_utility(norm, ThresholdStrategy(a), rep, no_zero)));
      CHECK(expected_one_period_utility(norm, ThresholdStrategy(a), rep, eta, compliant) ==
            Approx(expected_one_period_utility(norm, ThresholdStrategy(a), rep, eta) + 3.0 * 1 / 5));
    }
  }
  const BeliefMatrix uniform = BeliefMatrix::uniform(3);
  for (int r = 0; r <= 3; ++r) CHECK(uniform.serve_probability(r, 3) == Approx(0.8));
  std::vector<double> rows(20, 0.0);
  for (int r = 0; r <= 3; ++r) rows[static_cast<std::size_t>(r * 5 + 4)] = 1.0;
  const BeliefMatrix defectors(3, rows);
  CHECK(expected_benefit(norm, 3, eta, defectors) == Approx(0.0));
  // Beliefs never enter the reputation update.
  CHECK(prob_reset_under_belief(norm, 2, eta, ThresholdStrategy(4), uniform) ==
        Approx(prob_reset(norm, 2, eta, ThresholdStrategy(4))));
  std::vector<double> bad(20, 0.1);
  CHECK_THROWS_AS(prob_reset_under_belief(norm, 2, eta, ThresholdStrategy(4), BeliefMatrix(3, bad)),
                  std::invalid_argument);
}

TEST_CASE("belief update examples") {
  std::vector<double> rows(20, 0.0);
  for (int r = 0; r <= 3; ++r) rows[static_cast<std::size_t>(r * 5)] = 1.0;
  const BeliefMatrix prior(3, rows);
  const BeliefMatrix served = belief_update(prior, 2, 1, 1, 1);
  CHECK(served.at(2, 0) == Approx(0.5));
  CHECK(served.at(2, 1) == Approx(0.5));
  CHECK(served.at(2, 2) == Approx(0.0));
  CHECK(served.at(2, 4) == Approx(0.0));
  CHECK(served.at(1, 0) == Approx(1.0));  // other rows untouched
  const BeliefMatrix refused = belief_update(BeliefMatrix::uniform(3), 0, 3, 0, 1);
  for (int l = 0; l <= 3; ++l) CHECK(refused.at(0, l) == Approx(0.0));
  CHECK(refused.at(0, 4) == Approx(1.0));
  // Running average: the second observation carries weight 1/2.
  const BeliefMatrix twice = belief_update(served, 2, 3, 0, 2);
  CHECK(twice.at(2, 0) == Approx(0.25));
  CHECK(twice.at(2, 4) == Approx(0.5));
  CHECK_THROWS(belief_update(prior, 0, 0, 1, 0));
}

TEST_CASE("belief updates keep rows stochastic under fuzzing") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> rep(0, 3), bit(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int seq = 0; seq < 1000; ++seq) {
    std::vector<double> rows(20);
    for (int r = 0; r <= 3; ++r) {
      double s = 0.0;
      for (int l = 0; l < 5; ++l) s += rows[static_cast<std::size_t>(r * 5 + l)] = unit(rng);
      for (int l = 0; l < 5; ++l) rows[static_cast<std::size_t>(r * 5 + l)] /= s;
    }
    BeliefMatrix O(3, rows);
    const int server = rep(rng);
    O = belief_update(O, server, rep(rng), bit(rng), 1 + static_cast<std::uint64_t>(seq % 7));
    CHECK(O.max_row_error() < 1e-9);
  }
}
