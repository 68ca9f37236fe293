#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "normsim/chain.hpp"

namespace normsim {

namespace {

constexpr std::size_t kGthLimit = 2000;

double sup_residual(const TransitionMatrix& P, const std::vector<double>& w) {
  const std::vector<double> next = P.left_multiply(w);
  double r = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) r = std::max(r, std::abs(next[i] - w[i]));
  return r;
}

void normalize(std::vector<double>& w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
}

// Grassmann-Taksar-Heyman elimination: subtraction-free, so accurate even when some
// transition probabilities are many orders of magnitude below others.
std::vector<double> gth(const TransitionMatrix& P) {
  const auto n = static_cast<Eigen::Index>(P.size());
  Eigen::MatrixXd A = P.dense();
  for (Eigen::Index k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += A(k, j);
    if (!(s > 0.0)) throw InvariantViolation("chain is reducible; the stationary distribution is not unique");
    for (Eigen::Index i = 0; i < k; ++i) A(i, k) /= s;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (Eigen::Index j = 0; j < k; ++j) A(i, j) += aik * A(k, j);
    }
  }
  std::vector<double> w(P.size(), 0.0);
  w[0] = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) s += w[static_cast<std::size_t>(i)] * A(i, k);
    w[static_cast<std::size_t>(k)] = s;
  }
  normalize(w);
  return w;
}

std::vector<double> dense_solve(const TransitionMatrix& P) {
  const auto n = static_cast<Eigen::Index>(P.size());
  Eigen::MatrixXd A = P.dense().transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < n) throw InvariantViolation("chain is reducible; the stationary distribution is not unique");
  const Eigen::VectorXd x = lu.solve(rhs);
  std::vector<double> w(x.data(), x.data() + n);
  for (double& v : w) v = std::max(v, 0.0);
  normalize(w);
  return w;
}

}  // namespace

StationaryDist power_iteration(const TransitionMatrix& P, std::vector<double> start, double tolerance,
                               std::size_t max_iterations) {
  if (start.size() != P.size()) throw std::invalid_argument("start vector has the wrong size");
  normalize(start);
  StationaryDist out;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    std::vector<double> next = P.left_multiply(start);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - start[i]));
    start.swap(next);
    if (change < tolerance) {
      normalize(start);
      out.iterations = it;
      out.residual = change;
      out.weights = std::move(start);
      return out;
    }
  }
  throw InvariantViolation("power iteration did not converge within " + std::to_string(max_iterations) +
                           " iterations; the chain may be nearly reducible");
}

StationaryDist stationary_distribution(const TransitionMatrix& P, StationaryMethod method, double tolerance,
                                       std::size_t max_iterations) {
  if (P.size() == 0) throw std::invalid_argument("empty transition matrix");
  if (method == StationaryMethod::Auto) method = P.size() <= kGthLimit ? StationaryMethod::GTH : StationaryMethod::Power;
  StationaryDist out;
  switch (method) {
    case StationaryMethod::GTH:
      out.weights = gth(P);
      break;
    case StationaryMethod::Dense:
      out.weights = dense_solve(P);
      break;
    default:
      return power_iteration(P, std::vector<double>(P.size(), 1.0), tolerance, max_iterations);
  }
  out.residual = sup_residual(P, out.weights);
  return out;
}

double stability_check(const TransitionMatrix& P, const std::vector<double>& omega, std::mt19937_64& rng,
                       int starts, double tolerance) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> v(P.size());
    for (double& x : v) x = unit(rng);
    const StationaryDist d = power_iteration(P, v, tolerance);
    for (std::size_t i = 0; i < omega.size(); ++i) worst = std::max(worst, std::abs(d.weights[i] - omega[i]));
  }
  return worst;
}

OccupancyTest occupancy_chi_square(const TransitionMatrix& P, const std::vector<double>& omega,
                                   const std::vector<std::uint64_t>& counts, double min_expected, double level) {
  const std::size_t n = P.size();
  if (omega.size() != n || counts.size() != n) throw std::invalid_argument("size mismatch in occupancy test");
  const double T = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (!(T > 0.0)) throw std::invalid_argument("no observations");

  // Bins: states with enough expected visits stand alone; the rest are pooled.
  std::vector<int> bin(n, -1);
  int bins = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (omega[i] * T >= min_expected) bin[i] = bins++;
  }
  bool pooled = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (bin[i] < 0) {
      bin[i] = bins;
      pooled = true;
    }
  }
  if (pooled) ++bins;

  OccupancyTest test;
  test.bins = static_cast<std::size_t>(bins);
  if (bins < 2) {
    test.passed = true;
    return test;
  }

  // Asymptotic covariance of sqrt(T) * (empirical - omega) per bin:
  //   Sigma(f,g) = <f', Z g'> + <g', Z f'> - <f', g'>, with f' = f - omega(f),
  //   inner product weighted by omega and Z = (I - P + 1 omega)^-1.
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::RowVectorXd w(nn);
  for (Eigen::Index i = 0; i < nn; ++i) w(i) = omega[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd fundamental =
      (Eigen::MatrixXd::Identity(nn, nn) - P.dense() + Eigen::VectorXd::Ones(nn) * w).inverse();

  const int k = bins - 1;  // the last bin is implied by the others
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nn, k);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd observed = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (bin[i] < k) {
      F(static_cast<Eigen::Index>(i), bin[i]) = 1.0;
      mean(bin[i]) += omega[i];
      observed(bin[i]) += static_cast<double>(counts[i]) / T;
    }
  }
  const Eigen::MatrixXd centered = F - Eigen::VectorXd::Ones(nn) * mean.transpose();
  const Eigen::MatrixXd weighted = w.asDiagonal() * centered;
  const Eigen::MatrixXd ZF = fundamental * centered;
  const Eigen::MatrixXd cross = weighted.transpose() * ZF;
  const Eigen::MatrixXd sigma = cross + cross.transpose() - weighted.transpose() * centered;

  const Eigen::VectorXd diff = observed - mean;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success) throw InvariantViolation("occupancy covariance is not positive definite");
  test.statistic = T * diff.dot(ldlt.solve(diff));
  test.dof = k;
  test.critical = boost::math::quantile(boost::math::chi_squared(k), level);
  test.passed = test.statistic <= test.critical;
  return test;
}

}  // namespace normsim
