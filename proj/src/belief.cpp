#include "normsim/belief.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace normsim {

BeliefMatrix::BeliefMatrix(int L, std::vector<double> rows)
    : L_(L), rows_(std::move(rows)), counts_(static_cast<std::size_t>(L + 1), 0) {
  if (L < 1) throw std::invalid_argument("belief matrix needs L >= 1");
  if (rows_.size() != static_cast<std::size_t>((L + 1) * (L + 2))) {
    throw std::invalid_argument("belief matrix must have (L+1)*(L+2) entries");
  }
}

BeliefMatrix BeliefMatrix::compliant(const SocialNorm& norm) {
  const int L = norm.L();
  BeliefMatrix O(L, std::vector<double>(static_cast<std::size_t>((L + 1) * (L + 2)), 0.0));
  for (Reputation rep = 0; rep <= L; ++rep) O.at(rep, norm.prescribed_threshold(rep)) = 1.0;
  return O;
}

BeliefMatrix BeliefMatrix::uniform(int L) {
  return BeliefMatrix(L, std::vector<double>(static_cast<std::size_t>((L + 1) * (L + 2)),
                                             1.0 / static_cast<double>(L + 2)));
}

std::size_t BeliefMatrix::index(Reputation rep, int threshold) const {
  if (rep < 0 || rep > L_ || threshold < 0 || threshold > L_ + 1) {
    throw std::out_of_range("belief index (" + std::to_string(rep) + "," + std::to_string(threshold) +
                            ") out of range");
  }
  return static_cast<std::size_t>(rep * (L_ + 2) + threshold);
}

double BeliefMatrix::serve_probability(Reputation server_rep, Reputation client_rep) const {
  double p = 0.0;
  for (int l = 0; l <= client_rep; ++l) p += at(server_rep, l);
  return p;
}

double BeliefMatrix::max_row_error() const {
  double worst = 0.0;
  for (Reputation rep = 0; rep <= L_; ++rep) {
    double sum = 0.0;
    for (int l = 0; l <= L_ + 1; ++l) sum += at(rep, l);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

void BeliefMatrix::check_stochastic(double tol) const {
  for (double v : rows_) {
    if (v < -tol || !std::isfinite(v)) throw std::invalid_argument("belief matrix has a negative entry");
  }
  if (max_row_error() > tol) throw std::invalid_argument("belief matrix rows are not stochastic");
}

std::uint64_t BeliefMatrix::hash() const {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : rows_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

BeliefMatrix belief_update(BeliefMatrix O, Reputation server_rep, Reputation own_rep,
                           Contribution observed_z, std::uint64_t t) {
  const int L = O.L();
  if (t < 1) throw std::invalid_argument("transaction index t must be >= 1");
  if (own_rep < 0 || own_rep > L) throw std::out_of_range("own reputation out of range");
  if (observed_z != 0 && observed_z != 1) throw std::out_of_range("observed contribution must be 0 or 1");

  const double keep = static_cast<double>(t - 1);
  const double inv_t = 1.0 / static_cast<double>(t);
  const double lower = observed_z / static_cast<double>(own_rep + 1);
  const double upper = (1 - observed_z) / static_cast<double>(L + 1 - own_rep);
  for (int l = 0; l <= L + 1; ++l) {
    double& entry = O.at(server_rep, l);
    entry = (entry * keep + (l <= own_rep ? lower : upper)) * inv_t;
  }
  return O;
}

}  // namespace normsim
