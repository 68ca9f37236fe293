#include "normsim/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace normsim {

void CommunityParams::validate() const {
  std::ostringstream err;
  if (N < 2) err << "N must be >= 2 (got " << N << ")";
  else if (L < 1) err << "L must be >= 1 (got " << L << ")";
  else if (!(c > 0.0)) err << "c must be > 0 (got " << c << ")";
  else if (!(b > c)) err << "b must exceed c (got b=" << b << ", c=" << c << ")";
  else if (!(delta >= 0.0 && delta < 1.0)) err << "delta must lie in [0,1) (got " << delta << ")";
  else if (!(epsilon >= 0.0 && epsilon < 0.5)) err << "epsilon must lie in [0,0.5) (got " << epsilon << ")";
  else if (!(gamma > 0.0 && gamma <= 1.0)) err << "gamma must lie in (0,1] (got " << gamma << ")";
  else return;
  throw ConfigError(err.str());
}

SocialNorm::SocialNorm(CommunityParams params, int h) : params_(params), h_(h) {
  params_.validate();
  // h = 0 and h = L+1 give no differential service and cannot be enforced.
  if (h < 1 || h > params_.L) {
    throw ConfigError("social threshold h must lie in {1,...,L}; got h=" + std::to_string(h) +
                      " with L=" + std::to_string(params_.L));
  }
}

int SocialNorm::prescribed_threshold(Reputation server_rep) const {
  check_reputation(server_rep);
  return server_rep < h_ ? 0 : h_;
}

SocialNorm SocialNorm::with_delta(double delta) const {
  CommunityParams p = params_;
  p.delta = delta;
  return SocialNorm(p, h_);
}

SocialNorm SocialNorm::with_benefit(double b) const {
  CommunityParams p = params_;
  p.b = b;
  return SocialNorm(p, h_);
}

SocialNorm SocialNorm::with_epsilon(double epsilon) const {
  CommunityParams p = params_;
  p.epsilon = epsilon;
  return SocialNorm(p, h_);
}

void SocialNorm::check_reputation(Reputation rep) const {
  if (rep < 0 || rep > params_.L) {
    throw std::out_of_range("reputation " + std::to_string(rep) + " outside {0,...," +
                            std::to_string(params_.L) + "}");
  }
}

Contribution strategy_serves(const ThresholdStrategy& s, Reputation client_rep, int L) {
  if (client_rep < 0 || client_rep > L) {
    throw std::out_of_range("client reputation " + std::to_string(client_rep) + " outside {0,...," +
                            std::to_string(L) + "}");
  }
  if (s.threshold() < 0 || s.threshold() > L + 1) {
    throw std::out_of_range("threshold " + std::to_string(s.threshold()) + " outside {0,...," +
                            std::to_string(L + 1) + "}");
  }
  return client_rep >= s.threshold() ? 1 : 0;
}

Contribution social_rule(const SocialNorm& norm, Reputation server_rep, Reputation client_rep) {
  norm.check_reputation(server_rep);
  norm.check_reputation(client_rep);
  if (server_rep < norm.h()) return 1;
  return client_rep >= norm.h() ? 1 : 0;
}

Reputation reputation_update(const SocialNorm& norm, Reputation server_rep, Reputation client_rep,
                             Contribution reported_z) {
  if (reported_z != 0 && reported_z != 1) {
    throw std::out_of_range("reported contribution must be 0 or 1");
  }
  if (reported_z == social_rule(norm, server_rep, client_rep)) {
    return std::min(norm.L(), server_rep + 1);
  }
  return 0;
}

}  // namespace normsim
