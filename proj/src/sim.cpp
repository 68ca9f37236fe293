#include "normsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace normsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int random_index(std::mt19937_64& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

double draw_benefit(const CommunitySpec& spec, std::mt19937_64& rng) {
  if (spec.b_variance <= 0.0) return spec.params.b;
  std::normal_distribution<double> normal(spec.params.b, std::sqrt(spec.b_variance));
  return std::max(normal(rng), spec.params.c + 1e-6);
}

}  // namespace

std::mt19937_64 period_rng(std::uint64_t seed, std::uint64_t period) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(period + 0x51a3ULL)));
}

std::vector<int> random_derangement(int N, std::mt19937_64& rng) {
  if (N < 2) throw ConfigError("matching needs N >= 2");
  std::vector<int> server(static_cast<std::size_t>(N));
  std::iota(server.begin(), server.end(), 0);
  std::shuffle(server.begin(), server.end(), rng);
  // Swap repair: trading a fixed point with any other slot removes it without creating one.
  for (int i = 0; i < N; ++i) {
    if (server[static_cast<std::size_t>(i)] != i) continue;
    int j = random_index(rng, N - 1);
    if (j >= i) ++j;
    std::swap(server[static_cast<std::size_t>(i)], server[static_cast<std::size_t>(j)]);
  }
  return server;
}

Configuration census(const std::vector<UserState>& users, int L) {
  std::vector<int> counts(static_cast<std::size_t>(L + 1), 0);
  for (const UserState& u : users) ++counts.at(static_cast<std::size_t>(u.reputation));
  return Configuration(std::move(counts));
}

PeriodMetrics run_period(std::vector<UserState>& users, const SocialNorm& norm, std::mt19937_64& rng) {
  const int N = static_cast<int>(users.size());
  if (N != norm.N()) throw std::invalid_argument("user count does not match N");
  const CommunityParams& p = norm.params();
  const std::vector<int> server_of = random_derangement(N, rng);
  std::bernoulli_distribution flip(p.epsilon);

  PeriodMetrics m;
  std::vector<Reputation> next(static_cast<std::size_t>(N));
  double welfare = 0.0;
  for (int client = 0; client < N; ++client) {
    const int server = server_of[static_cast<std::size_t>(client)];
    const UserState& s = users[static_cast<std::size_t>(server)];
    const UserState& c = users[static_cast<std::size_t>(client)];
    const Contribution z = strategy_serves(s.strategy, c.reputation, p.L);
    const Contribution reported = flip(rng) ? 1 - z : z;
    const Reputation updated = reputation_update(norm, s.reputation, c.reputation, reported);
    next[static_cast<std::size_t>(server)] = updated;
    if (reported != social_rule(norm, s.reputation, c.reputation)) ++m.resets;
    if (z == 1) {
      ++m.services_rendered;
      welfare += c.benefit - p.c;
    }
  }
  // Clients learn about their servers from what they actually received.
  for (int client = 0; client < N; ++client) {
    UserState& c = users[static_cast<std::size_t>(client)];
    if (!c.beliefs) continue;
    const UserState& s = users[static_cast<std::size_t>(server_of[static_cast<std::size_t>(client)])];
    const Contribution z = strategy_serves(s.strategy, c.reputation, p.L);
    const std::uint64_t t = ++c.beliefs->observations(s.reputation);
    c.beliefs = belief_update(std::move(*c.beliefs), s.reputation, c.reputation, z, t);
  }
  for (int i = 0; i < N; ++i) users[static_cast<std::size_t>(i)].reputation = next[static_cast<std::size_t>(i)];
  m.configuration = census(users, p.L);
  m.social_welfare = welfare / N;
  return m;
}

int BestResponseCache::threshold(const SocialNorm& norm, const Configuration& mu, const UserState& user) {
  const SocialNorm personal = norm.with_delta(user.delta).with_benefit(user.benefit);
  const OpponentConfig eta = opponent_of(mu, user.reputation);
  const auto rep = static_cast<std::size_t>(user.reputation);
  if (user.beliefs) {
    SolveOptions opts;
    opts.beliefs = &*user.beliefs;
    ++solves_;
    return solve_value_iteration(personal, eta, opts).policy[rep];
  }
  Key key{mu.counts(), user.reputation, user.delta, user.benefit};
  if (const auto it = memo_.find(key); it != memo_.end()) {
    ++hits_;
    return it->second;
  }
  if (memo_.size() >= capacity_) memo_.clear();
  ++solves_;
  const int t = solve_value_iteration(personal, eta).policy[rep];
  memo_.emplace(std::move(key), t);
  return t;
}

int run_adaptation(std::vector<UserState>& users, const SocialNorm& norm, const Configuration& mu,
                   std::mt19937_64& rng, BestResponseCache& cache, std::optional<double> gamma) {
  const double rate = gamma.value_or(norm.params().gamma);
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("adaptation rate must lie in [0,1]");
  std::bernoulli_distribution adapt(rate);
  int adapted = 0;
  for (UserState& u : users) {
    if (!adapt(rng)) continue;
    u.strategy = ThresholdStrategy(cache.threshold(norm, mu, u));
    ++adapted;
  }
  return adapted;
}

std::vector<UserState> initial_users(const CommunitySpec& spec, std::mt19937_64& rng) {
  const CommunityParams& p = spec.params;
  const SocialNorm norm(p, spec.h);
  std::vector<GroupSpec> groups = spec.groups;
  if (groups.empty()) groups.push_back({p.N, p.delta});
  std::vector<UserState> users;
  users.reserve(static_cast<std::size_t>(p.N));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int i = 0; i < groups[g].size; ++i) {
      UserState u;
      switch (spec.initial) {
        case InitialMode::Uniform: u.reputation = random_index(rng, p.L + 1); break;
        case InitialMode::AllTop: u.reputation = p.L; break;
        case InitialMode::AllZero: u.reputation = 0; break;
      }
      u.strategy = ThresholdStrategy(norm.prescribed_threshold(u.reputation));
      u.delta = groups[g].delta;
      u.benefit = p.b;
      u.group = static_cast<int>(g);
      if (spec.adaptive_beliefs) u.beliefs = BeliefMatrix::compliant(norm);
      users.push_back(std::move(u));
    }
  }
  if (static_cast<int>(users.size()) != p.N) throw ConfigError("group sizes must add up to N");
  return users;
}

std::optional<std::uint64_t> convergence_period(const std::vector<PeriodMetrics>& samples, int N, int L,
                                                double tail_mean_top, double band) {
  std::optional<std::uint64_t> since;
  for (const PeriodMetrics& m : samples) {
    const double top = static_cast<double>(m.configuration.count(L)) / N;
    if (std::abs(top - tail_mean_top) <= band) {
      if (!since) since = m.period;
    } else {
      since.reset();
    }
  }
  return since;
}

RunResult run_community(const CommunitySpec& spec, const RunOptions& options, std::uint64_t seed) {
  spec.params.validate();
  if (options.sample_stride == 0) throw ConfigError("sample_stride must be positive");
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0)) throw ConfigError("tail_fraction must lie in (0,1]");
  const SocialNorm norm(spec.params, spec.h);
  const int N = spec.params.N;
  const int L = spec.params.L;

  std::mt19937_64 init = period_rng(seed, ~std::uint64_t{0});
  std::vector<UserState> users = initial_users(spec, init);
  const int groups = std::max<int>(1, static_cast<int>(spec.groups.size()));
  std::vector<int> group_size(static_cast<std::size_t>(groups), 0);
  for (const UserState& u : users) ++group_size[static_cast<std::size_t>(u.group)];

  BestResponseCache cache;
  RunResult out;
  Configuration mu = census(users, L);
  std::vector<std::vector<double>> defection_samples(static_cast<std::size_t>(groups));
  std::vector<std::vector<double>> zero_samples(static_cast<std::size_t>(groups));

  for (std::uint64_t t = 1; t <= options.periods; ++t) {
    std::mt19937_64 rng = period_rng(seed, t);
    if (spec.b_variance > 0.0) {
      for (UserState& u : users) u.benefit = draw_benefit(spec, rng);
    }
    run_adaptation(users, norm, mu, rng, cache);
    PeriodMetrics m = run_period(users, norm, rng);
    m.period = t;
    mu = m.configuration;
    if (options.record_occupancy && t > options.burn_in) ++out.occupancy[mu.counts()];
    if (t % options.sample_stride == 0) {
      std::vector<int> defectors(static_cast<std::size_t>(groups), 0);
      std::vector<int> zeros(static_cast<std::size_t>(groups), 0);
      for (const UserState& u : users) {
        if (u.strategy.threshold() == L + 1) ++defectors[static_cast<std::size_t>(u.group)];
        if (u.reputation == 0) ++zeros[static_cast<std::size_t>(u.group)];
      }
      for (int g = 0; g < groups; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        const double size = std::max(1, group_size[gi]);
        defection_samples[gi].push_back(defectors[gi] / size);
        zero_samples[gi].push_back(zeros[gi] / size);
      }
      out.samples.push_back(std::move(m));
    }
  }
  out.terminal = mu;
  out.solves = cache.solves();

  const std::size_t n = out.samples.size();
  out.tail_mean_fraction.assign(static_cast<std::size_t>(L + 1), 0.0);
  out.group_defection.assign(static_cast<std::size_t>(groups), 0.0);
  out.group_zero_fraction.assign(static_cast<std::size_t>(groups), 0.0);
  if (n == 0) return out;
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(options.tail_fraction * n)));
  for (std::size_t i = n - tail; i < n; ++i) {
    for (int r = 0; r <= L; ++r) {
      out.tail_mean_fraction[static_cast<std::size_t>(r)] += out.samples[i].configuration.count(r) / static_cast<double>(N);
    }
    out.tail_mean_welfare += out.samples[i].social_welfare;
    for (std::size_t g = 0; g < static_cast<std::size_t>(groups); ++g) {
      out.group_defection[g] += defection_samples[g][i];
      out.group_zero_fraction[g] += zero_samples[g][i];
    }
  }
  for (double& x : out.tail_mean_fraction) x /= static_cast<double>(tail);
  out.tail_mean_welfare /= static_cast<double>(tail);
  for (double& x : out.group_defection) x /= static_cast<double>(tail);
  for (double& x : out.group_zero_fraction) x /= static_cast<double>(tail);
  out.convergence_period = convergence_period(out.samples, N, L, out.tail_mean_fraction.back());
  return out;
}

}  // namespace normsim
