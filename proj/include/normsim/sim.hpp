#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "normsim/belief.hpp"
#include "normsim/bestresponse.hpp"
#include "normsim/norms.hpp"
#include "normsim/payoff.hpp"

namespace normsim {

struct UserState {
  Reputation reputation = 0;
  ThresholdStrategy strategy{0};
  double delta = 0.5;
  double benefit = 2.0;                    // this period's b (time-varying mode redraws it)
  std::optional<BeliefMatrix> beliefs;     // adaptive-belief users only
  int group = 0;
};

struct PeriodMetrics {
  std::uint64_t period = 0;
  Configuration configuration{std::vector<int>{0, 0}};
  double social_welfare = 0.0;  // sum over services of (b_client - c), divided by N
  int services_rendered = 0;
  int resets = 0;
};

// Generator for one period of one run: a fixed function of (seed, period), so a run can
// be replayed from any period and its output does not depend on scheduling.
std::mt19937_64 period_rng(std::uint64_t seed, std::uint64_t period);

// server_of[i] is the user who serves requester i; a permutation with no fixed point.
std::vector<int> random_derangement(int N, std::mt19937_64& rng);

Configuration census(const std::vector<UserState>& users, int L);

// One service period: matching, realized service, report errors, reputation updates and
// belief updates. Strategies are left unchanged.
PeriodMetrics run_period(std::vector<UserState>& users, const SocialNorm& norm, std::mt19937_64& rng);

// Best-response cache for one community. Fixed-belief solves are keyed by
// (census, own reputation, delta, b); belief-holding users are solved individually.
class BestResponseCache {
 public:
  explicit BestResponseCache(std::size_t capacity = 200'000) : capacity_(capacity) {}
  int threshold(const SocialNorm& norm, const Configuration& mu, const UserState& user);
  std::size_t solves() const { return solves_; }
  std::size_t hits() const { return hits_; }

 private:
  using Key = std::tuple<std::vector<int>, int, double, double>;
  std::map<Key, int> memo_;
  std::size_t capacity_;
  std::size_t solves_ = 0;
  std::size_t hits_ = 0;
};

// Each user independently, with probability gamma, switches to its best response at its
// current reputation against the posted census mu. Returns the number of adapting users.
// gamma defaults to the norm's rate; an explicit value may be 0 (frozen strategies).
int run_adaptation(std::vector<UserState>& users, const SocialNorm& norm, const Configuration& mu,
                   std::mt19937_64& rng, BestResponseCache& cache, std::optional<double> gamma = std::nullopt);

enum class InitialMode { Uniform, AllTop, AllZero };

struct GroupSpec {
  int size = 0;
  double delta = 0.5;
};

// A single community: the unit every experiment mode runs one or more of.
struct CommunitySpec {
  CommunityParams params;
  int h = 1;
  std::vector<GroupSpec> groups;   // empty: one group of N users with params.delta
  double b_variance = 0.0;         // > 0: b redrawn per user per period
  bool adaptive_beliefs = false;
  InitialMode initial = InitialMode::Uniform;
};

struct RunOptions {
  std::uint64_t periods = 100'000;
  std::uint64_t sample_stride = 1'000;
  double tail_fraction = 0.5;
  std::uint64_t burn_in = 0;        // periods excluded from occupancy counts
  bool record_occupancy = false;    // count visits to every census (small N only)
};

struct RunResult {
  std::vector<PeriodMetrics> samples;
  std::vector<double> tail_mean_fraction;   // per reputation
  double tail_mean_welfare = 0.0;
  std::optional<std::uint64_t> convergence_period;
  std::vector<double> group_defection;      // tail mean fraction playing serve-nobody, per group
  std::vector<double> group_zero_fraction;  // tail mean fraction at reputation 0, per group
  Configuration terminal{std::vector<int>{0, 0}};
  std::map<std::vector<int>, std::uint64_t> occupancy;
  std::size_t solves = 0;
};

std::vector<UserState> initial_users(const CommunitySpec& spec, std::mt19937_64& rng);

RunResult run_community(const CommunitySpec& spec, const RunOptions& options, std::uint64_t seed);

// First sampled period after which n(L)/N stays within +-band of its tail mean.
std::optional<std::uint64_t> convergence_period(const std::vector<PeriodMetrics>& samples, int N, int L,
                                                double tail_mean_top, double band = 0.05);

// ---- experiment specs (JSON) ----

inline constexpr int kSchemaVersion = 1;

struct ExperimentSpec {
  std::string mode;  // evolution | delta-sweep | mixed | varying-b | adaptive-belief | design | chain | bestresponse
  CommunityParams params;
  int h = 1;
  std::optional<std::uint64_t> seed;
  RunOptions run;
  InitialMode initial = InitialMode::Uniform;
  std::vector<double> deltas;      // delta-sweep
  std::vector<double> benefits;    // delta-sweep, optional extra axis
  std::vector<GroupSpec> groups;   // mixed
  double b_variance = 0.0;         // varying-b
  std::vector<double> eps_ladder;  // chain
  std::string delta_grid;          // design
  std::string cb_grid;             // design
  bool boundary_lenient = false;   // design
  std::vector<int> eta;            // bestresponse
};

// Parses and validates; throws ConfigError naming the offending key.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ExperimentRun {
  std::string label;
  CommunitySpec community;
  RunResult result;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::uint64_t seed = 0;
  std::vector<ExperimentRun> runs;
};

// Simulation modes only.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t seed);

void write_timeseries_csv(std::ostream& os, const ExperimentResult& result);
nlohmann::json summary_json(const ExperimentResult& result);

// Throws ConfigError unless j has the layout summary_json emits for kSchemaVersion.
void check_summary_schema(const nlohmann::json& j);

// Writes timeseries.csv and summary.json into dir (created if needed).
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace normsim
