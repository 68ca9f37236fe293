// Acceptance run: one PASS/FAIL line per criterion. Criteria listed in kKnownGaps fail for
// reasons recorded in the project notes; they still print FAIL but do not fail the process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "normsim/sim.hpp"
#include "normsim/verify.hpp"

using namespace normsim;

namespace {

const std::map<int, std::string> kKnownGaps = {
    {4, "finite-N chain disagrees with the large-N basin comparison"},
    {5, "report errors keep about 2*eps of users climbing, above the 5% interior bound"},
    {8, "mixed and pure communities all collapse to defection under the stated model"},
    {11, "adaptive beliefs settle well below the fixed-belief band"},
};

constexpr int kSeeds = 5;

struct Outcome {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

Outcome from_check(int id, const CheckResult& r) { return {id, r.name, r.passed, r.detail, r.notes}; }

CommunityParams fig3_params(double eps) {
  return CommunityParams{500, 3, 3.0, 1.0, 0.5, eps, 0.1};
}

double interior(const std::vector<double>& fractions) {
  double m = 0.0;
  for (std::size_t r = 1; r + 1 < fractions.size(); ++r) m += fractions[r];
  return m;
}

struct Fig3Runs {
  std::vector<RunResult> fixed;
  std::vector<RunResult> adaptive;
};

// Fixed- and adaptive-belief communities share a seed per experiment.
Fig3Runs run_fig3() {
  ExperimentSpec spec;
  spec.mode = "adaptive-belief";
  spec.params = fig3_params(0.05);
  spec.h = 1;
  spec.run.periods = 100'000;
  spec.run.sample_stride = 1'000;
  Fig3Runs out;
  for (int s = 1; s <= kSeeds; ++s) {
    ExperimentResult r = run_experiment(spec, static_cast<std::uint64_t>(s));
    out.fixed.push_back(std::move(r.runs[0].result));
    out.adaptive.push_back(std::move(r.runs[1].result));
  }
  return out;
}

Outcome criterion5(const Fig3Runs& runs) {
  std::vector<double> top, inner;
  for (const RunResult& r : runs.fixed) {
    top.push_back(r.tail_mean_fraction.back());
    inner.push_back(interior(r.tail_mean_fraction));
  }
  Outcome o{5, "scaled evolution, eps=0.05", true, "", {}};
  o.detail = "n(L)/N " + fmt(mean(top)) + " (band [0.75, 0.98]), interior mass " + fmt(mean(inner)) + " (limit 0.05), " +
             std::to_string(kSeeds) + " seeds";
  if (!(mean(top) >= 0.75 && mean(top) <= 0.98)) {
    o.passed = false;
    o.notes.push_back("n(L)/N outside the band");
  }
  if (!(mean(inner) < 0.05)) {
    o.passed = false;
    o.notes.push_back("interior mass " + fmt(mean(inner)) + " >= 0.05");
  }
  return o;
}

Outcome criterion6() {
  RunOptions opts;
  opts.periods = 100'000;
  opts.sample_stride = 100;
  CommunitySpec spec;
  spec.params = fig3_params(0.2);
  spec.h = 1;
  Outcome o{6, "non-convergence at eps=0.2", true, "", {}};
  double worst = 0.0;
  for (int s = 1; s <= kSeeds; ++s) {
    const RunResult r = run_community(spec, opts, static_cast<std::uint64_t>(s));
    const std::size_t start = r.samples.size() - static_cast<std::size_t>(std::ceil(r.samples.size() * opts.tail_fraction));
    std::map<long, int> bins;
    for (std::size_t i = start; i < r.samples.size(); ++i) {
      const double frac = static_cast<double>(r.samples[i].configuration.count(3)) / 500.0;
      ++bins[std::lround(frac / 0.05)];
    }
    int largest = 0;
    for (const auto& [bin, count] : bins) largest = std::max(largest, count);
    const double share = static_cast<double>(largest) / static_cast<double>(r.samples.size() - start);
    worst = std::max(worst, share);
    if (share > 0.9) {
      o.passed = false;
      o.notes.push_back("seed " + std::to_string(s) + ": one n(L)/N bin holds " + fmt(share) + " of the tail");
    }
  }
  o.detail = "largest single-bin tail share " + fmt(worst) + " (limit 0.9), " + std::to_string(kSeeds) + " seeds";
  return o;
}

Outcome criterion7() {
  ExperimentSpec spec;
  spec.mode = "delta-sweep";
  spec.params = fig3_params(0.05);
  spec.h = 1;
  spec.run.periods = 100'000;
  spec.run.sample_stride = 1'000;
  spec.deltas = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  spec.benefits = {3.0, 5.0};
  const int seeds = 3;
  // curve[b][delta] -> per-seed terminal n(L)/N
  std::map<double, std::vector<std::vector<double>>> curve;
  for (double b : spec.benefits) curve[b].assign(spec.deltas.size(), {});
  for (int s = 1; s <= seeds; ++s) {
    const ExperimentResult r = run_experiment(spec, static_cast<std::uint64_t>(s));
    for (const ExperimentRun& run : r.runs) {
      const auto d = std::find(spec.deltas.begin(), spec.deltas.end(), run.community.params.delta) - spec.deltas.begin();
      curve[run.community.params.b][static_cast<std::size_t>(d)].push_back(run.result.tail_mean_fraction.back());
    }
  }
  Outcome o{7, "delta sweep monotonicity", true, "", {}};
  std::ostringstream detail;
  for (double b : spec.benefits) {
    detail << "b=" << b << ": [";
    int violations = 0;
    const auto& c = curve[b];
    for (std::size_t i = 0; i < c.size(); ++i) detail << (i ? ", " : "") << fmt(mean(c[i]), 3);
    detail << "] ";
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      const double drop = mean(c[i]) - mean(c[i + 1]);
      if (drop <= 0.0) continue;
      ++violations;
      const double sigma = std::hypot(std_error(c[i]), std_error(c[i + 1]));
      if (drop > 2.0 * sigma) {
        o.passed = false;
        o.notes.push_back("b=" + fmt(b) + ": drop " + fmt(drop) + " between delta=" + fmt(spec.deltas[i]) + " and " +
                          fmt(spec.deltas[i + 1]) + " exceeds 2 sigma (" + fmt(2.0 * sigma) + ")");
      }
    }
    if (violations > 1) {
      o.passed = false;
      o.notes.push_back("b=" + fmt(b) + ": " + std::to_string(violations) + " adjacent decreases");
    }
  }
  for (std::size_t i = 0; i < spec.deltas.size(); ++i) {
    const auto& lo = curve[3.0][i];
    const auto& hi = curve[5.0][i];
    const double gap = mean(lo) - mean(hi);
    if (gap > 2.0 * std::hypot(std_error(lo), std_error(hi)) && gap > 0.0) {
      o.passed = false;
      o.notes.push_back("delta=" + fmt(spec.deltas[i]) + ": b=5 below b=3 by " + fmt(gap));
    }
  }
  detail << "(" << seeds << " seeds)";
  o.detail = detail.str();
  return o;
}

Outcome criterion8() {
  ExperimentSpec spec;
  spec.mode = "mixed";
  spec.params = CommunityParams{500, 3, 2.0, 1.0, 0.5, 0.05, 0.1};
  spec.h = 2;
  spec.run.periods = 100'000;
  spec.run.sample_stride = 1'000;
  spec.groups = {{250, 0.3}, {250, 0.6}};
  std::vector<double> mixed, pure_lo, pure_hi, mixed_lo, mixed_hi;
  for (int s = 1; s <= kSeeds; ++s) {
    const ExperimentResult r = run_experiment(spec, static_cast<std::uint64_t>(s));
    const RunResult& m = r.runs[0].result;
    mixed_lo.push_back(m.group_defection[0]);
    mixed_hi.push_back(m.group_defection[1]);
    mixed.push_back(0.5 * (m.group_defection[0] + m.group_defection[1]));
    pure_lo.push_back(r.runs[1].result.group_defection[0]);
    pure_hi.push_back(r.runs[2].result.group_defection[0]);
  }
  Outcome o{8, "mixed-community orderings", true, "", {}};
  o.detail = "defection: pure(0.3) " + fmt(mean(pure_lo)) + ", pure(0.6) " + fmt(mean(pure_hi)) + ", mixed " +
             fmt(mean(mixed)) + " [impatient " + fmt(mean(mixed_lo)) + ", patient " + fmt(mean(mixed_hi)) + "], " +
             std::to_string(kSeeds) + " seeds";
  const double lo = std::min(mean(pure_lo), mean(pure_hi)), hi = std::max(mean(pure_lo), mean(pure_hi));
  if (!(mean(mixed) > lo && mean(mixed) < hi)) o.notes.push_back("mixed defection not strictly between the pure runs");
  if (!(mean(mixed_hi) > mean(pure_hi))) o.notes.push_back("patient group does not defect more than its pure run");
  if (!(mean(mixed_lo) < mean(pure_lo))) o.notes.push_back("impatient group does not defect less than its pure run");
  o.passed = o.notes.empty();
  return o;
}

Outcome criterion11(const Fig3Runs& runs) {
  const CheckResult fuzz = verify_belief_fuzz(1000);
  std::vector<double> top, conv_fixed, conv_adaptive;
  const auto conv = [](const RunResult& r) {
    return static_cast<double>(r.convergence_period.value_or(100'000));
  };
  for (std::size_t s = 0; s < runs.adaptive.size(); ++s) {
    top.push_back(runs.adaptive[s].tail_mean_fraction.back());
    conv_adaptive.push_back(conv(runs.adaptive[s]));
    conv_fixed.push_back(conv(runs.fixed[s]));
  }
  Outcome o{11, "adaptive beliefs", true, "", {}};
  o.detail = fuzz.detail + "; adaptive n(L)/N " + fmt(mean(top)) + " (band [0.75, 0.98]), convergence period " +
             fmt(mean(conv_adaptive), 6) + " vs fixed " + fmt(mean(conv_fixed), 6);
  if (!fuzz.passed) o.notes.push_back("belief rows left the simplex");
  if (!(mean(top) >= 0.75 && mean(top) <= 0.98)) o.notes.push_back("adaptive run outside the criterion-5 band");
  if (!(mean(conv_adaptive) > mean(conv_fixed))) o.notes.push_back("adaptive run does not converge later");
  o.passed = o.notes.empty();
  return o;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Outcome> outcomes;
  const auto timed = [&](auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = fn();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail += " [" + fmt(secs, 3) + " s]";
    outcomes.push_back(std::move(o));
    std::cerr << "criterion " << outcomes.back().id << " done\n";
  };

  timed([] { return from_check(1, verify_closed_form()); });
  timed([] { return from_check(2, verify_policy_structure(500, 1)); });
  timed([] { return from_check(3, verify_interior_mass(interior_mass_cells(6), {1e-2, 1e-3, 1e-4, 1e-5})); });
  timed([] { return from_check(4, verify_design_against_chain()); });
  Fig3Runs fig3;
  timed([&] {
    fig3 = run_fig3();
    return criterion5(fig3);
  });
  timed(criterion6);
  timed(criterion7);
  timed(criterion8);
  timed([] { return from_check(9, verify_design_region(20)); });
  timed([] { return from_check(10, verify_bridge()); });
  timed([&] { return criterion11(fig3); });

  std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  int unexpected = 0;
  for (const Outcome& o : outcomes) {
    const auto gap = kKnownGaps.find(o.id);
    std::cout << "criterion " << std::setw(2) << o.id << ": ";
    if (o.passed) std::cout << "PASS";
    else if (gap != kKnownGaps.end()) std::cout << "FAIL (known: " << gap->second << ")";
    else std::cout << "FAIL";
    std::cout << " - " << o.name << ": " << o.detail << '\n';
    for (const std::string& n : o.notes) std::cout << "      " << n << '\n';
    if (!o.passed && gap == kKnownGaps.end()) ++unexpected;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "total " << fmt(total, 4) << " s; " << unexpected << " unexpected failure(s)\n";
  return unexpected == 0 ? 0 : 1;
}
