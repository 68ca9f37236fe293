#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "normsim/norms.hpp"

namespace normsim {

// Range of n(L) over which a census with users only at 0 and L is absorbing.
struct AbsorbingBounds {
  double b_lower;  // good users comply iff n(L) > b_lower
  double b_upper;  // bad users defect iff n(L) < b_upper
};

AbsorbingBounds absorbing_bounds(const SocialNorm& norm);

// g(H) = delta^H b - delta^(H-1) c - (1 - delta^H) c H; decreasing in H when delta b > c.
double design_gap(const CommunityParams& params, double H);

// delta > c/b together with g(h) > 0 (or >= 0 when lenient).
bool feasibility_test(const CommunityParams& params, int h, bool boundary_lenient = false);

// Root of g on [1, inf). Empty when delta <= c/b or g(1) < 0.
std::optional<double> solve_H(const CommunityParams& params, double abs_tol = 1e-9);

struct DesignVerdict {
  bool delta_ok = false;
  std::optional<double> H;
  std::optional<int> max_feasible_h;
  bool unique_ssc_is_muN = false;  // for the norm's own h
};
DesignVerdict design_verdict(const SocialNorm& norm, bool boundary_lenient = false);

// Number of report errors needed to leave each absorbing end point, with integer
// rounding: escape from mu_0 costs ceil(B_upper) * h, escape from mu_N costs N - floor(B_lower).
struct BasinCosts {
  long escape_mu0;
  long escape_muN;
};
BasinCosts basin_costs(const SocialNorm& norm);

struct RegionCell {
  double delta;
  double c_over_b;
  std::optional<double> H;
  std::optional<int> max_feasible_h;
};

// Cells are row-major: outer loop over delta, inner over c/b. Benefit is fixed at 1.
std::vector<RegionCell> feasible_region_grid(const std::vector<double>& delta_grid,
                                             const std::vector<double>& cb_grid, int L,
                                             bool boundary_lenient = false);

void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells);

// "lo:hi:step" (inclusive, tolerant of rounding) or a comma list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace normsim
