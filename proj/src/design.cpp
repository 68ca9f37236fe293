#include "normsim/design.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace normsim {

AbsorbingBounds absorbing_bounds(const SocialNorm& norm) {
  const CommunityParams& p = norm.params();
  const double dh = std::pow(p.delta, norm.h());
  const double n1 = p.N - 1;
  AbsorbingBounds out;
  out.b_lower = (1.0 - p.delta) * p.c / (p.delta * (p.b - p.c)) * n1 + 1.0;
  out.b_upper = (1.0 - dh) * p.c / (dh * (p.b - p.c)) * n1;
  return out;
}

double design_gap(const CommunityParams& p, double H) {
  const double dH = std::pow(p.delta, H);
  return dH * p.b - std::pow(p.delta, H - 1.0) * p.c - (1.0 - dH) * p.c * H;
}

bool feasibility_test(const CommunityParams& params, int h, bool boundary_lenient) {
  if (!(params.delta > params.c / params.b)) return false;
  const double g = design_gap(params, h);
  return boundary_lenient ? g >= 0.0 : g > 0.0;
}

std::optional<double> solve_H(const CommunityParams& params, double abs_tol) {
  if (!(params.delta > params.c / params.b)) return std::nullopt;
  const double g1 = design_gap(params, 1.0);
  if (g1 < 0.0) return std::nullopt;
  if (g1 == 0.0) return 1.0;
  double lo = 1.0;
  double hi = 2.0;
  while (design_gap(params, hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    if (design_gap(params, mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

DesignVerdict design_verdict(const SocialNorm& norm, bool boundary_lenient) {
  const CommunityParams& p = norm.params();
  DesignVerdict v;
  v.delta_ok = p.delta > p.c / p.b;
  v.H = solve_H(p);
  for (int h = 1; h <= p.L; ++h) {
    if (feasibility_test(p, h, boundary_lenient)) v.max_feasible_h = h;
  }
  v.unique_ssc_is_muN = feasibility_test(p, norm.h(), boundary_lenient);
  return v;
}

BasinCosts basin_costs(const SocialNorm& norm) {
  const AbsorbingBounds bounds = absorbing_bounds(norm);
  BasinCosts costs;
  costs.escape_mu0 = static_cast<long>(std::ceil(bounds.b_upper)) * norm.h();
  costs.escape_muN = norm.N() - static_cast<long>(std::floor(bounds.b_lower));
  return costs;
}

std::vector<RegionCell> feasible_region_grid(const std::vector<double>& delta_grid,
                                             const std::vector<double>& cb_grid, int L, bool boundary_lenient) {
  if (delta_grid.empty() || cb_grid.empty()) throw ConfigError("design grids must be nonempty");
  if (L < 1) throw ConfigError("L must be >= 1");
  std::vector<RegionCell> cells;
  cells.reserve(delta_grid.size() * cb_grid.size());
  for (double delta : delta_grid) {
    if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("delta grid values must lie in [0,1)");
    for (double cb : cb_grid) {
      if (!(cb > 0.0 && cb < 1.0)) throw ConfigError("c/b grid values must lie in (0,1)");
      CommunityParams p;
      p.L = L;
      p.b = 1.0;
      p.c = cb;
      p.delta = delta;
      RegionCell cell{delta, cb, solve_H(p), std::nullopt};
      for (int h = 1; h <= L; ++h) {
        if (feasibility_test(p, h, boundary_lenient)) cell.max_feasible_h = h;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells) {
  os << "delta,c_over_b,H,max_feasible_h\n";
  os << std::setprecision(17);
  for (const RegionCell& cell : cells) {
    os << cell.delta << ',' << cell.c_over_b << ',';
    if (cell.H) os << *cell.H;
    else os << "none";
    os << ',';
    if (cell.max_feasible_h) os << *cell.max_feasible_h;
    else os << "none";
    os << '\n';
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::istringstream is(text);
      std::string a, b, s;
      std::getline(is, a, ':');
      std::getline(is, b, ':');
      std::getline(is, s, ':');
      const double lo = std::stod(a), hi = std::stod(b), step = std::stod(s);
      if (!(step > 0.0) || hi < lo) throw ConfigError("grid '" + text + "' needs lo <= hi and step > 0");
      const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
      for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
      std::istringstream is(text);
      std::string item;
      while (std::getline(is, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse grid '" + text + "'");
  }
  if (out.empty()) throw ConfigError("grid '" + text + "' is empty");
  return out;
}

}  // namespace normsim
