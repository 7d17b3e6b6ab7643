#pragma once

// Minimum distance estimator: theta* = argmin_theta int_0^T (X_t - x_t(theta))^2 dt.

#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>

#include "adfgof/deterministic.hpp"
#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/model.hpp"
#include "adfgof/sde.hpp"

namespace adfgof {

struct MdeOptions {
  std::size_t n_scan = 64;
  double tolerance = 1e-10;  // final bracket width, relative to b - a
  double margin = 1e-6;      // boundary margin, relative to b - a
};

struct MdeResult {
  double theta_star = 0.0;
  double distance = 0.0;  // ||X - x(theta*)|| in L2[0, T]
  double mdeq_residual = 0.0;
  std::size_t n_evals = 0;
  bool converged = false;
  bool boundary_flag = false;  // minimizer within `margin` of a or b
};

namespace detail {

inline void require_matching_horizon(const Trajectory& traj, const ModelSpec& m) {
  if (std::abs(traj.grid.horizon() - m.horizon) > 1e-12 * m.horizon) {
    std::ostringstream os;
    os << "trajectory horizon " << traj.grid.horizon() << " does not match model horizon " << m.horizon;
    throw ConfigError(os.str());
  }
}

inline double squared_distance(const GridFunction& X, const GridFunction& x) {
  GridFunction d(X.grid());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = X[i] - x[i];
    d[i] = e * e;
  }
  return integrate(d);
}

}  // namespace detail

/// D(theta) = int_0^T (X_t - x_t(theta))^2 dt.
inline double distance_squared(const Trajectory& traj, const ModelSpec& m, double theta) {
  detail::require_matching_horizon(traj, m);
  return detail::squared_distance(traj.X, solve_path(m, theta, traj.grid));
}

/// int_0^T (X_t - x_t(theta)) xdot_t(theta) dt; equals -D'(theta)/2.
inline double mdeq_residual(const Trajectory& traj, const ModelSpec& /*m*/, const FlowSolution& flow) {
  GridFunction f(traj.grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (traj.X[i] - flow.x[i]) * flow.xdot[i];
  return integrate(f);
}

inline double mdeq_residual(const Trajectory& traj, const ModelSpec& m, double theta) {
  detail::require_matching_horizon(traj, m);
  return mdeq_residual(traj, m, solve_flow(m, theta, traj.grid));
}

/// Coarse scan over n_scan equispaced points of [a + margin, b - margin], then
/// golden-section refinement around the best scan point. Ties go to the first
/// scan minimum.
inline MdeResult estimate(const Trajectory& traj, const ModelSpec& m, const MdeOptions& opt = {}) {
  detail::require_matching_horizon(traj, m);
  if (opt.n_scan < 3) throw ConfigError("estimate: n_scan must be >= 3");
  const double width = m.theta_bounds.width();
  const double lo = m.theta_bounds.lower + opt.margin * width;
  const double hi = m.theta_bounds.upper - opt.margin * width;

  std::map<double, double> memo;
  auto D = [&](double th) {
    auto it = memo.find(th);
    if (it != memo.end()) return it->second;
    const double v = detail::squared_distance(traj.X, solve_path(m, th, traj.grid));
    memo.emplace(th, v);
    return v;
  };

  const std::size_t n = opt.n_scan;
  auto scan_point = [&](std::size_t k) { return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1); };
  std::size_t best = 0;
  double best_val = D(scan_point(0));
  for (std::size_t k = 1; k < n; ++k) {
    const double v = D(scan_point(k));
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }

  double a = scan_point(best == 0 ? 0 : best - 1);
  double b = scan_point(best + 1 >= n ? n - 1 : best + 1);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = D(c);
  double fd = D(d);
  const double target = opt.tolerance * width;
  std::size_t iter = 0;
  while (b - a > target && iter < 200) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = D(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = D(d);
    }
    ++iter;
  }

  // best of the final bracket and the scan minimum
  double theta = 0.5 * (a + b);
  double val = D(theta);
  for (double cand : {a, b, c, d, scan_point(best)}) {
    const double v = D(cand);
    if (v < val) {
      val = v;
      theta = cand;
    }
  }

  MdeResult r;
  r.theta_star = theta;
  r.distance = std::sqrt(val);
  r.converged = b - a <= target;
  r.boundary_flag = theta <= lo + opt.margin * width || theta >= hi - opt.margin * width;
  r.n_evals = memo.size();
  r.mdeq_residual = mdeq_residual(traj, m, solve_flow(m, theta, traj.grid));
  return r;
}

}  // namespace adfgof
