#pragma once

// Noise-free flow x_t(theta), its parameter sensitivity xdot_t(theta), and the
// scalar constants J, J~, C and sigma^2 built from them.

#include <cmath>
#include <cstddef>
#include <sstream>

#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/model.hpp"
#include "adfgof/ode.hpp"

namespace adfgof {

struct FlowSolution {
  double theta = 0.0;
  GridFunction x;     // x_t(theta) on [0, T]
  GridFunction xdot;  // d x_t / d theta
  double J = 0.0;        // int_0^T xdot^2 dt
  double J_tilde = 0.0;  // int_0^1 xdot_{vT}^2 dv  (= J / T)
  double C_theta = 0.0;  // normalizer that makes int_0^1 g^2 = 1
};

namespace detail {

inline void require_positive_drift(const ModelSpec& m, double theta, const GridFunction& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = m.drift(theta, x[i]);
    if (!(s > 0.0)) {
      std::ostringstream os;
      os << "model '" << m.name << "': drift " << s << " <= 0 along the flow at t=" << x.grid().node(i)
         << " (theta=" << theta << ", x=" << x[i] << ")";
      throw RegularityViolation(os.str());
    }
  }
}

/// int_v^1 S(x_{zT}) xdot_{zT} dz on the unit grid, for an arbitrary path of x-values.
inline GridFunction tail_weight(const GridFunction& drift_on_path, const GridFunction& xdot) {
  const TimeGrid unit = drift_on_path.grid().normalized();
  GridFunction prod(unit);
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = drift_on_path[i] * xdot[i];
  return reverse_cumulative_integral(prod);
}

/// int_0^1 S^{-2} (tail weight)^2 dv on the unit grid.
inline double normalizer(const GridFunction& drift_on_path, const GridFunction& tail) {
  GridFunction f(tail.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = tail[i] / drift_on_path[i];
    f[i] = r * r;
  }
  return integrate(f);
}

}  // namespace detail

/// Deterministic path only (RK4); no sensitivity, no positivity check.
inline GridFunction solve_path(const ModelSpec& m, double theta, const TimeGrid& grid) {
  return rk4([&](double x) { return m.drift(theta, x); }, m.x0, grid);
}

inline FlowSolution solve_flow(const ModelSpec& m, double theta, const TimeGrid& grid) {
  m.require_theta(theta);
  FlowSolution f;
  f.theta = theta;
  f.x = solve_path(m, theta, grid);
  detail::require_positive_drift(m, theta, f.x);

  // xdot_t = S(x_t) * int_0^t Sdot(x_v) / S(x_v) dv
  GridFunction drift(grid);
  GridFunction ratio(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    drift[i] = m.drift(theta, f.x[i]);
    ratio[i] = m.drift_dtheta(theta, f.x[i]) / drift[i];
  }
  const GridFunction log_sens = cumulative_integral(ratio);
  f.xdot = GridFunction(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.xdot[i] = drift[i] * log_sens[i];

  f.J = integrate(transform(f.xdot, [](double v) { return v * v; }));
  f.J_tilde = f.J / grid.horizon();
  const GridFunction tail = detail::tail_weight(drift, f.xdot);
  f.C_theta = detail::normalizer(drift, tail);
  return f;
}

/// Asymptotic variance of eps^{-1}(theta* - theta):
///   J^{-2} int_0^T S(x_v)^{-2} (int_v^T S(x_s) xdot_s ds)^2 dv
inline double sigma_squared(const ModelSpec& m, const FlowSolution& flow) {
  if (!(flow.J > 0.0)) throw DegenerateModel("sigma_squared: J(theta) = 0, the flow does not depend on theta");
  const TimeGrid& grid = flow.x.grid();
  GridFunction weight(grid);
  GridFunction drift(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    drift[i] = m.drift(flow.theta, flow.x[i]);
    weight[i] = drift[i] * flow.xdot[i];
  }
  const GridFunction tail = reverse_cumulative_integral(weight);
  GridFunction integrand(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = tail[i] / drift[i];
    integrand[i] = r * r;
  }
  return integrate(integrand) / (flow.J * flow.J);
}

inline double sigma_squared(const ModelSpec& m, double theta, const TimeGrid& grid) {
  return sigma_squared(m, solve_flow(m, theta, grid));
}

}  // namespace adfgof
