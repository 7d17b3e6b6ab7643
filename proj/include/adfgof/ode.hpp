#pragma once

#include <cstddef>

#include "adfgof/grid.hpp"

namespace adfgof {

/// Classical fourth-order Runge-Kutta for the autonomous scalar ODE dx/dt = f(x),
/// stepping exactly on the grid nodes.
template <class Rhs>
GridFunction rk4(Rhs&& f, double x0, const TimeGrid& grid) {
  GridFunction x(grid);
  const double h = grid.dt();
  double xi = x0;
  x[0] = xi;
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    const double k1 = f(xi);
    const double k2 = f(xi + 0.5 * h * k1);
    const double k3 = f(xi + 0.5 * h * k2);
    const double k4 = f(xi + h * k3);
    xi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x[i + 1] = xi;
  }
  return x;
}

}  // namespace adfgof
