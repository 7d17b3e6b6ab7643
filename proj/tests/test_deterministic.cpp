#include <catch_amalgamated.hpp>

#include <cmath>

#include "adfgof/deterministic.hpp"

using namespace adfgof;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Sensitivity ODE dy/dt = S'(x) y + Sdot(x), integrated jointly with x by RK4.
GridFunction sensitivity_ode(const ModelSpec& m, double theta, const TimeGrid& grid) {
  GridFunction y(grid);
  double x = m.x0, s = 0.0;
  const double h = grid.dt();
  auto fx = [&](double xv) { return m.drift(theta, xv); };
  auto fy = [&](double xv, double yv) { return m.drift_dx(theta, xv) * yv + m.drift_dtheta(theta, xv); };
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    const double k1 = fx(x), l1 = fy(x, s);
    const double k2 = fx(x + 0.5 * h * k1), l2 = fy(x + 0.5 * h * k1, s + 0.5 * h * l1);
    const double k3 = fx(x + 0.5 * h * k2), l3 = fy(x + 0.5 * h * k2, s + 0.5 * h * l2);
    const double k4 = fx(x + h * k3), l4 = fy(x + h * k3, s + h * l3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    s += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
    y[i + 1] = s;
  }
  return y;
}

}  // namespace

TEST_CASE("linear model flow against closed forms") {
  const FlowSolution f = solve_flow(linear_model(), 1.0, TimeGrid(1.0, 2000));
  CHECK_THAT(f.x.back(), WithinAbs(std::exp(1.0), 1e-8));
  CHECK_THAT(f.xdot.back(), WithinAbs(std::exp(1.0), 1e-6));
  CHECK(f.x[0] == 1.0);
  CHECK(f.xdot[0] == 0.0);
  // J = int_0^1 t^2 e^{2t} dt = (e^2 - 1) / 4
  CHECK_THAT(f.J, WithinRel((std::exp(2.0) - 1.0) / 4.0, 1e-6));
}

TEST_CASE("constant model flow") {
  const TimeGrid grid(1.0, 2000);
  const FlowSolution f = solve_flow(constant_model(), 1.0, grid);
  for (std::size_t i = 0; i < grid.size(); i += 111) {
    CHECK_THAT(f.x[i], WithinAbs(1.0 + grid.node(i), 1e-12));  // rounding summed over 2000 steps
    CHECK_THAT(f.xdot[i], WithinAbs(grid.node(i), 1e-13));
  }
  CHECK_THAT(f.J, WithinAbs(1.0 / 3.0, 1e-6));
  CHECK(f.xdot[0] == 0.0);
}

TEST_CASE("integral formula for xdot matches the sensitivity ODE") {
  const TimeGrid grid(1.5, 3000);
  for (const ModelSpec& m : {linear_model(), constant_model()}) {
    for (double theta : {0.6, 1.0, 1.7}) {
      ModelSpec mm = m;
      mm.horizon = 1.5;
      CHECK(sup_abs_diff(solve_flow(mm, theta, grid).xdot, sensitivity_ode(mm, theta, grid)) < 1e-6);
    }
  }
}

TEST_CASE("asymptotic variance") {
  SECTION("constant model is 6/5") {
    CHECK_THAT(sigma_squared(constant_model(), 1.0, TimeGrid(1.0, 2000)), WithinAbs(1.2, 1e-4));
  }
  SECTION("linear model is positive") { CHECK(sigma_squared(linear_model(), 1.0, TimeGrid(1.0, 2000)) > 0.0); }
}

TEST_CASE("normalized constant and variance are tied by C T^3 = sigma^2 J^2") {
  for (double T : {1.0, 2.0, 0.5}) {
    ModelSpec m = linear_model();
    m.horizon = T;
    const FlowSolution f = solve_flow(m, 1.2, TimeGrid(T, 2000));
    CHECK_THAT(f.C_theta * T * T * T, WithinRel(sigma_squared(m, f) * f.J * f.J, 1e-10));
    CHECK_THAT(f.J_tilde, WithinRel(f.J / T, 1e-15));
  }
}

TEST_CASE("degenerate and irregular models") {
  SECTION("drift independent of theta gives J = 0") {
    ModelSpec m = linear_model();
    m.drift = [](double, double x) { return x; };
    m.drift_dtheta = [](double, double) { return 0.0; };
    const FlowSolution f = solve_flow(m, 1.0, TimeGrid(1.0, 100));
    CHECK(f.J == 0.0);
    CHECK_THROWS_AS(sigma_squared(m, f), DegenerateModel);
  }
  SECTION("drift reaching zero along the flow") {
    ModelSpec m = linear_model();
    m.drift = [](double th, double x) { return th - x; };
    CHECK_THROWS_AS(solve_flow(m, 1.0, TimeGrid(1.0, 100)), RegularityViolation);
  }
  SECTION("theta outside the open interval") {
    CHECK_THROWS_AS(solve_flow(linear_model(), 2.0, TimeGrid(1.0, 100)), ConfigError);
  }
}
