#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "adfgof/mde.hpp"
#include "adfgof/parallel.hpp"

using namespace adfgof;
using Catch::Matchers::WithinAbs;

namespace {
Trajectory exact_flow_trajectory(const ModelSpec& m, double theta, const TimeGrid& grid) {
  return Trajectory{grid, solve_path(m, theta, grid), 0.0, Seed{}};
}

double l2_norm(const GridFunction& f) {
  return std::sqrt(integrate(transform(f, [](double v) { return v * v; })));
}
}  // namespace

TEST_CASE("noise-free data recovers theta") {
  const TimeGrid grid(1.0, 2000);
  SECTION("linear model, exact flow") {
    const MdeResult r = estimate(exact_flow_trajectory(linear_model(), 1.3, grid), linear_model());
    CHECK_THAT(r.theta_star, WithinAbs(1.3, 1e-6));
    CHECK(r.converged);
    CHECK_FALSE(r.boundary_flag);
  }
  SECTION("constant model, Euler path (exact for this drift)") {
    const MdeResult r = estimate(simulate(constant_model(), 1.3, 0.0, grid, Seed{}), constant_model());
    CHECK_THAT(r.theta_star, WithinAbs(1.3, 1e-6));
  }
  SECTION("linear model, Euler path: bias of order theta^2 dt / 2") {
    const MdeResult r = estimate(simulate(linear_model(), 1.3, 0.0, grid, Seed{}), linear_model());
    CHECK(std::abs(r.theta_star - 1.3) < 1e-3);
  }
}

TEST_CASE("estimate beats every scan point") {
  const ModelSpec m = linear_model();
  const TimeGrid grid(1.0, 2000);
  const Trajectory tr = simulate(m, 1.1, 0.02, grid, Seed{3, 3});
  const MdeResult r = estimate(tr, m);
  const double d_star = distance_squared(tr, m, r.theta_star);
  CHECK_THAT(std::sqrt(d_star), WithinAbs(r.distance, 1e-15));
  const double lo = 0.5 + 1.5e-6, hi = 2.0 - 1.5e-6;
  for (int k = 0; k < 64; ++k) CHECK(d_star <= distance_squared(tr, m, lo + (hi - lo) * k / 63.0));
}

TEST_CASE("estimating-equation residual") {
  const ModelSpec m = linear_model();
  const TimeGrid grid(1.0, 2000);
  const Trajectory tr = simulate(m, 1.0, 0.01, grid, Seed{4, 0});
  const MdeResult r = estimate(tr, m);

  SECTION("vanishes at an interior minimum") {
    const FlowSolution f = solve_flow(m, r.theta_star, grid);
    CHECK(std::abs(r.mdeq_residual) <= 1e-6 * l2_norm(tr.X) * l2_norm(f.xdot));
  }
  SECTION("vanishes at the truth on noise-free data") {
    CHECK(std::abs(mdeq_residual(exact_flow_trajectory(m, 1.4, grid), m, 1.4)) < 1e-12);
  }
  SECTION("equals -D'/2 by finite differences, with the matching sign") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      // keep away from theta* where D' -> 0 and a relative error is meaningless
      const double th = k % 2 == 0 ? 0.55 + 0.35 * u(rng) : 1.1 + 0.85 * u(rng);
      const double step = 1e-5;
      const double fd = (distance_squared(tr, m, th + step) - distance_squared(tr, m, th - step)) / (2 * step);
      const double res = mdeq_residual(tr, m, th);
      CHECK(std::abs(fd + 2.0 * res) <= 1e-5 * std::abs(fd));
      CHECK((res > 0) == (th < r.theta_star));
    }
  }
}

TEST_CASE("estimation error shrinks linearly in eps") {
  const ModelSpec m = linear_model();
  const TimeGrid grid(1.0, 2000);
  const std::array<double, 3> eps{0.05, 0.02, 0.01};
  std::array<double, 3> med{};
  for (std::size_t e = 0; e < eps.size(); ++e) {
    std::vector<double> err(500);
    parallel_for(err.size(), [&](std::size_t r) {
      err[r] = std::abs(estimate(simulate(m, 1.0, eps[e], grid, Seed{60, r}), m).theta_star - 1.0);
    });
    std::nth_element(err.begin(), err.begin() + 250, err.end());
    med[e] = err[250];
  }
  CHECK(med[0] > med[1]);
  CHECK(med[1] > med[2]);
  // least-squares slope of log(median) against log(eps)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t e = 0; e < 3; ++e) {
    const double x = std::log(eps[e]), y = std::log(med[e]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);
}

TEST_CASE("alternative drift leaves a large residual distance") {
  const ModelSpec m = linear_model();
  const TimeGrid grid(1.0, 2000);
  const double eps = 0.01;
  const AlternativeDrift alt = make_alternative(m, {"sin", 1.0, 0.3, 1.0, 0.0});
  double null_mean = 0.0, null_max = 0.0, alt_min = 1e300;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const double d = estimate(simulate(m, 1.0, eps, grid, Seed{70, r}), m).distance;
    null_mean += d / 20;
    null_max = std::max(null_max, d);
    alt_min = std::min(alt_min, estimate(simulate_alternative(alt, 1.0, eps, grid, Seed{71, r}), m).distance);
  }
  // the misfit of the noise-free alternative path dwarfs the noise-driven distance
  CHECK(estimate(simulate_alternative(alt, 1.0, 0.0, grid, Seed{71, 0}), m).distance > 5.0 * null_mean);
  CHECK(alt_min > null_max);
}

TEST_CASE("minimizer at the boundary is flagged, not an error") {
  ModelSpec m = linear_model();
  const TimeGrid grid(1.0, 2000);
  const Trajectory tr{grid, GridFunction::sample(grid, [](double t) { return std::exp(3.0 * t); }), 0.0, Seed{}};
  const MdeResult r = estimate(tr, m);
  CHECK(r.boundary_flag);
  CHECK(r.theta_star > 1.99);
}

TEST_CASE("invalid inputs") {
  const TimeGrid grid(2.0, 100);
  const Trajectory tr = simulate(linear_model(), 1.0, 0.01, grid, Seed{});
  CHECK_THROWS_AS(estimate(tr, linear_model()), ConfigError);  // model horizon 1
  ModelSpec m = linear_model();
  m.horizon = 2.0;
  CHECK_NOTHROW(estimate(tr, m));
  CHECK_THROWS_AS(estimate(tr, m, MdeOptions{2, 1e-10, 1e-6}), ConfigError);
}
