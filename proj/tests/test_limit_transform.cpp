#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "adfgof/limit_transform.hpp"
#include "adfgof/sde.hpp"

using namespace adfgof;
using Catch::Matchers::WithinAbs;

namespace {

GridFunction constant(const TimeGrid& grid, double c) {
  return GridFunction::sample(grid, [c](double) { return c; });
}

GridFunction random_smooth(const TimeGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a0 = 1.5 + u(rng), a1 = u(rng), a2 = 0.5 * u(rng), b1 = u(rng), b2 = 0.5 * u(rng);
  return GridFunction::sample(grid, [=](double r) {
    return a0 + a1 * std::cos(M_PI * r) + a2 * std::cos(2 * M_PI * r) + b1 * std::sin(M_PI * r) +
           b2 * std::sin(2 * M_PI * r);
  });
}

GridFunction unit_l2(const GridFunction& f) {
  const double n = std::sqrt(integrate(transform(f, [](double v) { return v * v; })));
  return transform(f, [n](double v) { return v / n; });
}

// Mutation fixtures: one spurious term each.
double phi2_corrupted(const PolyArgs& a) { return poly::phi2(a) + a.I3 * a.I4 * a.h; }
double psi1_duplicated_term(const PolyArgs& a) { return poly::psi1(a) + a.I4 * a.I4 * a.g; }

}  // namespace

TEST_CASE("model profiles are normalized") {
  for (const ModelSpec& m : {linear_model(), constant_model()}) {
    for (double theta : {0.6, 0.9, 1.0, 1.4, 1.9}) {
      CHECK_THAT(build_profile(m, theta, 2000).I1.back(), WithinAbs(1.0, 1e-6));
    }
  }
}

TEST_CASE("normalization holds for T != 1") {
  ModelSpec m = linear_model();
  m.horizon = 2.5;
  CHECK_THAT(build_profile(m, 1.2, 2000).I1.back(), WithinAbs(1.0, 1e-6));
}

TEST_CASE("h = g = 1 closed forms") {
  const TimeGrid grid(1.0, 1000);
  const TransformProfile p = make_profile(constant(grid, 1.0), constant(grid, 1.0));
  for (std::size_t i = 0; i < grid.size(); i += 50) {
    const double r = grid.node(i);
    for (const GridFunction* I : {&p.I1, &p.I2, &p.I3, &p.I4, &p.I5}) CHECK_THAT((*I)[i], WithinAbs(r, 1e-13));
    CHECK_THAT(p.phi2[i], WithinAbs(1.0 - r, 1e-12));
    CHECK_THAT(p.psi2[i], WithinAbs(1.0, 1e-12));
    CHECK_THAT(p.phi1[i], WithinAbs(0.0, 1e-12));
  }
  CHECK(coefficient_identities(p).max() <= 1e-12);
}

TEST_CASE("Fredholm kernel for h = g = 1") {
  const TimeGrid grid(1.0, 1000);
  const FredholmKernel k = build_kernel(make_profile(constant(grid, 1.0), constant(grid, 1.0)));
  CHECK(k.A[0] == 0.0);
  CHECK(k.B[0] == 0.0);
  CHECK(k.q_at(0, 0) == 1.0);
  CHECK(k.q(0.0, 0.7) == 1.0);
  for (std::size_t i = 1; i < 990; i += 37) {
    const double t = grid.node(i);
    CHECK_THAT(k.A[i], WithinAbs(t / (1 - t), 1e-9));
    CHECK_THAT(k.B[i], WithinAbs(t / (1 - t), 1e-9));
    CHECK_THAT(k.q_at(i, i / 2), WithinAbs(1 / (1 - t), 1e-9));
  }
  CHECK(std::isnan(k.A.back()));
}

TEST_CASE("Fredholm residual on model profiles") {
  for (const ModelSpec& m : {linear_model(), constant_model()}) {
    CHECK(fredholm_residual(build_kernel(build_profile(m, 1.0, 2000), 0.95), 0.95) <= 1e-4);
  }
}

TEST_CASE("vanishing denominator inside the window is a kernel singularity") {
  // h = 2g, g^2 = 4/3 on the first two nodes: int_0^{1/2} h g = 1 and int_{1/2}^1 g^2 = 0
  const TimeGrid grid(1.0, 4);
  const double a = std::sqrt(4.0 / 3.0);
  const GridFunction g(grid, {a, a, 0.0, 0.0, 0.0});
  const GridFunction h = transform(g, [](double v) { return 2 * v; });
  const TransformProfile p = make_profile(h, g);
  CHECK_THROWS_AS(build_kernel(p), KernelSingularity);
  const FredholmKernel k = build_kernel(p, 0.4);
  CHECK(std::isnan(k.A[2]));
  CHECK(std::isfinite(k.A[1]));
}

TEST_CASE("resolvent row-integral identity") {
  SECTION("h = g = 1: both sides are t/(1-t)") {
    const TimeGrid grid(1.0, 20000);
    const FredholmKernel k = build_kernel(make_profile(constant(grid, 1.0), constant(grid, 1.0)), 0.9);
    CHECK(resolvent_identity_check(k, 0.9) <= 1e-6);
    CHECK(resolvent_identity_check(k, 0.0) == 0.0);
  }
  SECTION("linear model profile") {
    // The sides grow to ~4e3 near t = 0.95, so a 1e-4 absolute match needs a fine grid.
    const FredholmKernel k = build_kernel(build_profile(linear_model(), 1.0, 200000), 0.95);
    CHECK(resolvent_identity_check(k, 0.95) <= 1e-4);
  }
  SECTION("at n = 2000 the mismatch is quadrature error, small relative to the sides") {
    const FredholmKernel k = build_kernel(build_profile(linear_model(), 1.0, 2000), 0.95);
    const double err = resolvent_identity_check(k, 0.95);
    const std::size_t i = k.profile.grid01.index_at_or_below(0.95);
    double rhs = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      rhs += 0.5 * k.profile.grid01.dt() * (std::pow(k.q_at(j, j), 2) + std::pow(k.q_at(j + 1, j + 1), 2));
    }
    CHECK(err / rhs <= 1e-3);
  }
}

TEST_CASE("d/dt of int_0^t q(t,s) ds equals q(t,t)^2") {
  const FredholmKernel k = build_kernel(build_profile(linear_model(), 1.0, 2000), 0.95);
  const TimeGrid& grid = k.profile.grid01;
  auto lhs = [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += 0.5 * grid.dt() * (k.q_at(i, j) + k.q_at(i, j + 1));
    return acc;
  };
  double worst = 0.0;
  for (std::size_t i = 100; i <= 1800; i += 100) {
    const double fd = (lhs(i + 1) - lhs(i - 1)) / (2 * grid.dt());
    const double diag = std::pow(k.q_at(i, i), 2);
    worst = std::max(worst, std::abs(fd - diag) / diag);
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("coefficient identities hold for arbitrary profiles") {
  const TimeGrid grid(1.0, 2000);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const TransformProfile p = make_profile(random_smooth(grid, rng), unit_l2(random_smooth(grid, rng)));
    CHECK(coefficient_identities(p).max() <= 1e-10);
  }
  CHECK(coefficient_identities(build_profile(linear_model(), 1.0, 2000)).max() <= 1e-10);
}

TEST_CASE("MLE reduction g := h") {
  const TimeGrid grid(1.0, 2000);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) CHECK(mle_reduction(unit_l2(random_smooth(grid, rng))).max() <= 1e-12);
  CHECK(mle_reduction(build_profile(linear_model(), 1.0, 2000).h).max() <= 1e-12);
}

TEST_CASE("corrupted coefficient polynomials are detected") {
  const TimeGrid grid(1.0, 500);
  const TransformProfile lin = build_profile(linear_model(), 1.0, 500);
  SECTION("extra term in phi2") {
    CoefficientSet bad;
    bad.phi2 = phi2_corrupted;
    CHECK(coefficient_identities(make_profile(lin.h, lin.g, bad)).phi2 > 1e-3);
    CHECK(mle_reduction(lin.h, bad).phi2 > 1e-3);
  }
  SECTION("duplicated I4^2 g term in psi1") {
    CoefficientSet bad;
    bad.psi1 = psi1_duplicated_term;
    CHECK(coefficient_identities(make_profile(constant(grid, 1.0), constant(grid, 1.0), bad)).phi1 > 0.5);
  }
}

TEST_CASE("limit process U") {
  const TransformProfile p = build_profile(linear_model(), 1.0, 500);
  SECTION("W = 0 gives U = 0") {
    const GridFunction U = build_limit_U(GridFunction(p.grid01), p);
    for (double v : U.values()) CHECK(v == 0.0);
  }
  SECTION("h = 0 gives U = W") {
    const TransformProfile p0 = make_profile(GridFunction(p.grid01), p.g);
    const GridFunction W = wiener_path(p.grid01, Seed{1, 2});
    CHECK(sup_abs_diff(build_limit_U(W, p0), W) == 0.0);
  }
}

TEST_CASE("transformation L") {
  const TransformProfile p = build_profile(linear_model(), 1.0, 2000);
  SECTION("zero in, zero out") {
    const GridFunction V = apply_L(GridFunction(p.grid01), p);
    for (double v : V.values()) CHECK(v == 0.0);
  }
  SECTION("linearity") {
    const GridFunction U1 = build_limit_U(wiener_path(p.grid01, Seed{3, 0}), p);
    const GridFunction U2 = build_limit_U(wiener_path(p.grid01, Seed{3, 1}), p);
    const double a = 1.7, b = -0.4;
    const GridFunction mix = transform(U1, U2, [=](double x, double y) { return a * x + b * y; });
    const GridFunction lhs = apply_L(mix, p);
    const GridFunction L1 = apply_L(U1, p), L2 = apply_L(U2, p);
    const GridFunction rhs = transform(L1, L2, [=](double x, double y) { return a * x + b * y; });
    double scale = 0.0;
    for (double v : lhs.values()) scale = std::max(scale, std::abs(v));
    CHECK(sup_abs_diff(lhs, rhs) <= 1e-13 * scale);
  }
  SECTION("with g = h it is Khmaladze's single-score transform") {
    const GridFunction h = unit_l2(p.h);
    const TransformProfile pm = make_profile(h, h);
    const GridFunction U = build_limit_U(wiener_path(pm.grid01, Seed{4, 0}), pm);
    CHECK(sup_abs_diff(apply_L(U, pm, 0.95), khmaladze_transform(U, h, 0.95)) <= 1e-10);
  }
  SECTION("frozen integrand beyond r_cut") {
    const GridFunction U = build_limit_U(wiener_path(p.grid01, Seed{6, 0}), p);
    const GridFunction V = apply_L(U, p, 0.5);
    const std::size_t i = p.grid01.index_at_or_below(0.5);
    const GridFunction V2 = apply_L(U, p, 0.95);
    for (std::size_t j = 0; j <= i; ++j) CHECK(V[j] == V2[j]);
  }
  SECTION("non-positive phi2 before r_cut is refused") {
    TransformProfile bad = p;
    bad.phi2[100] = -1.0;
    CHECK_THROWS_AS(apply_L(GridFunction(p.grid01), bad, 0.95), PositivityViolation);
    CHECK_NOTHROW(apply_L(GridFunction(p.grid01), bad, 0.04));
    CHECK_THROWS_AS(apply_L(GridFunction(p.grid01), p, 1.0), ConfigError);
  }
}

TEST_CASE("transformed limit process has the Wiener covariance") {
  const TransformProfile p = build_profile(constant_model(), 1.3, 1000);
  const std::size_t n = 4000;
  const std::size_t i4 = 400, i8 = 800;
  double s4 = 0, s8 = 0, c48 = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const GridFunction V = apply_L(build_limit_U(wiener_path(p.grid01, Seed{808, r}), p), p);
    s4 += V[i4] * V[i4];
    s8 += V[i8] * V[i8];
    c48 += V[i4] * V[i8];
  }
  const double se = std::sqrt(2.0 / n);
  CHECK(std::abs(s4 / n - 0.4) <= 3 * 0.4 * se);
  CHECK(std::abs(s8 / n - 0.8) <= 3 * 0.8 * se);
  CHECK(std::abs(c48 / n - 0.4) <= 3 * std::sqrt((0.4 * 0.8 + 0.4 * 0.4) / n));
}

TEST_CASE("sufficient positivity condition R0") {
  const TimeGrid grid(1.0, 1000);
  SECTION("h = g = 1: R0 fails, phi2 = 1 - r stays positive") {
    const R0Report r = check_R0(make_profile(constant(grid, 1.0), constant(grid, 1.0)));
    CHECK_FALSE(r.r0_holds);
    CHECK(r.phi2_positive);
  }
  SECTION("g = sqrt(3) r, h = r/2: R0 holds and phi2 > 0") {
    const GridFunction g = GridFunction::sample(grid, [](double r) { return std::sqrt(3.0) * r; });
    const GridFunction h = GridFunction::sample(grid, [](double r) { return 0.5 * r; });
    const R0Report r = check_R0(make_profile(h, g));
    CHECK(r.r0_holds);
    CHECK(r.phi2_positive);
    CHECK(r.phi2_min > 0.0);
  }
  SECTION("builtin models: phi2 positive on [0, 1) although R0 fails") {
    for (const ModelSpec& m : {linear_model(), constant_model()}) {
      const R0Report r = check_R0(build_profile(m, 1.0, 1000));
      CHECK(r.phi2_positive);
      CHECK_FALSE(r.r0_holds);
    }
  }
}

TEST_CASE("profile CSV") {
  const TransformProfile p = build_profile(linear_model(), 1.0, 10);
  std::stringstream ss;
  write_profile_csv(p, ss);
  std::string header, row;
  std::getline(ss, header);
  CHECK(header == "r,h,g,I1,I2,I3,I4,I5,I6,phi1,phi2,psi1,psi2");
  std::size_t rows = 0;
  while (std::getline(ss, row)) {
    ++rows;
    CHECK(std::count(row.begin(), row.end(), ',') == 12);
  }
  CHECK(rows == 11);
}
