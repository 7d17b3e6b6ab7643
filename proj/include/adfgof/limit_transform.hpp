#pragma once

// Limit-side objects: the functions h and g, their cumulative integrals, the
// coefficient profiles phi1/phi2/psi1/psi2, the Fredholm kernel q(t,s), and the
// linear map L that turns the limit process U into a Wiener process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "adfgof/deterministic.hpp"
#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/model.hpp"
#include "adfgof/polynomials.hpp"
#include "adfgof/sde.hpp"

namespace adfgof {

struct TransformProfile {
  TimeGrid grid01;
  GridFunction h, g;
  GridFunction I1, I2, I3, I4, I5;  // cumulative over [0, r]
  GridFunction I6;                  // int_r^1 g^2
  GridFunction phi1, phi2, psi1, psi2;

  [[nodiscard]] PolyArgs args(std::size_t i) const { return {I1[i], I2[i], I3[i], I4[i], I5[i], h[i], g[i]}; }
};

/// Profile from arbitrary h, g sampled on a common [0, 1] grid.
inline TransformProfile make_profile(const GridFunction& h, const GridFunction& g, const CoefficientSet& coeffs = {}) {
  if (h.size() != g.size()) throw ConfigError("make_profile: h and g have different lengths");
  if (std::abs(h.grid().horizon() - 1.0) > 1e-12) throw ConfigError("make_profile: profile grid must be [0, 1]");
  TransformProfile p;
  p.grid01 = h.grid();
  p.h = h;
  p.g = g;
  p.I1 = cumulative_integral(transform(g, [](double v) { return v * v; }));
  p.I2 = cumulative_integral(transform(h, g, [](double a, double b) { return a * b; }));
  p.I3 = cumulative_integral(h);
  p.I4 = cumulative_integral(transform(h, [](double v) { return v * v; }));
  p.I5 = cumulative_integral(g);
  p.I6 = reverse_cumulative_integral(transform(g, [](double v) { return v * v; }));
  p.phi1 = GridFunction(p.grid01);
  p.phi2 = GridFunction(p.grid01);
  p.psi1 = GridFunction(p.grid01);
  p.psi2 = GridFunction(p.grid01);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const PolyArgs a = p.args(i);
    p.phi1[i] = coeffs.phi1(a);
    p.phi2[i] = coeffs.phi2(a);
    p.psi1[i] = coeffs.psi1(a);
    p.psi2[i] = coeffs.psi2(a);
  }
  return p;
}

/// h(r) = T J~^{-1} Sdot(x_{rT}) C^{1/2},  g(r) = S(x_{rT})^{-1} int_r^1 S xdot_{zT} dz C^{-1/2}.
inline TransformProfile build_profile(const ModelSpec& m, double theta, const FlowSolution& flow,
                                      const TimeGrid& grid01, const CoefficientSet& coeffs = {}) {
  if (grid01.n_steps() != flow.x.grid().n_steps() || std::abs(grid01.horizon() - 1.0) > 1e-12) {
    throw ConfigError("build_profile: grid01 must be the unit grid with the flow's step count");
  }
  if (!(flow.J_tilde > 0.0) || !(flow.C_theta > 0.0)) {
    throw DegenerateModel("build_profile: J~ or C vanishes at theta=" + std::to_string(theta));
  }
  GridFunction drift(grid01);
  for (std::size_t i = 0; i < drift.size(); ++i) drift[i] = m.drift(theta, flow.x[i]);
  const GridFunction tail = detail::tail_weight(drift, flow.xdot.on_grid(grid01));
  const double T = flow.x.grid().horizon();
  const double sqrtC = std::sqrt(flow.C_theta);
  GridFunction h(grid01);
  GridFunction g(grid01);
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = T / flow.J_tilde * m.drift_dtheta(theta, flow.x[i]) * sqrtC;
    g[i] = tail[i] / drift[i] / sqrtC;
  }
  TransformProfile p = make_profile(h, g, coeffs);
  const double norm = p.I1.back();
  if (std::abs(norm - 1.0) > 1e-4) {
    std::ostringstream os;
    os << "build_profile: int_0^1 g^2 = " << norm << " (expected 1)";
    throw Error(os.str());
  }
  return p;
}

inline TransformProfile build_profile(const ModelSpec& m, double theta, std::size_t n_steps,
                                      const CoefficientSet& coeffs = {}) {
  const TimeGrid grid(m.horizon, n_steps);
  return build_profile(m, theta, solve_flow(m, theta, grid), grid.normalized(), coeffs);
}

// ---------------------------------------------------------------------------
// Fredholm kernel  q(t,s) - int_0^t q(t,v) K(s,v) dv = 1,
// K(u,v) = g(v)h(u) + h(v)g(u) - h(v)h(u).

struct FredholmKernel {
  TransformProfile profile;
  GridFunction A;  // int_0^t q(t,v) h(v) dv
  GridFunction B;  // int_0^t q(t,v) g(v) dv

  /// q at grid nodes t_i, s_j.
  [[nodiscard]] double q_at(std::size_t i, std::size_t j) const {
    return 1.0 + B[i] * profile.h[j] + A[i] * (profile.g[j] - profile.h[j]);
  }
  /// q(t, s), linear interpolation in both arguments.
  [[nodiscard]] double q(double t, double s) const {
    return 1.0 + B.at(t) * profile.h.at(s) + A.at(t) * (profile.g.at(s) - profile.h.at(s));
  }
};

inline double kernel_K(const TransformProfile& p, std::size_t u, std::size_t v) {
  return p.g[v] * p.h[u] + p.h[v] * p.g[u] - p.h[v] * p.h[u];
}

/// Solves for A and B at every node. Nodes with a vanishing denominator are
/// left NaN when they lie beyond t_max or at t = 1 (the denominator is 0 there
/// whenever int g^2 = 1 and h = g); inside the window they throw.
inline FredholmKernel build_kernel(const TransformProfile& p, double t_max = 1.0) {
  FredholmKernel k{p, GridFunction(p.grid01), GridFunction(p.grid01)};
  const std::size_t n = p.grid01.n_steps();
  for (std::size_t i = 0; i <= n; ++i) {
    const double I1 = p.I1[i], I2 = p.I2[i], I3 = p.I3[i], I4 = p.I4[i], I5 = p.I5[i], I6 = p.I6[i];
    const double den = (1.0 - I2) * (1.0 - I2) + I4 * I6;
    if (!(den > 1e-14)) {
      if (i == n || p.grid01.node(i) > t_max) {
        k.A[i] = k.B[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      std::ostringstream os;
      os << "Fredholm denominator (1-I2)^2 + I4*I6 = " << den << " at t=" << p.grid01.node(i);
      throw KernelSingularity(os.str());
    }
    k.A[i] = (I3 * (1.0 - I2) + I4 * I5) / den;
    k.B[i] = (I5 * (1.0 + I4 - I2) + I3 * (I1 - I2)) / den;
  }
  return k;
}

namespace detail {

/// Up to `count` node indices spread over [0, i_max], always including both ends.
inline std::vector<std::size_t> sample_indices(std::size_t i_max, std::size_t count) {
  std::vector<std::size_t> out;
  if (count < 2 || i_max + 1 <= count) {
    for (std::size_t i = 0; i <= i_max; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(i_max) * k / (count - 1))));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// sup over sampled s <= t <= t_max of |q(t,s) - int_0^t q(t,v) K(s,v) dv - 1|,
/// the integral taken by direct trapezoid quadrature over v.
inline double fredholm_residual(const FredholmKernel& k, double t_max = 0.95, std::size_t n_t = 40,
                                std::size_t n_s = 40) {
  const TransformProfile& p = k.profile;
  const double dt = p.grid01.dt();
  const std::size_t i_max = std::min(p.grid01.index_at_or_below(t_max), p.grid01.n_steps() - 1);
  double worst = 0.0;
  for (std::size_t i : detail::sample_indices(i_max, n_t)) {
    for (std::size_t j : detail::sample_indices(i, n_s)) {
      double integral = 0.0;
      for (std::size_t v = 0; v < i; ++v) {
        integral += 0.5 * dt * (k.q_at(i, v) * kernel_K(p, j, v) + k.q_at(i, v + 1) * kernel_K(p, j, v + 1));
      }
      worst = std::max(worst, std::abs(k.q_at(i, j) - integral - 1.0));
    }
  }
  return worst;
}

/// sup over grid t <= t_max of |int_0^t q(t,s) ds - int_0^t q(s,s)^2 ds|.
/// The left side is a direct quadrature over s at up to `n_t` sampled t; the
/// right side is a cumulative trapezoid of q(s,s)^2.
inline double resolvent_identity_check(const FredholmKernel& k, double t_max, std::size_t n_t = 512) {
  if (!(t_max < 1.0)) throw ConfigError("resolvent_identity_check: t_max must be < 1");
  const TransformProfile& p = k.profile;
  GridFunction diag(p.grid01);
  const std::size_t n = p.grid01.n_steps();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = k.q_at(i, i);
    diag[i] = d * d;
  }
  diag[n] = diag[n - 1];  // never integrated: t_max < 1
  const GridFunction rhs = cumulative_integral(diag);
  const std::size_t i_max = std::min(p.grid01.index_at_or_below(t_max), n - 1);
  const double dt = p.grid01.dt();
  double worst = 0.0;
  for (std::size_t i : detail::sample_indices(i_max, n_t)) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < i; ++j) lhs += 0.5 * dt * (k.q_at(i, j) + k.q_at(i, j + 1));
    worst = std::max(worst, std::abs(lhs - rhs[i]));
  }
  return worst;
}

struct IdentityResiduals {
  double phi1 = 0.0;  // max |phi1 - (psi1 - psi2)|
  double phi2 = 0.0;  // max |phi2 - (K^2 + Phi1)|
  [[nodiscard]] double max() const { return std::max(phi1, phi2); }
};

/// Pointwise cross-checks of the coefficient polynomials against their
/// factored forms in C, D, K, N.
inline IdentityResiduals coefficient_identities(const TransformProfile& p) {
  IdentityResiduals r;
  for (std::size_t i = 0; i < p.h.size(); ++i) {
    const PolyArgs a = p.args(i);
    const double K = poly::K(a);
    r.phi1 = std::max(r.phi1, std::abs(p.phi1[i] - (p.psi1[i] - p.psi2[i])));
    r.phi2 = std::max(r.phi2, std::abs(p.phi2[i] - (K * K + poly::Phi1(a))));
  }
  return r;
}

/// Residuals of the g := h reduction: phi1 = 0, phi2 = (1-I1)(1+I3 h-I1), psi2 = h(1+I3 h-I1).
struct MleReduction {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double psi2 = 0.0;
  [[nodiscard]] double max() const { return std::max({phi1, phi2, psi2}); }
};

inline MleReduction mle_reduction(const GridFunction& h, const CoefficientSet& coeffs = {}) {
  const TransformProfile p = make_profile(h, h, coeffs);
  MleReduction r;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double I1 = p.I1[i], I3 = p.I3[i], hv = p.h[i];
    const double common = 1.0 + I3 * hv - I1;
    r.phi1 = std::max(r.phi1, std::abs(p.phi1[i]));
    r.phi2 = std::max(r.phi2, std::abs(p.phi2[i] - (1.0 - I1) * common));
    r.psi2 = std::max(r.psi2, std::abs(p.psi2[i] - hv * common));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Limit process and transformation.

/// U(v) = W(v) - (int_0^1 g dW) * int_0^v h dr.
inline GridFunction build_limit_U(const GridFunction& W, const TransformProfile& p) {
  if (W.size() != p.h.size()) throw ConfigError("build_limit_U: W and profile grids differ");
  double z = 0.0;
  for (std::size_t i = 0; i + 1 < W.size(); ++i) z += p.g[i] * (W[i + 1] - W[i]);
  GridFunction U(W.grid());
  for (std::size_t i = 0; i < U.size(); ++i) U[i] = W[i] - z * p.I3[i];
  return U;
}

/// Index of the r_cut node, with a check that phi2 > 0 on [0, r_cut].
inline std::size_t transform_cut_index(const TransformProfile& p, double r_cut) {
  if (!(r_cut > 0.0 && r_cut < 1.0)) throw ConfigError("r_cut must lie in (0, 1)");
  const std::size_t i_cut = p.grid01.index_at_or_below(r_cut);
  for (std::size_t i = 0; i <= i_cut; ++i) {
    if (!(p.phi2[i] > 0.0)) {
      std::ostringstream os;
      os << "phi2 = " << p.phi2[i] << " <= 0 at r=" << p.grid01.node(i) << " inside [0, " << r_cut << "]";
      throw PositivityViolation(os.str());
    }
  }
  return i_cut;
}

/// Shared tail of the transformation: out(v) = base(v) + int_0^v F dr, with
/// F = (phi1 Kbar + psi2 Lbar) * weight and F frozen at i_cut beyond it.
inline GridFunction accumulate_transform(const GridFunction& base, const GridFunction& Kbar, const GridFunction& Lbar,
                                         const GridFunction& phi1, const GridFunction& psi2,
                                         const GridFunction& weight, std::size_t i_cut) {
  const std::size_t n = base.size();
  std::vector<double> F(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::min(i, i_cut);
    F[i] = (phi1[j] * Kbar[j] + psi2[j] * Lbar[j]) * weight[j];
  }
  GridFunction out(base.grid());
  const double half_dr = 0.5 * base.grid().dt();
  double acc = 0.0;
  out[0] = base[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += half_dr * (F[i] + F[i + 1]);
    out[i + 1] = base[i + 1] + acc;
  }
  return out;
}

/// L[U](v) = U(v) + int_0^v (phi1(r) int_0^r h dU + psi2(r) int_0^r g dU) / phi2(r) dr.
inline GridFunction apply_L(const GridFunction& U, const TransformProfile& p, double r_cut = 0.95) {
  if (U.size() != p.h.size()) throw ConfigError("apply_L: U and profile grids differ");
  const std::size_t i_cut = transform_cut_index(p, r_cut);
  const GridFunction Kbar = ito_integral(p.h, U);
  const GridFunction Lbar = ito_integral(p.g, U);
  const GridFunction inv = transform(p.phi2, [](double v) { return v > 0.0 ? 1.0 / v : 0.0; });
  return accumulate_transform(U, Kbar, Lbar, p.phi1, p.psi2, inv, i_cut);
}

/// Khmaladze's single-score transform U(v) + int_0^v h(r)/N(r) int_0^r h dU dr,
/// N(r) = int_r^1 h^2. Reference for the g = h case.
inline GridFunction khmaladze_transform(const GridFunction& U, const GridFunction& h, double r_cut = 0.95) {
  const std::size_t i_cut = U.grid().index_at_or_below(r_cut);
  const GridFunction N = reverse_cumulative_integral(transform(h, [](double v) { return v * v; }));
  const GridFunction Kbar = ito_integral(h, U);
  const GridFunction zero(U.grid());
  const GridFunction weight = transform(h, N, [](double hv, double nv) { return nv > 0.0 ? hv / nv : 0.0; });
  const GridFunction one = GridFunction::sample(U.grid(), [](double) { return 1.0; });
  return accumulate_transform(U, Kbar, zero, one, zero, weight, i_cut);
}

struct R0Report {
  bool r0_holds = true;         // g > h > 0 and int_0^t h g < 1 at every node in (0, 1)
  bool phi2_positive = true;    // phi2 > 0 on [0, 1 - dt]
  double phi2_min = std::numeric_limits<double>::infinity();
  double phi2_min_at = 0.0;
  std::optional<double> first_r0_failure;
  std::optional<double> first_phi2_failure;
};

inline R0Report check_R0(const TransformProfile& p) {
  R0Report r;
  const std::size_t n = p.grid01.n_steps();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = p.grid01.node(i);
    if (i > 0) {
      const bool ok = p.g[i] > p.h[i] && p.h[i] > 0.0 && p.I2[i] < 1.0;
      if (!ok && r.r0_holds) {
        r.r0_holds = false;
        r.first_r0_failure = t;
      }
    }
    if (p.phi2[i] < r.phi2_min) {
      r.phi2_min = p.phi2[i];
      r.phi2_min_at = t;
    }
    if (!(p.phi2[i] > 0.0) && r.phi2_positive) {
      r.phi2_positive = false;
      r.first_phi2_failure = t;
    }
  }
  return r;
}

inline void write_profile_csv(const TransformProfile& p, std::ostream& os) {
  os << "r,h,g,I1,I2,I3,I4,I5,I6,phi1,phi2,psi1,psi2\n";
  for (std::size_t i = 0; i < p.h.size(); ++i) {
    os << format_double(p.grid01.node(i));
    for (const GridFunction* f : {&p.h, &p.g, &p.I1, &p.I2, &p.I3, &p.I4, &p.I5, &p.I6, &p.phi1, &p.phi2, &p.psi1,
                                  &p.psi2}) {
      os << ',' << format_double((*f)[i]);
    }
    os << '\n';
  }
}

inline void save_profile_csv(const TransformProfile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_profile_csv(p, os);
}

}  // namespace adfgof
