#pragma once

// Experiment drivers: Monte Carlo size/power studies and the validation suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adfgof/calibration.hpp"
#include "adfgof/config.hpp"
#include "adfgof/deterministic.hpp"
#include "adfgof/empirical_test.hpp"
#include "adfgof/limit_transform.hpp"
#include "adfgof/model.hpp"
#include "adfgof/parallel.hpp"
#include "adfgof/sde.hpp"

namespace adfgof {

struct StudyRow {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double theta_star = 0.0;
  double delta_eps = 0.0;
  bool reject = false;
  bool valid = true;  // false when the path left the region where the drift is positive
};

struct StudySummary {
  std::size_t n_reps = 0;
  std::size_t n_invalid = 0;  // excluded replications (drift not positive along the path)
  std::size_t n_reject = 0;
  double rate = 0.0;  // over valid replications
  double stderr_rate = 0.0;  // binomial sqrt(p(1-p)/n)
  double mean_delta = 0.0;
  std::size_t n_boundary = 0;
  std::size_t n_degenerate = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  StudySummary summary;
};

/// n_reps independent trajectories (replication r uses Seed{base_seed, r}),
/// each tested with the full pipeline. `under_alternative` swaps the drift
/// for the configured alternative. A replication whose path leaves the region
/// of positive drift is recorded as invalid and left out of the rate.
inline StudyResult run_study(const RunConfig& cfg, const QuantileTable& table, bool under_alternative) {
  cfg.validate();
  if (cfg.n_reps == 0) throw ConfigError("study: n_reps = 0 gives an empty summary");
  if (under_alternative && cfg.alternative.kind == "none") {
    throw ConfigError("power study needs an alternative (alternative.kind = sin or shift)");
  }
  const ModelSpec m = make_model(cfg);
  const TimeGrid grid(cfg.T, cfg.n_steps);
  const AlternativeDrift alt = under_alternative ? make_alternative(m, cfg.alternative) : AlternativeDrift{};
  TestOptions opt;
  opt.alpha = cfg.alpha;
  opt.r_cut = cfg.r_cut;
  opt.mde.n_scan = cfg.n_scan;

  StudyResult res;
  res.rows.resize(cfg.n_reps);
  std::vector<char> boundary(cfg.n_reps, 0), degenerate(cfg.n_reps, 0);
  parallel_for(
      cfg.n_reps,
      [&](std::size_t r) {
        const Seed seed{cfg.base_seed, r};
        const Trajectory tr = under_alternative ? simulate_alternative(alt, m.x0, cfg.epsilon, grid, seed)
                                                : simulate(m, cfg.theta_true, cfg.epsilon, grid, seed);
        TestReport rep;
        try {
          rep = run_test(tr, m, table, opt);
        } catch (const RegularityViolation&) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          res.rows[r] = {r, cfg.base_seed, nan, nan, false, false};
          return;
        }
        res.rows[r] = {r, cfg.base_seed, rep.theta_star, rep.delta_eps, rep.reject, true};
        boundary[r] = rep.diagnostics.boundary_flag;
        degenerate[r] = rep.diagnostics.transform_degenerate;
      },
      cfg.threads);

  StudySummary& s = res.summary;
  s.n_reps = cfg.n_reps;
  double sum = 0.0;
  for (std::size_t r = 0; r < cfg.n_reps; ++r) {
    if (!res.rows[r].valid) {
      ++s.n_invalid;
      continue;
    }
    s.n_reject += res.rows[r].reject;
    sum += res.rows[r].delta_eps;
    s.n_boundary += boundary[r];
    s.n_degenerate += degenerate[r];
  }
  const std::size_t n_valid = s.n_reps - s.n_invalid;
  if (n_valid == 0) throw RegularityViolation("study: the drift turned non-positive on every replication");
  s.rate = static_cast<double>(s.n_reject) / static_cast<double>(n_valid);
  s.stderr_rate = std::sqrt(s.rate * (1.0 - s.rate) / static_cast<double>(n_valid));
  s.mean_delta = sum / static_cast<double>(n_valid);
  return res;
}

inline void write_study_csv(const StudyResult& res, std::ostream& os) {
  os << "rep,seed,theta_star,delta_eps,reject\n";
  for (const auto& r : res.rows) {
    os << r.rep << ',' << r.seed << ',' << format_double(r.theta_star) << ',' << format_double(r.delta_eps) << ','
       << (r.reject ? 1 : 0) << '\n';
  }
}

inline nlohmann::json summary_json(const StudySummary& s) {
  return {{"n_reps", s.n_reps},         {"n_invalid", s.n_invalid}, {"n_reject", s.n_reject},   {"rate", s.rate},
          {"stderr", s.stderr_rate},    {"mean_delta", s.mean_delta}, {"n_boundary", s.n_boundary},
          {"n_degenerate", s.n_degenerate}};
}

inline nlohmann::json report_json(const TestReport& r) {
  const auto& d = r.diagnostics;
  return {{"theta_star", r.theta_star},
          {"delta_eps", r.delta_eps},
          {"c_alpha", r.c_alpha},
          {"alpha", r.alpha},
          {"reject", r.reject},
          {"epsilon", r.epsilon},
          {"r_cut", r.r_cut},
          {"diagnostics",
           {{"delta_star_eps", d.delta_star_eps},
            {"delta_tilde_eps", d.delta_tilde_eps},
            {"phi2_min", d.phi2_min},
            {"phi2_zero_fraction", d.phi2_zero_fraction},
            {"transform_degenerate", d.transform_degenerate},
            {"boundary_flag", d.boundary_flag},
            {"mde_distance", d.mde_distance},
            {"mdeq_residual", d.mdeq_residual},
            {"mde_converged", d.mde_converged}}}};
}

// ---------------------------------------------------------------------------
// Validation suite

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

inline void print_checks(const std::vector<CheckResult>& checks, std::ostream& os) {
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tolerance;
    if (!c.note.empty()) os << " (" << c.note << ')';
    os << '\n';
  }
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

/// Runs the identity, kernel and normalization checks on the configured model
/// at theta_true, plus the closed-form h = g = 1 case. `coeffs` lets a test
/// push a corrupted polynomial set through the same checks.
inline std::vector<CheckResult> validate_suite(const RunConfig& cfg, const CoefficientSet& coeffs = {}) {
  std::vector<CheckResult> out;
  auto check = [&](std::string name, double value, double tol, std::string note = {}) {
    out.push_back({std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(note)});
  };
  auto guarded = [&](const std::string& name, double tol, const std::function<double()>& fn) {
    try {
      check(name, fn(), tol);
    } catch (const Error& e) {
      out.push_back({name, std::numeric_limits<double>::quiet_NaN(), tol, false, e.what()});
    }
  };

  const ModelSpec m = make_model(cfg);
  const double theta = cfg.theta_true;
  const TimeGrid grid(cfg.T, cfg.n_steps);

  guarded("regularity.derivatives", 1e-6, [&] { return check_regularity(m, 100, cfg.epsilon).max_fd_error; });

  guarded("deterministic.C_matches_sigma2", 1e-10, [&] {
    const FlowSolution f = solve_flow(m, theta, grid);
    const double lhs = f.C_theta * cfg.T * cfg.T * cfg.T;
    const double rhs = sigma_squared(m, f) * f.J * f.J;
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
  });

  std::optional<TransformProfile> prof;
  try {
    prof = build_profile(m, theta, cfg.n_steps, coeffs);
  } catch (const Error& e) {
    out.push_back({"profile.build", std::numeric_limits<double>::quiet_NaN(), 0.0, false, e.what()});
  }
  if (prof) {
    check("profile.normalization", std::abs(prof->I1.back() - 1.0), 1e-6);
    const IdentityResiduals id = coefficient_identities(*prof);
    check("identity.phi1_eq_psi1_minus_psi2", id.phi1, 1e-10);
    check("identity.phi2_eq_K2_plus_Phi1", id.phi2, 1e-10);
    check("mle_reduction", mle_reduction(prof->h, coeffs).max(), 1e-12);
    guarded("fredholm.residual", 1e-4, [&] { return fredholm_residual(build_kernel(*prof, cfg.r_cut), cfg.r_cut); });
    const R0Report r0 = check_R0(*prof);
    const std::size_t i_cut = prof->grid01.index_at_or_below(cfg.r_cut);
    double phi2_min_cut = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= i_cut; ++i) phi2_min_cut = std::min(phi2_min_cut, prof->phi2[i]);
    std::ostringstream note;
    note << "min phi2 on [0, r_cut] = " << phi2_min_cut << "; sufficient condition R0 "
         << (r0.r0_holds ? "holds" : "fails");
    out.push_back({"phi2.positive_on_window", phi2_min_cut, 0.0, phi2_min_cut > 0.0, note.str()});
  }
  guarded("resolvent_identity.model", 1e-4, [&] {
    return resolvent_identity_check(build_kernel(build_profile(m, theta, cfg.resolvent_steps, coeffs), cfg.r_cut), cfg.r_cut);
  });

  // h = g = 1 on [0, 1]: closed forms
  const TimeGrid unit = grid.normalized();
  const GridFunction one = GridFunction::sample(unit, [](double) { return 1.0; });
  const TransformProfile p1 = make_profile(one, one, coeffs);
  double closed = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const double r = unit.node(i);
    closed = std::max({closed, std::abs(p1.phi1[i]), std::abs(p1.phi2[i] - (1.0 - r)), std::abs(p1.psi2[i] - 1.0)});
  }
  check("unit_profile.closed_forms", closed, 1e-12);
  const FredholmKernel k1 = build_kernel(p1, cfg.r_cut);
  double ab = 0.0;
  for (std::size_t i = 0; i <= unit.index_at_or_below(cfg.r_cut); ++i) {
    const double t = unit.node(i);
    ab = std::max({ab, std::abs(k1.A[i] - t / (1.0 - t)), std::abs(k1.B[i] - t / (1.0 - t))});
  }
  check("unit_profile.A_B", ab, 1e-9);
  guarded("resolvent_identity.unit_profile", 1e-6, [&] {
    const TimeGrid fine(1.0, cfg.resolvent_steps);
    const GridFunction f1 = GridFunction::sample(fine, [](double) { return 1.0; });
    return resolvent_identity_check(build_kernel(make_profile(f1, f1, coeffs), cfg.r_cut), cfg.r_cut);
  });
  return out;
}

}  // namespace adfgof
