#pragma once

// Parametric drift families S(theta, x) for dX = S(theta, X) dt + eps dW.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/ode.hpp"

namespace adfgof {

using DriftFn = std::function<double(double theta, double x)>;

struct ThetaBounds {
  double lower = 0.0;
  double upper = 1.0;

  [[nodiscard]] double width() const noexcept { return upper - lower; }
  [[nodiscard]] bool contains(double theta) const noexcept { return theta > lower && theta < upper; }
};

/// A drift family with analytic partial derivatives.
///   drift            S(theta, x)
///   drift_dx         dS/dx
///   drift_dtheta     dS/dtheta
///   drift_dtheta2    d2S/dtheta2
///   drift_dtheta_dx  d2S/(dtheta dx)
/// Immutable after construction; safe to share across threads.
struct ModelSpec {
  std::string name;
  ThetaBounds theta_bounds;
  double x0 = 1.0;
  double horizon = 1.0;
  DriftFn drift;
  DriftFn drift_dx;
  DriftFn drift_dtheta;
  DriftFn drift_dtheta2;
  DriftFn drift_dtheta_dx;

  void require_theta(double theta) const {
    if (!theta_bounds.contains(theta)) {
      std::ostringstream os;
      os << "theta " << theta << " outside (" << theta_bounds.lower << ", " << theta_bounds.upper << ") for model '"
         << name << "'";
      throw ConfigError(os.str());
    }
  }
};

inline ModelSpec linear_model() {
  ModelSpec m;
  m.name = "linear";
  m.theta_bounds = {0.5, 2.0};
  m.x0 = 1.0;
  m.horizon = 1.0;
  m.drift = [](double th, double x) { return th * x; };
  m.drift_dx = [](double th, double) { return th; };
  m.drift_dtheta = [](double, double x) { return x; };
  m.drift_dtheta2 = [](double, double) { return 0.0; };
  m.drift_dtheta_dx = [](double, double) { return 1.0; };
  return m;
}

inline ModelSpec constant_model() {
  ModelSpec m;
  m.name = "constant";
  m.theta_bounds = {0.5, 2.0};
  m.x0 = 1.0;
  m.horizon = 1.0;
  m.drift = [](double th, double) { return th; };
  m.drift_dx = [](double, double) { return 0.0; };
  m.drift_dtheta = [](double, double) { return 1.0; };
  m.drift_dtheta2 = [](double, double) { return 0.0; };
  m.drift_dtheta_dx = [](double, double) { return 0.0; };
  return m;
}

/// Closed-form deterministic flow of the builtin models, used as test oracles.
inline double builtin_flow(const ModelSpec& m, double theta, double t) {
  if (m.name == "linear") return m.x0 * std::exp(theta * t);
  if (m.name == "constant") return m.x0 + theta * t;
  throw ConfigError("no closed-form flow for model '" + m.name + "'");
}

using ModelFactory = std::function<ModelSpec()>;

namespace detail {
inline std::map<std::string, ModelFactory>& model_registry() {
  static std::map<std::string, ModelFactory> registry;
  return registry;
}
inline std::mutex& model_registry_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace detail

/// Registers a custom model under `name`; builtins cannot be shadowed.
inline void register_model(const std::string& name, ModelFactory factory) {
  if (name == "linear" || name == "constant") throw ConfigError("cannot re-register builtin model '" + name + "'");
  std::lock_guard lock(detail::model_registry_mutex());
  detail::model_registry()[name] = std::move(factory);
}

inline ModelSpec builtin(const std::string& name) {
  if (name == "linear") return linear_model();
  if (name == "constant") return constant_model();
  {
    std::lock_guard lock(detail::model_registry_mutex());
    auto it = detail::model_registry().find(name);
    if (it != detail::model_registry().end()) return it->second();
  }
  throw ConfigError("unknown model '" + name + "' (builtins: linear, constant)");
}

struct ValidationReport {
  double min_drift = std::numeric_limits<double>::infinity();
  double min_drift_theta = 0.0;
  double min_drift_x = 0.0;
  double max_fd_error = 0.0;
  std::string worst_derivative;
  double tube_lower = 0.0;
  double tube_upper = 0.0;
  std::size_t n_points = 0;
};

/// Relative error with a unit floor, so that exact zeros compare absolutely.
inline double fd_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

/// Largest mismatch between the analytic partials and central differences at (theta, x).
inline std::pair<double, std::string> derivative_mismatch(const ModelSpec& m, double theta, double x,
                                                          double step = 1e-5) {
  const double fd_dx = (m.drift(theta, x + step) - m.drift(theta, x - step)) / (2 * step);
  const double fd_dth = (m.drift(theta + step, x) - m.drift(theta - step, x)) / (2 * step);
  const double fd_dth2 = (m.drift_dtheta(theta + step, x) - m.drift_dtheta(theta - step, x)) / (2 * step);
  const double fd_dthdx = (m.drift_dtheta(theta, x + step) - m.drift_dtheta(theta, x - step)) / (2 * step);
  std::pair<double, std::string> worst{0.0, ""};
  auto upd = [&](double e, const char* label) {
    if (e > worst.first || worst.second.empty()) worst = {e, label};
  };
  upd(fd_relative_error(m.drift_dx(theta, x), fd_dx), "drift_dx");
  upd(fd_relative_error(m.drift_dtheta(theta, x), fd_dth), "drift_dtheta");
  upd(fd_relative_error(m.drift_dtheta2(theta, x), fd_dth2), "drift_dtheta2");
  upd(fd_relative_error(m.drift_dtheta_dx(theta, x), fd_dthdx), "drift_dtheta_dx");
  return worst;
}

/// Samples theta over the closed parameter interval and x over the deterministic flow
/// envelope inflated by 5*eps*sqrt(T). Throws RegularityViolation listing the
/// offending points when the drift is not strictly positive there.
inline ValidationReport check_regularity(const ModelSpec& m, std::size_t n_samples, double epsilon = 0.0,
                                         std::size_t n_steps = 2000) {
  if (n_samples < 10) throw ConfigError("check_regularity: n_samples must be >= 10");
  const TimeGrid grid(m.horizon, n_steps);
  const double a = m.theta_bounds.lower;
  const double w = m.theta_bounds.width();
  std::vector<double> thetas(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) thetas[k] = a + w * static_cast<double>(k) / (n_samples - 1);

  ValidationReport rep;
  rep.tube_lower = m.x0;
  rep.tube_upper = m.x0;
  for (double th : thetas) {
    const GridFunction x = rk4([&](double xv) { return m.drift(th, xv); }, m.x0, grid);
    for (double v : x.values()) {
      if (!std::isfinite(v)) continue;
      rep.tube_lower = std::min(rep.tube_lower, v);
      rep.tube_upper = std::max(rep.tube_upper, v);
    }
  }
  const double pad = 5.0 * epsilon * std::sqrt(m.horizon);
  rep.tube_lower -= pad;
  rep.tube_upper += pad;

  std::vector<std::pair<double, double>> offending;
  for (double th : thetas) {
    for (std::size_t j = 0; j < n_samples; ++j) {
      const double x =
          rep.tube_lower + (rep.tube_upper - rep.tube_lower) * static_cast<double>(j) / (n_samples - 1);
      const double s = m.drift(th, x);
      ++rep.n_points;
      if (s < rep.min_drift) {
        rep.min_drift = s;
        rep.min_drift_theta = th;
        rep.min_drift_x = x;
      }
      if (!(s > 0.0)) offending.emplace_back(th, x);
      auto [err, label] = derivative_mismatch(m, th, x);
      if (err > rep.max_fd_error) {
        rep.max_fd_error = err;
        rep.worst_derivative = label;
      }
    }
  }
  if (!offending.empty()) {
    std::ostringstream os;
    os << "model '" << m.name << "': drift not strictly positive at " << offending.size() << " sampled points, e.g.";
    for (std::size_t k = 0; k < std::min<std::size_t>(offending.size(), 5); ++k) {
      os << " (theta=" << offending[k].first << ", x=" << offending[k].second << ")";
    }
    throw RegularityViolation(os.str());
  }
  return rep;
}

}  // namespace adfgof
