#pragma once

// Euler-Maruyama trajectories of dX = S(X) dt + eps dW and the limit-side
// Gaussian objects used for Monte Carlo verification.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "adfgof/deterministic.hpp"
#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/model.hpp"
#include "adfgof/rng.hpp"

namespace adfgof {

struct Trajectory {
  TimeGrid grid;
  GridFunction X;
  double epsilon = 0.0;
  Seed seed;
};

/// W is the Wiener path rescaled onto [0, 1] (W(v) = T^{-1/2} W_{vT});
/// x1 is the first-order small-noise expansion term on [0, T].
struct LimitPaths {
  GridFunction W;
  GridFunction x1;
  GridFunction dW_raw;  // unscaled increments on [0, T]; dW_raw[i] = W_{t_{i+1}} - W_{t_i}
};

/// Brownian increments W_{t_{i+1}} - W_{t_i} for the path-noise stream of `seed`.
inline std::vector<double> brownian_increments(const TimeGrid& grid, Seed seed, Stream stream = Stream::kPathNoise) {
  std::vector<double> dw(grid.n_steps());
  NormalStream(seed, stream).fill(dw);
  const double sd = std::sqrt(grid.dt());
  for (double& v : dw) v *= sd;
  return dw;
}

template <class Drift>
Trajectory simulate_with_drift(Drift&& drift, double x0, double epsilon, const TimeGrid& grid, Seed seed) {
  if (epsilon < 0.0) throw ConfigError("simulate: epsilon must be >= 0");
  const std::vector<double> dw = brownian_increments(grid, seed);
  Trajectory tr{grid, GridFunction(grid), epsilon, seed};
  const double dt = grid.dt();
  double x = x0;
  tr.X[0] = x;
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    x += drift(x) * dt + epsilon * dw[i];
    tr.X[i + 1] = x;
  }
  return tr;
}

inline Trajectory simulate(const ModelSpec& m, double theta, double epsilon, const TimeGrid& grid, Seed seed) {
  m.require_theta(theta);
  return simulate_with_drift([&](double x) { return m.drift(theta, x); }, m.x0, epsilon, grid, seed);
}

using AlternativeDrift = std::function<double(double x)>;

inline Trajectory simulate_alternative(const AlternativeDrift& drift, double x0, double epsilon, const TimeGrid& grid,
                                       Seed seed) {
  return simulate_with_drift(drift, x0, epsilon, grid, seed);
}

/// Named alternatives: S(theta0, x) + amplitude * sin(frequency * x) + shift.
struct AlternativeSpec {
  std::string kind = "sin";  // "sin" | "shift" | "none"
  double base_theta = 1.0;
  double amplitude = 0.3;
  double frequency = 1.0;
  double shift = 0.0;
};

inline AlternativeDrift make_alternative(const ModelSpec& m, const AlternativeSpec& alt) {
  if (alt.kind == "sin") {
    return [m, alt](double x) { return m.drift(alt.base_theta, x) + alt.amplitude * std::sin(alt.frequency * x); };
  }
  if (alt.kind == "shift") {
    return [m, alt](double x) { return m.drift(alt.base_theta, x) + alt.shift; };
  }
  if (alt.kind == "none") {
    return [m, alt](double x) { return m.drift(alt.base_theta, x); };
  }
  throw ConfigError("unknown alternative kind '" + alt.kind + "' (sin, shift, none)");
}

/// x1_t = S(x_t) * int_0^t S(x_s)^{-1} dW_s, left-point sums over the same
/// increments simulate() would use for this seed.
inline LimitPaths simulate_limit_x1(const ModelSpec& m, const FlowSolution& flow, Seed seed) {
  const TimeGrid& grid = flow.x.grid();
  const std::vector<double> dw = brownian_increments(grid, seed);
  LimitPaths lp{GridFunction(grid.normalized()), GridFunction(grid), GridFunction(grid)};
  const double scale = 1.0 / std::sqrt(grid.horizon());
  double w = 0.0;
  double stoch = 0.0;
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    stoch += dw[i] / m.drift(flow.theta, flow.x[i]);
    w += dw[i];
    lp.W[i + 1] = scale * w;
    lp.x1[i + 1] = m.drift(flow.theta, flow.x[i + 1]) * stoch;
    lp.dW_raw[i] = dw[i];
  }
  return lp;
}

inline LimitPaths simulate_limit_x1(const ModelSpec& m, double theta, const TimeGrid& grid, Seed seed) {
  return simulate_limit_x1(m, solve_flow(m, theta, grid), seed);
}

/// Standard Wiener path on `grid` from an arbitrary stream.
inline GridFunction wiener_path(const TimeGrid& grid, Seed seed, Stream stream = Stream::kLimitNoise) {
  const std::vector<double> dw = brownian_increments(grid, seed, stream);
  GridFunction w(grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < dw.size(); ++i) {
    acc += dw[i];
    w[i + 1] = acc;
  }
  return w;
}

// ---------------------------------------------------------------------------
// CSV: header `t,X`, one row per node, shortest round-trip double formatting.

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(context + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

inline void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
  os << "t,X\n";
  for (std::size_t i = 0; i < tr.X.size(); ++i) {
    os << format_double(tr.grid.node(i)) << ',' << format_double(tr.X[i]) << '\n';
  }
}

inline void save_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_trajectory_csv(tr, os);
}

/// Parses a `t,X` CSV; the time column must be a uniform grid starting at 0.
inline Trajectory read_trajectory_csv(std::istream& is, double epsilon, const std::string& source = "trajectory") {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,X") throw ParseError(source + ": expected header 't,X', got '" + line + "'");
  std::vector<double> ts;
  std::vector<double> xs;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected two comma-separated fields");
    }
    const std::string ctx = source + ":" + std::to_string(lineno);
    ts.push_back(parse_double(std::string_view(line).substr(0, comma), ctx));
    xs.push_back(parse_double(std::string_view(line).substr(comma + 1), ctx));
  }
  if (ts.size() < 3) throw ParseError(source + ": need at least 3 rows");
  if (ts.front() != 0.0) throw ParseError(source + ": time column must start at 0");
  const std::size_t n = ts.size() - 1;
  const double horizon = ts.back();
  const TimeGrid grid(horizon, n);
  for (std::size_t i = 0; i <= n; ++i) {
    if (std::abs(ts[i] - grid.node(i)) > 1e-9 * horizon) {
      throw ParseError(source + ": time column is not a uniform grid (row " + std::to_string(i + 2) + ")");
    }
  }
  for (double x : xs) {
    if (!std::isfinite(x)) throw ParseError(source + ": non-finite X value");
  }
  return Trajectory{grid, GridFunction(grid, std::move(xs)), epsilon, Seed{}};
}

inline Trajectory load_trajectory_csv(const std::string& path, double epsilon) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open trajectory file '" + path + "'");
  return read_trajectory_csv(is, epsilon, path);
}

}  // namespace adfgof
