#pragma once

// Uniform time grids and sampled functions. Every ordinary integral in the
// library goes through the trapezoid helpers below.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adfgof/error.hpp"

namespace adfgof {

class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigError("TimeGrid: horizon must be positive, got " + std::to_string(horizon));
    }
    if (n_steps == 0) throw ConfigError("TimeGrid: n_steps must be at least 1");
  }

  /// Unit-interval grid with the same number of steps; t_i / T maps onto it.
  [[nodiscard]] TimeGrid normalized() const { return {1.0, n_steps_}; }

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_steps_ + 1; }
  [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(n_steps_); }
  [[nodiscard]] double node(std::size_t i) const noexcept {
    // exact at the right end point
    return i == n_steps_ ? horizon_ : static_cast<double>(i) * dt();
  }

  /// Largest node index with t_i <= t (clamped to the grid).
  [[nodiscard]] std::size_t index_at_or_below(double t) const noexcept {
    if (t <= 0.0) return 0;
    const double pos = t / dt();
    auto i = static_cast<std::size_t>(std::floor(pos + 1e-9));
    return i > n_steps_ ? n_steps_ : i;
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_ = 1.0;
  std::size_t n_steps_ = 1;
};

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(TimeGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}
  GridFunction(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw ConfigError("GridFunction: expected " + std::to_string(grid_.size()) + " values, got " +
                        std::to_string(values_.size()));
    }
  }

  template <class Fn>
  static GridFunction sample(TimeGrid grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
    return {grid, std::move(v)};
  }

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::vector<double>& mutable_values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  [[nodiscard]] double back() const { return values_.back(); }

  /// Piecewise-linear interpolation; t outside the grid is clamped.
  [[nodiscard]] double at(double t) const noexcept {
    const std::size_t n = grid_.n_steps();
    if (t <= 0.0) return values_.front();
    if (t >= grid_.horizon()) return values_.back();
    const double pos = t / grid_.dt();
    auto i = static_cast<std::size_t>(pos);
    if (i >= n) return values_.back();
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  /// Same grid reinterpreted on another horizon (values untouched).
  [[nodiscard]] GridFunction on_grid(TimeGrid grid) const {
    if (grid.n_steps() != grid_.n_steps()) throw ConfigError("GridFunction::on_grid: step count mismatch");
    return {grid, values_};
  }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

/// Pointwise map of one or more grid functions sharing a grid.
template <class Fn>
GridFunction transform(const GridFunction& a, Fn&& fn) {
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
  return out;
}

template <class Fn>
GridFunction transform(const GridFunction& a, const GridFunction& b, Fn&& fn) {
  if (a.size() != b.size()) throw ConfigError("transform: grid size mismatch");
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
  return out;
}

/// Trapezoid integral of f over [t_from, t_to].
inline double integrate(const GridFunction& f, std::size_t from, std::size_t to) {
  if (from > to) throw ConfigError("integrate: from > to");
  if (to >= f.size()) throw ConfigError("integrate: index out of range");
  const double half_dt = 0.5 * f.grid().dt();
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += half_dt * (f[i] + f[i + 1]);
  return acc;
}

inline double integrate(const GridFunction& f) { return integrate(f, 0, f.size() - 1); }

/// F(t_i) = integral of f over [0, t_i]; same summation order as integrate().
inline GridFunction cumulative_integral(const GridFunction& f) {
  GridFunction out(f.grid());
  const double half_dt = 0.5 * f.grid().dt();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    acc += half_dt * (f[i] + f[i + 1]);
    out[i + 1] = acc;
  }
  return out;
}

/// R(t_i) = integral of f over [t_i, T], computed as total minus forward.
inline GridFunction reverse_cumulative_integral(const GridFunction& f) {
  GridFunction fwd = cumulative_integral(f);
  const double total = fwd.back();
  for (std::size_t i = 0; i < fwd.size(); ++i) fwd[i] = total - fwd[i];
  fwd[fwd.size() - 1] = 0.0;
  return fwd;
}

/// Left-point (Ito) sums: out(t_i) = sum_{j<i} integrand(t_j) * (x(t_{j+1}) - x(t_j)).
inline GridFunction ito_integral(const GridFunction& integrand, const GridFunction& x) {
  if (integrand.size() != x.size()) throw ConfigError("ito_integral: grid size mismatch");
  GridFunction out(x.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    acc += integrand[i] * (x[i + 1] - x[i]);
    out[i + 1] = acc;
  }
  return out;
}

inline double sup_abs_diff(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw ConfigError("sup_abs_diff: grid size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace adfgof
