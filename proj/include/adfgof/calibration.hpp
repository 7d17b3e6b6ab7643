#pragma once

// Monte Carlo critical values of the truncated Wiener functional
//   int_0^{r_cut} w(v)^2 dv.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adfgof/error.hpp"
#include "adfgof/grid.hpp"
#include "adfgof/parallel.hpp"
#include "adfgof/rng.hpp"
#include "adfgof/sde.hpp"

namespace adfgof {

struct QuantileRow {
  double alpha = 0.0;
  double c_alpha = 0.0;

  bool operator==(const QuantileRow&) const = default;
};

struct QuantileTable {
  double r_cut = 0.95;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<QuantileRow> rows;  // ascending alpha, descending c_alpha

  /// c_alpha for an alpha present in the table.
  [[nodiscard]] double critical_value(double alpha) const {
    for (const auto& row : rows) {
      if (std::abs(row.alpha - alpha) <= 1e-12) return row.c_alpha;
    }
    std::ostringstream os;
    os << "quantile table has no row for alpha=" << alpha << " (available:";
    for (const auto& row : rows) os << ' ' << row.alpha;
    os << ')';
    throw ConfigError(os.str());
  }

  /// Refuses a table calibrated for a different truncation point.
  void require_r_cut(double expected) const {
    if (std::abs(r_cut - expected) > 1e-12) {
      std::ostringstream os;
      os << "quantile table was calibrated for r_cut=" << r_cut << " but the test uses r_cut=" << expected;
      throw ConfigError(os.str());
    }
  }

  bool operator==(const QuantileTable&) const = default;
};

/// int_0^{r_cut} w^2 dv by trapezoid, for a path sampled on the unit grid.
inline double wiener_functional(const GridFunction& w, double r_cut) {
  const std::size_t i_cut = w.grid().index_at_or_below(r_cut);
  return integrate(transform(w, [](double v) { return v * v; }), 0, i_cut);
}

/// One functional value per path; path p uses Seed{seed, p} on the calibration stream.
inline std::vector<double> simulate_functional(double r_cut, std::size_t n_paths, std::size_t n_steps,
                                               std::uint64_t seed, std::size_t threads = 0) {
  if (!(r_cut > 0.0 && r_cut <= 1.0)) throw ConfigError("r_cut must lie in (0, 1]");
  const TimeGrid grid(1.0, n_steps);
  const std::size_t i_cut = grid.index_at_or_below(r_cut);
  const double sd = std::sqrt(grid.dt());
  const double dt = grid.dt();
  std::vector<double> out(n_paths);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        thread_local std::vector<double> dw;
        dw.resize(i_cut);
        NormalStream(Seed{seed, p}, Stream::kCalibration).fill(dw);
        // trapezoid of w^2 over nodes 0..i_cut, w_0 = 0
        double w = 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < i_cut; ++i) {
          w += sd * dw[i];
          acc += w * w;
        }
        out[p] = dt * (acc - 0.5 * w * w);
      },
      threads);
  return out;
}

/// Type-7 (linear interpolation) sample quantile at probability `prob` of sorted data.
inline double quantile_type7(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline void validate_table(const QuantileTable& t, const std::string& source) {
  if (t.rows.empty()) throw ParseError(source + ": quantile table has no rows");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (!(r.alpha > 0.0 && r.alpha < 1.0)) throw ParseError(source + ": alpha outside (0, 1)");
    if (!std::isfinite(r.c_alpha)) throw ParseError(source + ": non-finite c_alpha");
    if (i > 0 && !(r.alpha > t.rows[i - 1].alpha)) throw ParseError(source + ": rows not sorted by alpha");
    if (i > 0 && !(r.c_alpha < t.rows[i - 1].c_alpha)) {
      throw ParseError(source + ": c_alpha not strictly decreasing in alpha");
    }
  }
  if (!(t.r_cut > 0.0 && t.r_cut <= 1.0)) throw ParseError(source + ": r_cut outside (0, 1]");
}

inline QuantileTable calibrate(std::vector<double> alphas, double r_cut, std::size_t n_paths, std::size_t n_steps,
                               std::uint64_t seed, std::size_t threads = 0) {
  if (n_paths < 10000) throw ConfigError("calibrate: n_paths must be >= 10000");
  if (alphas.empty()) throw ConfigError("calibrate: no alpha values given");
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  std::vector<double> sample = simulate_functional(r_cut, n_paths, n_steps, seed, threads);
  std::sort(sample.begin(), sample.end());
  QuantileTable t{r_cut, n_paths, n_steps, seed, {}};
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("calibrate: alpha must lie in (0, 1)");
    t.rows.push_back({a, quantile_type7(sample, 1.0 - a)});
  }
  validate_table(t, "calibrate");
  return t;
}

// CSV: alpha,c_alpha,r_cut,n_paths,n_steps,seed. Values use the shortest
// round-trip representation, so save/load is bit-exact.
inline constexpr const char* kQuantileHeader = "alpha,c_alpha,r_cut,n_paths,n_steps,seed";

inline void write_table_csv(const QuantileTable& t, std::ostream& os) {
  os << kQuantileHeader << '\n';
  for (const auto& r : t.rows) {
    os << format_double(r.alpha) << ',' << format_double(r.c_alpha) << ',' << format_double(t.r_cut) << ','
       << t.n_paths << ',' << t.n_steps << ',' << t.seed << '\n';
  }
}

inline void save_table(const QuantileTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_table_csv(t, os);
  if (!os) throw Error("failed writing '" + path + "'");
}

namespace detail {
inline std::uint64_t parse_uint(const std::string& s, const std::string& ctx) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(ctx + ": cannot parse integer '" + s + "'");
  return v;
}
}  // namespace detail

inline QuantileTable read_table_csv(std::istream& is, const std::string& source = "quantile table") {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kQuantileHeader) {
    throw ParseError(source + ": expected header '" + std::string(kQuantileHeader) + "', got '" + line + "'");
  }
  QuantileTable t;
  bool first = true;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = source + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw ParseError(ctx + ": expected 6 fields, got " + std::to_string(f.size()));
    const QuantileRow row{parse_double(f[0], ctx), parse_double(f[1], ctx)};
    const double r_cut = parse_double(f[2], ctx);
    const std::size_t n_paths = detail::parse_uint(f[3], ctx);
    const std::size_t n_steps = detail::parse_uint(f[4], ctx);
    const std::uint64_t seed = detail::parse_uint(f[5], ctx);
    if (first) {
      t.r_cut = r_cut;
      t.n_paths = n_paths;
      t.n_steps = n_steps;
      t.seed = seed;
      first = false;
    } else if (r_cut != t.r_cut || n_paths != t.n_paths || n_steps != t.n_steps || seed != t.seed) {
      throw ParseError(ctx + ": metadata columns differ from the first row");
    }
    t.rows.push_back(row);
  }
  validate_table(t, source);
  return t;
}

inline QuantileTable load_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open quantile table '" + path + "'");
  return read_table_csv(is, path);
}

}  // namespace adfgof
