#pragma once

// Run configuration: a JSON document whose keys mirror RunConfig, plus helpers
// to build the model and alternative it describes.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adfgof/error.hpp"
#include "adfgof/model.hpp"
#include "adfgof/sde.hpp"

namespace adfgof {

struct CalibrationConfig {
  std::vector<double> alphas{0.01, 0.05, 0.10};
  std::size_t n_paths = 1000000;
  std::size_t n_steps = 2000;
  std::uint64_t seed = 20240611;
};

struct RunConfig {
  std::string model = "linear";
  double theta_true = 1.0;
  std::optional<ThetaBounds> theta_bounds;  // model default when absent
  double epsilon = 0.01;
  double T = 1.0;
  std::size_t n_steps = 2000;
  double alpha = 0.05;
  std::size_t n_reps = 2000;
  std::uint64_t base_seed = 1;
  double r_cut = 0.95;
  std::size_t n_scan = 64;
  std::size_t threads = 0;
  std::size_t resolvent_steps = 200000;  // grid used by the resolvent identity check in `validate`
  AlternativeSpec alternative{"none", 1.0, 0.3, 1.0, 0.0};
  std::string quantile_table = "data/quantiles_default.csv";
  std::string output;  // CSV destination for simulate / size / power / calibrate
  CalibrationConfig calibration;

  /// `noise_free_ok` admits epsilon = 0 (simulate and test on a noise-free path).
  void validate(bool noise_free_ok = false) const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!std::isfinite(epsilon) || epsilon < 0.0 || (epsilon == 0.0 && !noise_free_ok)) {
      fail(noise_free_ok ? "epsilon must be >= 0" : "epsilon must be > 0");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (!(r_cut > 0.0 && r_cut < 1.0)) fail("r_cut must lie in (0, 1)");
    if (!(T > 0.0) || !std::isfinite(T)) fail("T must be > 0");
    if (n_steps < 10) fail("n_steps must be >= 10");
    if (n_scan < 3) fail("n_scan must be >= 3");
    if (theta_bounds && !(theta_bounds->lower < theta_bounds->upper)) fail("theta_bounds must satisfy lower < upper");
    if (alternative.kind != "none" && alternative.kind != "sin" && alternative.kind != "shift") {
      fail("alternative.kind must be none, sin or shift");
    }
  }
};

// JSON mapping -------------------------------------------------------------

inline void to_json(nlohmann::json& j, const AlternativeSpec& a) {
  j = {{"kind", a.kind}, {"base_theta", a.base_theta}, {"amplitude", a.amplitude}, {"frequency", a.frequency},
       {"shift", a.shift}};
}

inline void from_json(const nlohmann::json& j, AlternativeSpec& a) {
  a.kind = j.value("kind", a.kind);
  a.base_theta = j.value("base_theta", a.base_theta);
  a.amplitude = j.value("amplitude", a.amplitude);
  a.frequency = j.value("frequency", a.frequency);
  a.shift = j.value("shift", a.shift);
}

inline void to_json(nlohmann::json& j, const CalibrationConfig& c) {
  j = {{"alphas", c.alphas}, {"n_paths", c.n_paths}, {"n_steps", c.n_steps}, {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, CalibrationConfig& c) {
  c.alphas = j.value("alphas", c.alphas);
  c.n_paths = j.value("n_paths", c.n_paths);
  c.n_steps = j.value("n_steps", c.n_steps);
  c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"model", c.model},
       {"theta_true", c.theta_true},
       {"epsilon", c.epsilon},
       {"T", c.T},
       {"n_steps", c.n_steps},
       {"alpha", c.alpha},
       {"n_reps", c.n_reps},
       {"base_seed", c.base_seed},
       {"r_cut", c.r_cut},
       {"n_scan", c.n_scan},
       {"threads", c.threads},
       {"resolvent_steps", c.resolvent_steps},
       {"alternative", c.alternative},
       {"quantile_table", c.quantile_table},
       {"output", c.output},
       {"calibration", c.calibration}};
  if (c.theta_bounds) {
    j["theta_bounds"] = {c.theta_bounds->lower, c.theta_bounds->upper};
  } else {
    j["theta_bounds"] = nullptr;
  }
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  static const char* const kKnown[] = {"model",   "theta_true", "theta_bounds",   "epsilon",      "T",
                                       "n_steps", "alpha",      "n_reps",         "base_seed",    "r_cut",
                                       "n_scan",  "threads",    "resolvent_steps",   "alternative",  "quantile_table",
                                       "output",  "calibration"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || item.key() == k;
    if (!known) throw ConfigError("config: unknown key '" + item.key() + "'");
  }
  c.model = j.value("model", c.model);
  c.theta_true = j.value("theta_true", c.theta_true);
  if (j.contains("theta_bounds") && !j["theta_bounds"].is_null()) {
    const auto& b = j["theta_bounds"];
    if (!b.is_array() || b.size() != 2) throw ConfigError("config: theta_bounds must be [lower, upper] or null");
    c.theta_bounds = ThetaBounds{b[0].get<double>(), b[1].get<double>()};
  }
  c.epsilon = j.value("epsilon", c.epsilon);
  c.T = j.value("T", c.T);
  c.n_steps = j.value("n_steps", c.n_steps);
  c.alpha = j.value("alpha", c.alpha);
  c.n_reps = j.value("n_reps", c.n_reps);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.r_cut = j.value("r_cut", c.r_cut);
  c.n_scan = j.value("n_scan", c.n_scan);
  c.threads = j.value("threads", c.threads);
  c.resolvent_steps = j.value("resolvent_steps", c.resolvent_steps);
  if (j.contains("alternative")) c.alternative = j["alternative"].get<AlternativeSpec>();
  c.quantile_table = j.value("quantile_table", c.quantile_table);
  c.output = j.value("output", c.output);
  if (j.contains("calibration")) c.calibration = j["calibration"].get<CalibrationConfig>();
}

inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  try {
    return nlohmann::json::parse(text).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

/// 64-bit FNV-1a of the canonical (key-sorted, compact) JSON form.
inline std::uint64_t config_hash(const RunConfig& c) {
  const std::string s = nlohmann::json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

/// The configured model, with horizon T and optional theta bounds applied.
inline ModelSpec make_model(const RunConfig& c) {
  ModelSpec m = builtin(c.model);
  m.horizon = c.T;
  if (c.theta_bounds) m.theta_bounds = *c.theta_bounds;
  return m;
}

}  // namespace adfgof
