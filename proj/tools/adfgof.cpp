// Command-line front end: simulate, test, size, power, calibrate, validate, show-config.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adfgof/calibration.hpp"
#include "adfgof/config.hpp"
#include "adfgof/empirical_test.hpp"
#include "adfgof/limit_transform.hpp"
#include "adfgof/sde.hpp"
#include "adfgof/studies.hpp"

namespace {

using adfgof::RunConfig;

struct Overrides {
  std::string config_path;
  std::string model;
  double theta = 0, epsilon = 0, T = 0, alpha = 0, r_cut = 0;
  std::size_t n_steps = 0, n_reps = 0, threads = 0;
  std::uint64_t seed = 0;
  std::string table, output;
  std::string alt_kind;
  double alt_amplitude = 0, alt_frequency = 0, alt_shift = 0, alt_theta = 0;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_path, "JSON config file");
  app->add_option("--model", o.model, "model name (linear, constant)");
  app->add_option("--theta", o.theta, "true parameter");
  app->add_option("--epsilon", o.epsilon, "noise level");
  app->add_option("--T", o.T, "observation horizon");
  app->add_option("--n-steps", o.n_steps, "grid steps");
  app->add_option("--alpha", o.alpha, "test level");
  app->add_option("--n-reps", o.n_reps, "Monte Carlo replications");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--r-cut", o.r_cut, "transform truncation point in (0,1)");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app->add_option("--table", o.table, "quantile table CSV");
  app->add_option("-o,--output", o.output, "output file");
  app->add_option("--alt-kind", o.alt_kind, "alternative: none, sin, shift");
  app->add_option("--alt-amplitude", o.alt_amplitude, "sin alternative amplitude");
  app->add_option("--alt-frequency", o.alt_frequency, "sin alternative frequency");
  app->add_option("--alt-shift", o.alt_shift, "shift alternative constant");
  app->add_option("--alt-theta", o.alt_theta, "base parameter of the alternative");
}

RunConfig resolve(const CLI::App* app, const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : adfgof::load_config(o.config_path);
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--model")) c.model = o.model;
  if (given("--theta")) c.theta_true = o.theta;
  if (given("--epsilon")) c.epsilon = o.epsilon;
  if (given("--T")) c.T = o.T;
  if (given("--n-steps")) c.n_steps = o.n_steps;
  if (given("--alpha")) c.alpha = o.alpha;
  if (given("--n-reps")) c.n_reps = o.n_reps;
  if (given("--seed")) c.base_seed = o.seed;
  if (given("--r-cut")) c.r_cut = o.r_cut;
  if (given("--threads")) c.threads = o.threads;
  if (given("--table")) c.quantile_table = o.table;
  if (given("--output")) c.output = o.output;
  if (given("--alt-kind")) c.alternative.kind = o.alt_kind;
  if (given("--alt-amplitude")) c.alternative.amplitude = o.alt_amplitude;
  if (given("--alt-frequency")) c.alternative.frequency = o.alt_frequency;
  if (given("--alt-shift")) c.alternative.shift = o.alt_shift;
  if (given("--alt-theta")) c.alternative.base_theta = o.alt_theta;
  return c;
}

/// Output stream for `path`, or stdout when empty.
std::unique_ptr<std::ostream, void (*)(std::ostream*)> open_output(const std::string& path) {
  if (path.empty()) return {&std::cout, [](std::ostream*) {}};
  auto* f = new std::ofstream(path);
  if (!*f) {
    delete f;
    throw adfgof::Error("cannot open '" + path + "' for writing");
  }
  return {f, [](std::ostream* s) { delete s; }};
}

nlohmann::json provenance(const RunConfig& c) {
  return {{"config_hash", adfgof::hex64(adfgof::config_hash(c))}, {"base_seed", c.base_seed}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-free goodness-of-fit test for small-noise diffusions"};
  app.require_subcommand(1);

  Overrides o;
  auto* sim = app.add_subcommand("simulate", "simulate one trajectory and write it as CSV (t,X)");
  add_common(sim, o);
  std::uint64_t replication = 0;
  bool use_alt = false;
  sim->add_option("--replication", replication, "replication index within the base seed");
  sim->add_flag("--alternative", use_alt, "simulate under the configured alternative");

  auto* test = app.add_subcommand("test", "run the test on a trajectory CSV");
  add_common(test, o);
  std::string traj_path;
  test->add_option("trajectory", traj_path, "trajectory CSV with header t,X")->required();

  auto* size = app.add_subcommand("size", "Monte Carlo rejection rate under the null");
  add_common(size, o);
  auto* power = app.add_subcommand("power", "Monte Carlo rejection rate under the alternative");
  add_common(power, o);

  auto* cal = app.add_subcommand("calibrate", "simulate critical values of int_0^r_cut w^2");
  add_common(cal, o);
  std::size_t cal_paths = 0, cal_steps = 0;
  cal->add_option("--n-paths", cal_paths, "number of Wiener paths (>= 10000)");
  cal->add_option("--cal-steps", cal_steps, "grid steps per path");

  auto* val = app.add_subcommand("validate", "identity, kernel and normalization checks");
  add_common(val, o);
  std::string profile_csv;
  val->add_option("--profile-csv", profile_csv, "also write the transform profile to this CSV");

  auto* show = app.add_subcommand("show-config", "print the effective configuration as JSON");
  add_common(show, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg = resolve(sub, o);

    if (sub == show) {
      nlohmann::json j = cfg;
      j["config_hash"] = adfgof::hex64(adfgof::config_hash(cfg));
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (sub == val) {
      const auto checks = adfgof::validate_suite(cfg);
      adfgof::print_checks(checks, std::cout);
      if (!profile_csv.empty()) {
        adfgof::save_profile_csv(adfgof::build_profile(adfgof::make_model(cfg), cfg.theta_true, cfg.n_steps),
                                 profile_csv);
      }
      return adfgof::all_passed(checks) ? 0 : 1;
    }

    if (sub == cal) {
      if (sub->count("--n-paths")) cfg.calibration.n_paths = cal_paths;
      if (sub->count("--cal-steps")) cfg.calibration.n_steps = cal_steps;
      if (sub->count("--seed")) cfg.calibration.seed = cfg.base_seed;
      const auto table = adfgof::calibrate(cfg.calibration.alphas, cfg.r_cut, cfg.calibration.n_paths,
                                           cfg.calibration.n_steps, cfg.calibration.seed, cfg.threads);
      auto os = open_output(cfg.output);
      adfgof::write_table_csv(table, *os);
      return 0;
    }

    cfg.validate(sub == sim || sub == test);
    const adfgof::ModelSpec m = adfgof::make_model(cfg);

    if (sub == sim) {
      const adfgof::TimeGrid grid(cfg.T, cfg.n_steps);
      const adfgof::Seed seed{cfg.base_seed, replication};
      const adfgof::Trajectory tr =
          use_alt ? adfgof::simulate_alternative(adfgof::make_alternative(m, cfg.alternative), m.x0, cfg.epsilon,
                                                 grid, seed)
                  : adfgof::simulate(m, cfg.theta_true, cfg.epsilon, grid, seed);
      auto os = open_output(cfg.output);
      adfgof::write_trajectory_csv(tr, *os);
      return 0;
    }

    const adfgof::QuantileTable table = adfgof::load_table(cfg.quantile_table);

    if (sub == test) {
      const adfgof::Trajectory tr = adfgof::load_trajectory_csv(traj_path, cfg.epsilon);
      adfgof::TestOptions opt;
      opt.alpha = cfg.alpha;
      opt.r_cut = cfg.r_cut;
      opt.mde.n_scan = cfg.n_scan;
      nlohmann::json j = adfgof::report_json(adfgof::run_test(tr, m, table, opt));
      j["provenance"] = provenance(cfg);
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (sub == size || sub == power) {
      const adfgof::StudyResult res = adfgof::run_study(cfg, table, sub == power);
      if (!cfg.output.empty()) {
        auto os = open_output(cfg.output);
        adfgof::write_study_csv(res, *os);
      }
      nlohmann::json j = adfgof::summary_json(res.summary);
      j["alpha"] = cfg.alpha;
      j["provenance"] = provenance(cfg);
      std::cout << j.dump(2) << '\n';
      return 0;
    }
  } catch (const adfgof::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
