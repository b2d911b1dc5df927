// hypercell: run and validate small-cell experiments on Poisson hyperplane
// tessellations.
//
//   hypercell run --config exp.toml [--seed N] [--workers W] [...]
//   hypercell validate --config exp.toml

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hypercell/config.hpp"
#include "hypercell/error.hpp"
#include "hypercell/experiments.hpp"

namespace {

using hypercell::Errc;
using hypercell::Error;
using namespace hypercell::cli;

enum ExitCode { kOk = 0, kChecksFailed = 1, kConfigError = 2, kIoError = 3, kInternal = 4 };

/// Command-line mirrors of the config keys. Only flags actually given
/// override the file.
struct Overrides {
  std::optional<std::string> experiment;
  std::optional<int> dim;
  std::optional<double> gamma;
  std::optional<std::string> sigma;
  std::optional<std::vector<double>> a_grid;
  std::optional<std::int64_t> n_samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> window_R;
  std::optional<std::string> output_dir;
  std::optional<double> tolerance_factor;
  std::optional<std::int64_t> oracle_samples;
  std::optional<std::vector<double>> t_grid;

  void attach(CLI::App* app) {
    app->add_option("--experiment", experiment, "experiment name");
    app->add_option("--dim", dim, "dimension d");
    app->add_option("--gamma", gamma, "intensity γ");
    app->add_option("--sigma", sigma, "size functional");
    app->add_option("--a-grid", a_grid, "conditioning levels")->delimiter(',');
    app->add_option("--n-samples", n_samples, "sample count");
    app->add_option("--seed", seed, "64-bit seed");
    app->add_option("--workers", workers, "worker threads");
    app->add_option("--window-R", window_R, "window radius");
    app->add_option("--output-dir", output_dir, "output directory");
    app->add_option("--tolerance-factor", tolerance_factor, "KS tolerance factor");
    app->add_option("--oracle-samples", oracle_samples, "limit-shape oracle proposals");
    app->add_option("--t-grid", t_grid, "tail grid")->delimiter(',');
  }

  Json to_json() const {
    Json j = Json::object();
    if (experiment) j["experiment"] = *experiment;
    if (dim) j["dim"] = *dim;
    if (gamma) j["gamma"] = *gamma;
    if (sigma) j["sigma"] = *sigma;
    if (a_grid) j["a_grid"] = *a_grid;
    if (n_samples) j["n_samples"] = *n_samples;
    if (seed) j["seed"] = *seed;
    if (workers) j["workers"] = *workers;
    if (window_R) j["window_R"] = *window_R;
    if (output_dir) j["output_dir"] = *output_dir;
    if (tolerance_factor) j["tolerance_factor"] = *tolerance_factor;
    if (oracle_samples) j["oracle_samples"] = *oracle_samples;
    if (t_grid) j["t_grid"] = *t_grid;
    return j;
  }
};

ExperimentConfig load(const std::string& path, const Overrides& ov) {
  // Precedence: flags over file over defaults (defaults fill in during
  // conversion).
  return config_from_json(merge_config(read_config_file(path), ov.to_json()));
}

int cmd_validate(const ExperimentConfig& config) {
  bool errors = false;
  for (const auto& d : validate(config)) {
    fmt::print("{:<8} {:<22} {}\n", to_string(d.level), d.key, d.message);
    errors = errors || d.level == Diagnostic::Level::Error;
  }
  return errors ? kConfigError : kOk;
}

int cmd_run(const ExperimentConfig& config) {
  const RunManifest m = run(config);
  for (const auto& c : m.checks) fmt::print("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
  for (const auto& [k, v] : m.drops)
    if (v != 0) fmt::print("drops {} = {}\n", k, v);
  fmt::print("run {} -> {}\n", m.run, config.output_dir);
  return m.all_pass() ? kOk : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small cells of Poisson hyperplane tessellations"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_ov, validate_ov;
  auto* run_cmd = app.add_subcommand("run", "run an experiment and write its outputs");
  run_cmd->add_option("--config", config_path, "TOML or JSON config")->required();
  run_ov.attach(run_cmd);
  auto* validate_cmd = app.add_subcommand("validate", "report diagnostics for a config");
  validate_cmd->add_option("--config", config_path, "TOML or JSON config")->required();
  validate_ov.attach(validate_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(load(config_path, run_ov));
    return cmd_validate(load(config_path, validate_ov));
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case Errc::ConfigError: return kConfigError;
      case Errc::IoError: return kIoError;
      case Errc::CheckFailed: return kChecksFailed;
      default: return kInternal;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
}
