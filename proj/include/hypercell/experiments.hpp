#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hypercell/config.hpp"
#include "hypercell/estimators.hpp"
#include "hypercell/output.hpp"
#include "hypercell/runner.hpp"

namespace hypercell::cli {

struct Diagnostic {
  enum class Level { Info, Warning, Error };
  Level level;
  std::string key;
  std::string message;
};

std::string_view to_string(Diagnostic::Level l);

/// Distribution validity, n_min, delta_max, supp_condition_atoms,
/// experiment/distribution compatibility and a pilot estimate of the
/// sample budget. Never throws for a parsed config.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

/// Throws Error(ConfigError) listing every Error-level diagnostic.
void require_valid(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

struct RunManifest {
  std::string run;
  std::string version;
  std::string started;
  std::string finished;
  Json config;
  DropCounters drops;
  std::vector<CheckResult> checks;
  std::vector<FileEntry> files;

  bool all_pass() const;
};

Json manifest_json(const RunManifest& m);

/// Executes the configured experiment into config.output_dir and writes
/// manifest.json. Throws Error(ConfigError) for an invalid config and
/// Error(IoError) when outputs cannot be written.
RunManifest run(const ExperimentConfig& config);

std::string code_version();

// Analysis pieces shared by the experiments and the acceptance suite.

/// Process parameters of a config; throws Error(ConfigError).
ProcessParams params_of(const ExperimentConfig& config);

/// Φ values of the samples with f = n.
std::vector<double> phi_given_f(std::span<const TypicalCellSample> samples, int n);

/// Pearson correlation of Φ with a summary field among samples with f = n.
double corr_phi_given_f(std::span<const TypicalCellSample> samples, int n, double ShapeSummary::*field);

/// True unless some later grid point's CI lies entirely below an earlier
/// one's (grid ordered by decreasing a, estimates expected nondecreasing).
bool nondecreasing_within_ci(std::span<const ConditionalEstimate> seq);

/// Wilson-based standard error proxy sqrt(p(1-p)/n) used as fit weight.
RatePoint rate_point(const ConditionalEstimate& e);

/// Empirical mean of iso_ratio among samples with Σ^{1/k} < a.
McEstimate conditional_iso_ratio(std::span<const TypicalCellSample> samples, SizeFunctional sigma, double a);

}  // namespace hypercell::cli
