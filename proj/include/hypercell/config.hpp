#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hypercell/directions.hpp"
#include "hypercell/functionals.hpp"

namespace hypercell::cli {

using Json = nlohmann::json;

enum class Experiment { Complementary, SmallCells, Speed, LimitShape, Atoms, TailLemma, SampleDump };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

struct ExperimentConfig {
  Experiment experiment = Experiment::Complementary;
  int dim = 2;
  double gamma = 1.0;
  /// Tagged record, see make_distribution.
  Json dist = Json{{"type", "isotropic"}};
  SizeFunctional sigma = SizeFunctional::Circumradius;
  /// Defaults to a_j = 0.2·2^{-j}/γ, j = 0..5.
  std::vector<double> a_grid;
  std::int64_t n_samples = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::optional<double> window_R;
  std::string output_dir = "out";
  double tolerance_factor = 1.5;
  std::int64_t oracle_samples = 1'000'000;
  std::vector<double> t_grid = {2.0, 4.0, 8.0, 16.0, 32.0};

  bool operator==(const ExperimentConfig&) const = default;
};

std::vector<double> default_a_grid(double gamma);

/// Builds a distribution from its config record:
///   {type:"isotropic"}
///   {type:"discrete", atoms:[{dir:[...], mass:...}]}
///   {type:"density", kind:"cos2theta", amplitude:..., bound:...}
///   {type:"mixture", parts:[{weight:..., dist:{...}}]}
/// Throws Error(ConfigError) on a malformed record.
DirectionalDistribution make_distribution(const Json& spec, int dim);

/// Strict conversion: unknown keys and ill-typed values throw
/// Error(ConfigError). Missing keys take their defaults.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& c);

/// Reads a .toml or .json file into JSON (TOML tables map to objects).
Json read_config_file(const std::string& path);

/// Layers `overrides` over `base` key by key.
Json merge_config(Json base, const Json& overrides);

/// Canonical text: sorted keys, no whitespace, floats with 17 significant
/// digits.
std::string canonical_dump(const Json& j);
std::string emit_config(const ExperimentConfig& c);
ExperimentConfig parse_config(std::string_view text);

/// SHA-256 of the canonical config with the keys that cannot change results
/// (workers, output_dir) removed.
std::string config_hash(const ExperimentConfig& c);

std::string sha256_hex(std::string_view data);

}  // namespace hypercell::cli
