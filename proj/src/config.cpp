#include "hypercell/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "hypercell/error.hpp"

namespace hypercell::cli {

namespace {

struct ExperimentName {
  Experiment e;
  std::string_view name;
};

constexpr ExperimentName kExperiments[] = {
    {Experiment::Complementary, "complementary"}, {Experiment::SmallCells, "small_cells"},
    {Experiment::Speed, "speed"},                 {Experiment::LimitShape, "limit_shape"},
    {Experiment::Atoms, "atoms"},                 {Experiment::TailLemma, "tail_lemma"},
    {Experiment::SampleDump, "sample_dump"},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

double get_real(const Json& j, const char* key) {
  if (!j.is_number()) config_error(fmt::format("'{}' must be a number", key));
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(fmt::format("'{}' must be finite", key));
  return v;
}

std::int64_t get_int(const Json& j, const char* key) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  // 2e5 in a file is a float but an exact integer.
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  config_error(fmt::format("'{}' must be an integer", key));
}

std::vector<double> get_reals(const Json& j, const char* key) {
  if (!j.is_array()) config_error(fmt::format("'{}' must be a list of numbers", key));
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_real(x, key));
  return out;
}

Vec get_vec(const Json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    config_error(fmt::format("atom direction must have {} coordinates", dim));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = get_real(j[i], "dir");
  return v;
}

Json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json out = Json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    Json out = Json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* v = node.as_string()) return Json(v->get());
  if (const auto* v = node.as_integer()) return Json(v->get());
  if (const auto* v = node.as_floating_point()) return Json(v->get());
  if (const auto* v = node.as_boolean()) return Json(v->get());
  config_error("unsupported TOML value (dates and times are not config values)");
}

void dump_to(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        dump_to(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_to(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        out += fmt::format("{:.17g}", v);
      }
      break;
    }
    default: out += j.dump();
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& x : kExperiments)
    if (x.e == e) return x.name;
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& x : kExperiments)
    if (x.name == name) return x.e;
  config_error(fmt::format("unknown experiment '{}'", name));
}

std::vector<double> default_a_grid(double gamma) {
  std::vector<double> grid;
  for (int j = 0; j <= 5; ++j) grid.push_back(0.2 * std::ldexp(1.0, -j) / gamma);
  return grid;
}

DirectionalDistribution make_distribution(const Json& spec, int dim) {
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
    config_error("distribution needs a string 'type'");
  const std::string type = spec["type"].get<std::string>();
  try {
    if (type == "isotropic") return DirectionalDistribution::isotropic(dim);
    if (type == "discrete") {
      if (!spec.contains("atoms") || !spec["atoms"].is_array()) config_error("discrete distribution needs 'atoms'");
      std::vector<std::pair<Vec, double>> atoms;
      for (const auto& a : spec["atoms"]) {
        if (!a.is_object() || !a.contains("dir") || !a.contains("mass")) config_error("atom needs 'dir' and 'mass'");
        atoms.emplace_back(get_vec(a["dir"], dim), get_real(a["mass"], "mass"));
      }
      return DirectionalDistribution::discrete(dim, atoms);
    }
    if (type == "density") {
      const std::string kind = spec.value("kind", "");
      if (kind != "cos2theta") config_error(fmt::format("unknown density kind '{}'", kind));
      if (!spec.contains("amplitude") || !spec.contains("bound")) config_error("density needs 'amplitude' and 'bound'");
      return DirectionalDistribution::cos2theta(dim, get_real(spec["amplitude"], "amplitude"),
                                                get_real(spec["bound"], "bound"));
    }
    if (type == "mixture") {
      if (!spec.contains("parts") || !spec["parts"].is_array()) config_error("mixture needs 'parts'");
      std::vector<MixturePart> parts;
      for (const auto& p : spec["parts"]) {
        if (!p.is_object() || !p.contains("weight") || !p.contains("dist"))
          config_error("mixture part needs 'weight' and 'dist'");
        parts.push_back({get_real(p["weight"], "weight"), make_distribution(p["dist"], dim)});
      }
      return DirectionalDistribution::mixture(std::move(parts));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    config_error(e.what());
  }
  config_error(fmt::format("unknown distribution type '{}'", type));
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) config_error("config must be an object");
  ExperimentConfig c;
  bool have_grid = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") {
      if (!v.is_string()) config_error("'experiment' must be a string");
      c.experiment = parse_experiment(v.get<std::string>());
    } else if (key == "dim") {
      c.dim = static_cast<int>(get_int(v, "dim"));
    } else if (key == "gamma") {
      c.gamma = get_real(v, "gamma");
    } else if (key == "dist") {
      c.dist = v;
    } else if (key == "sigma") {
      if (!v.is_string()) config_error("'sigma' must be a string");
      try {
        c.sigma = parse_size_functional(v.get<std::string>());
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (key == "a_grid") {
      c.a_grid = get_reals(v, "a_grid");
      have_grid = true;
    } else if (key == "n_samples") {
      c.n_samples = get_int(v, "n_samples");
    } else if (key == "seed") {
      if (v.is_number_unsigned()) {
        c.seed = v.get<std::uint64_t>();
      } else {
        const std::int64_t s = get_int(v, "seed");
        if (s < 0) config_error("'seed' must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
      }
    } else if (key == "workers") {
      c.workers = static_cast<int>(get_int(v, "workers"));
    } else if (key == "window_R") {
      if (v.is_null()) {
        c.window_R.reset();
      } else {
        c.window_R = get_real(v, "window_R");
      }
    } else if (key == "output_dir") {
      if (!v.is_string()) config_error("'output_dir' must be a string");
      c.output_dir = v.get<std::string>();
    } else if (key == "tolerance_factor") {
      c.tolerance_factor = get_real(v, "tolerance_factor");
    } else if (key == "oracle_samples") {
      c.oracle_samples = get_int(v, "oracle_samples");
    } else if (key == "t_grid") {
      c.t_grid = get_reals(v, "t_grid");
    } else {
      config_error(fmt::format("unknown config key '{}'", key));
    }
  }
  if (c.dim < 2) config_error("'dim' must be at least 2");
  if (!(c.gamma > 0.0)) config_error("'gamma' must be positive");
  if (c.n_samples <= 0) config_error("'n_samples' must be positive");
  if (c.workers <= 0) config_error("'workers' must be positive");
  if (c.oracle_samples <= 0) config_error("'oracle_samples' must be positive");
  if (!(c.tolerance_factor > 0.0)) config_error("'tolerance_factor' must be positive");
  if (c.window_R && !(*c.window_R > 0.0)) config_error("'window_R' must be positive");
  if (!have_grid) c.a_grid = default_a_grid(c.gamma);
  for (double a : c.a_grid)
    if (!(a > 0.0)) config_error("a_grid entries must be positive");
  for (double t : c.t_grid)
    if (!(t > 0.0)) config_error("t_grid entries must be positive");
  // Builds once to surface malformed distributions as config errors.
  make_distribution(c.dist, c.dim);
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["dim"] = c.dim;
  j["gamma"] = c.gamma;
  j["dist"] = c.dist;
  j["sigma"] = std::string(to_string(c.sigma));
  j["a_grid"] = c.a_grid;
  j["n_samples"] = c.n_samples;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["window_R"] = c.window_R ? Json(*c.window_R) : Json(nullptr);
  j["output_dir"] = c.output_dir;
  j["tolerance_factor"] = c.tolerance_factor;
  j["oracle_samples"] = c.oracle_samples;
  j["t_grid"] = c.t_grid;
  return j;
}

Json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::string ext;
  if (const auto dot = path.rfind('.'); dot != std::string::npos) ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == "toml") {
    try {
      return toml_to_json(toml::parse(text, path));
    } catch (const toml::parse_error& e) {
      config_error(fmt::format("{}: {}", path, e.description()));
    }
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    config_error(fmt::format("{}: {}", path, e.what()));
  }
}

Json merge_config(Json base, const Json& overrides) {
  if (!base.is_object()) base = Json::object();
  for (const auto& [k, v] : overrides.items()) base[k] = v;
  return base;
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_to(j, out);
  return out;
}

std::string emit_config(const ExperimentConfig& c) { return canonical_dump(config_to_json(c)); }

ExperimentConfig parse_config(std::string_view text) {
  try {
    return config_from_json(Json::parse(text));
  } catch (const Json::parse_error& e) {
    config_error(e.what());
  }
}

std::string config_hash(const ExperimentConfig& c) {
  Json j = config_to_json(c);
  j.erase("workers");
  j.erase("output_dir");
  return sha256_hex(canonical_dump(j));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoError, "sha256 failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace hypercell::cli
