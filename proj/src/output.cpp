#include "hypercell/output.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "hypercell/error.hpp"

namespace hypercell::cli {

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json real_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace

std::string fmt_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

Json sample_json(const Drawn& d, const std::string& run, std::uint64_t seed) {
  const TypicalCellSample& s = d.sample;
  const int dim = s.dim();
  Json functionals;
  functionals["PhiContent"] = real_or_null(s.values.phi);
  functionals["Inradius"] = real_or_null(s.values.inradius);
  functionals["Circumradius"] = real_or_null(s.values.circumradius);
  functionals["Diameter"] = real_or_null(s.values.diameter);
  functionals["Volume"] = real_or_null(s.values.volume);
  functionals[dim == 2 ? "Perimeter" : "SurfaceArea"] = real_or_null(s.values.boundary);

  Json summary;
  summary["fcount"] = s.summary.fcount;
  summary["phi"] = real_or_null(s.summary.phi);
  summary["circ_over_in"] = real_or_null(s.summary.circ_over_in);
  summary["iso_ratio"] = real_or_null(s.summary.iso_ratio);
  summary["diam_norm"] = real_or_null(s.summary.diam_norm);

  Json cell;
  cell["vertices"] = Json::array();
  for (const auto& v : s.cell.vertices()) cell["vertices"].push_back(vec_json(v));
  cell["halfspaces"] = Json::array();
  for (const auto& h : s.cell.halfspaces())
    cell["halfspaces"].push_back(Json{{"normal", vec_json(h.normal.coords())}, {"bound", h.bound}});

  Json j;
  j["run"] = run;
  j["origin"] = std::string(to_string(s.origin));
  j["center"] = std::string(to_string(s.center));
  j["seed"] = seed;
  j["stream"] = d.stream;
  j["slot"] = d.slot;
  j["fcount"] = s.fcount;
  j["inball_r"] = real_or_null(s.inball_r);
  j["functionals"] = std::move(functionals);
  j["summary"] = std::move(summary);
  j["conditioned_a"] = s.conditioned_a ? Json(*s.conditioned_a) : Json(nullptr);
  j["cell"] = std::move(cell);
  j["dropped"] = false;
  return j;
}

OutputDir::OutputDir(std::filesystem::path dir, std::string run) : dir_(std::move(dir)), run_(std::move(run)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::IoError, fmt::format("cannot create '{}': {}", dir_.string(), ec.message()));
}

void OutputDir::open_jsonl(const std::string& name) {
  jsonl_.open(dir_ / name, std::ios::binary | std::ios::trunc);
  if (!jsonl_) throw Error(Errc::IoError, fmt::format("cannot write '{}'", (dir_ / name).string()));
  jsonl_name_ = name;
}

void OutputDir::write_line(const std::string& line) {
  jsonl_ << line << '\n';
  if (!jsonl_) throw Error(Errc::IoError, fmt::format("write to '{}' failed", jsonl_name_));
}

void OutputDir::close_jsonl() {
  jsonl_.close();
  if (jsonl_.fail()) throw Error(Errc::IoError, fmt::format("closing '{}' failed", jsonl_name_));
  record(jsonl_name_);
}

void OutputDir::write_file(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (out.fail()) throw Error(Errc::IoError, fmt::format("cannot write '{}'", (dir_ / name).string()));
  record(name);
}

void OutputDir::write_estimates(const std::vector<EstimateRow>& rows) {
  std::vector<std::vector<std::string>> table;
  for (const auto& r : rows) {
    table.push_back({r.experiment_id, r.theorem_tag, r.est.sigma_name, fmt_real(r.est.a), std::to_string(r.est.n),
                     fmt_real(r.est.p_hat), fmt_real(r.est.ci_low), fmt_real(r.est.ci_high),
                     std::to_string(r.n_samples), std::to_string(r.seed)});
  }
  write_csv("estimates.csv",
            {"experiment_id", "theorem_tag", "sigma", "a", "n", "p_hat", "ci_low", "ci_high", "n_samples", "seed"},
            table);
}

void OutputDir::write_csv(const std::string& name, const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows) {
  std::string text = "# run=" + run_ + "\n";
  auto add_row = [&](const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) text += ',';
      text += csv_field(cols[i]);
    }
    text += '\n';
  };
  add_row(header);
  for (const auto& r : rows) add_row(r);
  write_file(name, text);
}

void OutputDir::record(const std::string& name) {
  const auto p = dir_ / name;
  files_.push_back({name, file_sha256(p), std::filesystem::file_size(p)});
}

std::string file_sha256(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::IoError, fmt::format("cannot read '{}'", p.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(Errc::IoError, "sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace hypercell::cli
