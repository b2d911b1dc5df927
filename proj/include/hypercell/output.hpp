#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hypercell/config.hpp"
#include "hypercell/estimators.hpp"
#include "hypercell/runner.hpp"

namespace hypercell::cli {

/// Float formatting used by every output: 17 significant digits.
std::string fmt_real(double x);

/// One samples.jsonl object (no trailing newline).
Json sample_json(const Drawn& d, const std::string& run, std::uint64_t seed);

struct EstimateRow {
  std::string experiment_id;
  std::string theorem_tag;
  ConditionalEstimate est;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct FileEntry {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Output directory of one run. Every file written through it is hashed for
/// the manifest.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string run);

  const std::string& run() const { return run_; }
  const std::filesystem::path& path() const { return dir_; }

  /// Streaming JSONL writer; call close_jsonl() to hash it.
  void open_jsonl(const std::string& name);
  void write_line(const std::string& line);
  void close_jsonl();

  void write_file(const std::string& name, const std::string& content);
  void write_estimates(const std::vector<EstimateRow>& rows);
  /// Tidy CSV with a leading `# run=` comment.
  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

  const std::vector<FileEntry>& files() const { return files_; }

 private:
  void record(const std::string& name);

  std::filesystem::path dir_;
  std::string run_;
  std::ofstream jsonl_;
  std::string jsonl_name_;
  std::vector<FileEntry> files_;
};

std::string file_sha256(const std::filesystem::path& p);

}  // namespace hypercell::cli
