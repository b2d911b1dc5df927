#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypercell {

enum class Errc {
  EmptyCell,
  NotPositivelySpanning,
  IllConditioned,
  InvalidArgument,
  EnvelopeViolation,
  SupportTooLarge,
  UnsupportedDistribution,
  QuadratureNotConverged,
  DegenerateSample,
  RejectionStall,
  ArrangementOverflow,
  EmptyCondition,
  DegenerateGrid,
  ConfigError,
  IoError,
  CheckFailed,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyCell: return "EmptyCell";
    case Errc::NotPositivelySpanning: return "NotPositivelySpanning";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EnvelopeViolation: return "EnvelopeViolation";
    case Errc::SupportTooLarge: return "SupportTooLarge";
    case Errc::UnsupportedDistribution: return "UnsupportedDistribution";
    case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::RejectionStall: return "RejectionStall";
    case Errc::ArrangementOverflow: return "ArrangementOverflow";
    case Errc::EmptyCondition: return "EmptyCondition";
    case Errc::DegenerateGrid: return "DegenerateGrid";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

}  // namespace hypercell
