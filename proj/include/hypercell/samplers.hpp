#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hypercell/directions.hpp"
#include "hypercell/functionals.hpp"
#include "hypercell/geometry.hpp"
#include "hypercell/random.hpp"

namespace hypercell {

enum class SampleOrigin { InballSampler, WindowSampler };

std::string_view to_string(SampleOrigin o);

/// Functional values of one cell. `boundary` is the perimeter (d = 2) or the
/// surface area (d = 3).
struct FunctionalValues {
  double phi = 0.0;
  double inradius = 0.0;
  double circumradius = 0.0;
  double diameter = 0.0;
  double volume = 0.0;
  double boundary = 0.0;

  double get(SizeFunctional s) const;
};

struct TypicalCellSample {
  ConvexCell cell;
  double inball_r = 0.0;
  int fcount = 0;
  FunctionalValues values;
  ShapeSummary summary;
  SampleOrigin origin = SampleOrigin::InballSampler;
  CenterFunction center = CenterFunction::Incenter;
  std::optional<double> conditioned_a;
  /// Kept separately so that `cell` may be released once described.
  int d = 0;

  int dim() const { return d; }
  /// Σ(Z)^{1/k}.
  double size_root(SizeFunctional s) const;
};

/// Evaluates every functional and the shape summary of `cell`. `inball_r`, if
/// given, replaces the inradius LP (the inball sampler knows it exactly).
TypicalCellSample describe_cell(ConvexCell cell, const DirectionalDistribution& dist, SampleOrigin origin,
                                CenterFunction center, std::optional<double> inball_r = std::nullopt);

struct AcceptanceStats {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  std::int64_t outside_p = 0;
  SpanDiagnostics span;

  AcceptanceStats& operator+=(const AcceptanceStats& o);
};

/// Proposal budget after which a rejection loop without acceptance stalls.
inline constexpr std::int64_t kStallProposals = 10'000'000;

/// u_{0:d} with density ∝ Δ_d·1(𝖯) under φ^{d+1}: i.i.d. proposals accepted
/// with probability Δ_d / delta_max when they pass the half-sphere test.
DirectionTuple sample_simplex_directions(const DirectionalDistribution& dist, RandomStream& rng,
                                         AcceptanceStats* stats = nullptr);

/// Exp(γ); with `a_cap`, the exact truncation to (0, a_cap) by inverse CDF.
double sample_inradius(double gamma, std::optional<double> a_cap, RandomStream& rng);

struct EnvironmentShell {
  double inner_r;
  double outer_R;
  std::vector<Hyperplane> hyperplanes;
};

/// Hyperplanes of the process with offsets in (inner_r, outer_R].
EnvironmentShell sample_environment(const ProcessParams& params, double inner_r, double outer_R, RandomStream& rng);

/// Typical cell from the inball representation: Z = r·T(u_{0:d}) clipped by
/// the hyperplanes that miss rB^d. Hyperplanes are generated in order of
/// increasing offset and generation stops at the cell's current reach, past
/// which every further hyperplane is redundant.
///
/// Throws Error(DegenerateSample) when the geometry degenerates and
/// Error(UnsupportedDistribution) when φ has atoms.
TypicalCellSample sample_typical_cell_inball(const ProcessParams& params, std::optional<double> a_cap,
                                             RandomStream& rng, AcceptanceStats* stats = nullptr);

struct Conditioning {
  SizeFunctional sigma;
  double a;
};

/// r-truncation used for the event {Σ^{1/k} < a}: a / Σ(B^d)^{1/k}, or none
/// when a·γ >= 1 (the event is not rare).
std::optional<double> truncation_cap(const Conditioning& cond, const ProcessParams& params);

struct ConditionedStats {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
};

/// Typical cell conditioned on {Σ(Z)^{1/k} < a}: truncation of r followed by
/// rejection on Σ.
TypicalCellSample sample_conditioned_inball(const ProcessParams& params, const Conditioning& cond,
                                            RandomStream& rng, ConditionedStats* stats = nullptr);

/// Cells of a planar line arrangement in the disk B(0, window_R): every cell
/// not touching the boundary circle whose centroid lies within
/// (1 - delta_w)·window_R, recentred at its centroid. Cells whose
/// functionals cannot be evaluated (degenerate slivers) are skipped and
/// counted in `dropped`. With `inradius_below`, only cells with r < a are
/// emitted; the planar bound r >= area/perimeter discards most others before
/// any functional is evaluated.
std::vector<TypicalCellSample> sample_window_tessellation(const ProcessParams& params, double window_R,
                                                          RandomStream& rng, double delta_w = 0.1,
                                                          std::int64_t* dropped = nullptr,
                                                          std::optional<double> inradius_below = std::nullopt);

/// One cell drawn from the same minus-sampled law as
/// sample_window_tessellation, independently of every other call. Cells of
/// one window share their lines and are strongly dependent, so statistics
/// that assume i.i.d. data use this draw instead.
///
/// The line count n is drawn from Poisson(γR) tilted by M(n) = 1 + n +
/// n(n-1)/2, an upper bound on the number of faces of n lines, and a window
/// holding N eligible cells is accepted with probability N / M(n). The
/// accepted cell, chosen uniformly among the N, then has law
/// E[Σ_C 1(C ∈ ·)] / E[N].
TypicalCellSample sample_window_cell(const ProcessParams& params, double window_R, RandomStream& rng,
                                     double delta_w = 0.1, std::int64_t* windows_used = nullptr,
                                     std::int64_t* dropped = nullptr);

/// Line arrangement step alone: bounded cells of the lines inside the disk
/// that do not touch the boundary circle, in absolute coordinates.
std::vector<ConvexCell> arrangement_cells(std::span<const Hyperplane> lines, double window_R);

inline constexpr std::size_t kMaxArrangementCells = 1'000'000;

}  // namespace hypercell
