#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace hypercell {

inline constexpr int kMaxDim = 8;

// Fixed-capacity dynamic vectors: no heap traffic in the sampler loops.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Relative tolerance for vertex feasibility, merging and empty-interior tests.
inline constexpr double kEpsGeom = 1e-9;
/// Condition-number cutoff for the simplex vertex solves.
inline constexpr double kKappaMax = 1e12;
/// Interiority margin for the positive-spanning test.
inline constexpr double kDeltaSpan = 1e-10;

class UnitVector {
 public:
  /// Normalizes `v`; throws Error(InvalidArgument) for zero or non-finite input.
  explicit UnitVector(const Vec& v);

  static UnitVector from_angle(double theta);
  static UnitVector axis(int dim, int i);

  int dim() const { return static_cast<int>(v_.size()); }
  const Vec& coords() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  double dot(const Vec& x) const { return v_.dot(x); }

  UnitVector operator-() const;

 private:
  struct Raw {};
  UnitVector(const Vec& v, Raw) : v_(v) {}
  Vec v_;
};

/// The set {x : <x, normal> <= bound}.
struct Halfspace {
  UnitVector normal;
  double bound;

  double violation(const Vec& x) const { return normal.dot(x) - bound; }
};

/// H(u, t) = {x : <x, u> = t} with t > 0.
class Hyperplane {
 public:
  Hyperplane(const UnitVector& normal, double offset);

  const UnitVector& normal() const { return normal_; }
  double offset() const { return offset_; }
  /// The halfspace bounded by this hyperplane that contains the origin.
  Halfspace lower_halfspace() const { return {normal_, offset_}; }

 private:
  UnitVector normal_;
  double offset_;
};

using DirectionTuple = std::vector<UnitVector>;

/// Bounded convex polytope in d = 2 or 3, kept in both H- and V-form.
///
/// `facets()[k]` lists the vertices on the face supported by `halfspaces()[k]`.
/// In d = 2 the vertices form a counter-clockwise ring and facet k is the edge
/// (k, k+1). In d = 3 each facet is a vertex loop, counter-clockwise seen from
/// outside. Only halfspaces that support a facet are stored.
class ConvexCell {
 public:
  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& facets() const { return facets_; }
  int facet_count() const { return static_cast<int>(halfspaces_.size()); }

  /// Largest vertex norm; the scale that the relative tolerances refer to.
  double reach() const;
  /// Absolute tolerance kEpsGeom * reach().
  double tolerance() const;

  ConvexCell translated(const Vec& x) const;
  ConvexCell scaled(double t) const;

  /// Axis-aligned box [lo, hi].
  static ConvexCell box(const Vec& lo, const Vec& hi);
  /// Counter-clockwise (or clockwise; it is reoriented) convex polygon.
  static ConvexCell polygon(std::span<const Vec> ring);
  /// Intersection of halfspaces; throws EmptyCell if empty and
  /// InvalidArgument if unbounded.
  static ConvexCell from_halfspaces(int dim, std::span<const Halfspace> hs);
  /// Builds the face structure from known vertices and halfspaces by
  /// incidence. Halfspaces touching fewer than d vertices are dropped.
  static ConvexCell from_incidence(int dim, std::span<const Halfspace> hs, std::span<const Vec> vertices);
  /// Assembles a cell from a face structure the caller guarantees to be
  /// consistent (layout as documented above).
  static ConvexCell from_parts(int dim, std::vector<Halfspace> hs, std::vector<Vec> vertices,
                               std::vector<std::vector<int>> facets);

  /// Largest violation of any halfspace by any vertex (<= tolerance() for a
  /// valid cell).
  double max_violation() const;

 private:
  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> facets_;
};

/// cell ∩ hs. A halfspace containing the cell leaves it unchanged; throws
/// Error(EmptyCell) when less than tolerance() of interior width survives.
ConvexCell clip(const ConvexCell& cell, const Halfspace& hs);

/// Positive-spanning margin: the optimum of max t s.t. Σλ_i u_i = 0,
/// Σλ_i = 1, λ_i >= t. Negative or zero when some closed half sphere holds
/// every direction.
double spanning_margin(std::span<const UnitVector> dirs);

struct SpanDiagnostics {
  std::int64_t ambiguous = 0;
};

/// True iff no closed half sphere contains every direction, decided with
/// interiority margin kDeltaSpan. Ambiguous calls are counted in `diag`.
bool half_sphere_test(std::span<const UnitVector> dirs, SpanDiagnostics* diag = nullptr);

/// The vertex of T(dirs) opposite facet i: solves <u_j, x> = 1 for j != i.
Vec vertex_v(std::span<const UnitVector> dirs, int i);

/// All d+1 vertices of T(dirs), any d <= kMaxDim.
std::vector<Vec> simplex_vertices(std::span<const UnitVector> dirs);

/// The simplex ∩_i H(u_i, 1)^- circumscribing the unit ball (d in {2, 3}).
ConvexCell simplex_T(std::span<const UnitVector> dirs);

/// Volume of the convex hull of the d+1 unit vectors.
double delta_d(std::span<const UnitVector> dirs);

/// h(K, u) = max over vertices of <x, u>.
double support_function(const ConvexCell& cell, const UnitVector& u);

namespace detail {
ConvexCell clip2d(const ConvexCell& cell, const Halfspace& hs);
ConvexCell clip3d(const ConvexCell& cell, const Halfspace& hs);
/// Orders coplanar points counter-clockwise seen from the side `normal`
/// points to.
std::vector<int> order_around(std::span<const Vec> points, std::span<const int> ids, const Vec& normal);
}  // namespace detail

}  // namespace hypercell
