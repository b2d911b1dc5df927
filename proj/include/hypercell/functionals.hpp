#pragma once

#include <span>
#include <string>
#include <string_view>

#include "hypercell/directions.hpp"
#include "hypercell/geometry.hpp"

namespace hypercell {

enum class SizeFunctional { Inradius, Circumradius, Diameter, Perimeter, SurfaceArea, Volume, PhiContent };

std::string_view to_string(SizeFunctional s);
/// Accepts the enumerator names ("Circumradius", ...), case-insensitive.
SizeFunctional parse_size_functional(std::string_view name);

/// Homogeneity degree k. Perimeter is only defined for d = 2 and SurfaceArea
/// only for d = 3; other pairs throw Error(InvalidArgument).
double degree(SizeFunctional s, int dim);

/// Σ(B^d) for the unit ball (PhiContent: 1 for every φ).
double unit_ball_value(SizeFunctional s, int dim);

struct Inball {
  double radius;
  Vec center;
  /// The LP optimal face has more than one point; `center` is then its
  /// lexicographically smallest point.
  bool non_unique = false;
};

/// Largest inscribed ball via max r s.t. <u_i, x> + r <= b_i.
Inball inradius(const ConvexCell& cell);

struct Ball {
  double radius;
  Vec center;
};

/// Smallest enclosing ball of a point set (move-to-front recursion).
Ball min_enclosing_ball(std::span<const Vec> points);
Ball circumradius(const ConvexCell& cell);

double diameter(const ConvexCell& cell);
/// Edge-length sum; d = 2 only.
double perimeter(const ConvexCell& cell);
/// Facet-area sum; d = 3 only.
double surface_area(const ConvexCell& cell);
double volume(const ConvexCell& cell);
/// Centre of mass of the cell.
Vec centroid(const ConvexCell& cell);

/// Φ(K) = ∫ h(K, u) dφ(u).
double phi_content(const ConvexCell& cell, const DirectionalDistribution& dist);

/// Σ(K) for any implemented functional.
double evaluate(SizeFunctional s, const ConvexCell& cell, const DirectionalDistribution& dist);

enum class CenterFunction { Incenter, Centroid };

std::string_view to_string(CenterFunction c);
Vec center_of(const ConvexCell& cell, CenterFunction c);

/// Scale-free summary of a normalized body.
struct ShapeSummary {
  int fcount = 0;
  double phi = 1.0;
  double circ_over_in = 1.0;
  /// d = 2: 4π·area/perimeter²; d = 3: 36π·vol²/surf³.
  double iso_ratio = 1.0;
  double diam_norm = 0.0;
};

struct Shape {
  ConvexCell normalized;
  ShapeSummary summary;
};

/// (K - c(K)) / Φ(K) together with its summary. Throws Error(CheckFailed) if
/// the normalized body misses Φ = 1 by more than 1e-9.
Shape shape(const ConvexCell& cell, CenterFunction c, const DirectionalDistribution& dist);

/// Summary from already evaluated functionals of the unnormalized body;
/// equals shape(...).summary up to rounding.
ShapeSummary summarize(int dim, int fcount, double phi, double inradius, double circumradius, double diameter,
                       double volume, double boundary);

/// Isoperimetric ratio from volume and boundary measure (perimeter or surface).
double iso_ratio(int dim, double volume, double boundary);

}  // namespace hypercell
