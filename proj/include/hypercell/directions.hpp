#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hypercell/geometry.hpp"
#include "hypercell/random.hpp"

namespace hypercell {

/// Cap on the number of signed support directions for subset enumeration.
inline constexpr int kMaxSignedSupport = 40;

/// An atom pair {u, -u} with mass φ({u, -u}); `dir` is the canonical
/// representative (first nonzero coordinate positive).
struct Atom {
  UnitVector dir;
  double mass;
};

struct MixturePart;

/// Even probability measure on the unit sphere.
///
/// Four variants: the normalized spherical Lebesgue measure, a density with
/// respect to it (evaluated symmetrized), finitely many atom pairs, and finite
/// mixtures of these.
class DirectionalDistribution {
 public:
  enum class Kind { Isotropic, Density, Discrete, Mixture };

  static DirectionalDistribution isotropic(int dim);

  /// ρ(u) ∝ 1 + amplitude·cos 2θ, θ the polar angle (d = 2: the angle of u;
  /// d = 3: the angle to e3). Normalized against the spherical Lebesgue
  /// measure. `bound` is the rejection envelope, checked on every draw.
  static DirectionalDistribution cos2theta(int dim, double amplitude, double bound);

  /// General density against the spherical Lebesgue measure (not
  /// necessarily normalized to 1 by the caller: it must already integrate to 1).
  static DirectionalDistribution density(int dim, std::string name, std::function<double(const Vec&)> rho,
                                         double bound);

  /// Atoms given as (direction, mass) with masses summing to 1. Directions
  /// are canonicalized and antipodal duplicates merged.
  static DirectionalDistribution discrete(int dim, const std::vector<std::pair<Vec, double>>& atoms);

  /// Weighted mixture; weights must sum to 1.
  static DirectionalDistribution mixture(std::vector<MixturePart> parts);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  // Density variant
  const std::string& density_name() const { return density_name_; }
  double amplitude() const { return amplitude_; }
  double bound() const { return bound_; }
  /// Symmetrized density (ρ(u) + ρ(-u)) / 2.
  double density_at(const Vec& u) const;

  // Discrete variant
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Mixture variant
  const std::vector<MixturePart>& parts() const { return parts_; }

  /// True when some component has a density (Isotropic or Density).
  bool has_continuous_part() const;
  /// True when no component carries atoms.
  bool is_absolutely_continuous() const;
  /// Signed directions ±u of every atom, over all components.
  std::vector<UnitVector> signed_atoms() const;

 private:
  Kind kind_ = Kind::Isotropic;
  int dim_ = 2;
  std::string density_name_;
  double amplitude_ = 0.0;
  double bound_ = 0.0;
  std::function<double(const Vec&)> rho_;
  std::vector<Atom> atoms_;
  std::vector<double> atom_cdf_;
  std::vector<MixturePart> parts_;
  std::vector<double> part_cdf_;
};

struct MixturePart {
  double weight;
  DirectionalDistribution dist;
};

/// Total surface measure of the unit sphere in R^d.
double sphere_area(int dim);

/// Volume of the regular simplex inscribed in the unit sphere.
double regular_simplex_volume(int dim);

/// Throws Error(InvalidArgument) if the support lies in a great subsphere
/// (only possible for purely atomic distributions).
void validate_support(const DirectionalDistribution& dist);

UnitVector sample_direction(const DirectionalDistribution& dist, RandomStream& rng);

/// φ({u, -u}).
double atom_mass(const DirectionalDistribution& dist, const UnitVector& u);

/// Smallest number of signed support directions that positively span R^d.
int n_min(const DirectionalDistribution& dist, int d);

/// Whether d+1 support points exist that no closed half sphere contains.
bool supp_condition_atoms(const DirectionalDistribution& dist, int d);

/// max Δ_d over support tuples in 𝖯; the rejection envelope. Density parts
/// give the regular-simplex value.
double delta_max(const DirectionalDistribution& dist, int d);

struct ProcessParams {
  double gamma;
  DirectionalDistribution dist;
  int dim;

  ProcessParams(double gamma, DirectionalDistribution dist);
};

}  // namespace hypercell
