#include "hypercell/directions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hypercell/error.hpp"

namespace hypercell {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr long kMaxRejections = 10'000'000;

Vec canonical(const Vec& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) return v;
    if (v[i] < 0.0) return -v;
  }
  return v;
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cdf[i] = acc;
  }
  for (auto& c : cdf) c /= acc;
  return cdf;
}

UnitVector sample_isotropic(int dim, RandomStream& rng) {
  if (dim == 2) return UnitVector::from_angle(2.0 * std::numbers::pi * rng.uniform());
  Vec g(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) g[i] = rng.normal();
    if (g.norm() > 1e-12) return UnitVector(g);
  }
}

// Enumerates k-subsets of {0..n-1} in lexicographic order until `visit`
// returns true.
template <class Visit>
bool for_each_subset(int n, int k, Visit&& visit) {
  if (k > n) return false;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    if (visit(idx)) return true;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double sphere_area(int dim) { return 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0); }

double regular_simplex_volume(int dim) {
  const double d = dim;
  return std::pow(d + 1.0, (d + 1.0) / 2.0) / (std::tgamma(d + 1.0) * std::pow(d, d / 2.0));
}

DirectionalDistribution DirectionalDistribution::isotropic(int dim) {
  if (dim < 2 || dim > kMaxDim) throw Error(Errc::InvalidArgument, "dimension out of range");
  DirectionalDistribution out;
  out.kind_ = Kind::Isotropic;
  out.dim_ = dim;
  return out;
}

DirectionalDistribution DirectionalDistribution::cos2theta(int dim, double amplitude, double bound) {
  if (dim != 2 && dim != 3) throw Error(Errc::InvalidArgument, "cos2theta density needs d in {2, 3}");
  if (!(std::abs(amplitude) <= 1.0)) throw Error(Errc::InvalidArgument, "cos2theta amplitude must lie in [-1, 1]");
  std::function<double(const Vec&)> rho;
  if (dim == 2) {
    rho = [amplitude](const Vec& u) {
      // cos 2θ = cos²θ - sin²θ for u = (cos θ, sin θ).
      return (1.0 + amplitude * (u[0] * u[0] - u[1] * u[1])) / (2.0 * std::numbers::pi);
    };
  } else {
    const double norm = 4.0 * std::numbers::pi * (1.0 - amplitude / 3.0);
    rho = [amplitude, norm](const Vec& u) { return (1.0 + amplitude * (2.0 * u[2] * u[2] - 1.0)) / norm; };
  }
  DirectionalDistribution out = density(dim, "cos2theta", std::move(rho), bound);
  out.amplitude_ = amplitude;
  return out;
}

DirectionalDistribution DirectionalDistribution::density(int dim, std::string name,
                                                         std::function<double(const Vec&)> rho, double bound) {
  if (dim < 2 || dim > kMaxDim) throw Error(Errc::InvalidArgument, "dimension out of range");
  if (!(bound > 0.0)) throw Error(Errc::InvalidArgument, "density envelope bound must be positive");
  if (!rho) throw Error(Errc::InvalidArgument, "empty density");
  DirectionalDistribution out;
  out.kind_ = Kind::Density;
  out.dim_ = dim;
  out.density_name_ = std::move(name);
  out.bound_ = bound;
  out.rho_ = std::move(rho);
  return out;
}

DirectionalDistribution DirectionalDistribution::discrete(int dim, const std::vector<std::pair<Vec, double>>& atoms) {
  if (dim < 2 || dim > kMaxDim) throw Error(Errc::InvalidArgument, "dimension out of range");
  if (atoms.empty()) throw Error(Errc::InvalidArgument, "discrete distribution without atoms");
  double total = 0.0;
  for (const auto& [dir, mass] : atoms) {
    if (dir.size() != dim) throw Error(Errc::InvalidArgument, "atom dimension mismatch");
    if (!(mass > 0.0)) throw Error(Errc::InvalidArgument, "atom masses must be positive");
    total += mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) throw Error(Errc::InvalidArgument, "atom masses must sum to 1");

  DirectionalDistribution out;
  out.kind_ = Kind::Discrete;
  out.dim_ = dim;
  for (const auto& [dir, mass] : atoms) {
    const UnitVector u(canonical(UnitVector(dir).coords()));
    auto same = std::find_if(out.atoms_.begin(), out.atoms_.end(),
                             [&](const Atom& a) { return (a.dir.coords() - u.coords()).norm() <= 1e-12; });
    if (same != out.atoms_.end())
      same->mass += mass / total;
    else
      out.atoms_.push_back({u, mass / total});
  }
  std::vector<double> w;
  for (const auto& a : out.atoms_) w.push_back(a.mass);
  out.atom_cdf_ = cumulative(w);
  return out;
}

DirectionalDistribution DirectionalDistribution::mixture(std::vector<MixturePart> parts) {
  if (parts.empty()) throw Error(Errc::InvalidArgument, "mixture without parts");
  const int dim = parts.front().dist.dim();
  double total = 0.0;
  for (const auto& p : parts) {
    if (p.dist.dim() != dim) throw Error(Errc::InvalidArgument, "mixture parts differ in dimension");
    if (!(p.weight > 0.0)) throw Error(Errc::InvalidArgument, "mixture weights must be positive");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > kMassTolerance) throw Error(Errc::InvalidArgument, "mixture weights must sum to 1");
  DirectionalDistribution out;
  out.kind_ = Kind::Mixture;
  out.dim_ = dim;
  std::vector<double> w;
  for (auto& p : parts) {
    p.weight /= total;
    w.push_back(p.weight);
  }
  out.parts_ = std::move(parts);
  out.part_cdf_ = cumulative(w);
  return out;
}

double DirectionalDistribution::density_at(const Vec& u) const {
  if (kind_ != Kind::Density) throw Error(Errc::InvalidArgument, "density_at on a non-density distribution");
  return 0.5 * (rho_(u) + rho_(Vec(-u)));
}

bool DirectionalDistribution::has_continuous_part() const {
  switch (kind_) {
    case Kind::Isotropic:
    case Kind::Density: return true;
    case Kind::Discrete: return false;
    case Kind::Mixture:
      return std::any_of(parts_.begin(), parts_.end(), [](const MixturePart& p) { return p.dist.has_continuous_part(); });
  }
  return false;
}

bool DirectionalDistribution::is_absolutely_continuous() const {
  switch (kind_) {
    case Kind::Isotropic:
    case Kind::Density: return true;
    case Kind::Discrete: return false;
    case Kind::Mixture:
      return std::all_of(parts_.begin(), parts_.end(),
                         [](const MixturePart& p) { return p.dist.is_absolutely_continuous(); });
  }
  return false;
}

std::vector<UnitVector> DirectionalDistribution::signed_atoms() const {
  std::vector<UnitVector> out;
  if (kind_ == Kind::Discrete) {
    for (const auto& a : atoms_) {
      out.push_back(a.dir);
      out.push_back(-a.dir);
    }
  } else if (kind_ == Kind::Mixture) {
    for (const auto& p : parts_) {
      for (const auto& u : p.dist.signed_atoms()) {
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const UnitVector& v) { return (v.coords() - u.coords()).norm() <= 1e-12; });
        if (!dup) out.push_back(u);
      }
    }
  }
  return out;
}

void validate_support(const DirectionalDistribution& dist) {
  if (dist.has_continuous_part()) return;
  const auto dirs = dist.signed_atoms();
  Eigen::MatrixXd m(dist.dim(), dirs.size());
  for (size_t i = 0; i < dirs.size(); ++i) m.col(i) = dirs[i].coords();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (lu.rank() < dist.dim())
    throw Error(Errc::InvalidArgument, "support of the directional distribution lies in a great subsphere");
}

UnitVector sample_direction(const DirectionalDistribution& dist, RandomStream& rng) {
  using Kind = DirectionalDistribution::Kind;
  switch (dist.kind()) {
    case Kind::Isotropic: return sample_isotropic(dist.dim(), rng);
    case Kind::Density: {
      const double envelope = dist.bound();
      for (long i = 0; i < kMaxRejections; ++i) {
        const UnitVector u = sample_isotropic(dist.dim(), rng);
        const double rho = dist.density_at(u.coords());
        if (rho > envelope * (1.0 + 1e-12))
          throw Error(Errc::EnvelopeViolation, "density exceeds the configured bound");
        if (rng.uniform() * envelope < rho) return u;
      }
      throw Error(Errc::RejectionStall, "density rejection sampler stalled");
    }
    case Kind::Discrete: {
      const auto& atoms = dist.atoms();
      double acc = 0.0;
      const double u = rng.uniform();
      size_t k = atoms.size() - 1;
      for (size_t i = 0; i < atoms.size(); ++i) {
        acc += atoms[i].mass;
        if (u < acc) {
          k = i;
          break;
        }
      }
      return rng.uniform() < 0.5 ? atoms[k].dir : -atoms[k].dir;
    }
    case Kind::Mixture: {
      const auto& parts = dist.parts();
      double acc = 0.0;
      const double u = rng.uniform();
      size_t k = parts.size() - 1;
      for (size_t i = 0; i < parts.size(); ++i) {
        acc += parts[i].weight;
        if (u < acc) {
          k = i;
          break;
        }
      }
      return sample_direction(parts[k].dist, rng);
    }
  }
  throw Error(Errc::InvalidArgument, "unknown distribution kind");
}

double atom_mass(const DirectionalDistribution& dist, const UnitVector& u) {
  using Kind = DirectionalDistribution::Kind;
  switch (dist.kind()) {
    case Kind::Isotropic:
    case Kind::Density: return 0.0;
    case Kind::Discrete: {
      const Vec c = canonical(u.coords());
      for (const auto& a : dist.atoms())
        if ((a.dir.coords() - c).norm() <= 1e-9) return a.mass;
      return 0.0;
    }
    case Kind::Mixture: {
      double m = 0.0;
      for (const auto& p : dist.parts()) m += p.weight * atom_mass(p.dist, u);
      return m;
    }
  }
  return 0.0;
}

int n_min(const DirectionalDistribution& dist, int d) {
  if (dist.dim() != d) throw Error(Errc::InvalidArgument, "dimension mismatch");
  if (dist.has_continuous_part()) return d + 1;
  const auto dirs = dist.signed_atoms();
  const int n = static_cast<int>(dirs.size());
  if (n > kMaxSignedSupport) throw Error(Errc::SupportTooLarge, "more than 40 signed support directions");
  std::vector<UnitVector> subset;
  for (int k = d + 1; k <= n; ++k) {
    const bool found = for_each_subset(n, k, [&](const std::vector<int>& idx) {
      subset.clear();
      for (int i : idx) subset.push_back(dirs[i]);
      return half_sphere_test(subset);
    });
    if (found) return k;
  }
  throw Error(Errc::InvalidArgument, "support does not positively span R^d");
}

bool supp_condition_atoms(const DirectionalDistribution& dist, int d) {
  if (dist.has_continuous_part()) return true;
  return n_min(dist, d) == d + 1;
}

double delta_max(const DirectionalDistribution& dist, int d) {
  if (dist.has_continuous_part()) return regular_simplex_volume(d);
  const auto dirs = dist.signed_atoms();
  const int n = static_cast<int>(dirs.size());
  if (n > kMaxSignedSupport) throw Error(Errc::SupportTooLarge, "more than 40 signed support directions");
  double best = 0.0;
  std::vector<UnitVector> subset;
  for_each_subset(n, d + 1, [&](const std::vector<int>& idx) {
    subset.clear();
    for (int i : idx) subset.push_back(dirs[i]);
    if (half_sphere_test(subset)) best = std::max(best, delta_d(subset));
    return false;
  });
  return best;
}

ProcessParams::ProcessParams(double gamma_, DirectionalDistribution dist_)
    : gamma(gamma_), dist(std::move(dist_)), dim(dist.dim()) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(Errc::InvalidArgument, "intensity must be positive");
  validate_support(dist);
}

}  // namespace hypercell
