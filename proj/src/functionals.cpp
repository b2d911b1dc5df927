#include "hypercell/functionals.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hypercell/error.hpp"
#include "hypercell/lp.hpp"

namespace hypercell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPhiRelTol = 1e-6;

constexpr std::array<std::pair<SizeFunctional, std::string_view>, 7> kNames{{
    {SizeFunctional::Inradius, "Inradius"},
    {SizeFunctional::Circumradius, "Circumradius"},
    {SizeFunctional::Diameter, "Diameter"},
    {SizeFunctional::Perimeter, "Perimeter"},
    {SizeFunctional::SurfaceArea, "SurfaceArea"},
    {SizeFunctional::Volume, "Volume"},
    {SizeFunctional::PhiContent, "PhiContent"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

void require_dim(const ConvexCell& cell, int dim, const char* what) {
  if (cell.dim() != dim) throw Error(Errc::InvalidArgument, what);
}

// Area of a planar polygon loop in R^3 (vector area magnitude).
double loop_area(const std::vector<Vec>& verts, const std::vector<int>& loop) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  const Eigen::Vector3d p0 = verts[loop[0]].head<3>();
  for (size_t k = 1; k + 1 < loop.size(); ++k) {
    const Eigen::Vector3d a = verts[loop[k]].head<3>() - p0;
    const Eigen::Vector3d b = verts[loop[k + 1]].head<3>() - p0;
    acc += a.cross(b);
  }
  return 0.5 * acc.norm();
}

Vec vertex_mean(const ConvexCell& cell) {
  Vec c = Vec::Zero(cell.dim());
  for (const auto& v : cell.vertices()) c += v;
  return c / static_cast<double>(cell.vertices().size());
}

double support_at(const ConvexCell& cell, const Vec& u) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& v : cell.vertices()) h = std::max(h, v.dot(u));
  return h;
}

// Isotropic Φ in d = 3: half the mean width, (1/8π) Σ_edges ℓ_e·θ_e with θ_e
// the angle between the outer normals of the two facets at edge e.
double phi_isotropic_3d(const ConvexCell& cell) {
  struct EdgeInfo {
    int facet;
    int a, b;
  };
  std::vector<EdgeInfo> edges;
  const auto& facets = cell.facets();
  for (size_t f = 0; f < facets.size(); ++f) {
    const auto& loop = facets[f];
    for (size_t k = 0; k < loop.size(); ++k) {
      const int a = loop[k];
      const int b = loop[(k + 1) % loop.size()];
      edges.push_back({static_cast<int>(f), std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeInfo& x, const EdgeInfo& y) {
    return std::tie(x.a, x.b, x.facet) < std::tie(y.a, y.b, y.facet);
  });
  double acc = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i].a != edges[i + 1].a || edges[i].b != edges[i + 1].b) continue;
    const auto& n1 = cell.halfspaces()[edges[i].facet].normal.coords();
    const auto& n2 = cell.halfspaces()[edges[i + 1].facet].normal.coords();
    const double len = (cell.vertices()[edges[i].a] - cell.vertices()[edges[i].b]).norm();
    acc += len * std::acos(std::clamp(n1.dot(n2), -1.0, 1.0));
    ++i;
  }
  return acc / (8.0 * kPi);
}

// ∫ h(K, u) ρ(u) dσ(u) over S^1, split at the facet normal angles so that h
// is smooth on each piece.
double phi_density_2d(const ConvexCell& cell, const DirectionalDistribution& dist) {
  std::vector<double> cuts;
  for (const auto& hs : cell.halfspaces()) {
    double t = std::atan2(hs.normal[1], hs.normal[0]);
    if (t < 0.0) t += 2.0 * kPi;
    cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(cuts.front() + 2.0 * kPi);
  double total = 0.0;
  double err_total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    if (hi - lo <= 0.0) continue;
    const double mid = 0.5 * (lo + hi);
    Vec um(2);
    um << std::cos(mid), std::sin(mid);
    const Vec* best = &cell.vertices().front();
    for (const auto& v : cell.vertices())
      if (v.dot(um) > best->dot(um)) best = &v;
    const Vec v = *best;
    auto f = [&](double t) {
      Vec u(2);
      u << std::cos(t), std::sin(t);
      return v.dot(u) * dist.density_at(u);
    };
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 10, 1e-10, &err);
    err_total += err;
  }
  if (err_total > kPhiRelTol * std::abs(total))
    throw Error(Errc::QuadratureNotConverged, "density Φ-content quadrature missed its error target");
  return total;
}

// ∫ f over the spherical triangle spanned by unit vectors a, b, c. The flat
// triangle p(s, t) = a + s(b - a) + t(c - a) projects centrally onto it with
// dσ = |det(a, b, c)| / |p|³ ds dt; the flat triangle is integrated by a
// collapsed 6x6 Gauss rule and split in four until the split stops changing
// the value.
template <class F>
double spherical_triangle(const F& f, const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                          double tol, int depth, double& err) {
  static constexpr std::array<double, 6> x{0.033765242898423986, 0.16939530676686776, 0.38069040695840156,
                                          0.61930959304159849, 0.83060469323313224, 0.96623475710157603};
  static constexpr std::array<double, 6> w{0.085662246189585178, 0.18038078652406930, 0.23395696728634552,
                                          0.23395696728634552, 0.18038078652406930, 0.085662246189585178};
  auto rule = [&](const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& p2) {
    const double det = std::abs(p0.dot(p1.cross(p2)));
    double acc = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double s = x[i], t = x[j] * (1.0 - x[i]);
        const Eigen::Vector3d p = p0 + s * (p1 - p0) + t * (p2 - p0);
        const double n = p.norm();
        acc += w[i] * w[j] * (1.0 - x[i]) * f(Eigen::Vector3d(p / n)) / (n * n * n);
      }
    return acc * det;
  };
  const Eigen::Vector3d ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
  const double whole = rule(a, b, c);
  const double parts = rule(a, ab, ca) + rule(ab, b, bc) + rule(ca, bc, c) + rule(ab, bc, ca);
  if (std::abs(parts - whole) <= tol || depth == 0) {
    err += std::abs(parts - whole);
    return parts;
  }
  return spherical_triangle(f, a, ab, ca, tol / 4, depth - 1, err) +
         spherical_triangle(f, ab, b, bc, tol / 4, depth - 1, err) +
         spherical_triangle(f, ca, bc, c, tol / 4, depth - 1, err) +
         spherical_triangle(f, ab, bc, ca, tol / 4, depth - 1, err);
}

// h(K, u) = <v, u> on the normal cone of vertex v, a spherical polygon with
// the incident facet normals as corners. Φ is the sum over vertices of the
// integral of the linear function <v, ·> against the density over that
// polygon, fanned into triangles from the cone's mean normal.
double phi_density_3d(const ConvexCell& cell, const DirectionalDistribution& dist) {
  const auto& verts = cell.vertices();
  const auto& hs = cell.halfspaces();
  std::vector<std::vector<int>> incident(verts.size());
  for (size_t f = 0; f < cell.facets().size(); ++f)
    for (int v : cell.facets()[f]) incident[v].push_back(static_cast<int>(f));
  const double tol = 1e-10 * cell.reach();
  double total = 0.0, err = 0.0;
  for (size_t vi = 0; vi < verts.size(); ++vi) {
    const Eigen::Vector3d v = verts[vi].head<3>();
    std::vector<Eigen::Vector3d> normals;
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    for (int f : incident[vi]) {
      normals.push_back(hs[f].normal.coords().head<3>());
      axis += normals.back();
    }
    axis.normalize();
    const Eigen::Vector3d e1 = axis.unitOrthogonal(), e2 = axis.cross(e1);
    std::sort(normals.begin(), normals.end(), [&](const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
      return std::atan2(p.dot(e2), p.dot(e1)) < std::atan2(q.dot(e2), q.dot(e1));
    });
    auto f = [&](const Eigen::Vector3d& u) {
      Vec uu(3);
      uu << u[0], u[1], u[2];
      return v.dot(u) * dist.density_at(uu);
    };
    // Boundary arcs longer than π/4 are split along the great circle so that
    // no fan triangle comes close to a hemisphere, where the central
    // projection degenerates.
    for (size_t k = 0; k < normals.size(); ++k) {
      const Eigen::Vector3d& a = normals[k];
      const Eigen::Vector3d& b = normals[(k + 1) % normals.size()];
      const double theta = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
      const int pieces = std::max(1, static_cast<int>(std::ceil(theta / (kPi / 4))));
      Eigen::Vector3d prev = a;
      for (int j = 1; j <= pieces; ++j) {
        const double t = theta * j / pieces;
        const Eigen::Vector3d next =
            j == pieces ? b : Eigen::Vector3d((std::sin(theta - t) * a + std::sin(t) * b) / std::sin(theta));
        total += spherical_triangle(f, axis, prev, next, tol, 8, err);
        prev = next;
      }
    }
  }
  if (err > kPhiRelTol * std::abs(total))
    throw Error(Errc::QuadratureNotConverged, "density Φ-content quadrature missed its error target");
  return total;
}

}  // namespace

std::string_view to_string(SizeFunctional s) {
  for (const auto& [k, n] : kNames)
    if (k == s) return n;
  return "Unknown";
}

SizeFunctional parse_size_functional(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (iequals(n, name)) return k;
  throw Error(Errc::InvalidArgument, "unknown size functional '" + std::string(name) + "'");
}

double degree(SizeFunctional s, int dim) {
  switch (s) {
    case SizeFunctional::Inradius:
    case SizeFunctional::Circumradius:
    case SizeFunctional::Diameter:
    case SizeFunctional::PhiContent: return 1.0;
    case SizeFunctional::Perimeter:
      if (dim != 2) throw Error(Errc::InvalidArgument, "Perimeter is defined for d = 2");
      return 1.0;
    case SizeFunctional::SurfaceArea:
      if (dim != 3) throw Error(Errc::InvalidArgument, "SurfaceArea is defined for d = 3");
      return 2.0;
    case SizeFunctional::Volume: return dim;
  }
  throw Error(Errc::InvalidArgument, "unknown size functional");
}

double unit_ball_value(SizeFunctional s, int dim) {
  degree(s, dim);
  switch (s) {
    case SizeFunctional::Inradius:
    case SizeFunctional::Circumradius:
    case SizeFunctional::PhiContent: return 1.0;
    case SizeFunctional::Diameter: return 2.0;
    case SizeFunctional::Perimeter: return 2.0 * kPi;
    case SizeFunctional::SurfaceArea: return 4.0 * kPi;
    case SizeFunctional::Volume: return std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  }
  return 0.0;
}

Inball inradius(const ConvexCell& cell) {
  const int d = cell.dim();
  const auto& hs = cell.halfspaces();
  lp::Problem p(d + 1);
  for (int j = 0; j < d; ++j) p.set_free(j);
  std::vector<double> c(d + 1, 0.0);
  c[d] = 1.0;
  p.set_objective(c);
  std::vector<double> row(d + 1);
  for (const auto& h : hs) {
    for (int j = 0; j < d; ++j) row[j] = h.normal[j];
    row[d] = 1.0;
    p.add_constraint(row, lp::Sense::LessEqual, h.bound);
  }
  const lp::Result res = p.maximize();
  if (res.status != lp::Status::Optimal || !(res.objective > 0.0))
    throw Error(Errc::EmptyCell, "inradius LP has no interior point");
  const double r = res.objective;

  // Lexicographic extreme points of the optimal face {x : <u_i, x> <= b_i - r}.
  auto lex = [&](double sign, double slack) -> std::optional<Vec> {
    lp::Problem q(d);
    for (int j = 0; j < d; ++j) q.set_free(j);
    std::vector<double> rw(d);
    for (const auto& h : hs) {
      for (int j = 0; j < d; ++j) rw[j] = h.normal[j];
      q.add_constraint(rw, lp::Sense::LessEqual, h.bound - r + slack);
    }
    Vec x(d);
    for (int j = 0; j < d; ++j) {
      std::vector<double> obj(d, 0.0);
      obj[j] = -sign;
      q.set_objective(obj);
      const lp::Result rj = q.maximize();
      if (rj.status != lp::Status::Optimal) return std::nullopt;
      x[j] = rj.x[j];
      std::vector<double> fix(d, 0.0);
      fix[j] = 1.0;
      q.add_constraint(fix, sign > 0 ? lp::Sense::LessEqual : lp::Sense::GreaterEqual, x[j] + sign * slack);
    }
    return x;
  };
  // The face LPs can turn infeasible when r carries rounding error above the
  // slack; widen the slack until they solve.
  std::optional<Vec> lo, hi;
  for (double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
    lo = lex(1.0, rel * cell.reach());
    hi = lex(-1.0, rel * cell.reach());
    if (lo && hi) break;
  }
  if (!lo || !hi) throw Error(Errc::EmptyCell, "incenter LP failed");
  Inball out{r, *lo, false};
  out.non_unique = (*hi - *lo).norm() > 1e-7 * cell.reach();
  if (!out.non_unique) {
    // The first solve already ends on the unique optimal vertex.
    for (int j = 0; j < d; ++j) out.center[j] = res.x[j];
  }
  return out;
}

double diameter(const ConvexCell& cell) {
  const auto& v = cell.vertices();
  double best = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) best = std::max(best, (v[i] - v[j]).squaredNorm());
  return std::sqrt(best);
}

double perimeter(const ConvexCell& cell) {
  require_dim(cell, 2, "perimeter needs d = 2");
  const auto& v = cell.vertices();
  double acc = 0.0;
  for (size_t k = 0; k < v.size(); ++k) acc += (v[(k + 1) % v.size()] - v[k]).norm();
  return acc;
}

double surface_area(const ConvexCell& cell) {
  require_dim(cell, 3, "surface area needs d = 3");
  double acc = 0.0;
  for (const auto& loop : cell.facets()) acc += loop_area(cell.vertices(), loop);
  return acc;
}

double volume(const ConvexCell& cell) {
  const auto& v = cell.vertices();
  if (cell.dim() == 2) {
    double acc = 0.0;
    for (size_t k = 1; k + 1 < v.size(); ++k) {
      const Vec a = v[k] - v[0];
      const Vec b = v[k + 1] - v[0];
      acc += a[0] * b[1] - a[1] * b[0];
    }
    return 0.5 * std::abs(acc);
  }
  if (cell.dim() == 3) {
    const Vec p = vertex_mean(cell);
    double acc = 0.0;
    for (size_t f = 0; f < cell.facets().size(); ++f) {
      const auto& hs = cell.halfspaces()[f];
      acc += loop_area(v, cell.facets()[f]) * (hs.bound - hs.normal.dot(p));
    }
    return acc / 3.0;
  }
  throw Error(Errc::InvalidArgument, "volume needs d in {2, 3}");
}

Vec centroid(const ConvexCell& cell) {
  const auto& v = cell.vertices();
  if (cell.dim() == 2) {
    double area = 0.0;
    Vec c = Vec::Zero(2);
    for (size_t k = 1; k + 1 < v.size(); ++k) {
      const Vec a = v[k] - v[0];
      const Vec b = v[k + 1] - v[0];
      const double w = 0.5 * (a[0] * b[1] - a[1] * b[0]);
      area += w;
      c += w * (a + b) / 3.0;
    }
    return v[0] + c / area;
  }
  if (cell.dim() == 3) {
    const Vec p = vertex_mean(cell);
    double vol = 0.0;
    Vec c = Vec::Zero(3);
    for (const auto& loop : cell.facets()) {
      const Eigen::Vector3d q0 = (v[loop[0]] - p).head<3>();
      for (size_t k = 1; k + 1 < loop.size(); ++k) {
        const Eigen::Vector3d q1 = (v[loop[k]] - p).head<3>();
        const Eigen::Vector3d q2 = (v[loop[k + 1]] - p).head<3>();
        const double w = q0.dot(q1.cross(q2)) / 6.0;
        vol += w;
        c += w * Vec((q0 + q1 + q2) / 4.0);
      }
    }
    return p + c / vol;
  }
  throw Error(Errc::InvalidArgument, "centroid needs d in {2, 3}");
}

double phi_content(const ConvexCell& cell, const DirectionalDistribution& dist) {
  using Kind = DirectionalDistribution::Kind;
  if (dist.dim() != cell.dim()) throw Error(Errc::InvalidArgument, "distribution and cell differ in dimension");
  switch (dist.kind()) {
    case Kind::Isotropic:
      if (cell.dim() == 2) return perimeter(cell) / (2.0 * kPi);
      return phi_isotropic_3d(cell);
    case Kind::Density:
      if (cell.dim() == 2) return phi_density_2d(cell, dist);
      return phi_density_3d(cell, dist);
    case Kind::Discrete: {
      double acc = 0.0;
      for (const auto& a : dist.atoms()) {
        const Vec& u = a.dir.coords();
        acc += a.mass * 0.5 * (support_at(cell, u) + support_at(cell, -u));
      }
      return acc;
    }
    case Kind::Mixture: {
      double acc = 0.0;
      for (const auto& p : dist.parts()) acc += p.weight * phi_content(cell, p.dist);
      return acc;
    }
  }
  throw Error(Errc::InvalidArgument, "unknown distribution kind");
}

double evaluate(SizeFunctional s, const ConvexCell& cell, const DirectionalDistribution& dist) {
  switch (s) {
    case SizeFunctional::Inradius: return inradius(cell).radius;
    case SizeFunctional::Circumradius: return circumradius(cell).radius;
    case SizeFunctional::Diameter: return diameter(cell);
    case SizeFunctional::Perimeter: return perimeter(cell);
    case SizeFunctional::SurfaceArea: return surface_area(cell);
    case SizeFunctional::Volume: return volume(cell);
    case SizeFunctional::PhiContent: return phi_content(cell, dist);
  }
  throw Error(Errc::InvalidArgument, "unknown size functional");
}

std::string_view to_string(CenterFunction c) { return c == CenterFunction::Incenter ? "Incenter" : "Centroid"; }

Vec center_of(const ConvexCell& cell, CenterFunction c) {
  return c == CenterFunction::Incenter ? inradius(cell).center : centroid(cell);
}

double iso_ratio(int dim, double vol, double boundary) {
  if (dim == 2) return 4.0 * kPi * vol / (boundary * boundary);
  return 36.0 * kPi * vol * vol / (boundary * boundary * boundary);
}

ShapeSummary summarize(int dim, int fcount, double phi, double r, double big_r, double diam, double vol,
                       double boundary) {
  ShapeSummary s;
  s.fcount = fcount;
  s.phi = 1.0;
  s.circ_over_in = big_r / r;
  s.iso_ratio = iso_ratio(dim, vol, boundary);
  s.diam_norm = diam / phi;
  return s;
}

Shape shape(const ConvexCell& cell, CenterFunction c, const DirectionalDistribution& dist) {
  const double phi = phi_content(cell, dist);
  const Vec center = center_of(cell, c);
  ConvexCell normalized = cell.translated(Vec(-center)).scaled(1.0 / phi);
  ShapeSummary s;
  s.fcount = normalized.facet_count();
  s.phi = phi_content(normalized, dist);
  if (std::abs(s.phi - 1.0) > 1e-9) throw Error(Errc::CheckFailed, "normalized body misses unit Φ-content");
  s.circ_over_in = circumradius(normalized).radius / inradius(normalized).radius;
  const double boundary = cell.dim() == 2 ? perimeter(normalized) : surface_area(normalized);
  s.iso_ratio = iso_ratio(cell.dim(), volume(normalized), boundary);
  s.diam_norm = diameter(normalized);
  return {std::move(normalized), s};
}

}  // namespace hypercell
