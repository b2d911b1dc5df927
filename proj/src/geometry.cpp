#include "hypercell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hypercell/error.hpp"
#include "hypercell/lp.hpp"

namespace hypercell {

UnitVector::UnitVector(const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(Errc::InvalidArgument, "unit vector from zero or non-finite input");
  if (v.size() < 1 || v.size() > kMaxDim) throw Error(Errc::InvalidArgument, "unsupported dimension");
  v_ = v / n;
}

UnitVector UnitVector::from_angle(double theta) {
  Vec v(2);
  v << std::cos(theta), std::sin(theta);
  return UnitVector(v);
}

UnitVector UnitVector::axis(int dim, int i) {
  Vec v = Vec::Zero(dim);
  v[i] = 1.0;
  return UnitVector(v, Raw{});
}

UnitVector UnitVector::operator-() const { return UnitVector(Vec(-v_), Raw{}); }

Hyperplane::Hyperplane(const UnitVector& normal, double offset) : normal_(normal), offset_(offset) {
  if (!(offset > 0.0)) throw Error(Errc::InvalidArgument, "hyperplane offset must be positive");
}

// ---------------------------------------------------------------------------
// ConvexCell

double ConvexCell::reach() const {
  double r = 0.0;
  for (const auto& v : vertices_) r = std::max(r, v.norm());
  return r;
}

double ConvexCell::tolerance() const { return kEpsGeom * std::max(reach(), 1e-300); }

ConvexCell ConvexCell::translated(const Vec& x) const {
  ConvexCell out = *this;
  for (auto& v : out.vertices_) v += x;
  for (auto& h : out.halfspaces_) h.bound += h.normal.dot(x);
  return out;
}

ConvexCell ConvexCell::scaled(double t) const {
  if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "scale factor must be positive");
  ConvexCell out = *this;
  for (auto& v : out.vertices_) v *= t;
  for (auto& h : out.halfspaces_) h.bound *= t;
  return out;
}

double ConvexCell::max_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : halfspaces_)
    for (const auto& v : vertices_) worst = std::max(worst, h.violation(v));
  return worst;
}

ConvexCell ConvexCell::from_parts(int dim, std::vector<Halfspace> hs, std::vector<Vec> vertices,
                                  std::vector<std::vector<int>> facets) {
  ConvexCell c;
  c.dim_ = dim;
  c.halfspaces_ = std::move(hs);
  c.vertices_ = std::move(vertices);
  c.facets_ = std::move(facets);
  return c;
}

ConvexCell ConvexCell::box(const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  if (d != hi.size() || (d != 2 && d != 3)) throw Error(Errc::InvalidArgument, "box needs d in {2, 3}");
  for (int i = 0; i < d; ++i)
    if (!(hi[i] > lo[i])) throw Error(Errc::EmptyCell, "box with empty interior");
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    hs.push_back({UnitVector::axis(d, i), hi[i]});
    hs.push_back({-UnitVector::axis(d, i), -lo[i]});
  }
  std::vector<Vec> corners;
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = (mask >> i & 1) ? hi[i] : lo[i];
    corners.push_back(p);
  }
  return from_incidence(d, hs, corners);
}

ConvexCell ConvexCell::polygon(std::span<const Vec> ring) {
  std::vector<Vec> pts;
  for (const auto& p : ring) {
    if (p.size() != 2) throw Error(Errc::InvalidArgument, "polygon needs planar points");
    if (!pts.empty() && (p - pts.back()).norm() == 0.0) continue;
    pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() == 0.0) pts.pop_back();
  if (pts.size() < 3) throw Error(Errc::EmptyCell, "polygon with fewer than 3 vertices");
  double area2 = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    area2 += a[0] * b[1] - a[1] * b[0];
  }
  if (area2 < 0.0) std::reverse(pts.begin(), pts.end());
  if (area2 == 0.0) throw Error(Errc::EmptyCell, "polygon with zero area");
  const int n = static_cast<int>(pts.size());
  std::vector<Halfspace> hs;
  std::vector<std::vector<int>> facets;
  for (int i = 0; i < n; ++i) {
    const Vec& a = pts[i];
    const Vec& b = pts[(i + 1) % n];
    Vec normal(2);
    normal << b[1] - a[1], a[0] - b[0];
    UnitVector u(normal);
    hs.push_back({u, u.dot(a)});
    facets.push_back({i, (i + 1) % n});
  }
  return from_parts(2, std::move(hs), std::move(pts), std::move(facets));
}

ConvexCell ConvexCell::from_incidence(int dim, std::span<const Halfspace> hs, std::span<const Vec> vertices) {
  if (dim != 2 && dim != 3) throw Error(Errc::InvalidArgument, "cells need d in {2, 3}");
  double reach = 0.0;
  for (const auto& v : vertices) reach = std::max(reach, v.norm());
  const double tol = 1e3 * kEpsGeom * std::max(reach, 1e-300);

  if (dim == 2) {
    Vec centroid = Vec::Zero(2);
    for (const auto& v : vertices) centroid += v;
    centroid /= static_cast<double>(vertices.size());
    std::vector<int> order(vertices.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<double> angle(vertices.size());
    for (size_t i = 0; i < vertices.size(); ++i)
      angle[i] = std::atan2(vertices[i][1] - centroid[1], vertices[i][0] - centroid[0]);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return angle[a] < angle[b]; });
    std::vector<Vec> ring;
    for (int i : order) ring.push_back(vertices[i]);
    const int n = static_cast<int>(ring.size());
    std::vector<Halfspace> out_hs;
    std::vector<std::vector<int>> facets;
    for (int k = 0; k < n; ++k) {
      const Vec& a = ring[k];
      const Vec& b = ring[(k + 1) % n];
      int best = -1;
      double best_res = tol;
      for (size_t j = 0; j < hs.size(); ++j) {
        const double res = std::max(std::abs(hs[j].violation(a)), std::abs(hs[j].violation(b)));
        if (res <= best_res) {
          best = static_cast<int>(j);
          best_res = res;
        }
      }
      if (best < 0) throw Error(Errc::InvalidArgument, "polygon edge without a supporting halfspace");
      out_hs.push_back(hs[best]);
      facets.push_back({k, (k + 1) % n});
    }
    return from_parts(2, std::move(out_hs), std::move(ring), std::move(facets));
  }

  std::vector<Halfspace> out_hs;
  std::vector<std::vector<int>> facets;
  std::vector<Vec> verts(vertices.begin(), vertices.end());
  for (const auto& h : hs) {
    std::vector<int> ids;
    for (size_t i = 0; i < verts.size(); ++i)
      if (std::abs(h.violation(verts[i])) <= tol) ids.push_back(static_cast<int>(i));
    if (ids.size() < 3) continue;
    facets.push_back(detail::order_around(verts, ids, h.normal.coords()));
    out_hs.push_back(h);
  }
  return from_parts(3, std::move(out_hs), std::move(verts), std::move(facets));
}

ConvexCell ConvexCell::from_halfspaces(int dim, std::span<const Halfspace> hs) {
  if (dim != 2 && dim != 3) throw Error(Errc::InvalidArgument, "cells need d in {2, 3}");
  Vec lo(dim), hi(dim);
  for (int axis = 0; axis < dim; ++axis) {
    for (int dir : {1, -1}) {
      lp::Problem prob(dim);
      std::vector<double> c(dim, 0.0);
      c[axis] = dir;
      for (int j = 0; j < dim; ++j) prob.set_free(j);
      prob.set_objective(c);
      for (const auto& h : hs) {
        std::vector<double> row(h.normal.coords().data(), h.normal.coords().data() + dim);
        prob.add_constraint(row, lp::Sense::LessEqual, h.bound);
      }
      const auto res = prob.maximize();
      if (res.status == lp::Status::Infeasible) throw Error(Errc::EmptyCell, "empty halfspace intersection");
      if (res.status == lp::Status::Unbounded) throw Error(Errc::InvalidArgument, "unbounded halfspace intersection");
      if (dir > 0)
        hi[axis] = res.objective;
      else
        lo[axis] = -res.objective;
    }
  }
  const double pad = 0.25 * (hi - lo).maxCoeff() + 1e-6 * std::max(1.0, hi.cwiseAbs().maxCoeff());
  ConvexCell cell = box((lo.array() - pad).matrix(), (hi.array() + pad).matrix());
  for (const auto& h : hs) cell = clip(cell, h);
  return cell;
}

ConvexCell clip(const ConvexCell& cell, const Halfspace& hs) {
  if (hs.normal.dim() != cell.dim()) throw Error(Errc::InvalidArgument, "halfspace dimension mismatch");
  return cell.dim() == 2 ? detail::clip2d(cell, hs) : detail::clip3d(cell, hs);
}

// ---------------------------------------------------------------------------
// Direction tuples and the circumscribed simplex

namespace {

int tuple_dim(std::span<const UnitVector> dirs) {
  if (dirs.empty()) throw Error(Errc::InvalidArgument, "empty direction tuple");
  const int d = dirs.front().dim();
  for (const auto& u : dirs)
    if (u.dim() != d) throw Error(Errc::InvalidArgument, "mixed dimensions in direction tuple");
  return d;
}

}  // namespace

double spanning_margin(std::span<const UnitVector> dirs) {
  const int d = tuple_dim(dirs);
  const int n = static_cast<int>(dirs.size());
  if (n == d + 1) {
    // Unique barycentric representation of the origin.
    Mat a(d + 1, d + 1);
    Vec rhs = Vec::Zero(d + 1);
    for (int i = 0; i <= d; ++i) {
      a.block(0, i, d, 1) = dirs[i].coords();
      a(d, i) = 1.0;
    }
    rhs[d] = 1.0;
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < d + 1) return 0.0;
    const Vec lambda = lu.solve(rhs);
    if (!((a * lambda - rhs).norm() <= 1e-9)) return 0.0;
    return lambda.minCoeff();
  }
  if (n > 64) throw Error(Errc::InvalidArgument, "too many directions for the spanning test");
  // Variables: λ_0..λ_{n-1}, t (all free).
  lp::Problem prob(n + 1);
  for (int j = 0; j <= n; ++j) prob.set_free(j);
  std::vector<double> obj(n + 1, 0.0);
  obj[n] = 1.0;
  prob.set_objective(obj);
  std::vector<double> row(n + 1);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < n; ++i) row[i] = dirs[i][k];
    row[n] = 0.0;
    prob.add_constraint(row, lp::Sense::Equal, 0.0);
  }
  std::fill(row.begin(), row.end(), 1.0);
  row[n] = 0.0;
  prob.add_constraint(row, lp::Sense::Equal, 1.0);
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = 1.0;
    row[n] = -1.0;
    prob.add_constraint(row, lp::Sense::GreaterEqual, 0.0);
  }
  const auto res = prob.maximize();
  if (res.status != lp::Status::Optimal) return 0.0;
  return res.objective;
}

bool half_sphere_test(std::span<const UnitVector> dirs, SpanDiagnostics* diag) {
  const double margin = spanning_margin(dirs);
  if (diag && std::abs(margin) <= kDeltaSpan) ++diag->ambiguous;
  return margin > kDeltaSpan;
}

Vec vertex_v(std::span<const UnitVector> dirs, int i) {
  const int d = tuple_dim(dirs);
  if (static_cast<int>(dirs.size()) != d + 1) throw Error(Errc::InvalidArgument, "vertex_v needs d+1 directions");
  if (i < 0 || i > d) throw Error(Errc::InvalidArgument, "vertex index out of range");
  Mat a(d, d);
  for (int j = 0, row = 0; j <= d; ++j) {
    if (j == i) continue;
    a.row(row++) = dirs[j].coords().transpose();
  }
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  const double smin = sv[d - 1];
  if (!(smin > 0.0) || sv[0] / smin > kKappaMax) throw Error(Errc::IllConditioned, "vertex system condition number above cutoff");
  return a.fullPivLu().solve(Vec::Ones(d));
}

std::vector<Vec> simplex_vertices(std::span<const UnitVector> dirs) {
  const int d = tuple_dim(dirs);
  if (static_cast<int>(dirs.size()) != d + 1) throw Error(Errc::InvalidArgument, "simplex needs d+1 directions");
  if (!half_sphere_test(dirs)) throw Error(Errc::NotPositivelySpanning, "directions lie in a closed half sphere");
  std::vector<Vec> out;
  out.reserve(d + 1);
  for (int i = 0; i <= d; ++i) out.push_back(vertex_v(dirs, i));
  return out;
}

ConvexCell simplex_T(std::span<const UnitVector> dirs) {
  const int d = tuple_dim(dirs);
  if (d != 2 && d != 3) throw Error(Errc::InvalidArgument, "full simplex cells need d in {2, 3}");
  std::vector<Vec> v = simplex_vertices(dirs);

  if (d == 2) {
    // Facet j is the edge opposite vertex j.
    int a = 1, b = 2;
    Vec e = v[b] - v[a];
    Vec out_normal(2);
    out_normal << e[1], -e[0];
    if (out_normal.dot(dirs[0].coords()) < 0.0) std::swap(a, b);
    const int c = 0;
    std::vector<Vec> ring{v[a], v[b], v[c]};
    std::vector<Halfspace> hs{{dirs[c], 1.0}, {dirs[a], 1.0}, {dirs[b], 1.0}};
    return ConvexCell::from_parts(2, std::move(hs), std::move(ring), {{0, 1}, {1, 2}, {2, 0}});
  }

  std::vector<Halfspace> hs;
  std::vector<std::vector<int>> facets;
  for (int j = 0; j <= 3; ++j) {
    std::vector<int> loop;
    for (int i = 0; i <= 3; ++i)
      if (i != j) loop.push_back(i);
    const Vec n = (v[loop[1]] - v[loop[0]]).head<3>().cross((v[loop[2]] - v[loop[0]]).head<3>());
    if (n.dot(dirs[j].coords()) < 0.0) std::swap(loop[1], loop[2]);
    hs.push_back({dirs[j], 1.0});
    facets.push_back(std::move(loop));
  }
  return ConvexCell::from_parts(3, std::move(hs), std::move(v), std::move(facets));
}

double delta_d(std::span<const UnitVector> dirs) {
  const int d = tuple_dim(dirs);
  if (static_cast<int>(dirs.size()) != d + 1) throw Error(Errc::InvalidArgument, "delta_d needs d+1 directions");
  Mat m(d, d);
  for (int i = 1; i <= d; ++i) m.col(i - 1) = dirs[i].coords() - dirs[0].coords();
  double fact = 1.0;
  for (int i = 2; i <= d; ++i) fact *= i;
  return std::abs(m.determinant()) / fact;
}

double support_function(const ConvexCell& cell, const UnitVector& u) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& v : cell.vertices()) h = std::max(h, u.dot(v));
  return h;
}

}  // namespace hypercell
