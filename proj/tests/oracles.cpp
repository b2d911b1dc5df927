#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "hypercell/error.hpp"

namespace oracle {

using hypercell::Mat;

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

namespace {

void push_unique(std::vector<Vec>& out, const Vec& p, double tol) {
  for (const auto& q : out)
    if ((q - p).norm() <= tol) return;
  out.push_back(p);
}

double det2(double a, double b, double c, double d) { return a * d - b * c; }

double det3(const Eigen::Matrix3d& m) {
  return m(0, 0) * det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2)) - m(0, 1) * det2(m(1, 0), m(1, 2), m(2, 0), m(2, 2)) +
         m(0, 2) * det2(m(1, 0), m(1, 1), m(2, 0), m(2, 1));
}

/// Area of a planar convex point group, sorted by angle around its mean
/// inside the plane with unit normal n.
double planar_group_area(const std::vector<Vec>& pts, const Eigen::Vector3d& n) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += Eigen::Vector3d(p[0], p[1], p[2]);
  c /= static_cast<double>(pts.size());
  Eigen::Vector3d e1 = n.unitOrthogonal();
  Eigen::Vector3d e2 = n.cross(e1);
  std::vector<std::pair<double, Eigen::Vector3d>> ring;
  for (const auto& p : pts) {
    Eigen::Vector3d q(p[0], p[1], p[2]);
    ring.push_back({std::atan2((q - c).dot(e2), (q - c).dot(e1)), q});
  }
  std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < ring.size(); ++i) s += (ring[i].second - c).cross(ring[(i + 1) % ring.size()].second - c);
  return 0.5 * std::abs(s.dot(n));
}

}  // namespace

std::vector<Vec> enumerate_vertices(int dim, std::span<const Halfspace> hs, double tol) {
  std::vector<Vec> out;
  const int m = static_cast<int>(hs.size());
  auto feasible = [&](const Vec& x) {
    for (const auto& h : hs)
      if (h.normal.dot(x) - h.bound > tol * std::max(1.0, x.norm())) return false;
    return true;
  };
  if (dim == 2) {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const auto &a = hs[i].normal, &b = hs[j].normal;
        const double det = det2(a[0], a[1], b[0], b[1]);
        if (std::abs(det) < 1e-12) continue;
        const Vec x = v2(det2(hs[i].bound, a[1], hs[j].bound, b[1]) / det, det2(a[0], hs[i].bound, b[0], hs[j].bound) / det);
        if (feasible(x)) push_unique(out, x, 1e-7 * std::max(1.0, x.norm()));
      }
    return out;
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        Eigen::Matrix3d A;
        for (int c = 0; c < 3; ++c) {
          A(0, c) = hs[i].normal[c];
          A(1, c) = hs[j].normal[c];
          A(2, c) = hs[k].normal[c];
        }
        const double det = det3(A);
        if (std::abs(det) < 1e-12) continue;
        const Eigen::Vector3d b(hs[i].bound, hs[j].bound, hs[k].bound);
        Vec x(3);
        for (int c = 0; c < 3; ++c) {
          Eigen::Matrix3d Ac = A;
          Ac.col(c) = b;
          x[c] = det3(Ac) / det;
        }
        if (feasible(x)) push_unique(out, x, 1e-7 * std::max(1.0, x.norm()));
      }
  return out;
}

double hausdorff(std::span<const Vec> a, std::span<const Vec> b) {
  auto one_way = [](std::span<const Vec> p, std::span<const Vec> q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, (x - y).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  return std::max(one_way(a, b), one_way(b, a));
}

double simplex_volume(std::span<const Vec> pts) {
  const int d = static_cast<int>(pts.size()) - 1;
  Eigen::MatrixXd m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = pts[j + 1][i] - pts[0][i];
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  return std::abs(m.determinant()) / fact;
}

double hull_volume(std::span<const Vec> pts) {
  const int n = static_cast<int>(pts.size());
  const int dim = static_cast<int>(pts[0].size());
  Vec c = Vec::Zero(dim);
  for (const auto& p : pts) c += p;
  c /= n;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - c).norm());
  const double tol = 1e-10 * std::max(scale, 1.0);
  double total = 0.0;
  if (dim == 2) {
    // Supporting lines through pairs; the pair is a hull edge when it is the
    // extreme pair of the collinear points on that line.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Vec e = pts[j] - pts[i];
        if (e.norm() <= tol) continue;
        bool edge = true;
        for (int k = 0; k < n && edge; ++k) {
          const Vec w = pts[k] - pts[i];
          const double cr = e[0] * w[1] - e[1] * w[0];
          if (cr < -tol * e.norm()) edge = false;
          // Collinear points must lie between i and j.
          if (std::abs(cr) <= tol * e.norm()) {
            const double t = w.dot(e) / e.squaredNorm();
            if (t < -1e-12 || t > 1 + 1e-12) edge = false;
          }
        }
        if (edge) {
          const Vec a = pts[i] - c, b = pts[j] - c;
          total += 0.5 * (a[0] * b[1] - a[1] * b[0]);
        }
      }
    return total;
  }
  std::vector<std::pair<Eigen::Vector3d, double>> planes;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Eigen::Vector3d a(pts[i][0], pts[i][1], pts[i][2]);
        Eigen::Vector3d b(pts[j][0], pts[j][1], pts[j][2]);
        Eigen::Vector3d q(pts[k][0], pts[k][1], pts[k][2]);
        Eigen::Vector3d nrm = (b - a).cross(q - a);
        if (nrm.norm() <= tol * tol) continue;
        nrm.normalize();
        double off = nrm.dot(a);
        int above = 0, below = 0;
        for (const auto& p : pts) {
          const double s = nrm.dot(Eigen::Vector3d(p[0], p[1], p[2])) - off;
          above += s > tol;
          below += s < -tol;
        }
        if (above && below) continue;
        if (above) {
          nrm = -nrm;
          off = -off;
        }
        bool seen = false;
        for (const auto& [m2, o2] : planes) seen = seen || ((m2 - nrm).norm() < 1e-8 && std::abs(o2 - off) < 1e-8 * std::max(1.0, scale));
        if (!seen) planes.push_back({nrm, off});
      }
  const Eigen::Vector3d c3(c[0], c[1], c[2]);
  for (const auto& [nrm, off] : planes) {
    std::vector<Vec> face;
    for (const auto& p : pts)
      if (std::abs(nrm.dot(Eigen::Vector3d(p[0], p[1], p[2])) - off) <= tol) face.push_back(p);
    total += planar_group_area(face, nrm) * (off - nrm.dot(c3)) / 3.0;
  }
  return total;
}

Vec cramer_vertex(std::span<const UnitVector> dirs, int i) {
  const int d = dirs[0].dim();
  std::vector<int> rows;
  for (int j = 0; j <= d; ++j)
    if (j != i) rows.push_back(j);
  if (d == 2) {
    const auto &a = dirs[rows[0]], &b = dirs[rows[1]];
    const double det = det2(a[0], a[1], b[0], b[1]);
    return v2(det2(1.0, a[1], 1.0, b[1]) / det, det2(a[0], 1.0, b[0], 1.0) / det);
  }
  Eigen::Matrix3d A;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) A(r, c) = dirs[rows[r]][c];
  const double det = det3(A);
  Vec x(3);
  for (int c = 0; c < 3; ++c) {
    Eigen::Matrix3d Ac = A;
    Ac.col(c) = Eigen::Vector3d::Ones();
    x[c] = det3(Ac) / det;
  }
  return x;
}

bool sweep_contained_in_half_plane(std::span<const UnitVector> dirs, int grid) {
  auto holds = [&](double theta) {
    const double nx = std::cos(theta), ny = std::sin(theta);
    for (const auto& u : dirs)
      if (u[0] * nx + u[1] * ny < -1e-12) return false;
    return true;
  };
  for (int k = 0; k < grid; ++k)
    if (holds(2 * std::numbers::pi * k / grid)) return true;
  for (const auto& u : dirs) {
    const double t = std::atan2(u[1], u[0]);
    if (holds(t + std::numbers::pi / 2) || holds(t - std::numbers::pi / 2)) return true;
  }
  return false;
}

double grid_inradius(const ConvexCell& cell, double step) {
  auto depth = [&](double x, double y) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& h : cell.halfspaces()) r = std::min(r, h.bound - h.normal[0] * x - h.normal[1] * y);
    return r;
  };
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  for (const auto& v : cell.vertices())
    for (int c = 0; c < 2; ++c) {
      lo[c] = std::min(lo[c], v[c]);
      hi[c] = std::max(hi[c], v[c]);
    }
  double best = -1e300, bx = 0, by = 0;
  for (double x = lo[0]; x <= hi[0]; x += step)
    for (double y = lo[1]; y <= hi[1]; y += step) {
      const double r = depth(x, y);
      if (r > best) {
        best = r;
        bx = x;
        by = y;
      }
    }
  // The depth is concave and 1-Lipschitz; finer grids around the best point
  // recover what the coarse step leaves on the table.
  for (double h = step / 10; h > 1e-12; h /= 10) {
    const double cx = bx, cy = by;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double r = depth(cx + i * h, cy + j * h);
        if (r > best) {
          best = r;
          bx = cx + i * h;
          by = cy + j * h;
        }
      }
  }
  return best;
}

double tangent_subset_inradius(const ConvexCell& cell) {
  const int d = cell.dim();
  const auto& hs = cell.halfspaces();
  const int m = static_cast<int>(hs.size());
  double best = -1.0;
  std::vector<int> idx(d + 1);
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == d + 1) {
      Eigen::MatrixXd A(d + 1, d + 1);
      Eigen::VectorXd b(d + 1);
      for (int r = 0; r <= d; ++r) {
        for (int c = 0; c < d; ++c) A(r, c) = hs[idx[r]].normal[c];
        A(r, d) = 1.0;
        b[r] = hs[idx[r]].bound;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < d + 1) return;
      const Eigen::VectorXd sol = lu.solve(b);
      const double r = sol[d];
      for (const auto& h : hs) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += h.normal[c] * sol[c];
        if (s + r > h.bound + 1e-9 * std::max(1.0, std::abs(h.bound))) return;
      }
      best = std::max(best, r);
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

double exhaustive_circumradius(std::span<const Vec> pts) {
  const int n = static_cast<int>(pts.size());
  const int dim = static_cast<int>(pts[0].size());
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXd& c, double r) {
    if (!(r < best)) return;
    for (const auto& p : pts) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += (p[k] - c[k]) * (p[k] - c[k]);
      if (std::sqrt(s) > r * (1 + 1e-12) + 1e-12) return;
    }
    best = r;
  };
  auto to_e = [&](const Vec& v) {
    Eigen::VectorXd e(dim);
    for (int k = 0; k < dim; ++k) e[k] = v[k];
    return e;
  };
  // The ball spanned by a support set is centred in the affine hull of the
  // set, equidistant from its points: c = p_0 + Σ t_j (p_j - p_0).
  auto spanned = [&](std::span<const int> ids) {
    const int s = static_cast<int>(ids.size()) - 1;
    const Eigen::VectorXd p0 = to_e(pts[ids[0]]);
    Eigen::MatrixXd E(dim, s);
    for (int j = 0; j < s; ++j) E.col(j) = to_e(pts[ids[j + 1]]) - p0;
    const Eigen::MatrixXd G = E.transpose() * E;
    Eigen::VectorXd rhs(s);
    for (int j = 0; j < s; ++j) rhs[j] = 0.5 * G(j, j);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (lu.rank() < s) return;
    const Eigen::VectorXd c = p0 + E * lu.solve(rhs);
    consider(c, (c - p0).norm());
  };
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const int two[2] = {a, b};
      spanned(two);
      for (int c = b + 1; c < n; ++c) {
        const int three[3] = {a, b, c};
        spanned(three);
        if (dim < 3) continue;
        for (int e = c + 1; e < n; ++e) {
          const int four[4] = {a, b, c, e};
          spanned(four);
        }
      }
    }
  return best;
}

double quadrature_phi(const ConvexCell& cell, const hypercell::DirectionalDistribution& dist, int nodes) {
  using Kind = hypercell::DirectionalDistribution::Kind;
  const int dim = cell.dim();
  auto rho = [&](const Vec& u) {
    return dist.kind() == Kind::Isotropic ? 1.0 / hypercell::sphere_area(dim) : dist.density_at(u);
  };
  auto h = [&](const Vec& u) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : cell.vertices()) m = std::max(m, v.dot(u));
    return m;
  };
  if (dim == 2) {
    double s = 0.0;
    const double w = 2 * std::numbers::pi / nodes;
    for (int k = 0; k < nodes; ++k) {
      const double t = (k + 0.5) * w;
      const Vec u = v2(std::cos(t), std::sin(t));
      s += h(u) * rho(u) * w;
    }
    return s;
  }
  // ∫_{S²} f = ∫_{-1}^{1} dz ∫_0^{2π} f dφ; each z-band is integrated by the
  // midpoint rule in φ and the bands by Gauss-Legendre with `nodes` points.
  const int nphi = 2 * nodes;
  const double w = 2 * std::numbers::pi / nphi;
  auto band = [&](double z) {
    const double s = std::sqrt(std::max(0.0, 1 - z * z));
    double acc = 0.0;
    for (int k = 0; k < nphi; ++k) {
      const double p = (k + 0.5) * w;
      const Vec u = v3(s * std::cos(p), s * std::sin(p), z);
      acc += h(u) * rho(u) * w;
    }
    return acc;
  };
  // Split [-1, 1] into panels so the Gauss rule sees mostly smooth pieces.
  const int panels = std::max(1, nodes / 20);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = -1.0 + 2.0 * p / panels, b = -1.0 + 2.0 * (p + 1) / panels;
    total += boost::math::quadrature::gauss<double, 20>::integrate(band, a, b);
  }
  return total;
}

ConvexCell random_cell(int dim, int m, hypercell::RandomStream& rng) {
  for (;;) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < m; ++i) {
      Vec g(dim);
      for (int k = 0; k < dim; ++k) g[k] = rng.normal();
      hs.push_back({UnitVector(g), 0.3 + 1.2 * rng.uniform()});
    }
    try {
      return ConvexCell::from_halfspaces(dim, hs);
    } catch (const hypercell::Error&) {
    }
  }
}

Mat random_rotation(int dim, hypercell::RandomStream& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  Mat out(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out(i, j) = q(i, j);
  return out;
}

}  // namespace oracle
