// Clipping of 3D cells stored as facet loops.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hypercell/error.hpp"
#include "hypercell/geometry.hpp"

namespace hypercell::detail {

std::vector<int> order_around(std::span<const Vec> points, std::span<const int> ids, const Vec& normal) {
  const Eigen::Vector3d n = normal.head<3>().normalized();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i : ids) c += points[i].head<3>();
  c /= static_cast<double>(ids.size());
  // Any unit vector orthogonal to n.
  Eigen::Vector3d e1 = std::abs(n.x()) < 0.9 ? n.cross(Eigen::Vector3d::UnitX()) : n.cross(Eigen::Vector3d::UnitY());
  e1.normalize();
  const Eigen::Vector3d e2 = n.cross(e1);
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(ids.size());
  for (int i : ids) {
    const Eigen::Vector3d p = points[i].head<3>() - c;
    keyed.emplace_back(std::atan2(p.dot(e2), p.dot(e1)), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> out;
  out.reserve(keyed.size());
  for (const auto& [angle, i] : keyed) out.push_back(i);
  return out;
}

ConvexCell clip3d(const ConvexCell& cell, const Halfspace& hs) {
  const auto& verts = cell.vertices();
  const int n = static_cast<int>(verts.size());
  const double tol = cell.tolerance();

  std::vector<double> s(n);
  double smax = -std::numeric_limits<double>::infinity();
  double smin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    s[i] = hs.violation(verts[i]);
    smax = std::max(smax, s[i]);
    smin = std::min(smin, s[i]);
  }
  if (smax <= tol) return cell;
  if (smin >= -tol) throw Error(Errc::EmptyCell, "clip leaves no interior");

  std::vector<Vec> new_verts = verts;
  std::map<std::pair<int, int>, int> edge_point;
  auto crossing = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = edge_point.find(key);
    if (it != edge_point.end()) return it->second;
    const double t = s[a] / (s[a] - s[b]);
    new_verts.push_back(verts[a] + t * (verts[b] - verts[a]));
    const int id = static_cast<int>(new_verts.size()) - 1;
    edge_point.emplace(key, id);
    return id;
  };
  auto strictly_in = [&](int v) { return s[v] < -tol; };
  auto strictly_out = [&](int v) { return s[v] > tol; };

  std::vector<Halfspace> out_hs;
  std::vector<std::vector<int>> out_facets;
  std::vector<int> cap;
  for (size_t f = 0; f < cell.facets().size(); ++f) {
    const auto& loop = cell.facets()[f];
    const int m = static_cast<int>(loop.size());
    std::vector<int> kept;
    kept.reserve(m + 1);
    for (int k = 0; k < m; ++k) {
      const int a = loop[k];
      const int b = loop[(k + 1) % m];
      if (!strictly_out(a)) kept.push_back(a);
      if ((strictly_in(a) && strictly_out(b)) || (strictly_out(a) && strictly_in(b))) kept.push_back(crossing(a, b));
    }
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    while (kept.size() > 1 && kept.front() == kept.back()) kept.pop_back();
    if (kept.size() < 3) continue;
    out_facets.push_back(std::move(kept));
    out_hs.push_back(cell.halfspaces()[f]);
  }

  for (int i = 0; i < n; ++i)
    if (!strictly_in(i) && !strictly_out(i)) cap.push_back(i);
  for (const auto& [key, id] : edge_point) cap.push_back(id);
  std::sort(cap.begin(), cap.end());
  cap.erase(std::unique(cap.begin(), cap.end()), cap.end());
  if (cap.size() >= 3) {
    out_facets.push_back(order_around(new_verts, cap, hs.normal.coords()));
    out_hs.push_back(hs);
  }

  // Compact: keep only vertices referenced by surviving facets.
  std::vector<int> remap(new_verts.size(), -1);
  std::vector<Vec> compact;
  for (auto& loop : out_facets) {
    for (int& v : loop) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(compact.size());
        compact.push_back(new_verts[v]);
      }
      v = remap[v];
    }
  }

  // Merge vertices that landed within tolerance of each other.
  const int nv = static_cast<int>(compact.size());
  std::vector<int> rep(nv);
  std::iota(rep.begin(), rep.end(), 0);
  bool any_merge = false;
  for (int i = 0; i < nv; ++i) {
    if (rep[i] != i) continue;
    for (int j = i + 1; j < nv; ++j) {
      if (rep[j] == j && (compact[i] - compact[j]).norm() <= tol) {
        rep[j] = i;
        any_merge = true;
      }
    }
  }
  if (any_merge) {
    std::vector<int> idx(nv, -1);
    std::vector<Vec> merged;
    for (int i = 0; i < nv; ++i) {
      if (rep[i] == i) {
        idx[i] = static_cast<int>(merged.size());
        merged.push_back(compact[i]);
      }
    }
    std::vector<Halfspace> hs2;
    std::vector<std::vector<int>> facets2;
    for (size_t f = 0; f < out_facets.size(); ++f) {
      std::vector<int> loop;
      for (int v : out_facets[f]) {
        const int id = idx[rep[v]];
        if (loop.empty() || loop.back() != id) loop.push_back(id);
      }
      while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
      if (loop.size() < 3) continue;
      facets2.push_back(std::move(loop));
      hs2.push_back(out_hs[f]);
    }
    compact = std::move(merged);
    out_facets = std::move(facets2);
    out_hs = std::move(hs2);
  }

  if (out_facets.size() < 4 || compact.size() < 4) throw Error(Errc::EmptyCell, "clip collapses the cell");
  return ConvexCell::from_parts(3, std::move(out_hs), std::move(compact), std::move(out_facets));
}

}  // namespace hypercell::detail
