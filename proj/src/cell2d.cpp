// Planar clipping on the counter-clockwise vertex ring.

#include <algorithm>
#include <cmath>

#include "hypercell/error.hpp"
#include "hypercell/geometry.hpp"

namespace hypercell::detail {

ConvexCell clip2d(const ConvexCell& cell, const Halfspace& hs) {
  const auto& verts = cell.vertices();
  const auto& labels = cell.halfspaces();
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

  // Vertex k is emitted together with the halfspace of the edge leaving it.
  constexpr int kNew = -1;
  std::vector<Vec> out;
  std::vector<int> out_label;
  out.reserve(n + 1);
  out_label.reserve(n + 1);
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    const bool cur_in = s[k] <= tol;
    const bool nxt_in = s[k1] <= tol;
    if (cur_in) {
      if (nxt_in) {
        out.push_back(verts[k]);
        out_label.push_back(k);
      } else if (s[k] >= -tol) {
        out.push_back(verts[k]);
        out_label.push_back(kNew);
      } else {
        out.push_back(verts[k]);
        out_label.push_back(k);
        const double t = s[k] / (s[k] - s[k1]);
        out.push_back(verts[k] + t * (verts[k1] - verts[k]));
        out_label.push_back(kNew);
      }
    } else if (nxt_in && s[k1] < -tol) {
      const double t = s[k] / (s[k] - s[k1]);
      out.push_back(verts[k] + t * (verts[k1] - verts[k]));
      out_label.push_back(k);
    }
  }

  // Merge coincident consecutive vertices; the zero-length edge disappears.
  bool merged = true;
  while (merged && out.size() >= 3) {
    merged = false;
    const int m = static_cast<int>(out.size());
    for (int i = 0; i < m; ++i) {
      const int j = (i + 1) % m;
      if ((out[i] - out[j]).norm() <= tol) {
        out_label[i] = out_label[j];
        out.erase(out.begin() + j);
        out_label.erase(out_label.begin() + j);
        merged = true;
        break;
      }
    }
  }
  if (out.size() < 3) throw Error(Errc::EmptyCell, "clip collapses the cell");

  const int m = static_cast<int>(out.size());
  std::vector<Halfspace> new_hs;
  std::vector<std::vector<int>> facets;
  new_hs.reserve(m);
  facets.reserve(m);
  for (int i = 0; i < m; ++i) {
    new_hs.push_back(out_label[i] == kNew ? hs : labels[out_label[i]]);
    facets.push_back({i, (i + 1) % m});
  }
  return ConvexCell::from_parts(2, std::move(new_hs), std::move(out), std::move(facets));
}

}  // namespace hypercell::detail
