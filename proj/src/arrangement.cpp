// Bounded faces of a line arrangement clipped to a disk.

#include <algorithm>
#include <cmath>
#include <map>

#include "hypercell/error.hpp"
#include "hypercell/samplers.hpp"

namespace hypercell {

namespace {

struct HalfEdge {
  int from;
  int to;
  int line;
  double angle;
};

}  // namespace

std::vector<ConvexCell> arrangement_cells(std::span<const Hyperplane> lines, double window_R) {
  const int n = static_cast<int>(lines.size());
  std::vector<Vec> points;
  // Intersection points on each line, keyed by the coordinate along it.
  std::vector<std::vector<std::pair<double, int>>> on_line(n);
  for (int i = 0; i < n; ++i) {
    const Vec& ni = lines[i].normal().coords();
    for (int j = i + 1; j < n; ++j) {
      const Vec& nj = lines[j].normal().coords();
      const double det = ni[0] * nj[1] - ni[1] * nj[0];
      if (std::abs(det) < 1e-14) continue;
      const double ti = lines[i].offset();
      const double tj = lines[j].offset();
      Vec x(2);
      x << (ti * nj[1] - tj * ni[1]) / det, (ni[0] * tj - nj[0] * ti) / det;
      if (x.norm() >= window_R) continue;
      const int id = static_cast<int>(points.size());
      points.push_back(x);
      on_line[i].emplace_back(-ni[1] * x[0] + ni[0] * x[1], id);
      on_line[j].emplace_back(-nj[1] * x[0] + nj[0] * x[1], id);
    }
  }

  // Segments between consecutive intersections; pieces reaching the circle
  // are left out, which merges every boundary cell into the unbounded face.
  std::vector<HalfEdge> half;
  std::vector<std::vector<int>> outgoing(points.size());
  for (int i = 0; i < n; ++i) {
    auto& pts = on_line[i];
    std::sort(pts.begin(), pts.end());
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      const int a = pts[k].second;
      const int b = pts[k + 1].second;
      const Vec dv = points[b] - points[a];
      const double ang = std::atan2(dv[1], dv[0]);
      outgoing[a].push_back(static_cast<int>(half.size()));
      half.push_back({a, b, i, ang});
      outgoing[b].push_back(static_cast<int>(half.size()));
      half.push_back({b, a, i, std::atan2(-dv[1], -dv[0])});
    }
  }
  // half[h ^ 1] is the twin of half[h].
  std::vector<int> position(half.size());
  for (auto& out : outgoing) {
    std::sort(out.begin(), out.end(), [&](int x, int y) { return half[x].angle < half[y].angle; });
    for (size_t k = 0; k < out.size(); ++k) position[out[k]] = static_cast<int>(k);
  }
  auto next = [&](int h) {
    const int twin = h ^ 1;
    const auto& out = outgoing[half[h].to];
    const int k = position[twin];
    return out[(k + static_cast<int>(out.size()) - 1) % out.size()];
  };

  std::vector<char> used(half.size(), 0);
  std::vector<ConvexCell> cells;
  std::vector<int> loop;
  for (size_t start = 0; start < half.size(); ++start) {
    if (used[start]) continue;
    loop.clear();
    int h = static_cast<int>(start);
    while (!used[h]) {
      used[h] = 1;
      loop.push_back(h);
      h = next(h);
    }
    if (h != static_cast<int>(start) || loop.size() < 3) continue;
    double area2 = 0.0;
    for (int e : loop) {
      const Vec& a = points[half[e].from];
      const Vec& b = points[half[e].to];
      area2 += a[0] * b[1] - a[1] * b[0];
    }
    if (!(area2 > 0.0)) continue;

    std::vector<Vec> ring;
    std::vector<Halfspace> hs;
    std::vector<std::vector<int>> facets;
    const int m = static_cast<int>(loop.size());
    for (int k = 0; k < m; ++k) {
      const HalfEdge& e = half[loop[k]];
      ring.push_back(points[e.from]);
      const Vec dv = points[e.to] - points[e.from];
      Vec outward(2);
      outward << dv[1], -dv[0];
      const Hyperplane& line = lines[e.line];
      const double s = outward.dot(line.normal().coords()) > 0.0 ? 1.0 : -1.0;
      hs.push_back({s > 0.0 ? line.normal() : -line.normal(), s * line.offset()});
      facets.push_back({k, (k + 1) % m});
    }
    cells.push_back(ConvexCell::from_parts(2, std::move(hs), std::move(ring), std::move(facets)));
    if (cells.size() > kMaxArrangementCells) throw Error(Errc::ArrangementOverflow, "more than 10^6 cells");
  }
  return cells;
}

}  // namespace hypercell
