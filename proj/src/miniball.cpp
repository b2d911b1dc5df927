// Smallest enclosing ball by move-to-front recursion.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hypercell/error.hpp"
#include "hypercell/functionals.hpp"

namespace hypercell {

namespace {

// Ball whose boundary passes through every point in `boundary`, centred in
// their affine hull.
Ball ball_through(const std::vector<Vec>& boundary, int dim) {
  if (boundary.empty()) return {-1.0, Vec::Zero(dim)};
  const Vec& p0 = boundary.front();
  const int k = static_cast<int>(boundary.size()) - 1;
  if (k == 0) return {0.0, p0};
  Eigen::MatrixXd a(dim, k);
  for (int j = 0; j < k; ++j) a.col(j) = boundary[j + 1] - p0;
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::VectorXd rhs(k);
  for (int j = 0; j < k; ++j) rhs[j] = 0.5 * a.col(j).squaredNorm();
  const Eigen::VectorXd lambda = gram.completeOrthogonalDecomposition().solve(rhs);
  const Vec offset = a * lambda;
  return {offset.norm(), Vec(p0 + offset)};
}

struct Mtf {
  std::vector<Vec> pts;
  std::vector<Vec> boundary;
  int dim;
  double slack;

  bool outside(const Ball& b, const Vec& p) const { return b.radius < 0.0 || (p - b.center).norm() > b.radius + slack; }

  Ball run(size_t end) {
    Ball ball = ball_through(boundary, dim);
    if (static_cast<int>(boundary.size()) == dim + 1) return ball;
    for (size_t i = 0; i < end; ++i) {
      if (!outside(ball, pts[i])) continue;
      boundary.push_back(pts[i]);
      ball = run(i);
      boundary.pop_back();
      std::rotate(pts.begin(), pts.begin() + static_cast<long>(i), pts.begin() + static_cast<long>(i) + 1);
    }
    return ball;
  }
};

}  // namespace

Ball min_enclosing_ball(std::span<const Vec> points) {
  if (points.empty()) throw Error(Errc::InvalidArgument, "enclosing ball of an empty point set");
  const int dim = static_cast<int>(points.front().size());
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - points.front()).norm());
  Mtf m{{points.begin(), points.end()}, {}, dim, 1e-12 * std::max(scale, 1e-300)};
  Ball b = m.run(m.pts.size());
  // Rounding can leave a point marginally outside; widen to cover every input.
  for (const auto& p : points) b.radius = std::max(b.radius, (p - b.center).norm());
  return b;
}

Ball circumradius(const ConvexCell& cell) { return min_enclosing_ball(cell.vertices()); }

}  // namespace hypercell
