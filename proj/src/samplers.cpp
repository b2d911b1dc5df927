#include "hypercell/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "hypercell/error.hpp"

namespace hypercell {

namespace {

bool is_degenerate(Errc c) {
  return c == Errc::EmptyCell || c == Errc::IllConditioned || c == Errc::NotPositivelySpanning;
}

}  // namespace

std::string_view to_string(SampleOrigin o) { return o == SampleOrigin::InballSampler ? "InballSampler" : "WindowSampler"; }

double FunctionalValues::get(SizeFunctional s) const {
  switch (s) {
    case SizeFunctional::Inradius: return inradius;
    case SizeFunctional::Circumradius: return circumradius;
    case SizeFunctional::Diameter: return diameter;
    case SizeFunctional::Perimeter:
    case SizeFunctional::SurfaceArea: return boundary;
    case SizeFunctional::Volume: return volume;
    case SizeFunctional::PhiContent: return phi;
  }
  throw Error(Errc::InvalidArgument, "unknown size functional");
}

double TypicalCellSample::size_root(SizeFunctional s) const {
  return std::pow(values.get(s), 1.0 / degree(s, dim()));
}

TypicalCellSample describe_cell(ConvexCell cell, const DirectionalDistribution& dist, SampleOrigin origin,
                                CenterFunction center, std::optional<double> inball_r) {
  TypicalCellSample s;
  const int d = cell.dim();
  s.values.phi = phi_content(cell, dist);
  s.values.inradius = inball_r ? *inball_r : inradius(cell).radius;
  s.values.circumradius = circumradius(cell).radius;
  s.values.diameter = diameter(cell);
  s.values.volume = volume(cell);
  s.values.boundary = d == 2 ? perimeter(cell) : surface_area(cell);
  s.fcount = cell.facet_count();
  s.inball_r = s.values.inradius;
  s.summary = summarize(d, s.fcount, s.values.phi, s.values.inradius, s.values.circumradius, s.values.diameter,
                        s.values.volume, s.values.boundary);
  s.origin = origin;
  s.center = center;
  s.d = d;
  s.cell = std::move(cell);
  return s;
}

AcceptanceStats& AcceptanceStats::operator+=(const AcceptanceStats& o) {
  proposals += o.proposals;
  accepted += o.accepted;
  outside_p += o.outside_p;
  span.ambiguous += o.span.ambiguous;
  return *this;
}

DirectionTuple sample_simplex_directions(const DirectionalDistribution& dist, RandomStream& rng,
                                         AcceptanceStats* stats) {
  if (!dist.has_continuous_part())
    throw Error(Errc::UnsupportedDistribution, "simplex directions need a distribution with a density part");
  const int d = dist.dim();
  const double envelope = delta_max(dist, d);
  AcceptanceStats local;
  DirectionTuple dirs;
  dirs.reserve(d + 1);
  for (std::int64_t i = 0; i < kStallProposals; ++i) {
    dirs.clear();
    for (int j = 0; j <= d; ++j) dirs.push_back(sample_direction(dist, rng));
    ++local.proposals;
    const double u = rng.uniform();
    if (!half_sphere_test(dirs, &local.span)) {
      ++local.outside_p;
      continue;
    }
    if (u * envelope < delta_d(dirs)) {
      ++local.accepted;
      if (stats) *stats += local;
      return dirs;
    }
  }
  if (stats) *stats += local;
  throw Error(Errc::RejectionStall, "no simplex direction tuple accepted");
}

double sample_inradius(double gamma, std::optional<double> a_cap, RandomStream& rng) {
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "intensity must be positive");
  if (!a_cap) return rng.exponential(gamma);
  if (!(*a_cap > 0.0)) throw Error(Errc::InvalidArgument, "truncation cap must be positive");
  const double u = rng.uniform_open();
  // -expm1(-γa) = 1 - e^{-γa}, accurate for small γa.
  return -std::log1p(-u * -std::expm1(-gamma * *a_cap)) / gamma;
}

EnvironmentShell sample_environment(const ProcessParams& params, double inner_r, double outer_R, RandomStream& rng) {
  if (!(inner_r >= 0.0) || !(outer_R > inner_r) || !std::isfinite(outer_R))
    throw Error(Errc::InvalidArgument, "shell needs 0 <= inner_r < outer_R < inf");
  EnvironmentShell shell{inner_r, outer_R, {}};
  const std::uint64_t n = rng.poisson(params.gamma * (outer_R - inner_r));
  shell.hyperplanes.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double t = outer_R - rng.uniform() * (outer_R - inner_r);
    shell.hyperplanes.emplace_back(sample_direction(params.dist, rng), t);
  }
  return shell;
}

TypicalCellSample sample_typical_cell_inball(const ProcessParams& params, std::optional<double> a_cap,
                                             RandomStream& rng, AcceptanceStats* stats) {
  if (!params.dist.is_absolutely_continuous())
    throw Error(Errc::UnsupportedDistribution, "the inball sampler needs an absolutely continuous φ");
  if (params.dim != 2 && params.dim != 3) throw Error(Errc::InvalidArgument, "cell sampling needs d in {2, 3}");
  const DirectionTuple dirs = sample_simplex_directions(params.dist, rng, stats);
  const double r = sample_inradius(params.gamma, a_cap, rng);
  try {
    ConvexCell cell = simplex_T(dirs).scaled(r);
    // Offsets of the hyperplanes missing rB^d form a rate-γ Poisson process on
    // (r, ∞); one beyond the current reach cannot cut the cell.
    double t = r;
    for (;;) {
      t += rng.exponential(params.gamma);
      if (t >= cell.reach()) break;
      const UnitVector u = sample_direction(params.dist, rng);
      cell = clip(cell, Halfspace{u, t});
    }
    TypicalCellSample s = describe_cell(std::move(cell), params.dist, SampleOrigin::InballSampler,
                                        CenterFunction::Incenter, r);
    s.conditioned_a = a_cap;
    return s;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::EmptyCell:
      case Errc::IllConditioned:
      case Errc::NotPositivelySpanning:
      case Errc::InvalidArgument: throw Error(Errc::DegenerateSample, e.what());
      default: throw;
    }
  }
}

std::optional<double> truncation_cap(const Conditioning& cond, const ProcessParams& params) {
  if (!(cond.a > 0.0)) throw Error(Errc::InvalidArgument, "conditioning level must be positive");
  if (cond.a * params.gamma >= 1.0) return std::nullopt;
  const double k = degree(cond.sigma, params.dim);
  return cond.a / std::pow(unit_ball_value(cond.sigma, params.dim), 1.0 / k);
}

TypicalCellSample sample_conditioned_inball(const ProcessParams& params, const Conditioning& cond,
                                            RandomStream& rng, ConditionedStats* stats) {
  const std::optional<double> cap = truncation_cap(cond, params);
  ConditionedStats local;
  for (std::int64_t i = 0; i < kStallProposals; ++i) {
    TypicalCellSample s = sample_typical_cell_inball(params, cap, rng);
    ++local.proposals;
    if (s.size_root(cond.sigma) < cond.a) {
      ++local.accepted;
      if (stats) {
        stats->proposals += local.proposals;
        stats->accepted += local.accepted;
      }
      return s;
    }
  }
  if (stats) stats->proposals += local.proposals;
  throw Error(Errc::RejectionStall, "conditioning event never hit");
}

std::vector<TypicalCellSample> sample_window_tessellation(const ProcessParams& params, double window_R,
                                                          RandomStream& rng, double delta_w, std::int64_t* dropped,
                                                          std::optional<double> inradius_below) {
  if (params.dim != 2) throw Error(Errc::InvalidArgument, "the window sampler needs d = 2");
  if (!(window_R > 0.0)) throw Error(Errc::InvalidArgument, "window radius must be positive");
  const EnvironmentShell shell = sample_environment(params, 0.0, window_R, rng);
  const std::vector<ConvexCell> cells = arrangement_cells(shell.hyperplanes, window_R);
  std::vector<TypicalCellSample> out;
  const double keep = (1.0 - delta_w) * window_R;
  for (const auto& c : cells) {
    const Vec g = centroid(c);
    if (g.norm() >= keep) continue;
    if (inradius_below && volume(c) >= *inradius_below * perimeter(c)) continue;
    try {
      TypicalCellSample s =
          describe_cell(c.translated(Vec(-g)), params.dist, SampleOrigin::WindowSampler, CenterFunction::Centroid);
      if (inradius_below) {
        if (!(s.inball_r < *inradius_below)) continue;
        s.conditioned_a = inradius_below;
      }
      out.push_back(std::move(s));
    } catch (const Error& e) {
      if (!is_degenerate(e.code())) throw;
      if (dropped) ++*dropped;
    }
  }
  return out;
}

TypicalCellSample sample_window_cell(const ProcessParams& params, double window_R, RandomStream& rng, double delta_w,
                                     std::int64_t* windows_used, std::int64_t* dropped) {
  if (params.dim != 2) throw Error(Errc::InvalidArgument, "the window sampler needs d = 2");
  if (!(window_R > 0.0)) throw Error(Errc::InvalidArgument, "window radius must be positive");
  const double lambda = params.gamma * window_R;
  const double keep = (1.0 - delta_w) * window_R;
  // P(n)·M(n) splits into Poisson(λ) shifted by 0, 1, 2 with weights 1, λ, λ²/2.
  const double w1 = lambda, w2 = 0.5 * lambda * lambda, wsum = 1.0 + w1 + w2;
  for (std::int64_t tries = 1; tries <= kStallProposals; ++tries) {
    const double pick_shift = rng.uniform() * wsum;
    const std::uint64_t shift = pick_shift < 1.0 ? 0 : (pick_shift < 1.0 + w1 ? 1 : 2);
    const std::uint64_t n = shift + rng.poisson(lambda);
    std::vector<Hyperplane> lines;
    lines.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double t = window_R - rng.uniform() * window_R;
      lines.emplace_back(sample_direction(params.dist, rng), t);
    }
    const std::vector<ConvexCell> cells = arrangement_cells(lines, window_R);
    std::vector<std::pair<std::size_t, Vec>> eligible;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      Vec g = centroid(cells[i]);
      if (g.norm() < keep) eligible.emplace_back(i, std::move(g));
    }
    const double m = 1.0 + static_cast<double>(n) + 0.5 * static_cast<double>(n) * static_cast<double>(n - (n > 0));
    const double u = rng.uniform() * m;
    if (u >= static_cast<double>(eligible.size())) continue;
    const auto& [idx, g] = eligible[static_cast<std::size_t>(u)];
    try {
      TypicalCellSample s = describe_cell(cells[idx].translated(Vec(-g)), params.dist, SampleOrigin::WindowSampler,
                                          CenterFunction::Centroid);
      if (windows_used) *windows_used += tries;
      return s;
    } catch (const Error& e) {
      if (!is_degenerate(e.code())) throw;
      if (dropped) ++*dropped;
    }
  }
  throw Error(Errc::RejectionStall, "no window accepted");
}

}  // namespace hypercell
