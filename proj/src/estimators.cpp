#include "hypercell/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hypercell/error.hpp"
#include "hypercell/stats.hpp"

namespace hypercell {

ConditionalEstimate make_estimate(std::int64_t numerator, std::int64_t denominator, double a, std::string sigma_name,
                                  int n) {
  if (denominator <= 0) throw Error(Errc::EmptyCondition, "no sample satisfies the conditioning event");
  const auto ci = stats::wilson(numerator, denominator);
  ConditionalEstimate e;
  e.numerator_count = numerator;
  e.denominator_count = denominator;
  e.p_hat = static_cast<double>(numerator) / static_cast<double>(denominator);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.a = a;
  e.sigma_name = std::move(sigma_name);
  e.n = n;
  return e;
}

ConditionalEstimate estimate_conditional_facet_prob(std::span<const TypicalCellSample> samples, SizeFunctional sigma,
                                                    double a, int n, FacetEvent event) {
  std::int64_t num = 0;
  std::int64_t den = 0;
  for (const auto& s : samples) {
    const int d = s.dim();
    if (s.conditioned_a) {
      const double need = a / std::pow(unit_ball_value(sigma, d), 1.0 / degree(sigma, d));
      if (*s.conditioned_a < need * (1.0 - 1e-12))
        throw Error(Errc::InvalidArgument, "samples were truncated below the conditioning event");
    }
    if (!(s.size_root(sigma) < a)) continue;
    ++den;
    if (event == FacetEvent::Equal ? s.fcount == n : s.fcount > n) ++num;
  }
  return make_estimate(num, den, a, std::string(to_string(sigma)), n);
}

namespace {

McEstimate bernoulli_or_mean(std::span<const double> terms) {
  if (terms.empty()) throw Error(Errc::EmptyCondition, "no samples");
  const auto m = stats::mean_and_stderr(terms);
  return {m.mean, m.se, static_cast<std::int64_t>(terms.size())};
}

}  // namespace

McEstimate estimate_mu_n_s(std::span<const TypicalCellSample> samples, int n, const ShapePredicate& s) {
  std::vector<double> terms;
  terms.reserve(samples.size());
  bool hit = false;
  for (const auto& z : samples) {
    const bool in = z.fcount == n && s(z.summary);
    hit = hit || in;
    terms.push_back(in ? 1.0 : 0.0);
  }
  if (!hit) throw Error(Errc::EmptyCondition, "no sample with f = n and shape in S");
  return bernoulli_or_mean(terms);
}

McEstimate estimate_mu_n_s_sigma(std::span<const TypicalCellSample> samples, int n, const ShapePredicate& s,
                                 SizeFunctional sigma) {
  std::vector<double> terms;
  terms.reserve(samples.size());
  bool hit = false;
  for (const auto& z : samples) {
    if (z.fcount != n || !s(z.summary)) {
      terms.push_back(0.0);
      continue;
    }
    hit = true;
    const int d = z.dim();
    const double k = degree(sigma, d);
    // Σ(𝔰(Z)) = Σ(Z) / Φ(Z)^k by homogeneity and translation invariance.
    const double sigma_shape = z.values.get(sigma) / std::pow(z.values.phi, k);
    terms.push_back(std::pow(sigma_shape, -(n - d) / k) / std::tgamma(n - d + 1.0));
  }
  if (!hit) throw Error(Errc::EmptyCondition, "no sample with f = n and shape in S");
  return bernoulli_or_mean(terms);
}

std::vector<OracleDraw> limit_shape_draws(const DirectionalDistribution& dist, SizeFunctional sigma, std::int64_t n,
                                          RandomStream& rng) {
  if (!dist.is_absolutely_continuous())
    throw Error(Errc::UnsupportedDistribution, "the limit-shape oracle needs an absolutely continuous φ");
  const int d = dist.dim();
  const double k = degree(sigma, d);
  std::vector<OracleDraw> out;
  out.reserve(static_cast<size_t>(n));
  DirectionTuple dirs;
  for (std::int64_t i = 0; i < n; ++i) {
    dirs.clear();
    for (int j = 0; j <= d; ++j) dirs.push_back(sample_direction(dist, rng));
    if (!half_sphere_test(dirs)) {
      out.push_back({0.0, {}});
      continue;
    }
    try {
      const TypicalCellSample t =
          describe_cell(simplex_T(dirs), dist, SampleOrigin::InballSampler, CenterFunction::Incenter, 1.0);
      out.push_back({delta_d(dirs) / std::pow(t.values.get(sigma), 1.0 / k), t.summary});
    } catch (const Error& e) {
      if (e.code() != Errc::IllConditioned) throw;
      out.push_back({0.0, {}});
    }
  }
  return out;
}

McEstimate limit_shape_oracle(const DirectionalDistribution& dist, SizeFunctional sigma,
                              const std::function<double(const ShapeSummary&)>& g, std::int64_t n, RandomStream& rng) {
  const auto draws = limit_shape_draws(dist, sigma, n, rng);
  std::vector<double> terms;
  terms.reserve(draws.size());
  for (const auto& w : draws) terms.push_back(w.weight > 0.0 ? w.weight * g(w.summary) : 0.0);
  return bernoulli_or_mean(terms);
}

McEstimate normalized_oracle(std::span<const OracleDraw> draws, const std::function<double(const ShapeSummary&)>& g) {
  double sw = 0.0;
  double swg = 0.0;
  for (const auto& w : draws) {
    if (w.weight <= 0.0) continue;
    sw += w.weight;
    swg += w.weight * g(w.summary);
  }
  if (!(sw > 0.0)) throw Error(Errc::EmptyCondition, "oracle draws carry no weight");
  const double ratio = swg / sw;
  double var = 0.0;
  for (const auto& w : draws) {
    if (w.weight <= 0.0) continue;
    const double r = w.weight * (g(w.summary) - ratio);
    var += r * r;
  }
  return {ratio, std::sqrt(var) / sw, static_cast<std::int64_t>(draws.size())};
}

double oracle_weighted_median(std::span<const OracleDraw> draws,
                              const std::function<double(const ShapeSummary&)>& field) {
  std::vector<std::pair<double, double>> v;
  double total = 0.0;
  for (const auto& w : draws) {
    if (w.weight <= 0.0) continue;
    v.emplace_back(field(w.summary), w.weight);
    total += w.weight;
  }
  if (v.empty()) throw Error(Errc::EmptyCondition, "oracle draws carry no weight");
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (const auto& [x, w] : v) {
    acc += w;
    if (acc >= 0.5 * total) return x;
  }
  return v.back().first;
}

KSResult ks_vs_gamma(std::span<const double> values, int shape, double gamma, double tolerance_factor) {
  if (shape < 1) throw Error(Errc::InvalidArgument, "gamma shape must be at least 1");
  KSResult r;
  r.statistic = stats::ks_statistic(values, [&](double x) { return stats::gamma_cdf(x, shape, gamma); });
  r.n_samples = static_cast<std::int64_t>(values.size());
  r.threshold_5pct = 1.36 / std::sqrt(static_cast<double>(values.size()));
  r.pass = r.statistic < tolerance_factor * r.threshold_5pct;
  return r;
}

RateFit fit_decay_rate(std::span<const RatePoint> points) {
  std::vector<RatePoint> usable;
  for (const auto& p : points)
    if (p.a > 0.0 && p.p > 0.0 && std::isfinite(p.p)) usable.push_back(p);
  if (usable.size() < 4) throw Error(Errc::DegenerateGrid, "rate fit needs at least 4 points with p > 0");
  const bool weighted = std::all_of(usable.begin(), usable.end(), [](const RatePoint& p) { return p.se > 0.0; });
  const size_t m = usable.size();
  std::vector<double> x(m), y(m), w(m);
  for (size_t i = 0; i < m; ++i) {
    x[i] = std::log(usable[i].a);
    y[i] = std::log(usable[i].p);
    // Delta method: Var(log p) ≈ (se/p)².
    w[i] = weighted ? std::pow(usable[i].p / usable[i].se, 2) : 1.0;
  }
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double mx = 0.0;
  double my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::DegenerateGrid, "rate fit grid has a single abscissa");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (weighted) {
    fit.slope_stderr = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0.0;
    for (size_t i = 0; i < m; ++i) rss += std::pow(y[i] - fit.intercept - fit.slope * x[i], 2);
    fit.slope_stderr = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  for (const auto& p : points) {
    fit.a_grid.push_back(p.a);
    fit.p_values.push_back(p.p);
  }
  return fit;
}

TailCheck tail_check_phi_T(const DirectionalDistribution& dist, std::int64_t n, std::span<const double> t_grid,
                           RandomStream& rng) {
  if (t_grid.empty()) throw Error(Errc::InvalidArgument, "empty t grid");
  const int d = dist.dim();
  std::vector<double> phis;
  phis.reserve(static_cast<size_t>(n));
  DirectionTuple dirs;
  while (static_cast<std::int64_t>(phis.size()) < n) {
    dirs.clear();
    for (int j = 0; j <= d; ++j) dirs.push_back(sample_direction(dist, rng));
    if (!half_sphere_test(dirs)) continue;
    try {
      phis.push_back(phi_content(simplex_T(dirs), dist));
    } catch (const Error& e) {
      if (e.code() != Errc::IllConditioned) throw;
    }
  }
  std::sort(phis.begin(), phis.end());
  TailCheck out;
  out.n_samples = n;
  out.min_phi = phis.front();
  const double nn = static_cast<double>(n);
  std::vector<double> lx, ly;
  for (double t : t_grid) {
    const auto above = phis.end() - std::upper_bound(phis.begin(), phis.end(), t);
    const double s = static_cast<double>(above) / nn;
    out.rows.push_back({t, s, false});
    if (s > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(s));
    }
  }
  const double t0 = out.rows.front().t;
  const double c0 = t0 * out.rows.front().survival;
  for (auto& row : out.rows) row.bound_ok = row.t * row.survival <= c0 * std::pow(row.t / t0, 0.1) * (1.0 + 1e-12);
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxx = 0.0;
    double sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    out.exponent = sxy / sxx;
  } else {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

bool has_parallel_facets(const ConvexCell& cell, const UnitVector& u, double a, double angular_tol) {
  const auto& hs = cell.halfspaces();
  // 1 - cos θ <= θ²/2, plus a few ulps for the rounding of the dot product.
  const double slack = 0.5 * angular_tol * angular_tol + 4.0 * std::numeric_limits<double>::epsilon();
  for (size_t i = 0; i < hs.size(); ++i) {
    if (1.0 - hs[i].normal.dot(u.coords()) > slack) continue;
    for (size_t j = 0; j < hs.size(); ++j) {
      if (1.0 + hs[j].normal.dot(u.coords()) > slack) continue;
      if (hs[i].bound + hs[j].bound < a) return true;
    }
  }
  return false;
}

ConditionalEstimate parallel_facet_fraction(std::span<const TypicalCellSample> samples, const UnitVector& u, double a) {
  std::int64_t num = 0;
  std::int64_t den = 0;
  for (const auto& s : samples) {
    if (!(s.values.inradius < a)) continue;
    ++den;
    if (has_parallel_facets(s.cell, u, a)) ++num;
  }
  return make_estimate(num, den, a, "Inradius", 0);
}

}  // namespace hypercell
