#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hypercell/error.hpp"
#include "hypercell/estimators.hpp"
#include "hypercell/stats.hpp"
#include "oracles.hpp"

using namespace hypercell;
using oracle::v2;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<TypicalCellSample> inball(const ProcessParams& p, int n, std::uint64_t seed,
                                      std::optional<Conditioning> cond = std::nullopt) {
  RandomStream base(seed, 0);
  std::vector<TypicalCellSample> out;
  for (std::uint64_t slot = 0; static_cast<int>(out.size()) < n; ++slot) {
    RandomStream rng = base.substream(slot);
    try {
      out.push_back(cond ? sample_conditioned_inball(p, *cond, rng) : sample_typical_cell_inball(p, std::nullopt, rng));
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::DegenerateSample);
    }
  }
  return out;
}

TypicalCellSample synthetic(int fcount, double r, double big_r) {
  TypicalCellSample s;
  s.d = 2;
  s.fcount = fcount;
  s.inball_r = r;
  s.values.inradius = r;
  s.values.circumradius = big_r;
  s.values.phi = r;
  s.summary.fcount = fcount;
  return s;
}

/// Ordinary least squares slope of log p on log a.
double ols_slope(const std::vector<double>& a, const std::vector<double>& p) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    mx += std::log(a[i]);
    my += std::log(p[i]);
  }
  mx /= a.size();
  my /= a.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sxy += (std::log(a[i]) - mx) * (std::log(p[i]) - my);
    sxx += (std::log(a[i]) - mx) * (std::log(a[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("estimate_conditional_facet_prob: axis lines give parallelograms at every a") {
  const ProcessParams p(1.0, DirectionalDistribution::discrete(2, {{v2(1, 0), 0.5}, {v2(0, 1), 0.5}}));
  RandomStream rng(60, 0);
  std::vector<TypicalCellSample> cells;
  for (int w = 0; w < 30; ++w)
    for (auto& c : sample_window_tessellation(p, 30.0, rng)) cells.push_back(std::move(c));
  for (auto sigma : {SizeFunctional::Circumradius, SizeFunctional::Inradius, SizeFunctional::Volume}) {
    for (double a : {2.0, 1.0, 0.5, 0.25}) {
      const auto est = estimate_conditional_facet_prob(cells, sigma, a, 4);
      CHECK(est.denominator_count > 0);
      CHECK(est.p_hat == 1.0);
    }
  }
}

TEST_CASE("estimate_conditional_facet_prob: all counts equal n") {
  std::vector<TypicalCellSample> s;
  for (int i = 0; i < 50; ++i) s.push_back(synthetic(3, 0.01 * (i + 1), 0.02 * (i + 1)));
  const auto est = estimate_conditional_facet_prob(s, SizeFunctional::Inradius, 0.3, 3);
  CHECK(est.p_hat == 1.0);
  CHECK(est.ci_high == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(est.denominator_count == 29);
  CHECK(est.ci_low < 1.0);
  CHECK(estimate_conditional_facet_prob(s, SizeFunctional::Inradius, 0.3, 3, FacetEvent::Greater).p_hat == 0.0);
}

TEST_CASE("estimate_conditional_facet_prob: empty condition and incompatible truncation") {
  std::vector<TypicalCellSample> s = {synthetic(3, 0.5, 1.0)};
  try {
    estimate_conditional_facet_prob(s, SizeFunctional::Inradius, 0.1, 3);
    FAIL("expected EmptyCondition");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyCondition);
  }
  s[0].conditioned_a = 0.1;
  s[0].inball_r = 0.05;
  s[0].values.inradius = 0.05;
  CHECK_THROWS_AS(estimate_conditional_facet_prob(s, SizeFunctional::Inradius, 0.2, 3), Error);
  CHECK_NOTHROW(estimate_conditional_facet_prob(s, SizeFunctional::Inradius, 0.1, 3));
}

TEST_CASE("estimate_conditional_facet_prob: small circumradius gives triangles, replicated across seeds") {
  const ProcessParams p(1.0, DirectionalDistribution::isotropic(2));
  const Conditioning cond{SizeFunctional::Circumradius, 0.05};
  const auto a = estimate_conditional_facet_prob(inball(p, 5000, 61, cond), cond.sigma, cond.a, 3);
  const auto b = estimate_conditional_facet_prob(inball(p, 20000, 62, cond), cond.sigma, cond.a, 3);
  CHECK(a.p_hat > 0.9);
  CHECK(b.p_hat > 0.9);
  CHECK(a.ci_low <= b.ci_high);
  CHECK(b.ci_low <= a.ci_high);
}

TEST_CASE("estimate_mu_n_s: total mass and the Φ-weighted identity") {
  const ProcessParams p(1.0, DirectionalDistribution::isotropic(2));
  const auto s = inball(p, 20000, 63);
  const ShapePredicate all = [](const ShapeSummary&) { return true; };
  const ShapePredicate round = [](const ShapeSummary& x) { return x.iso_ratio > 0.5; };
  double total = 0, var = 0;
  int max_f = 0;
  for (const auto& x : s) max_f = std::max(max_f, x.fcount);
  for (int n = 3; n <= max_f; ++n) {
    try {
      const auto m = estimate_mu_n_s(s, n, all);
      total += m.value;
      var += m.se * m.se;
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyCondition);
    }
  }
  CHECK(std::abs(total - 1.0) <= 3 * std::sqrt(var) + 1e-12);
  for (int n = 3; n <= 6; ++n) {
    const auto plain = estimate_mu_n_s(s, n, round);
    const auto weighted = estimate_mu_n_s_sigma(s, n, round, SizeFunctional::PhiContent);
    CHECK(std::tgamma(n - 2 + 1) * weighted.value == doctest::Approx(plain.value).epsilon(1e-9));
  }
}

TEST_CASE("estimate_mu_n_s_sigma: the first-order rate matches conditioned frequencies") {
  // P(f > 3 | R < a) / (γa) → μ_{4,Σ} / μ_{3,Σ} for Σ = R.
  const ProcessParams p(1.0, DirectionalDistribution::isotropic(2));
  const auto s = inball(p, 100000, 64);
  const ShapePredicate all = [](const ShapeSummary&) { return true; };
  const auto m3 = estimate_mu_n_s_sigma(s, 3, all, SizeFunctional::Circumradius);
  const auto m4 = estimate_mu_n_s_sigma(s, 4, all, SizeFunctional::Circumradius);
  const double ratio = m4.value / m3.value;
  const double ratio_se = ratio * std::hypot(m4.se / m4.value, m3.se / m3.value);
  const double a = 0.01;
  const Conditioning cond{SizeFunctional::Circumradius, a};
  const auto est = estimate_conditional_facet_prob(inball(p, 40000, 65, cond), cond.sigma, a, 3, FacetEvent::Greater);
  const double emp = est.p_hat / a;
  const double emp_se = std::sqrt(est.p_hat * (1 - est.p_hat) / est.denominator_count) / a;
  INFO("limit ratio " << ratio << " ± " << ratio_se << ", empirical " << emp << " ± " << emp_se);
  CHECK(std::abs(emp - ratio) <= 3 * std::hypot(emp_se, ratio_se));
}

TEST_CASE("limit_shape_oracle: replication and median self-consistency") {
  const auto iso = DirectionalDistribution::isotropic(2);
  RandomStream r1(66, 0), r2(67, 0);
  const auto one = [](const ShapeSummary&) { return 1.0; };
  const auto a = limit_shape_oracle(iso, SizeFunctional::Circumradius, one, 100000, r1);
  const auto b = limit_shape_oracle(iso, SizeFunctional::Circumradius, one, 100000, r2);
  CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.se, b.se));

  RandomStream r3(68, 0);
  const auto draws = limit_shape_draws(iso, SizeFunctional::Volume, 100000, r3);
  const auto iso_field = [](const ShapeSummary& x) { return x.iso_ratio; };
  const double med = oracle_weighted_median(draws, iso_field);
  const auto frac = normalized_oracle(draws, [&](const ShapeSummary& x) { return x.iso_ratio > med ? 1.0 : 0.0; });
  CHECK(std::abs(frac.value - 0.5) < 1e-3);
}

TEST_CASE("limit_shape_oracle: conditioned inball shapes approach the oracle") {
  const auto iso = DirectionalDistribution::isotropic(2);
  const ProcessParams p(1.0, iso);
  RandomStream rng(69, 0);
  const auto draws = limit_shape_draws(iso, SizeFunctional::Circumradius, 200000, rng);
  const auto oracle_mean = normalized_oracle(draws, [](const ShapeSummary& x) { return x.iso_ratio; });
  const Conditioning cond{SizeFunctional::Circumradius, 0.02};
  std::vector<double> iso_ratio;
  for (const auto& x : inball(p, 5000, 70, cond)) iso_ratio.push_back(x.summary.iso_ratio);
  const auto emp = stats::mean_and_stderr(iso_ratio);
  CHECK(std::abs(emp.mean - oracle_mean.value) <= 3 * std::hypot(emp.se, oracle_mean.se));
}

TEST_CASE("ks_vs_gamma: null case and power") {
  std::mt19937_64 eng(71);
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = exp1(eng);
  CHECK(ks_vs_gamma(x, 1, 1.0).pass);
  const auto wrong = ks_vs_gamma(x, 2, 1.0);
  CHECK_FALSE(wrong.pass);
  CHECK(wrong.statistic > wrong.threshold_5pct);
}

TEST_CASE("fit_decay_rate: synthetic decay laws") {
  std::vector<RatePoint> lin, lg, sq;
  std::vector<double> grid, lg_p;
  for (int j = 0; j <= 5; ++j) {
    const double a = 0.2 * std::pow(2.0, -j);
    lin.push_back({a, 0.3 * a, 0.0});
    sq.push_back({a, 0.7 * a * a, 0.0});
  }
  for (int j = 0; j <= 10; ++j) {
    const double a = 0.1 * std::pow(10.0, -0.2 * j);
    grid.push_back(a);
    lg_p.push_back(0.3 * a * std::log(1 / a));
    lg.push_back({a, lg_p.back(), 0.0});
  }
  CHECK(fit_decay_rate(lin).slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_decay_rate(sq).slope == doctest::Approx(2.0).epsilon(1e-12));
  const double slope = fit_decay_rate(lg).slope;
  CHECK(slope == doctest::Approx(ols_slope(grid, lg_p)).epsilon(1e-12));
  // Frozen from the plain least-squares fit of the synthetic model.
  CHECK(slope == doctest::Approx(0.76803).epsilon(1e-4));
  CHECK(slope > 0.75);
  CHECK(slope < 1.0);
  const std::vector<RatePoint> three(lin.begin(), lin.begin() + 3);
  try {
    fit_decay_rate(three);
    FAIL("expected DegenerateGrid");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateGrid);
  }
}

TEST_CASE("tail_check_phi_T: isotropic tail") {
  RandomStream rng(72, 0);
  const std::vector<double> grid = {2, 4, 8, 16, 32};
  const auto t = tail_check_phi_T(DirectionalDistribution::isotropic(2), 200000, grid, rng);
  CHECK(t.exponent <= -0.9);
  CHECK(t.min_phi > 1.0);
  CHECK(t.rows[0].survival >= t.rows[1].survival);
  for (size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i - 1].survival >= t.rows[i].survival);
}

TEST_CASE("parallel facets: rectangle, triangle and the atomic mixture") {
  CHECK(has_parallel_facets(ConvexCell::box(v2(0, 0), v2(0.5, 3)), UnitVector(v2(1, 0)), 1.0));
  CHECK_FALSE(has_parallel_facets(ConvexCell::box(v2(0, 0), v2(0.5, 3)), UnitVector(v2(1, 0)), 0.4));
  const double s3 = std::sqrt(3.0);
  const auto tri = simplex_T(DirectionTuple{UnitVector(v2(1, 0)), UnitVector(v2(-0.5, s3 / 2)), UnitVector(v2(-0.5, -s3 / 2))});
  for (int k = 0; k < 12; ++k)
    CHECK_FALSE(has_parallel_facets(tri, UnitVector::from_angle(k * kPi / 6), 100.0));

  const ProcessParams p(1.0, DirectionalDistribution::mixture({{0.5, DirectionalDistribution::isotropic(2)},
                                                              {0.5, DirectionalDistribution::discrete(2, {{v2(1, 0), 1.0}})}}));
  std::vector<TypicalCellSample> cells;
  for (std::uint64_t w = 0; cells.size() < 400; ++w) {
    RandomStream rng(73, w);
    for (auto& c : sample_window_tessellation(p, 30.0, rng, 0.1, nullptr, 0.1)) cells.push_back(std::move(c));
  }
  const auto est = parallel_facet_fraction(cells, UnitVector(v2(1, 0)), 0.1);
  CHECK(est.ci_low > 0.0);
}

TEST_CASE("property: estimates ignore sample order") {
  const ProcessParams p(1.0, DirectionalDistribution::isotropic(2));
  auto s = inball(p, 3000, 74);
  const ShapePredicate round = [](const ShapeSummary& x) { return x.iso_ratio > 0.6; };
  const auto c0 = estimate_conditional_facet_prob(s, SizeFunctional::Volume, 0.5, 3);
  const auto m0 = estimate_mu_n_s_sigma(s, 4, round, SizeFunctional::Diameter);
  std::mt19937_64 eng(75);
  std::shuffle(s.begin(), s.end(), eng);
  const auto c1 = estimate_conditional_facet_prob(s, SizeFunctional::Volume, 0.5, 3);
  const auto m1 = estimate_mu_n_s_sigma(s, 4, round, SizeFunctional::Diameter);
  CHECK(c0.p_hat == c1.p_hat);
  CHECK(c0.ci_low == c1.ci_low);
  CHECK(m0.value == doctest::Approx(m1.value).epsilon(1e-13));
}

TEST_CASE("property: Wilson intervals cover at close to 95%") {
  std::mt19937_64 eng(76);
  for (double p : {0.02, 0.2, 0.5}) {
    for (int n : {200, 2000}) {
      std::binomial_distribution<std::int64_t> bin(n, p);
      int covered = 0;
      for (int rep = 0; rep < 1000; ++rep) {
        const auto ci = stats::wilson(bin(eng), n);
        covered += ci.low <= p && p <= ci.high;
      }
      INFO("p = " << p << ", n = " << n << ", coverage " << covered / 1000.0);
      CHECK(covered >= 930);
      CHECK(covered <= 970);
    }
  }
}

TEST_CASE("property: triangle frequency rises as the circumradius shrinks") {
  const ProcessParams p(1.0, DirectionalDistribution::isotropic(2));
  std::vector<ConditionalEstimate> seq;
  for (int j = 0; j <= 5; ++j) {
    const Conditioning cond{SizeFunctional::Circumradius, 0.2 * std::pow(2.0, -j)};
    seq.push_back(estimate_conditional_facet_prob(inball(p, 4000, 77 + j, cond), cond.sigma, cond.a, 3));
  }
  for (size_t i = 0; i < seq.size(); ++i)
    for (size_t k = i + 1; k < seq.size(); ++k) CHECK(seq[k].ci_high >= seq[i].ci_low);
  CHECK(seq.back().p_hat > seq.front().p_hat);
}
