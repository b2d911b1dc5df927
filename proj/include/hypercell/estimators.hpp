#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hypercell/directions.hpp"
#include "hypercell/functionals.hpp"
#include "hypercell/random.hpp"
#include "hypercell/samplers.hpp"

namespace hypercell {

struct ConditionalEstimate {
  std::int64_t numerator_count = 0;
  std::int64_t denominator_count = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double a = 0.0;
  std::string sigma_name;
  int n = 0;
};

/// Builds an estimate with its Wilson 95% interval.
ConditionalEstimate make_estimate(std::int64_t numerator, std::int64_t denominator, double a, std::string sigma_name,
                                  int n);

enum class FacetEvent { Equal, Greater };

/// P̂(f = n | Σ^{1/k} < a) (or f > n). Throws Error(EmptyCondition) when no
/// sample satisfies the condition and Error(InvalidArgument) when a sample
/// was drawn under a truncation that cuts into the conditioning event.
ConditionalEstimate estimate_conditional_facet_prob(std::span<const TypicalCellSample> samples, SizeFunctional sigma,
                                                    double a, int n, FacetEvent event = FacetEvent::Equal);

using ShapePredicate = std::function<bool(const ShapeSummary&)>;

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  std::int64_t n_samples = 0;
};

/// μ_{n,𝔰}(S) = P(f = n, 𝔰 ∈ S).
McEstimate estimate_mu_n_s(std::span<const TypicalCellSample> samples, int n, const ShapePredicate& s);

/// μ_{n,𝔰,Σ}(S) = E[1(f = n, 𝔰 ∈ S)·Σ(𝔰(Z))^{-(n-d)/k}] / (n-d)!.
McEstimate estimate_mu_n_s_sigma(std::span<const TypicalCellSample> samples, int n, const ShapePredicate& s,
                                 SizeFunctional sigma);

/// One proposal of the limit-shape oracle: weight 1(𝖯)·Δ_d/Σ(T)^{1/k}
/// and the shape summary of T(u).
struct OracleDraw {
  double weight;
  ShapeSummary summary;
};

/// N plain φ^{d+1} proposals (tuples outside 𝖯 carry weight 0).
std::vector<OracleDraw> limit_shape_draws(const DirectionalDistribution& dist, SizeFunctional sigma, std::int64_t n,
                                          RandomStream& rng);

/// ∫_𝖯 g(𝔰(T(u)))·Δ_d(u)/Σ(T(u))^{1/k} dφ^{d+1}(u).
McEstimate limit_shape_oracle(const DirectionalDistribution& dist, SizeFunctional sigma,
                              const std::function<double(const ShapeSummary&)>& g, std::int64_t n, RandomStream& rng);

/// Σ w·g / Σ w with a delta-method standard error.
McEstimate normalized_oracle(std::span<const OracleDraw> draws, const std::function<double(const ShapeSummary&)>& g);

/// Weighted median of `field` under the oracle weights.
double oracle_weighted_median(std::span<const OracleDraw> draws, const std::function<double(const ShapeSummary&)>& field);

struct KSResult {
  double statistic = 0.0;
  std::int64_t n_samples = 0;
  double threshold_5pct = 0.0;
  bool pass = false;
};

/// KS distance of `values` to Γ(shape, rate γ); passes below
/// tolerance_factor·1.36/√n.
KSResult ks_vs_gamma(std::span<const double> values, int shape, double gamma, double tolerance_factor = 1.5);

struct RatePoint {
  double a;
  double p;
  double se;
};

struct RateFit {
  std::vector<double> a_grid;
  std::vector<double> p_values;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Least squares on (log a, log p), weighted by (p/se)² when every point has
/// se > 0. Points with p <= 0 are unusable; fewer than 4 usable points throw
/// Error(DegenerateGrid).
RateFit fit_decay_rate(std::span<const RatePoint> points);

struct TailRow {
  double t;
  double survival;
  bool bound_ok;
};

struct TailCheck {
  std::vector<TailRow> rows;
  double exponent = 0.0;
  double min_phi = 0.0;
  std::int64_t n_samples = 0;
};

/// Survival of Φ(T(u)) for u ~ φ^{d+1} restricted to 𝖯 (unweighted). The
/// exponent is the log-log slope over the grid; bound_ok marks
/// t·S(t) <= t_0·S(t_0)·(t/t_0)^{0.1}.
TailCheck tail_check_phi_T(const DirectionalDistribution& dist, std::int64_t n, std::span<const double> t_grid,
                           RandomStream& rng);

/// Whether `cell` has two facets with normals ±u whose slab is thinner than a.
bool has_parallel_facets(const ConvexCell& cell, const UnitVector& u, double a, double angular_tol = 1e-9);

/// P̂(Z ∈ A_{u,a} | r(Z) < a).
ConditionalEstimate parallel_facet_fraction(std::span<const TypicalCellSample> samples, const UnitVector& u, double a);

}  // namespace hypercell
