#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hypercell::stats {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low;
  double high;
};

/// Wilson score interval for k successes out of n (n > 0).
Interval wilson(std::int64_t k, std::int64_t n, double z = kZ95);

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `values`.
double ks_statistic(std::span<const double> values, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_q(double lambda);

struct TwoSampleKS {
  double statistic;
  double p_value;
};

TwoSampleKS ks_two_sample(std::span<const double> x, std::span<const double> y);

struct ChiSquared {
  double statistic;
  int dof;
  double p_value;
};

/// Homogeneity test of two binned count vectors (bins empty in both are
/// skipped).
ChiSquared chi_squared_two_sample(std::span<const std::int64_t> x, std::span<const std::int64_t> y);

double pearson(std::span<const double> x, std::span<const double> y);

/// Regularized lower incomplete gamma P(shape, rate·x): the Γ(shape, rate) CDF.
double gamma_cdf(double x, double shape, double rate);

/// Holm step-down at family level alpha; true marks a rejected hypothesis.
std::vector<bool> holm(std::span<const double> p_values, double alpha);

struct MeanEstimate {
  double mean;
  double se;
};

MeanEstimate mean_and_stderr(std::span<const double> x);

}  // namespace hypercell::stats
