#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pam::stats {

/// Pairwise (cascade) summation; the result depends only on element order.
double pairwise_sum(std::span<const double> v);
double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);

struct NormalityStats {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks = 0.0;  // sup |F_n - Phi| against a normal with the sample mean/variance
  std::size_t n = 0;
};

/// Requires at least `min_samples` values (InsufficientDataError otherwise).
NormalityStats normality_stats(std::span<const double> samples, std::size_t min_samples = 500);
double ks_distance_normal(std::span<const double> samples, double mu, double sigma);

/// Unbiased covariance of k variables over M observations with leave-one-out
/// jackknife standard errors. `data` is row-major M x k.
struct CovarianceEstimate {
  std::size_t k = 0;
  std::size_t samples = 0;
  std::vector<double> cov;  // k x k, symmetric
  std::vector<double> se;   // k x k, jackknife standard errors
  bool degenerate = false;  // some variable has zero variance

  double operator()(std::size_t i, std::size_t j) const { return cov[i * k + j]; }
  double error(std::size_t i, std::size_t j) const { return se[i * k + j]; }
};

CovarianceEstimate covariance_jackknife(std::span<const double> data, std::size_t k);

/// Jackknife standard error of the sample mean of each of k variables.
std::vector<double> mean_standard_errors(std::span<const double> data, std::size_t k);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;  // two-sided Student-t interval for the slope
  double ci_hi = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = a + b x.
Regression linear_regression(std::span<const double> x, std::span<const double> y,
                             double confidence = 0.95);

}  // namespace pam::stats
