#include "pam/statistics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "pam/errors.hpp"

namespace pam::stats {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InsufficientDataError("mean of an empty sample");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw InsufficientDataError("variance needs at least two samples");
  const double mu = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mu) * (v[i] - mu);
  return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

double ks_distance_normal(std::span<const double> samples, double mu, double sigma) {
  if (samples.empty()) throw InsufficientDataError("KS distance of an empty sample");
  if (!(sigma > 0.0)) return 1.0;
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> phi(mu, sigma);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = boost::math::cdf(phi, x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return std::min(d, 1.0);
}

NormalityStats normality_stats(std::span<const double> samples, std::size_t min_samples) {
  if (samples.size() < std::max<std::size_t>(min_samples, 4)) {
    throw InsufficientDataError("normality statistics need at least " +
                                std::to_string(std::max<std::size_t>(min_samples, 4)) +
                                " samples, got " + std::to_string(samples.size()));
  }
  const std::size_t n = samples.size();
  const double mu = mean(samples);
  std::vector<double> p2(n), p3(n), p4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = samples[i] - mu;
    p2[i] = c * c;
    p3[i] = p2[i] * c;
    p4[i] = p2[i] * p2[i];
  }
  const double dn = static_cast<double>(n);
  const double m2 = pairwise_sum(p2) / dn;
  const double m3 = pairwise_sum(p3) / dn;
  const double m4 = pairwise_sum(p4) / dn;
  NormalityStats s;
  s.n = n;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  s.ks = ks_distance_normal(samples, mu, std::sqrt(m2 * dn / (dn - 1.0)));
  return s;
}

CovarianceEstimate covariance_jackknife(std::span<const double> data, std::size_t k) {
  if (k == 0 || data.size() % k != 0) throw DomainError("data size is not a multiple of k");
  const std::size_t m = data.size() / k;
  if (m < 3) throw InsufficientDataError("covariance needs at least three samples");
  const double dm = static_cast<double>(m);

  // Centre each variable first.
  std::vector<double> centred(data.begin(), data.end());
  std::vector<double> column(m);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t r = 0; r < m; ++r) column[r] = data[r * k + a];
    const double mu = mean(column);
    for (std::size_t r = 0; r < m; ++r) centred[r * k + a] -= mu;
  }

  CovarianceEstimate est;
  est.k = k;
  est.samples = m;
  est.cov.assign(k * k, 0.0);
  est.se.assign(k * k, 0.0);
  std::vector<double> prod(m);
  std::vector<double> loo(m);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      for (std::size_t r = 0; r < m; ++r) prod[r] = centred[r * k + a] * centred[r * k + b];
      const double sxy = pairwise_sum(prod);
      const double c = sxy / (dm - 1.0);
      // With centred data the column sums vanish, so removing row r leaves
      // sums -x_r, -y_r and
      //   C_{-r} = (sxy - x_r y_r - x_r y_r / (m - 1)) / (m - 2).
      for (std::size_t r = 0; r < m; ++r) {
        const double xy = prod[r];
        loo[r] = (sxy - xy - xy / (dm - 1.0)) / (dm - 2.0);
      }
      const double loo_mean = mean(loo);
      for (std::size_t r = 0; r < m; ++r) prod[r] = (loo[r] - loo_mean) * (loo[r] - loo_mean);
      const double se = std::sqrt((dm - 1.0) / dm * pairwise_sum(prod));
      est.cov[a * k + b] = est.cov[b * k + a] = c;
      est.se[a * k + b] = est.se[b * k + a] = se;
    }
    if (!(est.cov[a * k + a] > 0.0)) est.degenerate = true;
  }
  return est;
}

std::vector<double> mean_standard_errors(std::span<const double> data, std::size_t k) {
  if (k == 0 || data.size() % k != 0) throw DomainError("data size is not a multiple of k");
  const std::size_t m = data.size() / k;
  // For the mean the jackknife reproduces the classical sqrt(s^2 / m).
  std::vector<double> out(k);
  std::vector<double> column(m);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t r = 0; r < m; ++r) column[r] = data[r * k + a];
    out[a] = std::sqrt(variance(column) / static_cast<double>(m));
  }
  return out;
}

Regression linear_regression(std::span<const double> x, std::span<const double> y,
                             double confidence) {
  if (x.size() != y.size()) throw DomainError("regression inputs differ in length");
  if (x.size() < 2) throw InsufficientDataError("regression needs at least two points");
  const std::size_t n = x.size();
  const double xm = mean(x);
  const double ym = mean(y);
  std::vector<double> sxx(n), sxy(n);
  for (std::size_t i = 0; i < n; ++i) {
    sxx[i] = (x[i] - xm) * (x[i] - xm);
    sxy[i] = (x[i] - xm) * (y[i] - ym);
  }
  const double vx = pairwise_sum(sxx);
  if (!(vx > 0.0)) throw DomainError("regression abscissae are all equal");
  Regression r;
  r.points = n;
  r.slope = pairwise_sum(sxy) / vx;
  r.intercept = ym - r.slope * xm;
  if (n > 2) {
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - r.intercept - r.slope * x[i];
      res[i] = e * e;
    }
    const double s2 = pairwise_sum(res) / static_cast<double>(n - 2);
    r.slope_se = std::sqrt(s2 / vx);
    const boost::math::students_t_distribution<double> t(static_cast<double>(n - 2));
    const double q = boost::math::quantile(t, 0.5 + 0.5 * confidence);
    r.ci_lo = r.slope - q * r.slope_se;
    r.ci_hi = r.slope + q * r.slope_se;
  } else {
    r.ci_lo = r.ci_hi = r.slope;
  }
  return r;
}

}  // namespace pam::stats
