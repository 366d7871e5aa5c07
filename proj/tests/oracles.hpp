#pragma once

// Independent re-derivations used by the unit and acceptance tests. Nothing
// here calls into the library.

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// (I_m * ~I_n)(x) = |[0, n] cap [-x, m - x]| / (m n).
inline double tent(double m, double n, double x) {
  return std::max(0.0, std::min(n, m - x) - std::max(0.0, -x)) / (m * n);
}

inline std::vector<double> tent_breakpoints(double m, double n) {
  std::vector<double> b = {-n, 0.0, m - n, m};
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// \int f over the tent's support, split at its kinks.
template <class F>
double over_tent(double m, double n, F&& f) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto b = tent_breakpoints(m, n);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) sum += ts.integrate(f, b[i], b[i + 1], 1e-11);
  return sum;
}

// \int_{R^d} tent(x) |x|^{-gamma} dx by nested Cartesian quadrature, d in {1, 2, 3}.
inline double tent_power(double m, double n, int d, double gamma) {
  auto T = [&](double x) { return tent(m, n, x); };
  // Tanh-sinh nodes crowd the endpoints; |x|^2 can underflow there.
  auto P = [&](double r2) { return r2 > 0.0 ? std::pow(r2, -0.5 * gamma) : 0.0; };
  if (d == 1) return over_tent(m, n, [&](double x) { return T(x) * P(x * x); });
  if (d == 2) {
    return over_tent(m, n, [&](double x) {
      if (T(x) == 0.0) return 0.0;
      return T(x) * over_tent(m, n, [&](double y) { return T(y) * P(x * x + y * y); });
    });
  }
  return over_tent(m, n, [&](double x) {
    if (T(x) == 0.0) return 0.0;
    return T(x) * over_tent(m, n, [&](double y) {
      if (T(y) == 0.0) return 0.0;
      return T(y) * over_tent(m, n, [&](double z) { return T(z) * P(x * x + y * y + z * z); });
    });
  });
}

// kappa_{beta,d} = 2^{d-beta} pi^{d/2} Gamma((d-beta)/2) / Gamma(beta/2).
inline double riesz_kappa(double beta, int d) {
  return std::pow(2.0, d - beta) * std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(0.5 * (d - beta)) /
         std::tgamma(0.5 * beta);
}

// 2 \int_0^1 (1 - z) z^{-1/2} dz.
inline double riesz_half_tent_integral() {
  boost::math::quadrature::tanh_sinh<double> ts;
  return 2.0 * ts.integrate([](double z) { return (1.0 - z) / std::sqrt(z); }, 0.0, 1.0);
}

// E|sigma Z + m|^{-beta} for a standard normal Z, 0 < beta < 1.
inline double gaussian_negative_moment(double sigma, double m, double beta) {
  const double a = m * m / (2.0 * sigma * sigma);
  return std::pow(2.0 * sigma * sigma, -0.5 * beta) * std::tgamma(0.5 * (1.0 - beta)) /
         std::sqrt(std::numbers::pi) * boost::math::hypergeometric_1F1(0.5 * beta, 0.5, -a);
}

// Var S_{N,t} without the two-point correction chi, for f = |x|^{-beta} in
// d = 1: \int dz tent(z) \int_0^t ds E|sqrt(2s(t-s)/t) Z + N s z / t|^{-beta}.
// Exact for the variance up to the chi term, which vanishes as the noise
// weakens (t -> 0).
inline double riesz_first_chaos_variance(double n, double t, double beta) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto inner = [&](double z) {
    return ts.integrate(
        [&](double s) { return gaussian_negative_moment(std::sqrt(2.0 * s * (t - s) / t), n * s * z / t, beta); },
        0.0, t, 1e-9);
  };
  return ts.integrate([&](double z) { return 2.0 * (1.0 - z) * inner(z); }, 0.0, 1.0, 1e-9);
}

}  // namespace oracle
