#include "pam/tent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pam/errors.hpp"

namespace pam {
namespace {

constexpr double kPi = std::numbers::pi;

// \int_p^q e^{-s y^2} dy for a segment not straddling 0.
double gauss_segment(double p, double q, double s) {
  if (s == 0.0) return q - p;
  if (q <= 0.0) return gauss_segment(-q, -p, s);
  const double rs = std::sqrt(s);
  const double half = 0.5 * std::sqrt(kPi / s);
  if (rs * p > 1.0) return half * (std::erfc(rs * p) - std::erfc(rs * q));
  return half * (std::erf(rs * q) - std::erf(rs * p));
}

// \int_p^q y e^{-s y^2} dy.
double gauss_segment_linear(double p, double q, double s) {
  if (s == 0.0) return 0.5 * (q * q - p * p);
  return (std::expm1(-s * p * p) - std::expm1(-s * q * q)) / (2.0 * s);
}

}  // namespace

TauParams tau_params(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("tau_params requires t1, t2 > 0");
  const double sum = t1 + t2;
  return {2.0 * t1 * t2 / sum, 2.0 * t2 / sum, 2.0 * t1 / sum};
}

TentTransform::TentTransform(double m, double n, int dimension)
    : m_(m), n_(n), dimension_(dimension) {
  if (!(m > 0.0) || !(n > 0.0)) throw DomainError("tent widths must be positive");
  if (dimension < 1) throw DomainError("tent dimension must be positive");
}

TentTransform TentTransform::from_tau(const TauParams& tau, int dimension) {
  return {std::min(tau.tau1, tau.tau2), std::max(tau.tau1, tau.tau2), dimension};
}

double TentTransform::spatial_1d(double z) const {
  const double lo = -n_;
  const double hi = m_;
  const double a = std::min(0.0, m_ - n_);
  const double b = std::max(0.0, m_ - n_);
  const double height = 1.0 / std::max(m_, n_);
  if (z <= lo || z >= hi) return 0.0;
  if (z < a) return height * (z - lo) / (a - lo);
  if (z <= b) return height;
  return height * (hi - z) / (hi - b);
}

double TentTransform::spatial(std::span<const double> z) const {
  double v = 1.0;
  for (double zj : z) v *= spatial_1d(zj);
  return v;
}

std::complex<double> box_factor(double y) {
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return {1.0 - y2 / 6.0 + y2 * y2 / 120.0, 0.5 * y - y * y2 / 24.0};
  }
  const double h = std::sin(0.5 * y);
  return {std::sin(y) / y, 2.0 * h * h / y};
}

std::complex<double> TentTransform::psi_1d(double x) const {
  return box_factor(m_ * x) * std::conj(box_factor(n_ * x));
}

std::complex<double> TentTransform::psi(std::span<const double> z) const {
  std::complex<double> v = 1.0;
  for (double zj : z) v *= psi_1d(zj);
  return v;
}

double TentTransform::decay_bound_1d(double x) const {
  const double ax = std::abs(x);
  if (ax == 0.0) return 1.0;
  return std::min(1.0, 2.0 / (m_ * ax)) * std::min(1.0, 2.0 / (n_ * ax));
}

double TentTransform::gaussian_moment_1d(double s) const {
  const double lo = -n_;
  const double hi = m_;
  const double a = std::min(0.0, m_ - n_);
  const double b = std::max(0.0, m_ - n_);
  const double height = 1.0 / std::max(m_, n_);
  double total = 0.0;
  // Rising edge: height (y - lo)/(a - lo).
  if (a > lo) {
    const double slope = height / (a - lo);
    total += slope * (gauss_segment_linear(lo, a, s) - lo * gauss_segment(lo, a, s));
  }
  if (b > a) total += height * gauss_segment(a, b, s);
  // Falling edge: height (hi - y)/(hi - b).
  if (hi > b) {
    const double slope = height / (hi - b);
    total += slope * (hi * gauss_segment(b, hi, s) - gauss_segment_linear(b, hi, s));
  }
  return total;
}

double TentTransform::damped_psi_1d(double t) const {
  if (!(t > 0.0)) throw DomainError("damped_psi_1d requires t > 0");
  return std::sqrt(kPi / t) * gaussian_moment_1d(0.25 / t);
}

namespace {

// \int_{-inf}^{inf} e^{rate_lo u} ... with analytic tails: the integrand
// behaves like c_lo e^{r_lo u} below `lo` and c_hi e^{-r_hi u} above `hi`.
quad::Result log_line_integral(const quad::Integrand& f, double lo, double hi, double c_lo,
                               double r_lo, double c_hi, double r_hi, const quad::Options& opt) {
  quad::Result total;
  constexpr int kPieces = 8;
  const double width = (hi - lo) / kPieces;
  for (int k = 0; k < kPieces; ++k) {
    const quad::Result piece = quad::integrate(f, lo + k * width, lo + (k + 1) * width, opt);
    total.value += piece.value;
    total.error += piece.error;
    if (!piece.converged()) total.status = piece.status;
  }
  total.value += c_lo * std::exp(r_lo * lo) / r_lo;
  total.value += c_hi * std::exp(-r_hi * hi) / r_hi;
  if (total.status == quad::Status::NotConverged &&
      total.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value))) {
    total.status = quad::Status::Converged;
  }
  return total;
}

}  // namespace

quad::Result psi_power_integral(double m, double n, int dimension, double gamma,
                                const quad::Options& opt) {
  const double d = dimension;
  if (!(gamma > 0.0) || !(gamma < std::min(d, 2.0))) {
    throw DomainError("psi_power_integral requires 0 < gamma < min(d, 2)");
  }
  const TentTransform tent(m, n, 1);
  const double a = 0.5 * (d - gamma);
  // |z|^{-2a} = Gamma(a)^{-1} \int_0^inf t^{a-1} e^{-t|z|^2} dt; the z-integral
  // then factors into damped_psi_1d(t)^d. With t = e^u the integrand decays
  // like e^{a u} (u -> -inf, psi integrates to 2 pi / max(m, n)) and like
  // pi^{d/2} e^{-gamma u / 2} (u -> +inf).
  auto f = [&](double u) {
    const double t = std::exp(u);
    return std::exp(a * u) * std::pow(tent.damped_psi_1d(t), d);
  };
  const double h0 = 2.0 * kPi / std::max(m, n);
  quad::Result r = log_line_integral(f, -70.0, 35.0, std::pow(h0, d), a,
                                     std::pow(kPi, 0.5 * d), 0.5 * gamma, opt);
  const double g = std::tgamma(a);
  r.value /= g;
  r.error /= g;
  return r;
}

quad::Result tent_power_integral(double m, double n, int dimension, double beta,
                                 const quad::Options& opt) {
  const double d = dimension;
  if (!(beta > 0.0) || !(beta < d)) throw DomainError("tent_power_integral requires 0 < beta < d");
  const TentTransform tent(m, n, 1);
  if (dimension == 1) {
    // Piecewise linear tent against |z|^{-beta}: exact antiderivatives.
    auto moment = [beta](double c0, double c1, double p, double q) {
      // \int_p^q (c0 + c1 z) z^{-beta} dz, 0 <= p < q
      auto prim = [&](double z) {
        if (z == 0.0) return 0.0;
        return c0 * std::pow(z, 1.0 - beta) / (1.0 - beta) +
               c1 * std::pow(z, 2.0 - beta) / (2.0 - beta);
      };
      return prim(q) - prim(p);
    };
    const double height = 1.0 / std::max(m, n);
    const double rise = std::min(m, n);
    // Positive side: flat on [0, max(0, m - n)], then falls to 0 at m.
    const double b = std::max(0.0, m - n);
    double total = moment(height, 0.0, 0.0, b) + moment(height * m / rise, -height / rise, b, m);
    // Negative side mirrored: flat on [0, max(0, n - m)], falls to 0 at n.
    const double a = std::max(0.0, n - m);
    total += moment(height, 0.0, 0.0, a) + moment(height * n / rise, -height / rise, a, n);
    return {total, 0.0, quad::Status::Converged};
  }
  // |z|^{-beta} = Gamma(beta/2)^{-1} \int_0^inf s^{beta/2-1} e^{-s|z|^2} ds.
  const double a = 0.5 * beta;
  auto f = [&](double u) {
    const double s = std::exp(u);
    return std::exp(a * u) * std::pow(tent.gaussian_moment_1d(s), d);
  };
  const double h0 = 1.0 / std::max(m, n);
  quad::Result r = log_line_integral(f, -35.0, 70.0, 1.0, a,
                                     std::pow(h0 * h0 * kPi, 0.5 * d), 0.5 * (d - beta), opt);
  const double g = std::tgamma(a);
  r.value /= g;
  r.error /= g;
  return r;
}

}  // namespace pam
