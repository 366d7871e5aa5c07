#include "pam/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace pam::quad {
namespace {

Status classify(double value, double error, const Options& opt) {
  if (!std::isfinite(value)) return Status::Diverged;
  const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
  return error <= target ? Status::Converged : Status::NotConverged;
}

Status combine(Status a, Status b) {
  if (a == Status::Diverged || b == Status::Diverged) return Status::Diverged;
  if (a == Status::NotConverged || b == Status::NotConverged) return Status::NotConverged;
  return Status::Converged;
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Options& opt) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (a == b) return {};
  double error = 0.0;
  const double value = GK::integrate(f, a, b, opt.max_depth, opt.rel_tol, &error);
  return {value, error, classify(value, error, opt)};
}

Result integrate_singular(const Integrand& f, double a, double b, const Options& opt) {
  if (a == b) return {};
  // tanh_sinh caches abscissae per instance; construction is cheap at the
  // default level count and keeps the function reentrant.
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, a, b, opt.rel_tol, &error, &l1);
  return {value, error, classify(value, error, opt)};
}

Result integrate_split(const Integrand& f, double a, double b, double period,
                       const Options& opt) {
  Result total;
  if (!(period > 0.0)) return integrate(f, a, b, opt);
  const auto pieces = static_cast<long>(std::ceil((b - a) / period));
  Options local = opt;
  local.abs_tol = opt.abs_tol / std::max<long>(pieces, 1);
  double lo = a;
  for (long k = 0; k < pieces; ++k) {
    const double hi = std::min(b, a + static_cast<double>(k + 1) * period);
    const Result piece = integrate(f, lo, hi, local);
    total.value += piece.value;
    total.error += piece.error;
    if (!piece.converged()) total.status = combine(total.status, piece.status);
    lo = hi;
  }
  if (total.status == Status::NotConverged &&
      total.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value))) {
    total.status = Status::Converged;
  }
  return total;
}

Result integrate_to_infinity(const Integrand& f, double a, double scale, const Options& opt,
                             bool singular_start) {
  Result total = singular_start ? integrate_singular(f, a, a + scale, opt)
                                : integrate(f, a, a + scale, opt);
  Status status = total.status;
  double lo = a + scale;
  double width = scale;
  double previous_increment = std::abs(total.value);
  int growing_passes = 0;

  for (unsigned pass = 0; pass < opt.max_doublings; ++pass) {
    const Result inc = integrate(f, lo, lo + width, opt);
    status = combine(status, inc.status);
    const double before = total.value;
    total.value += inc.value;
    total.error += inc.error;
    if (!std::isfinite(total.value)) {
      return {kInfinity, kInfinity, Status::Diverged};
    }

    const double mag = std::abs(inc.value);
    const bool grew = mag > 0.01 * std::abs(before);
    const bool not_shrinking = mag >= 0.9 * previous_increment;
    growing_passes = (grew && not_shrinking) ? growing_passes + 1 : 0;
    if (growing_passes >= 3) {
      return {kInfinity, kInfinity, Status::Diverged};
    }

    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value));
    // Geometric decay of the increments bounds the remaining tail by the
    // last increment times ratio / (1 - ratio).
    if (mag <= target) {
      const double ratio =
          previous_increment > 0.0 ? std::min(mag / previous_increment, 0.95) : 0.0;
      const double tail = mag * ratio / (1.0 - ratio);
      if (tail <= target) {
        total.error += tail;
        total.status = status;
        return total;
      }
    }
    previous_increment = mag;
    lo += width;
    width *= 2.0;
  }
  total.status = Status::NotConverged;
  return total;
}

}  // namespace pam::quad
