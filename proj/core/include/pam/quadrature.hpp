#pragma once

#include <functional>
#include <limits>

namespace pam::quad {

enum class Status { Converged, NotConverged, Diverged };

struct Result {
  double value = 0.0;
  double error = 0.0;
  Status status = Status::Converged;

  bool converged() const { return status == Status::Converged; }
  bool diverged() const { return status == Status::Diverged; }
};

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  unsigned max_depth = 18;
  // Doubling passes allowed when integrating to infinity.
  unsigned max_doublings = 64;
};

using Integrand = std::function<double(double)>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Adaptive Gauss-Kronrod (7/15) on a finite interval.
Result integrate(const Integrand& f, double a, double b, const Options& opt = {});

/// Double-exponential rule; tolerates integrable endpoint singularities.
Result integrate_singular(const Integrand& f, double a, double b, const Options& opt = {});

/// Finite interval split into pieces of length `period` before adaptive
/// integration. Used for integrands of the form (1 - cos(w x)) / x^2.
Result integrate_split(const Integrand& f, double a, double b, double period,
                       const Options& opt = {});

/// Integral over [a, inf) by successive domain doubling starting from
/// [a, a + scale]. Declared divergent when three consecutive passes each
/// add more than 1% to the partial integral without their increments
/// shrinking; value is then +inf.
Result integrate_to_infinity(const Integrand& f, double a, double scale,
                             const Options& opt = {}, bool singular_start = false);

}  // namespace pam::quad
