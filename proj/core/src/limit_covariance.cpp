#include "pam/limit_covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pam/csv.hpp"
#include "pam/errors.hpp"
#include "pam/parallel.hpp"

namespace pam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_times(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("limit times must be positive");
}

quad::Result scaled(quad::Result r, double factor) {
  r.value *= factor;
  r.error *= std::abs(factor);
  return r;
}

}  // namespace

quad::Result g_limit(const CovarianceModel& model, double t1, double t2,
                     const quad::Options& opt) {
  check_times(t1, t2);
  if (classify_regime(model).regime != Regime::MultiDimFinite) {
    throw DomainError("g_limit requires the MultiDimFinite regime");
  }
  const int d = model.dimension();
  const TauParams tp = tau_params(t1, t2);
  const TentTransform tent = TentTransform::from_tau(tp, d);
  // The Fourier transform of the dilated tent is s^d psi(s z). Integrating
  // over s first along each ray z = rho w gives rho^{-1} times an
  // s-integral that depends only on w, so g splits into
  //   tau (2 pi)^{-d} [\int Re psi(z) |z|^{1-d} dz] [\int_0^inf rho^{d-2} f^(rho) drho].
  const quad::Result moment = spectral_radial_moment(model, d - 2.0, opt);
  const quad::Result angular = psi_power_integral(tent.m(), tent.n(), d, 1.0, opt);
  const double scale = tp.tau * std::pow(kTwoPi, -d);
  quad::Result out;
  out.value = scale * moment.value * angular.value;
  out.error = scale * (moment.error * angular.value + moment.value * angular.error);
  out.status = moment.converged() && angular.converged() ? quad::Status::Converged
                                                         : quad::Status::NotConverged;
  return out;
}

D1FiniteLimit d1_finite_limit(const CovarianceModel& model, double t1, double t2) {
  check_times(t1, t2);
  if (model.dimension() != 1) throw DomainError("d1_finite_limit requires d = 1");
  const double mass = total_mass(model);
  if (!std::isfinite(mass)) throw DomainError("d1_finite_limit requires f(R) < inf");
  const double limit = std::min(t1, t2) * mass;
  return {limit, limit, 2.0 * limit, model.rajchman()};
}

quad::Result riesz_limit(const CovarianceModel& model, double t1, double t2,
                         const quad::Options& opt) {
  check_times(t1, t2);
  if (model.kind() != KernelKind::Riesz) throw DomainError("riesz_limit requires a Riesz kernel");
  const int d = model.dimension();
  const double beta = model.beta();
  const TauParams tp = tau_params(t1, t2);
  const TentTransform tent = TentTransform::from_tau(tp, d);
  if (beta < 1.0) {
    const double pre = std::pow(std::min(t1, t2), 1.0 - beta) * std::pow(tp.tau, beta) / (1.0 - beta);
    return scaled(tent_power_integral(tent.m(), tent.n(), d, beta, opt), pre);
  }
  if (beta == 1.0) {
    const double pre = 2.0 * tp.tau * riesz_constant(1.0, d) * std::pow(kTwoPi, -d);
    return scaled(psi_power_integral(tent.m(), tent.n(), d, 1.0, opt), pre);
  }
  // \int_0^inf r^{beta-2} e^{-r} dr = Gamma(beta - 1).
  const double pre = std::pow(tp.tau, 2.0 - beta) * riesz_constant(beta, d) *
                     std::pow(kTwoPi, -d) * std::tgamma(beta - 1.0);
  return scaled(psi_power_integral(tent.m(), tent.n(), d, 2.0 - beta, opt), pre);
}

quad::Result limit_entry(const CovarianceModel& model, LimitFamily family, double t1, double t2,
                         const quad::Options& opt) {
  switch (family) {
    case LimitFamily::G: return g_limit(model, t1, t2, opt);
    case LimitFamily::D1Finite: return {d1_finite_limit(model, t1, t2).limit, 0.0};
    case LimitFamily::C1:
    case LimitFamily::C2:
    case LimitFamily::C3: return riesz_limit(model, t1, t2, opt);
  }
  throw DomainError("unknown limit family");
}

LimitCovariance limit_matrix(const CovarianceModel& model, const std::vector<double>& times,
                             LimitFamily family, const quad::Options& opt, unsigned threads) {
  if (times.empty()) throw DomainError("limit_matrix requires a non-empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw DomainError("time grid must be strictly increasing and positive");
    }
  }
  if (classify_regime(model).family != family) {
    throw UnsupportedRegimeError("limit family " + to_string(family) +
                                 " does not match the regime of " + model.describe());
  }
  const std::size_t n = times.size();
  LimitCovariance lc;
  lc.times = times;
  lc.family = family;
  lc.values.assign(n * n, 0.0);
  lc.errors.assign(n * n, 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<quad::Result> results(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    results[k] = limit_entry(model, family, times[pairs[k].first], times[pairs[k].second], opt);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const quad::Result& r = results[k];
    if (!r.converged()) {
      throw QuadratureError("limit entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") did not converge",
                            r.value, r.error);
    }
    lc.values[i * n + j] = lc.values[j * n + i] = r.value;
    lc.errors[i * n + j] = lc.errors[j * n + i] = r.error;
    lc.max_error = std::max(lc.max_error, r.error);
  }
  if (family == LimitFamily::D1Finite) {
    lc.lower = lc.values;
    lc.upper = lc.values;
    for (double& v : lc.upper) v *= 2.0;
  }
  return lc;
}

std::string limit_csv(const LimitCovariance& lc, const std::vector<double>& matrix,
                      const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) os << comment << '\n';
  os << 't';
  for (double t : lc.times) os << ',' << csv::format(t);
  os << '\n';
  const std::size_t n = lc.size();
  for (std::size_t i = 0; i < n; ++i) {
    os << csv::format(lc.times[i]);
    for (std::size_t j = 0; j < n; ++j) os << ',' << csv::format(matrix[i * n + j]);
    os << '\n';
  }
  return os.str();
}

void write_limit_csv(const LimitCovariance& lc, const std::filesystem::path& values_path,
                     const std::filesystem::path& errors_path, const std::string& comment) {
  csv::write_file(values_path, limit_csv(lc, lc.values, comment));
  csv::write_file(errors_path, limit_csv(lc, lc.errors, comment));
}

}  // namespace pam
