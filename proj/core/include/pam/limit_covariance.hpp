#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pam/covariance_models.hpp"
#include "pam/quadrature.hpp"
#include "pam/tent.hpp"

namespace pam {

/// g_{t1,t2}: the limit of Cov(sqrt(N) S_{N,t1}, sqrt(N) S_{N,t2}) when
/// R(f) < inf and d >= 2.
quad::Result g_limit(const CovarianceModel& model, double t1, double t2,
                     const quad::Options& opt = {});

struct D1FiniteLimit {
  double limit;  // (t1 ^ t2) f(R), the value when f^ vanishes at infinity
  double lower;  // bracket for a general finite measure
  double upper;
  bool pinned;   // model is Rajchman, so `limit` is the limit
};

D1FiniteLimit d1_finite_limit(const CovarianceModel& model, double t1, double t2);

/// c^(1), c^(2) or c^(3) according to beta < 1, = 1, > 1.
quad::Result riesz_limit(const CovarianceModel& model, double t1, double t2,
                         const quad::Options& opt = {});

/// Dispatches on `family`; for D1Finite returns the pinned value (error 0).
quad::Result limit_entry(const CovarianceModel& model, LimitFamily family, double t1, double t2,
                         const quad::Options& opt = {});

struct LimitCovariance {
  std::vector<double> times;
  LimitFamily family = LimitFamily::G;
  std::vector<double> values;  // row-major, symmetric
  std::vector<double> errors;
  // Only for D1Finite: bracket matrices.
  std::vector<double> lower;
  std::vector<double> upper;
  double max_error = 0.0;

  std::size_t size() const { return times.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * times.size() + j]; }
  double error(std::size_t i, std::size_t j) const { return errors[i * times.size() + j]; }
};

/// Each unordered pair is evaluated once, concurrently across `threads`.
/// A non-converged entry raises QuadratureError naming its (i, j).
LimitCovariance limit_matrix(const CovarianceModel& model, const std::vector<double>& times,
                             LimitFamily family, const quad::Options& opt = {},
                             unsigned threads = 1);

/// Header "t,<t_1>,...", then one row per time. The sidecar holds errors.
std::string limit_csv(const LimitCovariance& lc, const std::vector<double>& matrix,
                      const std::string& comment);
void write_limit_csv(const LimitCovariance& lc, const std::filesystem::path& values_path,
                     const std::filesystem::path& errors_path, const std::string& comment);

}  // namespace pam
