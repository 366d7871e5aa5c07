#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pam/covariance_models.hpp"
#include "pam/limit_covariance.hpp"
#include "pam/simulation_grid.hpp"
#include "pam/statistics.hpp"

namespace pam {

struct EnsembleOptions {
  unsigned threads = 1;
  bool zero_noise = false;
  // Keep the completed replicas when some blow up instead of throwing.
  bool keep_partial = false;
  double blow_up = 1e12;
};

/// Spatial averages S_{N,t} of M independent replicas. All box sizes share
/// one simulation domain per replica.
struct FieldEnsemble {
  GridSpec grid;
  std::size_t replicas = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> times;
  std::vector<double> boxes;
  ScalingRate rate;
  // averages[(r * boxes + b) * times + k]
  std::vector<double> averages;
  std::vector<std::uint8_t> completed;
  std::vector<double> negative_fraction;  // largest over the run, per replica
  std::string failure;                    // first blow-up message, if any

  double S(std::size_t r, std::size_t b, std::size_t k) const {
    return averages[(r * boxes.size() + b) * times.size() + k];
  }
  double scaled(std::size_t r, std::size_t b, std::size_t k) const { return rate(boxes[b]) * S(r, b, k); }
  std::size_t completed_count() const;
  /// Values over completed replicas, in replica order.
  std::vector<double> column(std::size_t b, std::size_t k, bool rescaled) const;
  /// Completed replicas x times, row-major, rescaled by sigma_N.
  std::vector<double> scaled_matrix(std::size_t b) const;
  /// Restriction to the first m replicas.
  FieldEnsemble first(std::size_t m) const;
};

std::uint64_t replica_seed(std::uint64_t master_seed, std::size_t replica);

/// Deterministic in (model, grid, M, master_seed, times) for any thread
/// count. A replica blow-up raises ReplicaBlowUpError unless keep_partial.
FieldEnsemble run_ensemble(const CovarianceModel& model, const GridSpec& grid, std::size_t replicas,
                           std::uint64_t master_seed, const std::vector<double>& times,
                           const EnsembleOptions& opt = {});

/// Covariance of sigma_N S_{N,t} over the time grid for box index b.
stats::CovarianceEstimate empirical_covariance(const FieldEnsemble& ens, std::size_t b);

struct RateRegression {
  stats::Regression fit;
  // Regime slope the fit is compared to: -2 * power of sigma_N, or 0 when
  // the log-compensated variance Var * N / log N is regressed.
  double expected = 0.0;
  bool log_compensated = false;

  double deviation() const { return fit.slope - expected; }
};

/// Least squares of log Var(S_{N,t}) against log N (at least 4 box sizes).
RateRegression rate_regression(const std::vector<double>& variances,
                               const std::vector<double>& boxes, const ScalingRate& rate);

struct LimitComparison {
  std::size_t k = 0;
  std::vector<double> empirical;
  std::vector<double> standard_error;
  std::vector<double> limit;
  std::vector<double> z;
  // D1Finite only: empirical inside [(t1^t2) f(R), 2 (t1^t2) f(R)].
  std::vector<int> bracket;  // 1 inside, 0 outside, -1 not applicable
};

/// (empirical - limit) / standard error per entry; DomainError when the
/// time grids differ.
LimitComparison compare_to_limit(const stats::CovarianceEstimate& empirical,
                                 const std::vector<double>& times, const LimitCovariance& limits);

struct McReport {
  std::vector<double> boxes;
  std::vector<double> times;
  std::vector<stats::CovarianceEstimate> covariance;  // per box
  struct RegressionRow {
    double t;
    std::vector<double> variances;  // per box, un-rescaled S
    std::optional<RateRegression> fit;
  };
  std::vector<RegressionRow> regression;
  struct NormalityRow {
    double n_box;
    double t;
    stats::NormalityStats stats;
  };
  std::vector<NormalityRow> normality;
  std::optional<LimitComparison> comparison;  // at the largest box
};

struct ReportOptions {
  bool normality = true;
  std::size_t normality_min_samples = 500;
};

McReport build_report(const FieldEnsemble& ens, const std::optional<LimitCovariance>& limits,
                      const ReportOptions& opt = {});

/// covariance.csv, errors.csv, regression.csv, normality.csv, zscores.csv.
void write_report(const McReport& report, const std::filesystem::path& dir,
                  const std::string& comment);

/// Columns replica,N,t,S,sigma_N_S over completed replicas.
std::string ensemble_csv(const FieldEnsemble& ens, const std::string& comment);
/// Inverse of ensemble_csv given the run parameters.
FieldEnsemble parse_ensemble_csv(const std::string& text, const GridSpec& grid,
                                 std::uint64_t master_seed, const ScalingRate& rate);

}  // namespace pam
