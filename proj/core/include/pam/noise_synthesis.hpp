#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pam/covariance_models.hpp"
#include "pam/simulation_grid.hpp"

namespace pam {

/// Lattice increment over one time step: Cov(W(x), W(y)) = dt C(x - y).
struct NoiseSlice {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Stationary Gaussian fields on the periodic lattice of a grid by spectral
/// synthesis. Each complex FFT yields two independent real slices.
class NoiseSynthesizer {
 public:
  NoiseSynthesizer(const SimulationGrid& grid, const CovarianceModel& model);
  ~NoiseSynthesizer();
  NoiseSynthesizer(const NoiseSynthesizer&) = delete;
  NoiseSynthesizer& operator=(const NoiseSynthesizer&) = delete;

  std::size_t size() const { return weights_.size(); }

  /// Fills `a` and `b` with two independent slices of variance scale `dt`,
  /// drawn from the stream keyed by (seed, pair_index).
  void sample_pair(std::uint64_t seed, std::uint64_t pair_index, double dt, std::vector<double>& a,
                   std::vector<double>& b) const;

  /// The lattice covariance C at a site offset (in lattice units), i.e. the
  /// periodised, band-limited f the synthesis reproduces.
  double lattice_covariance(std::span<const long> offset) const;

  /// sqrt of the per-mode variance for dt = 1, row-major over frequencies.
  const std::vector<double>& weights() const { return weights_; }

 private:
  void calibrate_zero_mode(const SimulationGrid& grid, const CovarianceModel& model);

  int dimension_;
  std::size_t n_;
  double h_;
  std::vector<double> variance_;  // per-mode variance for dt = 1
  std::vector<double> weights_;
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

/// Slice `index` of the stream `seed` for step length grid.dt(). Even and
/// odd indices share one FFT.
NoiseSlice sample_noise_slice(const SimulationGrid& grid, const CovarianceModel& model,
                              std::uint64_t seed, std::uint64_t index);

}  // namespace pam
