#include "pam/noise_synthesis.hpp"

#include <fftw3.h>

#include <boost/random/normal_distribution.hpp>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "pam/errors.hpp"
#include "pam/rng.hpp"

namespace pam {
namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

constexpr long kRefinedCells = 3;
constexpr int kSubSamples = 8;

// Signed frequency index of FFT bin j.
long signed_bin(std::size_t j, std::size_t n) {
  const auto jj = static_cast<long>(j);
  return jj <= static_cast<long>(n / 2) ? jj : jj - static_cast<long>(n);
}

}  // namespace

struct NoiseSynthesizer::Plan {
  fftw_plan plan = nullptr;
  std::size_t total = 0;
};

NoiseSynthesizer::NoiseSynthesizer(const SimulationGrid& grid, const CovarianceModel& model)
    : dimension_(grid.dimension()), n_(grid.sites_per_dim()), h_(grid.h()) {
  if (model.dimension() != grid.dimension()) {
    throw DomainError("model and grid dimensions differ");
  }
  const int d = dimension_;
  const std::size_t total = grid.total_sites();
  const double period = static_cast<double>(n_) * h_;
  const double dw = 2.0 * std::numbers::pi / period;
  // E|a_k|^2 = f^(w_k) / P^d reproduces (2 pi)^{-d} \int f^(xi) e^{-i x xi} dxi
  // as a Riemann sum over the lattice frequencies.
  const double norm = std::pow(period, -d);
  const bool riesz = model.kind() == KernelKind::Riesz;
  const double cutoff = model.spectral_cutoff();
  auto density = [&](double rho) { return rho <= cutoff ? model.spectral_density_radial(rho) : 0.0; };
  variance_.resize(total);
  weights_.resize(total);
  std::vector<long> bin(static_cast<std::size_t>(d));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    long far = 0;
    double r2 = 0.0;
    for (int k = d - 1; k >= 0; --k) {
      bin[static_cast<std::size_t>(k)] = signed_bin(rest % n_, n_);
      const double w = dw * static_cast<double>(bin[static_cast<std::size_t>(k)]);
      r2 += w * w;
      far = std::max(far, std::abs(bin[static_cast<std::size_t>(k)]));
      rest /= n_;
    }
    double s = 0.0;
    if (riesz && far == 0) {
      // Cell mean of kappa |w|^{beta-d} over the ball with the cell's volume.
      const double radius = dw * std::pow(std::pow(2.0, -d) * std::tgamma(0.5 * d + 1.0) /
                                              std::pow(std::numbers::pi, 0.5 * d), -1.0 / d) * 0.5;
      const double volume = std::pow(dw, d);
      s = riesz_constant(model.beta(), d) * sphere_area(d) * std::pow(radius, model.beta()) /
          model.beta() / volume;
    } else if (riesz && far <= kRefinedCells) {
      // The singular density varies strongly across cells near the origin:
      // average over a sub-grid instead of taking the centre value.
      double acc = 0.0;
      std::size_t count = 0;
      std::vector<int> sub(static_cast<std::size_t>(d), 0);
      for (;;) {
        double q2 = 0.0;
        for (int k = 0; k < d; ++k) {
          const double off = (sub[static_cast<std::size_t>(k)] + 0.5) / kSubSamples - 0.5;
          const double w = dw * (static_cast<double>(bin[static_cast<std::size_t>(k)]) + off);
          q2 += w * w;
        }
        acc += density(std::sqrt(q2));
        ++count;
        int k = 0;
        while (k < d && ++sub[static_cast<std::size_t>(k)] == kSubSamples) sub[static_cast<std::size_t>(k++)] = 0;
        if (k == d) break;
      }
      s = acc / static_cast<double>(count);
    } else {
      s = density(std::sqrt(r2));
    }
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw EmbeddingError("negative or non-finite spectral weight at |w| = " +
                           std::to_string(std::sqrt(r2)) + "; enlarge the torus");
    }
    variance_[idx] = s * norm;
    weights_[idx] = std::sqrt(variance_[idx]);
  }

  if (riesz) calibrate_zero_mode(grid, model);

  plan_ = std::make_unique<Plan>();
  plan_->total = total;
  std::vector<int> dims(d, static_cast<int>(n_));
  auto* buf = fftw_alloc_complex(total);
  {
    std::lock_guard lock(planner_mutex());
    plan_->plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_free(buf);
  if (plan_->plan == nullptr) throw EmbeddingError("FFT planning failed");
}

NoiseSynthesizer::~NoiseSynthesizer() {
  if (plan_ && plan_->plan) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
}

void NoiseSynthesizer::sample_pair(std::uint64_t seed, std::uint64_t pair_index, double dt,
                                   std::vector<double>& a, std::vector<double>& b) const {
  const std::size_t total = plan_->total;
  Engine eng(derive_seed(seed, pair_index, 0x6e6f697365ULL));
  boost::random::normal_distribution<double> normal;
  auto* buf = fftw_alloc_complex(total);
  const double scale = std::sqrt(dt);
  for (std::size_t k = 0; k < total; ++k) {
    const double w = weights_[k] * scale;
    const double re = normal(eng);
    const double im = normal(eng);
    buf[k][0] = w * re;
    buf[k][1] = w * im;
  }
  fftw_execute_dft(plan_->plan, buf, buf);
  a.resize(total);
  b.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    a[k] = buf[k][0];
    b[k] = buf[k][1];
  }
  fftw_free(buf);
}

void NoiseSynthesizer::calibrate_zero_mode(const SimulationGrid& grid, const CovarianceModel& model) {
  // The periodised Riesz covariance diverges for beta < 1; on a torus the
  // covariance is |x|^{-beta} plus an offset that is nearly constant over
  // lags well below the period. The zero mode adds exactly a constant, so fit
  // it by least squares on axis lags from 4h up to the largest averaging box.
  const double largest = *std::max_element(grid.boxes().begin(), grid.boxes().end());
  const auto first = std::size_t{4};
  const auto last = std::max<std::size_t>(first, static_cast<std::size_t>(std::llround(largest / h_)));
  std::vector<long> lag(static_cast<std::size_t>(dimension_), 0);
  double offset = 0.0;
  std::size_t count = 0;
  for (std::size_t j = first; j <= last && j < n_ / 2; ++j) {
    lag.back() = static_cast<long>(j);
    offset += lattice_covariance(lag) - model.spatial_density_radial(static_cast<double>(j) * h_);
    ++count;
  }
  if (count == 0) return;
  offset /= static_cast<double>(count);
  variance_[0] = std::max(0.0, variance_[0] - offset);
  weights_[0] = std::sqrt(variance_[0]);
}

double NoiseSynthesizer::lattice_covariance(std::span<const long> offset) const {
  if (static_cast<int>(offset.size()) != dimension_) throw DomainError("offset dimension mismatch");
  // C(x) = sum_k var_k cos(w_k . x); the sine part cancels by symmetry.
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n_);
  double total = 0.0;
  for (std::size_t idx = 0; idx < variance_.size(); ++idx) {
    std::size_t rest = idx;
    double phase = 0.0;
    for (int k = 0; k < dimension_; ++k) {
      phase += two_pi_over_n * static_cast<double>(signed_bin(rest % n_, n_)) *
               static_cast<double>(offset[static_cast<std::size_t>(k)]);
      rest /= n_;
    }
    total += variance_[idx] * std::cos(phase);
  }
  return total;
}

NoiseSlice sample_noise_slice(const SimulationGrid& grid, const CovarianceModel& model,
                              std::uint64_t seed, std::uint64_t index) {
  const NoiseSynthesizer synth(grid, model);
  NoiseSlice slice;
  slice.seed = seed;
  slice.index = index;
  std::vector<double> other;
  if (index % 2 == 0) {
    synth.sample_pair(seed, index / 2, grid.dt(), slice.values, other);
  } else {
    synth.sample_pair(seed, index / 2, grid.dt(), other, slice.values);
  }
  return slice;
}

}  // namespace pam
