#include "pam/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pam/errors.hpp"

namespace pam {

double heat_kernel(double t, std::span<const double> x) {
  if (!(t > 0.0)) throw DomainError("heat_kernel requires t > 0");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double d = static_cast<double>(x.size());
  return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r2 / (2.0 * t));
}

std::vector<double> site_coordinates(const SimulationGrid& grid, std::size_t site) {
  const int d = grid.dimension();
  const std::size_t n = grid.sites_per_dim();
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int k = d - 1; k >= 0; --k) {
    x[static_cast<std::size_t>(k)] = grid.coordinate(site % n);
    site /= n;
  }
  return x;
}

std::size_t site_index(const SimulationGrid& grid, std::span<const long> offset) {
  const auto n = static_cast<long>(grid.sites_per_dim());
  std::size_t idx = 0;
  for (long o : offset) {
    const long j = ((n / 2 + o) % n + n) % n;
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  }
  return idx;
}

double FieldState::u(const SimulationGrid& grid, std::size_t site) const {
  const std::vector<double> x = site_coordinates(grid, site);
  return heat_kernel(t, x) * U[site];
}

double spatial_average(const SimulationGrid& grid, const FieldState& state, double n_box) {
  const int d = grid.dimension();
  const double h = grid.h();
  const auto m = static_cast<long>(std::llround(n_box / h));
  if (m <= 0 || std::abs(static_cast<double>(m) * h - n_box) > 1e-9 * n_box) {
    throw DomainError("averaging box is not lattice aligned");
  }
  if (n_box > grid.half_width()) throw DomainError("averaging box exceeds the domain");
  const std::size_t n = grid.sites_per_dim();
  const std::size_t mid = n / 2;
  const auto mm = static_cast<std::size_t>(m);
  // Row sums first, then the outer axes, so the reduction order is fixed.
  double total = 0.0;
  if (d == 1) {
    for (std::size_t i = 0; i < mm; ++i) total += state.U[mid + i] - 1.0;
  } else if (d == 2) {
    for (std::size_t i = 0; i < mm; ++i) {
      double row = 0.0;
      const std::size_t base = (mid + i) * n + mid;
      for (std::size_t j = 0; j < mm; ++j) row += state.U[base + j] - 1.0;
      total += row;
    }
  } else {
    for (std::size_t i = 0; i < mm; ++i) {
      double plane = 0.0;
      for (std::size_t j = 0; j < mm; ++j) {
        double row = 0.0;
        const std::size_t base = ((mid + i) * n + mid + j) * n + mid;
        for (std::size_t k = 0; k < mm; ++k) row += state.U[base + k] - 1.0;
        plane += row;
      }
      total += plane;
    }
  }
  return total * std::pow(h / n_box, d);
}

Simulator::Simulator(const SimulationGrid& grid, const CovarianceModel& model, SimulatorOptions opt)
    : grid_(grid), opt_(opt), noise_(std::make_shared<NoiseSynthesizer>(grid, model)) {}

void Simulator::diffuse(std::vector<double>& U, double dt) {
  const std::size_t n = grid_.sites_per_dim();
  const std::size_t total = grid_.total_sites();
  const double c = 0.5 * dt / (grid_.h() * grid_.h());
  scratch_.assign(U.begin(), U.end());
  std::size_t stride = 1;
  for (int axis = 0; axis < grid_.dimension(); ++axis) {
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        const std::size_t first = base + off;
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t i = first + j * stride;
          const std::size_t ip = first + (j + 1 == n ? 0 : j + 1) * stride;
          const std::size_t im = first + (j == 0 ? n - 1 : j - 1) * stride;
          scratch_[i] += c * (U[ip] - 2.0 * U[i] + U[im]);
        }
      }
    }
    stride = block;
  }
  U.swap(scratch_);
}

void Simulator::transport(std::vector<double>& U, double ratio) {
  // U_new(x) = U(ratio * x), one Catmull-Rom pass per axis.
  const std::size_t n = grid_.sites_per_dim();
  const std::size_t total = grid_.total_sites();
  const double h = grid_.h();
  const double L = grid_.half_width();
  struct Tap {
    std::size_t j[4];
    double w[4];
  };
  std::vector<Tap> taps(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = (ratio * grid_.coordinate(j) + L) / h;
    const double fl = std::floor(pos);
    const double f = pos - fl;
    const auto j0 = static_cast<long>(fl);
    const auto nn = static_cast<long>(n);
    Tap& t = taps[j];
    for (int k = 0; k < 4; ++k) t.j[k] = static_cast<std::size_t>(((j0 - 1 + k) % nn + nn) % nn);
    const double f2 = f * f;
    const double f3 = f2 * f;
    t.w[0] = -0.5 * f3 + f2 - 0.5 * f;
    t.w[1] = 1.5 * f3 - 2.5 * f2 + 1.0;
    t.w[2] = -1.5 * f3 + 2.0 * f2 + 0.5 * f;
    t.w[3] = 0.5 * f3 - 0.5 * f2;
  }
  scratch_.resize(total);
  std::size_t stride = 1;
  for (int axis = 0; axis < grid_.dimension(); ++axis) {
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        const std::size_t first = base + off;
        for (std::size_t j = 0; j < n; ++j) {
          const Tap& t = taps[j];
          scratch_[first + j * stride] =
              t.w[0] * U[first + t.j[0] * stride] + t.w[1] * U[first + t.j[1] * stride] +
              t.w[2] * U[first + t.j[2] * stride] + t.w[3] * U[first + t.j[3] * stride];
        }
      }
    }
    U.swap(scratch_);
    stride = block;
  }
}

void Simulator::step(FieldState& state, std::span<const double> noise, double t_next) {
  const double dt = t_next - state.t;
  if (!(dt > 0.0)) throw DomainError("step requires t_next > t");
  std::vector<double>& U = state.U;
  // Noise and diffusion act at the geometric midpoint of the step, between
  // two half transports, so a kick is stretched by t / t_mid on average.
  const double t_mid = std::sqrt(state.t * t_next);
  transport(U, state.t / t_mid);
  if (!noise.empty()) {
    for (std::size_t i = 0; i < U.size(); ++i) U[i] += U[i] * noise[i];
  }
  diffuse(U, dt);
  transport(U, t_mid / t_next);
  state.t = t_next;
  std::size_t negative = 0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    const double v = U[i];
    if (!(std::abs(v) <= opt_.blow_up)) throw BlowUpError(i, t_next, std::abs(v));
    negative += v < 0.0;
  }
  state.negative_fraction = static_cast<double>(negative) / static_cast<double>(U.size());
}

void Simulator::run(std::uint64_t seed, std::span<const double> sample_times,
                    const Observer& observe) {
  if (sample_times.empty()) return;
  std::vector<std::size_t> wanted;
  for (double t : sample_times) wanted.push_back(grid_.time_index(t));
  if (!std::is_sorted(wanted.begin(), wanted.end())) {
    throw DomainError("sample times must be sorted");
  }
  const std::vector<double>& times = grid_.times();
  FieldState state;
  state.t = times.front();
  state.U.assign(grid_.total_sites(), 1.0);
  std::vector<double> w0;
  std::vector<double> w1;
  std::size_t next = 0;
  for (std::size_t k = 1; k <= wanted.back(); ++k) {
    const double t_next = times[k];
    if (opt_.zero_noise) {
      step(state, {}, t_next);
    } else {
      // Steps k and k+1 share one FFT; the second slice is rescaled to its
      // own step length.
      const std::size_t slot = (k - 1) % 2;
      if (slot == 0) {
        noise_->sample_pair(seed, (k - 1) / 2, 1.0, w0, w1);
      }
      std::vector<double>& w = slot == 0 ? w0 : w1;
      const double scale = std::sqrt(t_next - times[k - 1]);
      for (double& v : w) v *= scale;
      step(state, w, t_next);
    }
    while (next < wanted.size() && wanted[next] == k) {
      observe(state);
      ++next;
    }
  }
}

std::vector<FieldState> Simulator::run_solution(std::uint64_t seed,
                                                std::span<const double> sample_times) {
  std::vector<FieldState> out;
  run(seed, sample_times, [&](const FieldState& s) { out.push_back(s); });
  return out;
}

std::vector<FieldState> run_solution(const SimulationGrid& grid, const CovarianceModel& model,
                                     std::uint64_t seed, std::span<const double> sample_times,
                                     SimulatorOptions opt) {
  Simulator sim(grid, model, opt);
  return sim.run_solution(seed, sample_times);
}

void dump_snapshot(const SimulationGrid& grid, const FieldState& state,
                   const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes little-endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const auto d = static_cast<std::int32_t>(grid.dimension());
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  const auto n = static_cast<std::int64_t>(grid.sites_per_dim());
  for (int k = 0; k < d; ++k) out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&state.t), sizeof state.t);
  out.write(reinterpret_cast<const char*>(state.U.data()),
            static_cast<std::streamsize>(state.U.size() * sizeof(double)));
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace pam
