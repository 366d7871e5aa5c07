#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pam/covariance_models.hpp"
#include "pam/noise_synthesis.hpp"
#include "pam/simulation_grid.hpp"

namespace pam {

/// (2 pi t)^{-d/2} exp(-|x|^2 / (2t)).
double heat_kernel(double t, std::span<const double> x);

/// Normalised field U = u / p_t on the lattice at time t.
struct FieldState {
  double t = 0.0;
  std::vector<double> U;
  // Fraction of sites with U < 0 (equivalently u < 0).
  double negative_fraction = 0.0;

  /// u = p_t U at a lattice site.
  double u(const SimulationGrid& grid, std::size_t site) const;
};

/// Lattice point coordinates of a flat site index.
std::vector<double> site_coordinates(const SimulationGrid& grid, std::size_t site);
std::size_t site_index(const SimulationGrid& grid, std::span<const long> lattice_offset_from_origin);

/// N^{-d} sum over lattice points of [0, N)^d of h^d (U - 1).
double spatial_average(const SimulationGrid& grid, const FieldState& state, double n_box);

struct SimulatorOptions {
  bool zero_noise = false;
  double blow_up = 1e12;
};

/// Integrates dU = (1/2) Lap U - (x/t) . grad U + U dW from U(t_start) = 1,
/// the PAM with delta initial data divided by the heat kernel. Each step
/// applies the Ito noise product, an explicit lattice heat step and exact
/// transport along the characteristics x ~ t (cubic interpolation).
class Simulator {
 public:
  Simulator(const SimulationGrid& grid, const CovarianceModel& model, SimulatorOptions opt = {});

  const SimulationGrid& grid() const { return grid_; }
  const NoiseSynthesizer& noise() const { return *noise_; }

  using Observer = std::function<void(const FieldState&)>;
  /// Runs to the last sample time, calling `observe` at each one (sorted).
  void run(std::uint64_t seed, std::span<const double> sample_times, const Observer& observe);
  std::vector<FieldState> run_solution(std::uint64_t seed, std::span<const double> sample_times);

  /// One step of length t_next - state.t using the supplied noise slice.
  void step(FieldState& state, std::span<const double> noise, double t_next);

 private:
  void diffuse(std::vector<double>& U, double dt);
  void transport(std::vector<double>& U, double ratio);

  SimulationGrid grid_;
  SimulatorOptions opt_;
  std::shared_ptr<NoiseSynthesizer> noise_;
  std::vector<double> scratch_;
};

/// Free-standing variant of Simulator::run_solution.
std::vector<FieldState> run_solution(const SimulationGrid& grid, const CovarianceModel& model,
                                     std::uint64_t seed, std::span<const double> sample_times,
                                     SimulatorOptions opt = {});

/// Flat binary snapshot: int32 d, int64 sites per axis (d times), double t,
/// then U row-major as little-endian doubles.
void dump_snapshot(const SimulationGrid& grid, const FieldState& state,
                   const std::filesystem::path& path);

}  // namespace pam
