#pragma once

#include <cstddef>
#include <vector>

namespace pam {

struct GridSpec {
  int dimension = 1;
  double h = 0.25;           // lattice spacing
  double dt = 0.01;          // uniform time step after warm-up
  double horizon = 1.0;      // T
  double half_width = 0.0;   // L; 0 picks the smallest admissible value
  std::vector<double> boxes; // averaging box sizes N
  // The run starts at t_start = dt * start_fraction with U = 1. Step ratios
  // t_{k+1}/t_k never exceed warmup_ratio; steps are at most dt.
  double start_fraction = 1e-3;
  double warmup_ratio = 1.2;

  /// Desk-scale defaults: d=1 h=0.25 dt=0.01, d=2 h=0.5 dt=0.05, T=1.
  static GridSpec defaults(int dimension);
};

/// Validated lattice on the torus [-L, L)^d with its time grid.
class SimulationGrid {
 public:
  explicit SimulationGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  double h() const { return spec_.h; }
  double dt() const { return spec_.dt; }
  double horizon() const { return spec_.horizon; }
  double half_width() const { return spec_.half_width; }
  const std::vector<double>& boxes() const { return spec_.boxes; }

  std::size_t sites_per_dim() const { return n_; }
  std::size_t total_sites() const { return total_; }
  /// Lattice coordinate of index j along one axis.
  double coordinate(std::size_t j) const { return -spec_.half_width + static_cast<double>(j) * spec_.h; }
  std::size_t origin_index() const { return origin_; }

  /// t_0 = t_start < t_1 < ... < t_K = T, containing every multiple of dt.
  const std::vector<double>& times() const { return times_; }
  /// Index into times() of a sample time; DomainError if not on the grid.
  std::size_t time_index(double t) const;

 private:
  GridSpec spec_;
  std::size_t n_ = 0;
  std::size_t total_ = 0;
  std::size_t origin_ = 0;
  std::vector<double> times_;
};

}  // namespace pam
