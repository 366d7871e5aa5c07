#include "pam/simulation_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pam/errors.hpp"

namespace pam {
namespace {

bool divides(double step, double length) {
  const double q = length / step;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

std::string num(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

GridSpec GridSpec::defaults(int dimension) {
  GridSpec g;
  g.dimension = dimension;
  if (dimension == 1) {
    g.h = 0.25;
    g.dt = 0.01;
  } else {
    g.h = 0.5;
    g.dt = 0.05;
  }
  g.horizon = 1.0;
  return g;
}

SimulationGrid::SimulationGrid(const GridSpec& spec) : spec_(spec) {
  const int d = spec_.dimension;
  if (d < 1 || d > 3) throw InvariantError("grid.dimension must be 1, 2 or 3");
  if (!(spec_.h > 0.0)) throw InvariantError("grid.h must be positive");
  if (!(spec_.dt > 0.0)) throw InvariantError("grid.dt must be positive");
  if (!(spec_.horizon > 0.0)) throw InvariantError("grid.T must be positive");
  if (spec_.dt > spec_.h * spec_.h / (2.0 * d) * (1.0 + 1e-12)) {
    throw InvariantError("grid.dt violates stability dt <= h^2/(2d) = " +
                         num(spec_.h * spec_.h / (2.0 * d)));
  }
  if (!divides(spec_.dt, spec_.horizon)) throw InvariantError("grid.dt must divide grid.T");
  if (!(spec_.start_fraction > 0.0 && spec_.start_fraction <= 1.0)) {
    throw InvariantError("grid.start_fraction must lie in (0, 1]");
  }
  if (!(spec_.warmup_ratio > 1.0)) throw InvariantError("grid.warmup_ratio must exceed 1");
  if (spec_.boxes.empty()) throw InvariantError("grid.N must list at least one box size");

  const double halo = 3.0 * std::sqrt(spec_.horizon);
  double largest = 0.0;
  for (double n : spec_.boxes) {
    if (!(n > 0.0)) throw InvariantError("grid.N entries must be positive");
    if (!divides(spec_.h, n)) throw InvariantError("grid.h must divide N = " + num(n));
    largest = std::max(largest, n);
  }
  if (spec_.half_width == 0.0) {
    spec_.half_width = std::ceil((largest + halo) / spec_.h) * spec_.h;
  }
  const double L = spec_.half_width;
  if (!divides(spec_.h, L)) throw InvariantError("grid.h must divide grid.L");
  if (largest + halo > L * (1.0 + 1e-12)) {
    throw InvariantError("grid.L = " + num(L) + " violates containment N + 3 sqrt(T) <= L for N = " +
                         num(largest));
  }

  n_ = static_cast<std::size_t>(std::llround(2.0 * L / spec_.h));
  total_ = 1;
  for (int k = 0; k < d; ++k) total_ *= n_;
  const std::size_t mid = n_ / 2;
  origin_ = 0;
  for (int k = 0; k < d; ++k) origin_ = origin_ * n_ + mid;

  // Geometric warm-up from t_start to dt. Later intervals [j dt, (j+1) dt]
  // are split geometrically until (j+1)/j <= warmup_ratio, so every step
  // ratio t_{k+1}/t_k stays bounded and all multiples of dt are step times.
  const double q = spec_.warmup_ratio;
  auto geometric = [&](double a, double b) {
    const auto parts = static_cast<int>(std::ceil(std::log(b / a) / std::log(q) - 1e-9));
    for (int k = 1; k < parts; ++k) times_.push_back(a * std::pow(b / a, static_cast<double>(k) / parts));
    times_.push_back(b);
  };
  const double t_start = spec_.dt * spec_.start_fraction;
  times_.push_back(t_start);
  if (t_start < spec_.dt) geometric(t_start, spec_.dt);
  const auto steps = static_cast<long>(std::llround(spec_.horizon / spec_.dt));
  for (long j = 1; j < steps; ++j) {
    geometric(spec_.dt * static_cast<double>(j), spec_.dt * static_cast<double>(j + 1));
  }
}

std::size_t SimulationGrid::time_index(double t) const {
  const double tol = 1e-9 * spec_.horizon;
  auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
  if (it == times_.end() || std::abs(*it - t) > tol || it == times_.begin()) {
    throw DomainError("sample time " + num(t) + " is not a step time in (t_start, T]");
  }
  return static_cast<std::size_t>(it - times_.begin());
}

}  // namespace pam
