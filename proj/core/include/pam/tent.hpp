#pragma once

#include <complex>
#include <span>

#include "pam/quadrature.hpp"

namespace pam {

/// Harmonic-mean reparameterisation of a time pair (t1, t2).
struct TauParams {
  double tau;   // 2 t1 t2 / (t1 + t2)
  double tau1;  // 2 t2 / (t1 + t2)
  double tau2;  // 2 t1 / (t1 + t2)
};

TauParams tau_params(double t1, double t2);

/// The tent I_m * ~I_n (normalised box indicators, m, n > 0) in d dimensions
/// and its Fourier transform psi. Both factor over coordinates.
class TentTransform {
 public:
  TentTransform(double m, double n, int dimension);
  /// Widths (min(tau1, tau2), max(tau1, tau2)).
  static TentTransform from_tau(const TauParams& tau, int dimension);

  double m() const { return m_; }
  double n() const { return n_; }
  int dimension() const { return dimension_; }

  /// Spatial tent; support prod_j [-n, m], unit integral.
  double spatial(std::span<const double> z) const;
  double spatial_1d(double z) const;

  /// prod_j [(e^{i m z_j} - 1)/(i m z_j)] conj[(e^{i n z_j} - 1)/(i n z_j)].
  std::complex<double> psi(std::span<const double> z) const;
  std::complex<double> psi_1d(double x) const;

  /// min(1, 2/(m|x|)) min(1, 2/(n|x|)), a per-coordinate bound on |psi|.
  double decay_bound_1d(double x) const;

  /// \int tent_1d(y) e^{-s y^2} dy, closed form.
  double gaussian_moment_1d(double s) const;
  /// \int e^{-t x^2} psi_1d(x) dx (real), via Parseval on gaussian_moment_1d.
  double damped_psi_1d(double t) const;

 private:
  double m_;
  double n_;
  int dimension_;
};

/// (e^{i y} - 1) / (i y), with a series near 0.
std::complex<double> box_factor(double y);

/// \int_{R^d} Re psi_{m,n}(z) |z|^{gamma - d} dz for 0 < gamma < min(d, 2),
/// reduced to one dimension by Gaussian subordination of |z|^{gamma - d}.
quad::Result psi_power_integral(double m, double n, int dimension, double gamma,
                                const quad::Options& opt = {});

/// \int_{R^d} tent_{m,n}(z) |z|^{-beta} dz for 0 < beta < d.
quad::Result tent_power_integral(double m, double n, int dimension, double beta,
                                 const quad::Options& opt = {});

}  // namespace pam
