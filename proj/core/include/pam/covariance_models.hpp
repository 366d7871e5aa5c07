#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pam/quadrature.hpp"

namespace pam {

/// Fourier convention used throughout: g^(xi) = \int e^{i x.xi} g(x) dx, with
/// inversion g(x) = (2 pi)^{-d} \int e^{-i x.xi} g^(xi) dxi. This is the
/// per-dimension inversion prefactor.
inline constexpr double kInversionFactor = 0.15915494309189533576888;  // 1 / (2 pi)

enum class KernelKind { Riesz, Gaussian, Cauchy, SpaceTimeWhite, TabulatedSpectral };

/// Radial samples of a spectral density. The first radius must be 0.
struct RadialTable {
  std::vector<double> radius;
  std::vector<double> density;
};

/// Spatially homogeneous, isotropic covariance measure f together with its
/// spectral density. Immutable once constructed.
class CovarianceModel {
 public:
  /// f(dx) = |x|^{-beta} dx, 0 < beta < min(2, d).
  static CovarianceModel riesz(int dimension, double beta);
  /// f(dx) = p_1(x) dx, the standard Gaussian density.
  static CovarianceModel gaussian(int dimension);
  /// f(dx) = (1 + x^2)^{-1} dx on the line.
  static CovarianceModel cauchy();
  /// f = delta_0 on the line.
  static CovarianceModel space_time_white();
  static CovarianceModel tabulated(int dimension, RadialTable table);

  /// Two-column CSV (radius, density); '#' lines and one non-numeric header
  /// row are skipped.
  static RadialTable load_table_csv(const std::filesystem::path& path);

  int dimension() const { return dimension_; }
  KernelKind kind() const { return kind_; }
  /// Riesz exponent; 0 for other kinds.
  double beta() const { return beta_; }
  const RadialTable& table() const { return table_; }

  /// Spectral density as a function of |xi|.
  double spectral_density_radial(double rho) const;
  /// Upper end of the radial support (inf except for tabulated models).
  double spectral_cutoff() const;
  /// Density of f as a function of |x|. Not defined for SpaceTimeWhite.
  double spatial_density_radial(double r) const;
  /// f^ vanishes at infinity.
  bool rajchman() const;

  std::string describe() const;

 private:
  CovarianceModel(int dimension, KernelKind kind, double beta, RadialTable table);
  void check_dalang() const;

  int dimension_;
  KernelKind kind_;
  double beta_;
  RadialTable table_;
};

std::string to_string(KernelKind kind);

/// kappa_{beta,d}: f^(dxi) = kappa |xi|^{beta - d} dxi for the Riesz kernel.
double riesz_constant(double beta, int dimension);
/// Surface area of the unit sphere S^{d-1} (2 for d = 1).
double sphere_area(int dimension);

/// Density of f^ at xi. Riesz at xi = 0 is a DomainError.
double spectral_density(const CovarianceModel& model, std::span<const double> xi);

/// f(R^d); +inf for the Riesz kernel.
double total_mass(const CovarianceModel& model);

/// Dalang functional (2 pi)^{-d} \int f^(dy) / (beta + |y|^2).
quad::Result upsilon(const CovarianceModel& model, double beta, const quad::Options& opt = {});

/// \int_0^inf rho^power f^(rho) drho over the radial profile.
quad::Result spectral_radial_moment(const CovarianceModel& model, double power,
                                    const quad::Options& opt = {});

/// Angular constant of R(f): \int_{S^{d-1}} \int_0^inf prod_j k(r w_j) dr dw
/// with k(x) = (1 - cos x) / x^2.
quad::Result r_angular_constant(int dimension, const quad::Options& opt = {});

/// R(f) = pi^{-d} \int_0^inf ds \int f^(dz) prod_j (1 - cos(s z_j)) / (s z_j)^2.
/// +inf when d = 1 and for the (scale-free) Riesz kernel.
quad::Result r_quantity(const CovarianceModel& model, const quad::Options& opt = {});

enum class Regime { MultiDimFinite, OneDimFinite, RieszA, RieszB, RieszC };
enum class LimitFamily { G, D1Finite, C1, C2, C3 };

/// sigma_N = N^power, divided by sqrt(log N) when log_corrected.
struct ScalingRate {
  double power = 0.5;
  bool log_corrected = false;

  double operator()(double n) const;
  /// Expected slope of log Var(S_N) against log N (ignoring the log factor).
  double variance_slope() const { return -2.0 * power; }
  std::string describe() const;
};

struct RegimeClassification {
  Regime regime;
  ScalingRate rate;
  LimitFamily family;
  /// Only meaningful for OneDimFinite: the limit is pinned (not just bracketed).
  bool rajchman = true;
};

std::string to_string(Regime regime);
std::string to_string(LimitFamily family);

RegimeClassification classify_regime(const CovarianceModel& model);

}  // namespace pam
