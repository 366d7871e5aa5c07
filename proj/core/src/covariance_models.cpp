#include "pam/covariance_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pam/errors.hpp"
#include "pam/tent.hpp"

namespace pam {
namespace {

constexpr double kPi = std::numbers::pi;

double interpolate_table(const RadialTable& t, double rho) {
  const auto& r = t.radius;
  const auto& v = t.density;
  if (rho < 0.0 || rho > r.back()) {
    throw DomainError("tabulated spectral density queried at radius " + std::to_string(rho) +
                      " outside [0, " + std::to_string(r.back()) + "]");
  }
  if (rho == r.back()) return v.back();
  const auto it = std::upper_bound(r.begin(), r.end(), rho);
  const auto hi = static_cast<std::size_t>(it - r.begin());
  const std::size_t lo = hi - 1;
  const double x0 = r[lo], x1 = r[hi], y0 = v[lo], y1 = v[hi];
  // log-log between positive samples; the segment touching the origin and
  // segments with a zero endpoint fall back to linear.
  if (x0 > 0.0 && y0 > 0.0 && y1 > 0.0) {
    const double w = std::log(rho / x0) / std::log(x1 / x0);
    return std::exp(std::log(y0) + w * (std::log(y1) - std::log(y0)));
  }
  const double w = (rho - x0) / (x1 - x0);
  return y0 + w * (y1 - y0);
}

// (1 - cos x) / x^2 without cancellation near 0.
double one_minus_cos_ratio(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return 0.5 - x * x / 24.0;
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

// \int_a^inf (1 - cos v) / v^4 dv for a > 0.
double quartic_tail(double a, const quad::Options& opt) {
  auto f = [](double v) { return one_minus_cos_ratio(v) / (v * v); };
  auto regular = [](double v) {
    if (v < 1e-2) {
      const double v2 = v * v;
      return -1.0 / 24.0 + v2 / 720.0 - v2 * v2 / 40320.0;
    }
    return one_minus_cos_ratio(v) / (v * v) - 0.5 / (v * v);
  };
  const double far = 200.0;
  auto from_one = [&](double lo) {
    const double hi = lo + far;
    const double body = quad::integrate_split(f, lo, hi, 2.0 * kPi, opt).value;
    // Beyond hi the integrand is v^-4 up to an oscillating term of the same order.
    return body + 1.0 / (3.0 * hi * hi * hi);
  };
  if (a >= 1.0) return from_one(a);
  const double near = quad::integrate(regular, a, 1.0, opt).value + 0.5 * (1.0 / a - 1.0);
  return near + from_one(1.0);
}

}  // namespace

CovarianceModel::CovarianceModel(int dimension, KernelKind kind, double beta, RadialTable table)
    : dimension_(dimension), kind_(kind), beta_(beta), table_(std::move(table)) {}

void CovarianceModel::check_dalang() const {
  const quad::Result u = upsilon(*this, 1.0);
  if (!std::isfinite(u.value) || u.diverged()) {
    throw InvariantError("Dalang condition fails: upsilon(1) is not finite for " + describe());
  }
}

CovarianceModel CovarianceModel::riesz(int dimension, double beta) {
  if (dimension < 1 || dimension > 3) throw InvariantError("dimension must be 1, 2 or 3");
  const double upper = std::min(2.0, static_cast<double>(dimension));
  if (!(beta > 0.0 && beta < upper)) {
    std::ostringstream msg;
    msg << "Riesz exponent beta=" << beta << " must lie in (0, " << upper << ") for d=" << dimension;
    throw InvariantError(msg.str());
  }
  CovarianceModel m(dimension, KernelKind::Riesz, beta, {});
  m.check_dalang();
  return m;
}

CovarianceModel CovarianceModel::gaussian(int dimension) {
  if (dimension < 1 || dimension > 3) throw InvariantError("dimension must be 1, 2 or 3");
  CovarianceModel m(dimension, KernelKind::Gaussian, 0.0, {});
  m.check_dalang();
  return m;
}

CovarianceModel CovarianceModel::cauchy() {
  CovarianceModel m(1, KernelKind::Cauchy, 0.0, {});
  m.check_dalang();
  return m;
}

CovarianceModel CovarianceModel::space_time_white() {
  CovarianceModel m(1, KernelKind::SpaceTimeWhite, 0.0, {});
  m.check_dalang();
  return m;
}

CovarianceModel CovarianceModel::tabulated(int dimension, RadialTable table) {
  if (dimension < 1 || dimension > 3) throw InvariantError("dimension must be 1, 2 or 3");
  const auto& r = table.radius;
  const auto& v = table.density;
  if (r.size() != v.size() || r.size() < 2) {
    throw InvariantError("spectral table needs at least two (radius, density) rows");
  }
  if (r.front() != 0.0) throw InvariantError("spectral table must start at radius 0");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && !(r[i] > r[i - 1])) {
      throw InvariantError("spectral table radii must be strictly increasing (row " +
                           std::to_string(i + 1) + ")");
    }
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw InvariantError("spectral table density must be finite and nonnegative (row " +
                           std::to_string(i + 1) + ")");
    }
  }
  if (!(v.front() > 0.0)) throw InvariantError("spectral table must have positive total mass");
  CovarianceModel m(dimension, KernelKind::TabulatedSpectral, 0.0, std::move(table));
  m.check_dalang();
  return m;
}

RadialTable CovarianceModel::load_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvariantError("cannot open spectral table " + path.string());
  RadialTable t;
  std::string line;
  int lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double radius = 0.0, density = 0.0;
    if (!(row >> radius >> density)) {
      if (!header_skipped && t.radius.empty()) {
        header_skipped = true;
        continue;
      }
      throw InvariantError(path.string() + ":" + std::to_string(lineno) +
                           ": expected two numeric columns");
    }
    t.radius.push_back(radius);
    t.density.push_back(density);
  }
  return t;
}

double CovarianceModel::spectral_density_radial(double rho) const {
  switch (kind_) {
    case KernelKind::Riesz:
      if (rho == 0.0) throw DomainError("Riesz spectral density is singular at 0");
      return riesz_constant(beta_, dimension_) * std::pow(rho, beta_ - dimension_);
    case KernelKind::Gaussian:
      return std::exp(-0.5 * rho * rho);
    case KernelKind::Cauchy:
      return kPi * std::exp(-rho);
    case KernelKind::SpaceTimeWhite:
      return 1.0;
    case KernelKind::TabulatedSpectral:
      return interpolate_table(table_, rho);
  }
  return 0.0;
}

double CovarianceModel::spectral_cutoff() const {
  return kind_ == KernelKind::TabulatedSpectral ? table_.radius.back() : quad::kInfinity;
}

double CovarianceModel::spatial_density_radial(double r) const {
  switch (kind_) {
    case KernelKind::Riesz:
      return std::pow(r, -beta_);
    case KernelKind::Gaussian:
      return std::pow(2.0 * kPi, -0.5 * dimension_) * std::exp(-0.5 * r * r);
    case KernelKind::Cauchy:
      return 1.0 / (1.0 + r * r);
    case KernelKind::SpaceTimeWhite:
      throw DomainError("space-time white noise has no spatial density");
    case KernelKind::TabulatedSpectral:
      throw DomainError("tabulated models are specified on the spectral side only");
  }
  return 0.0;
}

bool CovarianceModel::rajchman() const {
  switch (kind_) {
    case KernelKind::SpaceTimeWhite:
      return false;
    case KernelKind::TabulatedSpectral: {
      // Treated as Rajchman when the table has decayed by six decades.
      const double peak = *std::max_element(table_.density.begin(), table_.density.end());
      return table_.density.back() <= 1e-6 * peak;
    }
    default:
      return true;
  }
}

std::string CovarianceModel::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(d=" << dimension_;
  if (kind_ == KernelKind::Riesz) os << ", beta=" << beta_;
  if (kind_ == KernelKind::TabulatedSpectral) os << ", samples=" << table_.radius.size();
  os << ")";
  return os.str();
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Riesz: return "riesz";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Cauchy: return "cauchy";
    case KernelKind::SpaceTimeWhite: return "white";
    case KernelKind::TabulatedSpectral: return "tabulated";
  }
  return "unknown";
}

double riesz_constant(double beta, int dimension) {
  const double d = dimension;
  return std::pow(2.0, d - beta) * std::pow(kPi, 0.5 * d) * std::tgamma(0.5 * (d - beta)) /
         std::tgamma(0.5 * beta);
}

double sphere_area(int dimension) {
  const double d = dimension;
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double spectral_density(const CovarianceModel& model, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != model.dimension()) {
    throw DomainError("spectral_density: point has wrong dimension");
  }
  double r2 = 0.0;
  for (double x : xi) r2 += x * x;
  return model.spectral_density_radial(std::sqrt(r2));
}

double total_mass(const CovarianceModel& model) {
  switch (model.kind()) {
    case KernelKind::Riesz: return quad::kInfinity;
    case KernelKind::Gaussian: return 1.0;
    case KernelKind::Cauchy: return kPi;
    case KernelKind::SpaceTimeWhite: return 1.0;
    case KernelKind::TabulatedSpectral: return model.table().density.front();
  }
  return 0.0;
}

namespace {

// \int_0^inf g(rho) f^(rho) drho for non-Riesz profiles.
quad::Result radial_integral(const CovarianceModel& model, const std::function<double(double)>& g,
                             double scale, const quad::Options& opt, bool singular_start) {
  auto integrand = [&](double rho) { return g(rho) * model.spectral_density_radial(rho); };
  if (model.kind() == KernelKind::TabulatedSpectral) {
    // Support is truncated at the last sample; no extrapolation.
    const auto& r = model.table().radius;
    quad::Result total;
    for (std::size_t i = 1; i < r.size(); ++i) {
      const quad::Result piece = singular_start && i == 1
                                     ? quad::integrate_singular(integrand, r[i - 1], r[i], opt)
                                     : quad::integrate(integrand, r[i - 1], r[i], opt);
      total.value += piece.value;
      total.error += piece.error;
      if (!piece.converged()) total.status = piece.status;
    }
    return total;
  }
  return quad::integrate_to_infinity(integrand, 0.0, scale, opt, singular_start);
}

}  // namespace

quad::Result upsilon(const CovarianceModel& model, double beta, const quad::Options& opt) {
  if (!(beta > 0.0)) throw DomainError("upsilon requires beta > 0");
  const int d = model.dimension();
  const double prefactor = std::pow(kInversionFactor, d) * sphere_area(d);
  if (model.kind() == KernelKind::Riesz) {
    // \int_0^inf rho^{b-1} / (beta + rho^2) = beta^{b/2-1} pi / (2 sin(pi b / 2)).
    const double b = model.beta();
    const double radial = std::pow(beta, 0.5 * b - 1.0) * kPi / (2.0 * std::sin(0.5 * kPi * b));
    return {prefactor * riesz_constant(b, d) * radial, 0.0, quad::Status::Converged};
  }
  auto g = [&](double rho) { return std::pow(rho, d - 1) / (beta + rho * rho); };
  quad::Result r = radial_integral(model, g, std::max(1.0, std::sqrt(beta)), opt, false);
  if (r.diverged()) return r;
  r.value *= prefactor;
  r.error *= prefactor;
  return r;
}

quad::Result spectral_radial_moment(const CovarianceModel& model, double power,
                                    const quad::Options& opt) {
  if (model.kind() == KernelKind::Riesz) {
    // A pure power of rho: divergent at one end or the other.
    return {quad::kInfinity, quad::kInfinity, quad::Status::Diverged};
  }
  if (power <= -1.0) {
    // f^(0) = f(R^d) > 0 makes the origin non-integrable.
    return {quad::kInfinity, quad::kInfinity, quad::Status::Diverged};
  }
  auto g = [power](double rho) { return power == 0.0 ? 1.0 : std::pow(rho, power); };
  return radial_integral(model, g, 1.0, opt, power < 0.0);
}

quad::Result r_angular_constant(int dimension, const quad::Options& opt) {
  if (dimension == 1) {
    // Two directions, each \int_0^inf (1 - cos r)/r^2 dr = pi/2.
    return {kPi, 0.0, quad::Status::Converged};
  }
  if (dimension != 2) {
    // prod_j 2 k(z_j) is the tent transform with unit boxes.
    quad::Result j = psi_power_integral(1.0, 1.0, dimension, 1.0, opt);
    const double scale = std::pow(0.5, dimension);
    return {j.value * scale, j.error * scale, j.status};
  }

  quad::Options radial_opt = opt;
  radial_opt.rel_tol = std::min(opt.rel_tol, 1e-9);
  constexpr double kCut = 4000.0;
  quad::Options tail_opt = radial_opt;

  // Direction (cos t, sin t) with 0 <= t <= pi/4; the full circle is eight
  // copies of this sector.
  auto direction_integral = [&](double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    auto f = [c, s](double r) { return one_minus_cos_ratio(r * c) * one_minus_cos_ratio(r * s); };
    const double body = quad::integrate_split(f, 0.0, kCut, 2.0 * kPi / c, radial_opt).value;
    // Past the cut, (1 - cos(rc))/(rc)^2 ~ (rc)^{-2}; the oscillating
    // remainder is O(kCut^-2) and dropped.
    double tail = 0.0;
    if (s == 0.0) {
      tail = 0.5 / (kCut * c * c);
    } else {
      tail = s / (c * c) * quartic_tail(kCut * s, tail_opt);
    }
    return body + tail;
  };
  quad::Result sector = quad::integrate(direction_integral, 0.0, 0.25 * kPi, opt);
  sector.value *= 8.0;
  sector.error = 8.0 * sector.error + 8.0 * 0.25 * kPi / (kCut * kCut);
  return sector;
}

quad::Result r_quantity(const CovarianceModel& model, const quad::Options& opt) {
  const int d = model.dimension();
  if (d == 1 || model.kind() == KernelKind::Riesz) {
    return {quad::kInfinity, quad::kInfinity, quad::Status::Diverged};
  }
  // Swapping the s- and z-integrals and going radial separates
  // \int_0^inf rho^{d-2} f^(rho) drho from a purely angular constant.
  const quad::Result moment = spectral_radial_moment(model, d - 2.0, opt);
  if (moment.diverged()) return moment;
  const quad::Result angular = r_angular_constant(d, opt);
  const double scale = std::pow(kPi, -d);
  quad::Result out;
  out.value = scale * moment.value * angular.value;
  out.error = scale * (moment.error * angular.value + moment.value * angular.error);
  out.status = moment.converged() && angular.converged() ? quad::Status::Converged
                                                         : quad::Status::NotConverged;
  return out;
}

double ScalingRate::operator()(double n) const {
  double v = std::pow(n, power);
  if (log_corrected) v /= std::sqrt(std::log(n));
  return v;
}

std::string ScalingRate::describe() const {
  std::ostringstream os;
  if (log_corrected) {
    os << "sqrt(N/log N)";
  } else {
    os << "N^" << power;
  }
  return os.str();
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::MultiDimFinite: return "MultiDimFinite";
    case Regime::OneDimFinite: return "OneDimFinite";
    case Regime::RieszA: return "RieszA";
    case Regime::RieszB: return "RieszB";
    case Regime::RieszC: return "RieszC";
  }
  return "unknown";
}

std::string to_string(LimitFamily family) {
  switch (family) {
    case LimitFamily::G: return "g";
    case LimitFamily::D1Finite: return "d1-finite";
    case LimitFamily::C1: return "c1";
    case LimitFamily::C2: return "c2";
    case LimitFamily::C3: return "c3";
  }
  return "unknown";
}

RegimeClassification classify_regime(const CovarianceModel& model) {
  if (model.kind() == KernelKind::Riesz) {
    const double b = model.beta();
    if (std::abs(b - 1.0) < 1e-12) {
      return {Regime::RieszB, {0.5, true}, LimitFamily::C2, true};
    }
    if (b < 1.0) return {Regime::RieszA, {0.5 * b, false}, LimitFamily::C1, true};
    return {Regime::RieszC, {0.5 * (2.0 - b), false}, LimitFamily::C3, true};
  }
  if (model.dimension() == 1) {
    if (!std::isfinite(total_mass(model))) {
      throw UnsupportedRegimeError("d=1 model with infinite mass: " + model.describe());
    }
    return {Regime::OneDimFinite, {0.5, true}, LimitFamily::D1Finite, model.rajchman()};
  }
  // R(f) < inf iff the radial moment of order d-2 is finite; the angular
  // factor is always finite.
  const quad::Result moment = spectral_radial_moment(model, model.dimension() - 2.0);
  if (moment.diverged() || !std::isfinite(moment.value)) {
    throw UnsupportedRegimeError(
        "R(f) is infinite in d>=2 and the kernel is not Riesz; no canonical functional CLT for " +
        model.describe());
  }
  return {Regime::MultiDimFinite, {0.5, false}, LimitFamily::G, true};
}

}  // namespace pam
