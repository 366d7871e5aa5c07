#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "pam/covariance_models.hpp"
#include "pam/errors.hpp"

using namespace pam;
using std::numbers::pi;

namespace {

std::vector<CovarianceModel> catalog() {
  std::vector<CovarianceModel> out;
  for (int d = 1; d <= 3; ++d) out.push_back(CovarianceModel::gaussian(d));
  out.push_back(CovarianceModel::cauchy());
  out.push_back(CovarianceModel::space_time_white());
  for (double b : {0.25, 0.5, 0.75}) out.push_back(CovarianceModel::riesz(1, b));
  for (double b : {0.5, 1.0, 1.5}) {
    out.push_back(CovarianceModel::riesz(2, b));
    out.push_back(CovarianceModel::riesz(3, b));
  }
  return out;
}

}  // namespace

TEST_CASE("constructor invariants") {
  CHECK_THROWS_AS(CovarianceModel::riesz(1, 1.0), InvariantError);
  CHECK_THROWS_AS(CovarianceModel::riesz(1, 2.5), InvariantError);
  CHECK_THROWS_AS(CovarianceModel::riesz(2, 2.0), InvariantError);
  CHECK_THROWS_AS(CovarianceModel::riesz(3, 0.0), InvariantError);
  CHECK_THROWS_AS(CovarianceModel::gaussian(0), InvariantError);
  CHECK_NOTHROW(CovarianceModel::riesz(3, 1.9));

  RadialTable t;
  t.radius = {0.0, 1.0, 0.5};
  t.density = {1.0, 0.5, 0.2};
  CHECK_THROWS_AS(CovarianceModel::tabulated(1, t), InvariantError);
  t.radius = {0.0, 1.0, 2.0};
  t.density = {1.0, -0.5, 0.2};
  CHECK_THROWS_AS(CovarianceModel::tabulated(1, t), InvariantError);
  t.density = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(CovarianceModel::tabulated(1, t), InvariantError);
}

TEST_CASE("spectral density examples") {
  const double zero[1] = {0.0};
  CHECK(spectral_density(CovarianceModel::gaussian(1), zero) == doctest::Approx(1.0).epsilon(1e-15));
  // f^(0) = f(R) for a finite measure; (1 + x^2)^-1 has mass pi.
  CHECK(spectral_density(CovarianceModel::cauchy(), zero) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(spectral_density(CovarianceModel::cauchy(), zero) == doctest::Approx(total_mass(CovarianceModel::cauchy())));
  CHECK(spectral_density(CovarianceModel::space_time_white(), zero) == 1.0);
  CHECK_THROWS_AS(spectral_density(CovarianceModel::riesz(1, 0.5), zero), DomainError);

  const double two[1] = {2.0};
  const double kappa = riesz_constant(0.5, 1);
  const double expect = std::pow(2.0, 0.5) * std::sqrt(pi) * std::tgamma(0.25) / std::tgamma(0.25);
  CHECK(kappa == doctest::Approx(expect).epsilon(1e-14));
  CHECK(spectral_density(CovarianceModel::riesz(1, 0.5), two) ==
        doctest::Approx(kappa / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Riesz constant is the Fourier transform of |x|^-beta") {
  // Pair |x|^-beta with a Gaussian on both sides:
  //   \int |x|^-beta e^{-|x|^2/2} dx = (2 pi)^-d \int kappa |xi|^{beta-d} (2 pi)^{d/2} e^{-|xi|^2/2} dxi.
  boost::math::quadrature::exp_sinh<double> es;
  for (int d = 1; d <= 3; ++d) {
    for (double beta : {0.3, 0.5, 0.9, 1.2, 1.7}) {
      if (beta >= std::min(2.0, static_cast<double>(d))) continue;
      const double area = sphere_area(d);
      const double lhs = area * es.integrate([&](double r) {
        return std::pow(r, d - 1 - beta) * std::exp(-0.5 * r * r);
      });
      const double rhs = std::pow(2 * pi, -0.5 * d) * riesz_constant(beta, d) * area *
                         es.integrate([&](double r) { return std::pow(r, beta - 1) * std::exp(-0.5 * r * r); });
      CHECK(rhs == doctest::Approx(lhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectral density is nonnegative on random points") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 5.0);
  for (const auto& m : catalog()) {
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> xi(m.dimension());
      for (auto& v : xi) v = g(rng);
      CHECK(spectral_density(m, xi) >= 0.0);
    }
  }
}

TEST_CASE("total mass") {
  CHECK(total_mass(CovarianceModel::gaussian(1)) == doctest::Approx(1.0));
  CHECK(total_mass(CovarianceModel::gaussian(3)) == doctest::Approx(1.0));
  CHECK(total_mass(CovarianceModel::space_time_white()) == 1.0);
  CHECK(std::isinf(total_mass(CovarianceModel::riesz(2, 0.5))));

  boost::math::quadrature::sinh_sinh<double> ss;
  const double oracle = ss.integrate([](double x) { return 1.0 / (1.0 + x * x); });
  CHECK(oracle == doctest::Approx(pi).epsilon(1e-12));
  CHECK(total_mass(CovarianceModel::cauchy()) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("upsilon") {
  const auto white = upsilon(CovarianceModel::space_time_white(), 4.0);
  REQUIRE(white.converged());
  CHECK(white.value == doctest::Approx(0.25).epsilon(1e-7));

  // Gaussian d = 2, beta = 1: (2 pi)^-2 2 pi \int r e^{-r^2/2} / (1 + r^2) dr.
  boost::math::quadrature::exp_sinh<double> es;
  const double oracle =
      es.integrate([](double r) { return r * std::exp(-0.5 * r * r) / (1.0 + r * r); }) / (2 * pi);
  const auto gauss2 = upsilon(CovarianceModel::gaussian(2), 1.0);
  REQUIRE(gauss2.converged());
  CHECK(gauss2.value == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(gauss2.value == doctest::Approx(0.0734428946).epsilon(1e-8));

  CHECK_THROWS_AS(upsilon(CovarianceModel::gaussian(1), 0.0), DomainError);

  for (const auto& m : catalog()) {
    CAPTURE(m.describe());
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const auto u = upsilon(m, beta);
      REQUIRE(u.converged());
      CHECK(std::isfinite(u.value));
      CHECK(u.value <= prev * (1 + 1e-9));
      prev = u.value;
    }
  }
}

TEST_CASE("R(f)") {
  for (const auto& m : catalog()) {
    if (m.dimension() != 1) continue;
    CHECK(std::isinf(r_quantity(m).value));
  }

  // Gaussian f^ factorises over coordinates, so in d = 2
  // R = pi^-2 \int_0^inf phi(s)^2 ds with phi(s) = \int e^{-z^2/2} (1 - cos sz)/(sz)^2 dz.
  // F(s) = s^2 phi(s) has F'' = sqrt(2 pi) e^{-s^2/2}, F(0) = F'(0) = 0.
  auto phi = [](double s) {
    const double c = std::sqrt(2 * pi);
    if (s < 1e-3) return c * (0.5 - s * s / 24.0);
    return c * (s * std::sqrt(pi / 2) * std::erf(s / std::sqrt(2.0)) + std::expm1(-0.5 * s * s)) / (s * s);
  };
  boost::math::quadrature::exp_sinh<double> es;
  const double oracle = es.integrate([&](double s) { return phi(s) * phi(s); }) / (pi * pi);
  const auto r = r_quantity(CovarianceModel::gaussian(2));
  REQUIRE(r.converged());
  CHECK(r.value == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.593069508619).epsilon(1e-8));

  // Scale-free: z -> z / s turns the s-integral into \int_0^inf s^-beta ds.
  for (double beta : {0.5, 1.0, 1.5}) CHECK(std::isinf(r_quantity(CovarianceModel::riesz(3, beta)).value));
}

TEST_CASE("regime classification") {
  auto c = classify_regime(CovarianceModel::gaussian(1));
  CHECK(c.regime == Regime::OneDimFinite);
  CHECK(c.rate.power == 0.5);
  CHECK(c.rate.log_corrected);
  CHECK(c.family == LimitFamily::D1Finite);
  CHECK(c.rajchman);

  c = classify_regime(CovarianceModel::riesz(2, 0.5));
  CHECK(c.regime == Regime::RieszA);
  CHECK(c.rate.power == doctest::Approx(0.25));
  CHECK_FALSE(c.rate.log_corrected);

  c = classify_regime(CovarianceModel::riesz(3, 1.5));
  CHECK(c.regime == Regime::RieszC);
  CHECK(c.rate.power == doctest::Approx(0.25));

  c = classify_regime(CovarianceModel::riesz(2, 1.0));
  CHECK(c.regime == Regime::RieszB);
  CHECK(c.rate.log_corrected);
  CHECK(c.family == LimitFamily::C2);

  c = classify_regime(CovarianceModel::gaussian(2));
  CHECK(c.regime == Regime::MultiDimFinite);
  CHECK(c.family == LimitFamily::G);
  CHECK(c.rate(64.0) == doctest::Approx(8.0));

  CHECK(classify_regime(CovarianceModel::cauchy()).regime == Regime::OneDimFinite);
  CHECK(classify_regime(CovarianceModel::space_time_white()).regime == Regime::OneDimFinite);
}

TEST_CASE("classification is total and matches the model metadata") {
  for (const auto& m : catalog()) {
    CAPTURE(m.describe());
    const auto c = classify_regime(m);
    const bool riesz = m.kind() == KernelKind::Riesz;
    switch (c.regime) {
      case Regime::MultiDimFinite:
        CHECK(m.dimension() >= 2);
        CHECK(std::isfinite(r_quantity(m).value));
        break;
      case Regime::OneDimFinite:
        CHECK(m.dimension() == 1);
        CHECK(std::isfinite(total_mass(m)));
        break;
      case Regime::RieszA: CHECK((riesz && m.beta() < 1.0)); break;
      case Regime::RieszB: CHECK((riesz && m.beta() == 1.0)); break;
      case Regime::RieszC: CHECK((riesz && m.beta() > 1.0)); break;
    }
    // sigma_N / sqrt(log N) is increasing once N > e.
    double prev = 0.0;
    for (double n = 3.0; n < 1e6; n *= 1.7) {
      CHECK(c.rate(n) >= prev);
      prev = c.rate(n);
    }
  }
}

TEST_CASE("tabulated model") {
  RadialTable t;
  for (int i = 0; i <= 40; ++i) {
    const double r = 0.25 * i;
    t.radius.push_back(r);
    t.density.push_back(std::exp(-0.5 * r * r));
  }
  const auto m = CovarianceModel::tabulated(1, t);
  const double x[1] = {1.1};
  const double w = std::log(1.1 / 1.0) / std::log(1.25 / 1.0);
  const double loglog = std::exp((1 - w) * -0.5 + w * (-0.5 * 1.5625));
  CHECK(spectral_density(m, x) == doctest::Approx(loglog).epsilon(1e-12));
  CHECK(spectral_density(m, x) == doctest::Approx(std::exp(-0.5 * 1.21)).epsilon(0.02));
  const double far[1] = {11.0};
  CHECK_THROWS_AS(spectral_density(m, far), DomainError);
  CHECK(classify_regime(m).regime == Regime::OneDimFinite);
}
