#include <array>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "blowup_lab/heat_kernel.hpp"

using namespace blowup_lab;

namespace {

constexpr double kPi = std::numbers::pi;

double gauss(double t, double r, int d) {
  return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
}

double cauchy(double t, double x) { return t / (kPi * (t * t + x * x)); }

}  // namespace

TEST_CASE("Gaussian kernel for phi(s) = s") {
  for (int d = 1; d <= 3; ++d) {
    const HeatKernelEngine engine(BernsteinSpec::drift_only(), d);
    for (double t : {0.3, 1.0, 4.0}) {
      for (double r : {0.0, 0.7, 2.5}) {
        CAPTURE(d);
        CHECK(kernel_value_radial(engine, t, r) == doctest::Approx(gauss(t, r, d)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("Cauchy kernel for phi(s) = s^{1/2}") {
  const HeatKernelEngine engine(BernsteinSpec::stable(1.0), 1);
  for (double t : {0.5, 1.0, 3.0}) {
    for (double x : {0.0, 0.4, 5.0}) {
      const std::array<double, 1> pt{x};
      CHECK(kernel_value(engine, t, pt) == doctest::Approx(cauchy(t, x)).epsilon(1e-7));
    }
  }
}

TEST_CASE("three-dimensional point evaluation is radial") {
  const HeatKernelEngine engine(BernsteinSpec::stable(1.5), 3);
  const std::array<double, 3> pt{0.3, -0.4, 1.2};
  CHECK(kernel_value(engine, 1.0, pt) == doctest::Approx(kernel_value_radial(engine, 1.0, 1.3)));
}

TEST_CASE("L2 norms") {
  for (double t : {0.5, 2.0}) {
    CHECK(kernel_l2(HeatKernelEngine(BernsteinSpec::drift_only(), 1), t) ==
          doctest::Approx(1.0 / std::sqrt(8.0 * kPi * t)).epsilon(1e-7));
    CHECK(kernel_l2(HeatKernelEngine(BernsteinSpec::stable(1.0), 1), t) ==
          doctest::Approx(1.0 / (2.0 * kPi * t)).epsilon(1e-7));
  }
}

TEST_CASE("subordination route agrees with the Fourier route") {
  const auto spec = BernsteinSpec::stable(1.5);
  const HeatKernelEngine engine(spec, 1, SubordinatorSampler(spec, 9));
  for (double r : {0.0, 1.0}) {
    const auto mc = kernel_value_mc(engine, 1.0, r, 40000);
    CHECK(std::abs(mc.estimate - kernel_value_radial(engine, 1.0, r)) <= 4.0 * mc.stderr_);
  }
}

TEST_CASE("ball mass from both sides") {
  const auto spec = BernsteinSpec::gamma();
  const HeatKernelEngine engine(spec, 1, SubordinatorSampler(spec, 4));
  const auto mc = ball_mass(engine, 2.0, 1.0, 40000);
  CHECK(std::abs(mc.estimate - ball_mass_fourier(engine, 2.0, 1.0)) <= 4.0 * mc.stderr_);
  // Gaussian in one dimension: erf(R / (2 sqrt t)).
  const HeatKernelEngine heat(BernsteinSpec::drift_only(), 1);
  CHECK(ball_mass_fourier(heat, 1.0, 1.5) == doctest::Approx(std::erf(0.75)).epsilon(1e-7));
}

TEST_CASE("bound constants") {
  for (int d = 1; d <= 3; ++d) {
    CHECK(lower_bound_constant(d) ==
          doctest::Approx(std::pow(4.0 * kPi, -0.5 * d) * std::exp(-0.25) * window_bound()));
  }
  CHECK(lower_bound_constant(1) == doctest::Approx(0.002122529632369132).epsilon(1e-12));
  const double e = std::numbers::e;
  CHECK(ball_mass_constant(1) ==
        doctest::Approx((std::sqrt(e) - 1.0) / ((e - 1.0) * std::sqrt(kPi))));
  CHECK(l2_bound_constant(1) == doctest::Approx(2.0 / (2.0 * kPi * e)));
}

TEST_CASE("kernel bounds") {
  for (const char* id : {"stable:1.5", "gamma"}) {
    const HeatKernelEngine engine(parse_spec(id), 1);
    for (double t : {0.5, 2.0}) {
      const auto rep = verify_kernel_bounds(engine, t);
      CAPTURE(id);
      CAPTURE(t);
      CHECK(rep.lower_ok);
      CHECK(rep.factor_ok);
      CHECK(rep.l2_ok);
    }
  }
}
