#include <algorithm>
#include <array>
#include <cmath>

#include <doctest.h>

#include "blowup_lab/error.hpp"
#include "blowup_lab/noise.hpp"
#include "blowup_lab/numerics.hpp"

using namespace blowup_lab;

TEST_CASE("kernel values") {
  const std::array<double, 2> x{0.2, -0.1};
  const std::array<double, 2> y{-0.4, 0.7};
  const double dist = std::hypot(0.6, 0.8);
  CHECK(NoiseKernel::riesz(0.5)(x, y) == doctest::Approx(std::pow(dist, -0.5)));
  CHECK(NoiseKernel::ou(1.0)(x, y) == doctest::Approx(std::exp(-dist)));
  CHECK(NoiseKernel::exponential_type()(x, y) == doctest::Approx(std::exp(0.08 + 0.07)));
  CHECK(NoiseKernel::poisson()(x, y) == doctest::Approx(std::pow(1.0 + dist * dist, -1.5)));
  CHECK(NoiseKernel::cauchy()(x, y) == doctest::Approx(1.0 / 1.36 + 1.0 / 1.64));
  CHECK_FALSE(NoiseKernel::exponential_type().stationary());
  CHECK(NoiseKernel::ou(1.0).stationary());
}

TEST_CASE("parse_kernel") {
  CHECK(parse_kernel("ou:1.5").kind() == NoiseKind::ou);
  CHECK(parse_kernel("riesz:0.3").param() == doctest::Approx(0.3));
  CHECK_THROWS_AS(parse_kernel("matern:1"), DomainError);
}

TEST_CASE("K_{R,f} in one dimension") {
  // The farthest pair in B(0, 1) is at distance 2.
  CHECK(k_inf(NoiseKernel::ou(1.0), 1.0, 1).value == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
  CHECK(k_inf(NoiseKernel::poisson(), 1.0, 1).value == doctest::Approx(0.2).epsilon(1e-6));
  // exp(-x y) is smallest at x = y = +-R.
  CHECK(k_inf(NoiseKernel::exponential_type(), 1.0, 1).value ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(k_inf(NoiseKernel::riesz(0.5), 2.0, 1).value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("K_{R,f} in two dimensions") {
  const auto r = k_inf(NoiseKernel::ou(2.0), 1.0, 2);
  CHECK(r.value == doctest::Approx(std::exp(-4.0)).epsilon(1e-5));
  CHECK(r.color_holds);
}

TEST_CASE("Dalang condition for Riesz kernels") {
  // Finite iff beta < min(d, alpha).
  const auto spec = BernsteinSpec::stable(1.5);
  CHECK(dalang_check(NoiseKernel::riesz(0.8), spec, 1).finite);
  CHECK_FALSE(dalang_check(NoiseKernel::riesz(0.8), BernsteinSpec::stable(0.5), 1).finite);
  CHECK(dalang_check(NoiseKernel::riesz(1.2), BernsteinSpec::stable(1.5), 2).finite);
  CHECK_FALSE(dalang_check(NoiseKernel::riesz(1.6), BernsteinSpec::stable(1.5), 2).finite);
}

TEST_CASE("Dalang condition for white noise") {
  CHECK(dalang_check(NoiseKernel::white(), BernsteinSpec::stable(1.5), 1).finite);
  CHECK_FALSE(dalang_check(NoiseKernel::white(), BernsteinSpec::stable(0.9), 1).finite);
  CHECK_FALSE(dalang_check(NoiseKernel::white(), BernsteinSpec::drift_only(), 2).finite);
  // int dr / (1 + r^2) = pi / 2.
  const auto w = dalang_check(NoiseKernel::white(), BernsteinSpec::drift_only(), 1);
  CHECK(w.value == doctest::Approx(std::acos(0.0)).epsilon(1e-6));
}

TEST_CASE("sampled fields reproduce the covariance") {
  const FieldGrid grid{1, 32, 8.0, true};
  const auto kernel = NoiseKernel::ou(1.0);
  const FieldSampler sampler(kernel, grid);
  CHECK_FALSE(sampler.dense());
  const std::size_t n = 4000;
  const std::size_t lag = 3;
  std::vector<double> v0(n);
  std::vector<double> prod(n);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < n; ++i) {
    sampler.sample(2, i, f);
    v0[i] = f[5] * f[5];
    prod[i] = f[5] * f[5 + lag];
  }
  CHECK(std::abs(numerics::mean(v0) - 1.0) <= 4.0 * numerics::standard_error(v0));
  const double expected = std::exp(-static_cast<double>(lag) * grid.spacing());
  CHECK(std::abs(numerics::mean(prod) - expected) <= 4.0 * numerics::standard_error(prod));
}

TEST_CASE("non-stationary kernels use the dense path") {
  // 1 + min(x, y): Brownian motion started from a unit Gaussian.
  const auto kernel = NoiseKernel::custom(
      [](std::span<const double> x, std::span<const double> y) { return 1.0 + std::min(x[0], y[0]); });
  const FieldGrid grid{1, 16, 2.0, false};
  const FieldSampler sampler(kernel, grid);
  CHECK(sampler.dense());
  CHECK(sample_field(kernel, grid, 1, 0) == sample_field(kernel, grid, 1, 0));
  std::vector<double> last(3000);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < last.size(); ++i) {
    sampler.sample(4, i, f);
    last[i] = f.back() * f.back();
  }
  const double expected = 1.0 + 15.0 * grid.spacing();
  CHECK(std::abs(numerics::mean(last) - expected) <= 4.0 * numerics::standard_error(last));
}

TEST_CASE("the exponential-type kernel is not sampled") {
  CHECK_THROWS(FieldSampler(NoiseKernel::exponential_type(), FieldGrid{1, 8, 1.0, false}));
}
