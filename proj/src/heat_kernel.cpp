#include "blowup_lab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }

double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

// Slope, in u = log rho, of log(e^{-t phi(rho^2)} rho^power) between
// rho = 1e6 and 1e9. The Fourier integrals need it negative.
double tail_slope(const BernsteinSpec& spec, double t, double power) {
  const double u1 = std::log(1e6);
  const double u2 = std::log(1e9);
  const auto g = [&](double u) { return power * u - t * spec(std::exp(2.0 * u)); };
  return (g(u2) - g(u1)) / (u2 - u1);
}

void require_decay(const BernsteinSpec& spec, double t, double power, const char* what) {
  if (!(tail_slope(spec, t, power) < -1e-3)) {
    throw DivergenceError(std::string(what) + ": e^{-t phi(|xi|^2)} does not decay fast enough (" +
                          spec.id() + ", t = " + std::to_string(t) + ")");
  }
}

// Frequency at which t phi(rho^2) = 1; the amplitude varies on this scale.
double frequency_scale(const BernsteinSpec& spec, double t) {
  try {
    return std::sqrt(inverse(spec, 1.0 / t));
  } catch (const RangeError&) {
    return 1.0;
  }
}

// e^{-t phi(rho^2)}, with phi(0+) where rho^2 underflows. Callers have
// checked that the amplitude decays, so it is 0 where rho^2 overflows.
double amplitude(const BernsteinSpec& spec, double t, double rho) {
  const double s = rho * rho;
  if (s > 1e300) return 0.0;
  return std::exp(-t * (s > 0.0 ? spec(s) : spec.killing()));
}

void check_dim(int d) {
  if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
}

}  // namespace

HeatKernelEngine::HeatKernelEngine(BernsteinSpec spec, int dim, double fourier_tol)
    : spec_(std::move(spec)), dim_(dim), fourier_tol_(fourier_tol) {
  check_dim(dim);
  if (!(fourier_tol > 0.0)) throw DomainError("fourier_tol must be positive");
}

HeatKernelEngine::HeatKernelEngine(BernsteinSpec spec, int dim, SubordinatorSampler sampler,
                                   double fourier_tol)
    : HeatKernelEngine(std::move(spec), dim, fourier_tol) {
  sampler_.emplace(std::move(sampler));
}

double kernel_value_radial(const HeatKernelEngine& engine, double t, double radius) {
  if (!(t > 0.0)) throw DomainError("kernel_value: t must be positive");
  if (!(radius >= 0.0)) throw DomainError("kernel_value: |x| must be >= 0");
  const auto& spec = engine.spec();
  const int d = engine.dim();
  const double tol = engine.fourier_tol();
  const auto decay = [&spec, t](double rho) { return amplitude(spec, t, rho); };
  if (radius == 0.0) {
    require_decay(spec, t, d, "kernel_value");
    const double v = numerics::integrate_log(
        [&](double rho) { return decay(rho) * std::pow(rho, d - 1); }, 0.0, kInf, tol);
    return std::pow(2.0 * kPi, -d) * sphere_area(d) * v;
  }
  // The Bessel reduction behaves like rho^{(d-1)/2} times an oscillation.
  require_decay(spec, t, (d - 1) / 2.0, "kernel_value");
  const double scale = frequency_scale(spec, t);
  double v = 0.0;
  switch (d) {
    case 1:
      v = numerics::oscillatory_integral(decay, numerics::Oscillator::cosine, 0.0, radius, scale,
                                         tol) /
          kPi;
      break;
    case 2:
      v = numerics::oscillatory_integral([&](double rho) { return decay(rho) * rho; },
                                         numerics::Oscillator::bessel_j, 0.0, radius, scale, tol) /
          (2.0 * kPi);
      break;
    case 3:
      v = numerics::oscillatory_integral([&](double rho) { return decay(rho) * rho; },
                                         numerics::Oscillator::sine, 0.0, radius, scale, tol) /
          (2.0 * kPi * kPi * radius);
      break;
  }
  // Cancellation far in the tail can leave round-off of either sign.
  return std::max(v, 0.0);
}

double kernel_value(const HeatKernelEngine& engine, double t, std::span<const double> x) {
  if (static_cast<int>(x.size()) != engine.dim()) {
    throw DomainError("kernel_value: point has " + std::to_string(x.size()) +
                      " coordinates, expected " + std::to_string(engine.dim()));
  }
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return kernel_value_radial(engine, t, std::sqrt(r2));
}

McEstimate kernel_value_mc(const HeatKernelEngine& engine, double t, double radius,
                           std::size_t n, std::uint64_t stream_base) {
  if (!engine.sampler()) throw UnsupportedError("kernel_value_mc: engine has no sampler");
  const double half_d = engine.dim() / 2.0;
  const auto draws = engine.sampler()->sample(t, n, stream_base);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = draws[i];
    v[i] = s > 0.0 ? std::pow(4.0 * kPi * s, -half_d) * std::exp(-radius * radius / (4.0 * s))
                   : 0.0;
  }
  return {numerics::mean(v), numerics::standard_error(v)};
}

double kernel_l2(const HeatKernelEngine& engine, double t) {
  if (!(t > 0.0)) throw DomainError("kernel_l2: t must be positive");
  return kernel_value_radial(engine, 2.0 * t, 0.0);
}

McEstimate ball_mass(const HeatKernelEngine& engine, double t, double radius, std::size_t n,
                     std::uint64_t stream_base) {
  if (!(t > 0.0)) throw DomainError("ball_mass: t must be positive");
  if (!(radius >= 0.0)) throw DomainError("ball_mass: radius must be >= 0");
  if (radius == 0.0) return {0.0, 0.0};
  if (!engine.sampler()) throw UnsupportedError("ball_mass: engine has no sampler");
  const double half_d = engine.dim() / 2.0;
  const auto draws = engine.sampler()->sample(t, n, stream_base);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = draws[i];
    v[i] = s > 0.0 ? boost::math::gamma_p(half_d, radius * radius / (4.0 * s)) : 1.0;
  }
  return {numerics::mean(v), numerics::standard_error(v)};
}

double ball_mass_fourier(const HeatKernelEngine& engine, double t, double radius) {
  if (!(t > 0.0)) throw DomainError("ball_mass: t must be positive");
  if (!(radius >= 0.0)) throw DomainError("ball_mass: radius must be >= 0");
  if (radius == 0.0) return 0.0;
  const auto& spec = engine.spec();
  const int d = engine.dim();
  require_decay(spec, t, (d - 3) / 2.0, "ball_mass");
  const double scale = frequency_scale(spec, t);
  const auto decay = [&spec, t](double rho) { return amplitude(spec, t, rho); };
  double v = 0.0;
  if (d == 1) {
    v = 2.0 / kPi *
        numerics::oscillatory_integral([&](double rho) { return decay(rho) / rho; },
                                       numerics::Oscillator::sine, 0.0, radius, scale,
                                       engine.fourier_tol());
  } else {
    v = std::pow(2.0 * kPi, -d / 2.0) * std::pow(radius, d / 2.0) * sphere_area(d) *
        numerics::oscillatory_integral(
            [&](double rho) { return decay(rho) * std::pow(rho, d / 2.0 - 1.0); },
            numerics::Oscillator::bessel_j, d / 2.0, radius, scale, engine.fourier_tol());
  }
  return std::clamp(v, 0.0, 1.0);
}

double lower_bound_constant(int dim) {
  check_dim(dim);
  return std::pow(4.0 * kPi, -dim / 2.0) * std::exp(-0.25) * window_bound();
}

double l2_bound_constant(int dim) {
  check_dim(dim);
  return std::pow(2.0 * kPi, -dim) * unit_ball_volume(dim) / kE;
}

double ball_mass_constant(int dim) {
  check_dim(dim);
  return subord_bound(0.5) / std::tgamma(dim / 2.0);
}

KernelBoundsReport verify_kernel_bounds(const HeatKernelEngine& engine, double t) {
  const auto& spec = engine.spec();
  const int d = engine.dim();
  KernelBoundsReport rep;
  rep.t = t;

  std::map<double, double> memo;
  const auto p = [&](double r) {
    if (auto it = memo.find(r); it != memo.end()) return it->second;
    const double v = kernel_value_radial(engine, t, r);
    memo.emplace(r, v);
    return v;
  };

  // (i) The origin is excluded: p_t(0) may be infinite, and by radial
  // monotonicity the minimum sits on the outer radius anyway.
  rep.lower_radius = 1.0 / std::sqrt(inverse(spec, 2.0 / t));
  const double norm = std::pow(inverse(spec, 0.5 / t), d / 2.0);
  rep.lower_ratio_min = kInf;
  for (int k = 1; k <= 20; ++k) {
    const double r = rep.lower_radius * k / 20.0;
    rep.lower_ratio_min = std::min(rep.lower_ratio_min, p(r) / norm);
  }
  rep.lower_constant = lower_bound_constant(d);
  rep.lower_ok = rep.lower_ratio_min >= rep.lower_constant;

  // (ii) Checked on a 9-point grid per axis over a few kernel widths,
  // using the first coordinate axis for x and y (the kernel is radial).
  try {
    rep.p_t_zero = p(0.0);
  } catch (const DivergenceError&) {
    rep.p_t_zero = kInf;
  }
  rep.factor_applicable = rep.p_t_zero <= 1.0;
  rep.factor_ok = true;
  if (rep.factor_applicable) {
    const double width = 3.0 / std::sqrt(inverse(spec, 1.0 / t));
    rep.factor_min = kInf;
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        const double x = width * (i - 4) / 4.0;
        const double y = width * (j - 4) / 4.0;
        const double gap = p(std::abs(x - y) / 2.0) - p(std::abs(x)) * p(std::abs(y));
        rep.factor_min = std::min(rep.factor_min, gap);
      }
    }
    rep.factor_ok = rep.factor_min >= -1e-12;
  }

  // (iii)
  rep.l2_constant = l2_bound_constant(d);
  rep.l2_ok = true;
  for (int k = 0; k <= 4; ++k) {
    const double s = t * std::pow(2.0, k);
    const double ratio = kernel_l2(engine, s) / std::pow(inverse(spec, 0.5 / s), d / 2.0);
    rep.l2_times.push_back(s);
    rep.l2_ratios.push_back(ratio);
    rep.l2_ok = rep.l2_ok && std::isfinite(ratio) && ratio >= rep.l2_constant;
  }
  return rep;
}

}  // namespace blowup_lab
