#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Quadrature, fitting and reduction helpers shared by the analytic modules.
// Gauss-Kronrod and tanh-sinh rules come from Boost.Math; this layer adds
// support detection on log scales, oscillatory panel summation and
// divergence probes.
namespace blowup_lab::numerics {

using RealFn = std::function<double(double)>;

// Adaptive 31-point Gauss-Kronrod on a finite interval.
double integrate(const RealFn& f, double a, double b, double rel_tol = 1e-11);

// Integral of f over (a, b) with 0 <= a < b <= inf, computed in the
// variable u = log r. Infinite or zero endpoints are truncated once the
// e-fold panels become negligible. Throws QuadratureError when the tail
// does not settle before |u| reaches the representable range.
double integrate_log(const RealFn& f, double a, double b, double rel_tol = 1e-11);

// Double-exponential (tanh-sinh / exp-sinh) quadrature, for integrands
// with endpoint singularities on (a, b), b possibly infinite.
double integrate_de(const RealFn& f, double a, double b, double rel_tol = 1e-8);

enum class Oscillator { cosine, sine, bessel_j };

// I = \int_0^\infty amplitude(r) w(omega r) dr, with w = cos, sin or J_nu.
// The half line is split at the zeros of w; when the panel sums do not
// settle quickly the partial sums are accelerated with Wynn's epsilon
// algorithm. `scale` is a rough length on which the amplitude varies.
double oscillatory_integral(const RealFn& amplitude, Oscillator kind, double nu,
                            double omega, double scale, double rel_tol = 1e-10);

// Wynn epsilon extrapolation of a sequence of partial sums.
double wynn_epsilon(std::span<const double> partial_sums);

// Least-squares slope of ys against xs.
double fit_slope(std::span<const double> xs, std::span<const double> ys);

// Geometric grid of n points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);

// Least-squares slope of log|f| against log x over a geometric grid.
// Returns -inf when f underflows to zero at the right end of the grid.
double loglog_slope(const RealFn& f, double lo, double hi, std::size_t n = 25);

// Pairwise (cascade) summation; the result depends only on the order of
// the input, not on how it was produced.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Standard error of the mean.
double standard_error(std::span<const double> values);

// Worker count from BLOWUP_LAB_THREADS, falling back to the hardware
// concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) across worker_count() threads. Each index
// is processed exactly once; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace blowup_lab::numerics
