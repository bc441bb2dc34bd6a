#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blowup_lab/bernstein.hpp"

namespace blowup_lab {

enum class NoiseKind { white, riesz, exponential_type, ou, poisson, cauchy, custom };

std::string_view to_string(NoiseKind kind);

// Spatial covariance f(x, y) of the noise, with the stationary majorant g
// and its radial Fourier transform where the catalog provides them.
class NoiseKernel {
 public:
  using Covariance = std::function<double(std::span<const double>, std::span<const double>)>;
  using Radial = std::function<double(double)>;

  static NoiseKernel white();
  static NoiseKernel riesz(double beta);                // |x-y|^{-beta}
  static NoiseKernel exponential_type();                // exp(-x.y)
  static NoiseKernel ou(double alpha);                  // exp(-|x-y|^alpha)
  static NoiseKernel poisson();                         // (1 + |x-y|^2)^{-(d+1)/2}
  static NoiseKernel cauchy();                          // sum_j 1 / (1 + (x_j - y_j)^2)
  // g and g_hat are optional; a stationary kernel needs g for sampling on a
  // periodic grid.
  static NoiseKernel custom(Covariance f, Radial g = {}, Radial g_hat = {});

  NoiseKind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }
  const std::string& id() const noexcept { return id_; }
  bool stationary() const noexcept;

  // f(x, y); x and y have the same dimension.
  double operator()(std::span<const double> x, std::span<const double> y) const;

  // Covariance at lag z for stationary kinds, in dimension d.
  double at_lag(std::span<const double> z) const;

  // Radial g_hat(r) in dimension d (up to a positive constant for riesz and
  // poisson); throws UnsupportedError when none is known.
  double g_hat(double r, int d) const;
  bool has_g_hat(int d) const;

 private:
  NoiseKernel() = default;

  NoiseKind kind_ = NoiseKind::white;
  double param_ = 0.0;
  std::string id_;
  Covariance f_;
  Radial g_;
  Radial g_hat_;
};

// Ids: "white", "riesz:<beta>", "exp", "ou:<alpha>", "poisson", "cauchy".
NoiseKernel parse_kernel(std::string_view id);

struct KInfResult {
  double value = 0.0;
  bool color_holds = false;  // value > 0
  std::vector<double> x;     // a minimizing pair
  std::vector<double> y;
};

// inf over x, y in B(0, R) of f(x, y): grid search (33^d nodes per factor
// for d <= 2, 9^3 for d = 3) followed by a projected compass search.
KInfResult k_inf(const NoiseKernel& kernel, double R, int d);

struct DalangResult {
  bool finite = false;
  double value = 0.0;        // int_0^inf g_hat(r) r^{d-1} / (1 + phi(r^2)) dr
  double tail_slope = 0.0;   // log-log slope of the integrand over [1e6, 1e9]
  double origin_slope = 0.0; // over [1e-9, 1e-6]
};

DalangResult dalang_check(const NoiseKernel& kernel, const BernsteinSpec& spec, int d);

// Regular grid of n^d nodes i * dx, dx = length / n, on the torus or on a
// box.
struct FieldGrid {
  int dim = 1;
  std::size_t n = 64;
  double length = 1.0;
  bool periodic = true;

  std::size_t size() const;
  double spacing() const { return length / static_cast<double>(n); }
};

// Draws mean-zero Gaussian fields with covariance f on grid nodes. Periodic
// grids with stationary kernels use circulant embedding (FFT of the
// covariance row under the minimum-image lag); everything else, and any
// embedding whose spectrum is negative beyond 1e-10 * trace, uses a dense
// eigendecomposition with eigenvalues clipped at 0.
class FieldSampler {
 public:
  FieldSampler(NoiseKernel kernel, FieldGrid grid);
  ~FieldSampler();
  FieldSampler(FieldSampler&&) noexcept;
  FieldSampler& operator=(FieldSampler&&) noexcept;

  const FieldGrid& grid() const noexcept;
  bool dense() const noexcept;
  // Set when the circulant spectrum was rejected and the dense path is used.
  bool fell_back() const noexcept;
  // Most negative eigenvalue encountered, relative to the trace.
  double negative_mass() const noexcept;

  // One field on stream (seed, stream); out.size() == grid().size().
  void sample(std::uint64_t seed, std::uint64_t stream, std::span<double> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> sample_field(const NoiseKernel& kernel, const FieldGrid& grid,
                                 std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace blowup_lab
