#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/subordinator.hpp"

namespace blowup_lab {

// Heat kernel p_t of -phi(-Laplacian) on R^d, d in {1, 2, 3}, with the
// convention p_t(x) = (2 pi)^{-d} int e^{i xi.x} e^{-t phi(|xi|^2)} dxi.
class HeatKernelEngine {
 public:
  HeatKernelEngine(BernsteinSpec spec, int dim, double fourier_tol = 1e-8);
  HeatKernelEngine(BernsteinSpec spec, int dim, SubordinatorSampler sampler,
                   double fourier_tol = 1e-8);

  const BernsteinSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return dim_; }
  double fourier_tol() const noexcept { return fourier_tol_; }
  const std::optional<SubordinatorSampler>& sampler() const noexcept { return sampler_; }

 private:
  BernsteinSpec spec_;
  int dim_;
  double fourier_tol_;
  std::optional<SubordinatorSampler> sampler_;
};

// p_t at a point of R^d (x.size() == dim) or at radius |x|.
double kernel_value(const HeatKernelEngine& engine, double t, std::span<const double> x);
double kernel_value_radial(const HeatKernelEngine& engine, double t, double radius);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Mean of (4 pi S)^{-d/2} e^{-|x|^2/(4S)} over n draws of S_t.
McEstimate kernel_value_mc(const HeatKernelEngine& engine, double t, double radius,
                           std::size_t n, std::uint64_t stream_base = 0);

// int p_t(y)^2 dy, which equals p_{2t}(0).
double kernel_l2(const HeatKernelEngine& engine, double t);

// int_{|y| <= radius} p_t(y) dy as E[P(d/2, radius^2 / (4 S_t))], with P the
// regularized lower incomplete gamma function, over n draws of S_t.
McEstimate ball_mass(const HeatKernelEngine& engine, double t, double radius,
                     std::size_t n = 100000, std::uint64_t stream_base = 0);
// The same mass from the Fourier side,
// (2 pi)^{-d/2} radius^{d/2} |S^{d-1}| int e^{-t phi(r^2)} r^{d/2-1} J_{d/2}(radius r) dr.
double ball_mass_fourier(const HeatKernelEngine& engine, double t, double radius);

// Floors used by verify_kernel_bounds and ball-mass checks.
double lower_bound_constant(int dim);  // (4 pi)^{-d/2} e^{-1/4} window_bound()
double l2_bound_constant(int dim);     // (2 pi)^{-d} |B(0,1)| / e
double ball_mass_constant(int dim);    // (sqrt(e) - 1) / ((e - 1) Gamma(d/2))

struct KernelBoundsReport {
  double t = 0.0;
  // Pointwise lower bound on |x| <= [phi^{-1}(2/t)]^{-1/2}.
  double lower_radius = 0.0;
  double lower_ratio_min = 0.0;  // min p_t(x) / [phi^{-1}(1/(2t))]^{d/2}
  double lower_constant = 0.0;
  bool lower_ok = false;
  // p_t((x-y)/2) >= p_t(x) p_t(y) when p_t(0) <= 1.
  double p_t_zero = 0.0;
  bool factor_applicable = false;
  double factor_min = 0.0;
  bool factor_ok = false;
  // kernel_l2(s) / [phi^{-1}(1/(2s))]^{d/2} for s in t * {1, 2, 4, 8, 16}.
  std::vector<double> l2_times;
  std::vector<double> l2_ratios;
  double l2_constant = 0.0;
  bool l2_ok = false;
  bool ok() const { return lower_ok && factor_ok && l2_ok; }
};

KernelBoundsReport verify_kernel_bounds(const HeatKernelEngine& engine, double t);

}  // namespace blowup_lab
