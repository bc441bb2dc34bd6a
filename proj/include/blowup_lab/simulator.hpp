#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/noise.hpp"
#include "blowup_lab/rng.hpp"

namespace blowup_lab {

enum class SigmaKind { power, lipschitz_test, zero };

// sigma(u) = |u|^{1+gamma}, u, or 0.
struct Sigma {
  SigmaKind kind = SigmaKind::zero;
  double gamma = 0.5;

  static Sigma power(double gamma) { return {SigmaKind::power, gamma}; }
  static Sigma lipschitz_test() { return {SigmaKind::lipschitz_test, 0.0}; }
  static Sigma zero() { return {SigmaKind::zero, 0.0}; }

  double operator()(double u) const;
};

enum class InitialKind { constant, bump, custom };

// constant: u0 = kappa. bump: a Gaussian of the given radius centred at the
// origin, scaled so that its integral over B(0, 1) is k_u0. custom: node
// values in row-major order.
struct InitialCondition {
  InitialKind kind = InitialKind::constant;
  double kappa = 1.0;
  double k_u0 = 1.0;
  double radius = 0.5;
  std::vector<double> samples;

  static InitialCondition constant(double kappa);
  static InitialCondition bump(double k_u0, double radius);
  static InitialCondition custom(std::vector<double> samples);
};

// Torus [-L, L)^d with N cells per axis and nodes -L + j dx, dx = 2L / N.
struct SimConfig {
  BernsteinSpec spec = BernsteinSpec::stable(1.5);
  int dim = 1;
  double half_width = 8.0;
  std::size_t cells = 256;
  double dt = 1e-3;
  double t_end = 1.0;
  Sigma sigma;
  NoiseKernel noise = NoiseKernel::white();
  InitialCondition u0;
  std::size_t paths = 100;
  double escape_cap = 1e8;
  std::uint64_t seed = 0;
  std::size_t record_every = 1;  // record moments every this many steps
};

// Throws DomainError on an invalid configuration.
void validate(const SimConfig& config);

struct PathState {
  std::vector<double> u;
  double t = 0.0;
  bool escaped = false;
  double escape_time = 0.0;
};

// Probe points are snapped to the nearest grid node; pairs index into
// points.
struct Probes {
  std::vector<std::vector<double>> points;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Truncated moments: an escaped path contributes the cap |u| = escape_cap
// at every probe from its escape time on.
struct MomentCurve {
  std::vector<double> times;
  std::vector<std::vector<double>> first_moment;  // [probe][time]
  std::vector<std::vector<double>> first_stderr;
  std::vector<std::vector<double>> second_moment;
  std::vector<std::vector<double>> second_stderr;
  std::vector<std::vector<double>> cross_moment;  // [pair][time], E|u(x) u(y)|
  std::vector<std::vector<double>> cross_stderr;
  std::vector<double> escape_fraction;
  std::vector<std::size_t> probe_nodes;
};

// Spectral exponential-Euler scheme
//   u <- S(dt) [u + sigma(u) dW],
// with S(t) the Fourier multiplier e^{-t phi(|xi_k|^2)}, xi_k = pi k / L.
// White noise has variance dt / dx^d per cell; colored noise is a
// circulant-embedded field scaled by sqrt(dt). Path i draws from stream i of
// the configured seed, so results do not depend on the thread count.
class Simulator {
 public:
  explicit Simulator(SimConfig config);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const SimConfig& config() const noexcept;
  std::size_t size() const noexcept;  // N^d
  double spacing() const noexcept;
  double node_coordinate(std::size_t j) const;  // along one axis
  std::size_t steps() const noexcept;
  double step_size() const noexcept;  // t_end / steps()

  std::vector<double> initial_field() const;
  // In place; field.size() == size().
  void apply_semigroup(std::span<double> field, double t) const;
  double mass(std::span<const double> field) const;

  PathState start() const;
  // One step for path `path` (its step counter is taken from state.t).
  void step(PathState& state, std::uint64_t path, CounterRng& rng) const;

  MomentCurve run_moments(const Probes& probes) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> apply_semigroup(const SimConfig& config, std::span<const double> field,
                                    double t);

// sup over the coarse nodes of |S(t) u0 on N cells - S(t) u0 on 2N cells|.
double refinement_error(const SimConfig& config, double t);

std::string_view to_string(SigmaKind kind);

}  // namespace blowup_lab
