#include "blowup_lab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include <fftw3.h>

#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"
#include "fftw_lock.hpp"

namespace blowup_lab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer real_buffer(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer complex_buffer(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Integral of exp(-|x|^2 / (2 r^2)) over B(0, 1).
double gaussian_ball_integral(double r, int d) {
  if (d == 1) return r * std::sqrt(2.0 * kPi) * std::erf(1.0 / (r * std::sqrt(2.0)));
  return 2.0 * kPi * r * r * -std::expm1(-1.0 / (2.0 * r * r));
}

double truncate(double u, double cap) {
  if (std::isnan(u)) return cap;
  return std::clamp(u, -cap, cap);
}

}  // namespace

double Sigma::operator()(double u) const {
  switch (kind) {
    case SigmaKind::power: return std::pow(std::abs(u), 1.0 + gamma);
    case SigmaKind::lipschitz_test: return u;
    case SigmaKind::zero: return 0.0;
  }
  return 0.0;
}

std::string_view to_string(SigmaKind kind) {
  switch (kind) {
    case SigmaKind::power: return "power";
    case SigmaKind::lipschitz_test: return "lipschitz_test";
    case SigmaKind::zero: return "zero";
  }
  return "unknown";
}

InitialCondition InitialCondition::constant(double kappa) {
  InitialCondition u;
  u.kind = InitialKind::constant;
  u.kappa = kappa;
  return u;
}

InitialCondition InitialCondition::bump(double k_u0, double radius) {
  InitialCondition u;
  u.kind = InitialKind::bump;
  u.k_u0 = k_u0;
  u.radius = radius;
  return u;
}

InitialCondition InitialCondition::custom(std::vector<double> samples) {
  InitialCondition u;
  u.kind = InitialKind::custom;
  u.samples = std::move(samples);
  return u;
}

void validate(const SimConfig& c) {
  if (c.dim != 1 && c.dim != 2) throw DomainError("simulate: dimension must be 1 or 2");
  if (!(c.half_width > 0.0)) throw DomainError("simulate: half_width must be positive");
  if (c.cells < 8 || !is_power_of_two(c.cells)) {
    throw DomainError("simulate: cells must be a power of two >= 8");
  }
  if (!(c.dt > 0.0) || !(c.t_end > 0.0) || c.dt > c.t_end) {
    throw DomainError("simulate: need 0 < dt <= t_end");
  }
  if (c.sigma.kind == SigmaKind::power && !(c.sigma.gamma > 0.0)) {
    throw DomainError("simulate: sigma power exponent gamma must be positive");
  }
  if (c.paths == 0) throw DomainError("simulate: paths must be positive");
  if (!(c.escape_cap > 0.0)) throw DomainError("simulate: escape_cap must be positive");
  if (c.record_every == 0) throw DomainError("simulate: record_every must be positive");
  const auto& u0 = c.u0;
  switch (u0.kind) {
    case InitialKind::constant:
      if (!(u0.kappa >= 0.0)) throw DomainError("simulate: kappa must be >= 0");
      break;
    case InitialKind::bump:
      if (!(u0.k_u0 >= 0.0) || !(u0.radius > 0.0)) {
        throw DomainError("simulate: bump needs K_u0 >= 0 and radius > 0");
      }
      break;
    case InitialKind::custom: {
      const std::size_t n = c.dim == 1 ? c.cells : c.cells * c.cells;
      if (u0.samples.size() != n) {
        throw DomainError("simulate: custom u0 needs " + std::to_string(n) + " samples");
      }
      for (double v : u0.samples) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw DomainError("simulate: u0 must be nonnegative and finite");
        }
      }
      break;
    }
  }
}

struct Simulator::Impl {
  SimConfig config;
  std::size_t n_real = 0;
  std::size_t n_complex = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<double> phi_k;      // phi(|xi_k|^2) on the half spectrum
  std::vector<double> step_mult;  // e^{-dt phi_k} / N^d
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::optional<FieldSampler> colored;

  explicit Impl(SimConfig c) : config(std::move(c)) {
    validate(config);
    const std::size_t N = config.cells;
    const int d = config.dim;
    n_real = d == 1 ? N : N * N;
    n_complex = d == 1 ? N / 2 + 1 : N * (N / 2 + 1);
    steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9));
    dt = config.t_end / static_cast<double>(steps);

    const double L = config.half_width;
    const auto wave = [&](std::size_t k) {
      const double kk = k <= N / 2 ? static_cast<double>(k) : static_cast<double>(k) - N;
      return kPi * kk / L;
    };
    phi_k.resize(n_complex);
    const std::size_t half = N / 2 + 1;
    for (std::size_t idx = 0; idx < n_complex; ++idx) {
      double s = 0.0;
      if (d == 1) {
        s = std::pow(wave(idx), 2);
      } else {
        s = std::pow(wave(idx / half), 2) + std::pow(wave(idx % half), 2);
      }
      phi_k[idx] = s > 0.0 ? config.spec(s) : config.spec.killing();
    }
    step_mult = multiplier(dt);

    auto r = real_buffer(n_real);
    auto z = complex_buffer(n_complex);
    {
      std::lock_guard lock(fftw_planner_mutex());
      const int n = static_cast<int>(N);
      if (d == 1) {
        forward = fftw_plan_dft_r2c_1d(n, r.get(), z.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(n, z.get(), r.get(), FFTW_ESTIMATE);
      } else {
        forward = fftw_plan_dft_r2c_2d(n, n, r.get(), z.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_2d(n, n, z.get(), r.get(), FFTW_ESTIMATE);
      }
    }
    if (config.noise.kind() != NoiseKind::white && config.sigma.kind != SigmaKind::zero) {
      colored.emplace(config.noise, FieldGrid{d, N, 2.0 * L, true});
    }
  }

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  std::vector<double> multiplier(double t) const {
    std::vector<double> m(n_complex);
    const double norm = 1.0 / static_cast<double>(n_real);
    for (std::size_t k = 0; k < n_complex; ++k) m[k] = std::exp(-t * phi_k[k]) * norm;
    return m;
  }

  // u is an fftw-aligned array of n_real values; z is scratch.
  void semigroup(double* u, fftw_complex* z, const std::vector<double>& mult) const {
    fftw_execute_dft_r2c(forward, u, z);
    for (std::size_t k = 0; k < n_complex; ++k) {
      z[k][0] *= mult[k];
      z[k][1] *= mult[k];
    }
    fftw_execute_dft_c2r(backward, z, u);
  }

  double node(std::size_t j) const {
    return -config.half_width + static_cast<double>(j) * spacing();
  }
  double spacing() const { return 2.0 * config.half_width / static_cast<double>(config.cells); }

  std::vector<double> initial() const {
    const auto& u0 = config.u0;
    switch (u0.kind) {
      case InitialKind::constant: return std::vector<double>(n_real, u0.kappa);
      case InitialKind::custom: return u0.samples;
      case InitialKind::bump: break;
    }
    const double r = u0.radius;
    const double amp = u0.k_u0 / gaussian_ball_integral(r, config.dim);
    const std::size_t N = config.cells;
    std::vector<double> u(n_real);
    for (std::size_t idx = 0; idx < n_real; ++idx) {
      double x2 = std::pow(node(idx % N), 2);
      if (config.dim == 2) x2 += std::pow(node(idx / N), 2);
      u[idx] = amp * std::exp(-x2 / (2.0 * r * r));
    }
    return u;
  }

  struct Workspace {
    RealBuffer u;
    ComplexBuffer z;
    std::vector<double> noise;
    explicit Workspace(const Impl& im)
        : u(real_buffer(im.n_real)), z(complex_buffer(im.n_complex)) {}
  };

  void advance(PathState& state, std::uint64_t path, CounterRng& rng, Workspace& ws) const {
    if (state.escaped) return;
    const auto k = static_cast<std::size_t>(std::llround(state.t / dt));
    add_noise(state.u, path, k, rng, ws.noise);
    std::copy(state.u.begin(), state.u.end(), ws.u.get());
    semigroup(ws.u.get(), ws.z.get(), step_mult);
    std::copy(ws.u.get(), ws.u.get() + n_real, state.u.begin());
    state.t = static_cast<double>(k + 1) * dt;
    for (double v : state.u) {
      if (!std::isfinite(v) || std::abs(v) > config.escape_cap) {
        state.escaped = true;
        state.escape_time = state.t;
        break;
      }
    }
  }

  // Noise increment times sigma(u), added to u in place.
  void add_noise(std::vector<double>& u, std::uint64_t path, std::size_t step_index,
                 CounterRng& rng, std::vector<double>& scratch) const {
    const auto& sigma = config.sigma;
    if (sigma.kind == SigmaKind::zero) return;
    if (colored) {
      scratch.resize(n_real);
      colored->sample(config.seed, (path << 32) + step_index, scratch);
      const double s = std::sqrt(dt);
      for (std::size_t i = 0; i < n_real; ++i) u[i] += sigma(u[i]) * s * scratch[i];
      return;
    }
    const double s = std::sqrt(dt / std::pow(spacing(), config.dim));
    std::normal_distribution<double> normal;
    for (double& v : u) v += sigma(v) * s * normal(rng);
  }
};

Simulator::Simulator(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const SimConfig& Simulator::config() const noexcept { return impl_->config; }
std::size_t Simulator::size() const noexcept { return impl_->n_real; }
double Simulator::spacing() const noexcept { return impl_->spacing(); }
double Simulator::node_coordinate(std::size_t j) const { return impl_->node(j); }
std::size_t Simulator::steps() const noexcept { return impl_->steps; }
double Simulator::step_size() const noexcept { return impl_->dt; }
std::vector<double> Simulator::initial_field() const { return impl_->initial(); }

void Simulator::apply_semigroup(std::span<double> field, double t) const {
  if (field.size() != impl_->n_real) throw DomainError("apply_semigroup: field size mismatch");
  if (!(t >= 0.0)) throw DomainError("apply_semigroup: t must be >= 0");
  if (t == 0.0) return;
  auto u = real_buffer(impl_->n_real);
  auto z = complex_buffer(impl_->n_complex);
  std::copy(field.begin(), field.end(), u.get());
  impl_->semigroup(u.get(), z.get(), impl_->multiplier(t));
  std::copy(u.get(), u.get() + impl_->n_real, field.begin());
}

double Simulator::mass(std::span<const double> field) const {
  return numerics::pairwise_sum(field) * std::pow(spacing(), impl_->config.dim);
}

PathState Simulator::start() const { return PathState{impl_->initial(), 0.0, false, 0.0}; }

void Simulator::step(PathState& state, std::uint64_t path, CounterRng& rng) const {
  Impl::Workspace ws(*impl_);
  impl_->advance(state, path, rng, ws);
}

MomentCurve Simulator::run_moments(const Probes& probes) const {
  const auto& im = *impl_;
  const auto& c = im.config;
  const std::size_t N = c.cells;
  const double cap = c.escape_cap;

  MomentCurve mc;
  for (const auto& p : probes.points) {
    if (static_cast<int>(p.size()) != c.dim) throw DomainError("probe dimension mismatch");
    std::size_t idx = 0;
    for (int a = c.dim - 1; a >= 0; --a) {
      const auto j = static_cast<long long>(std::llround((p[a] + c.half_width) / im.spacing()));
      idx = idx * N + static_cast<std::size_t>(((j % static_cast<long long>(N)) + N) % N);
    }
    mc.probe_nodes.push_back(idx);
  }
  for (const auto& [a, b] : probes.pairs) {
    if (a >= probes.points.size() || b >= probes.points.size()) {
      throw DomainError("probe pair index out of range");
    }
  }

  std::vector<std::size_t> record_steps;
  for (std::size_t k = 0; k <= im.steps; k += c.record_every) record_steps.push_back(k);
  if (record_steps.back() != im.steps) record_steps.push_back(im.steps);
  for (auto k : record_steps) mc.times.push_back(static_cast<double>(k) * im.dt);

  const std::size_t R = record_steps.size();
  const std::size_t P = probes.points.size();
  const std::size_t Q = probes.pairs.size();
  const std::size_t M = c.paths;
  // first[(r * P + q) * M + path], cross[(r * Q + q) * M + path].
  std::vector<double> first(R * P * M), cross(R * Q * M);
  std::vector<unsigned char> escaped(R * M);

  numerics::parallel_for(M, [&](std::size_t path) {
    CounterRng rng(c.seed, path);
    Impl::Workspace ws(im);
    PathState st = start();
    std::size_t next = 0;
    for (std::size_t k = 0;; ++k) {
      if (next < R && record_steps[next] == k) {
        for (std::size_t q = 0; q < P; ++q) {
          first[(next * P + q) * M + path] = st.escaped ? cap : truncate(st.u[mc.probe_nodes[q]], cap);
        }
        for (std::size_t q = 0; q < Q; ++q) {
          const auto [a, b] = probes.pairs[q];
          const double ua = st.escaped ? cap : truncate(st.u[mc.probe_nodes[a]], cap);
          const double ub = st.escaped ? cap : truncate(st.u[mc.probe_nodes[b]], cap);
          cross[(next * Q + q) * M + path] = std::abs(ua * ub);
        }
        escaped[next * M + path] = st.escaped ? 1 : 0;
        ++next;
      }
      if (k == im.steps) break;
      im.advance(st, path, rng, ws);
    }
  });

  mc.first_moment.assign(P, std::vector<double>(R));
  mc.first_stderr = mc.second_moment = mc.second_stderr = mc.first_moment;
  mc.cross_moment.assign(Q, std::vector<double>(R));
  mc.cross_stderr = mc.cross_moment;
  mc.escape_fraction.resize(R);
  std::vector<double> tmp(M);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t q = 0; q < P; ++q) {
      const std::span<const double> v(&first[(r * P + q) * M], M);
      mc.first_moment[q][r] = numerics::mean(v);
      mc.first_stderr[q][r] = numerics::standard_error(v);
      for (std::size_t i = 0; i < M; ++i) tmp[i] = v[i] * v[i];
      mc.second_moment[q][r] = numerics::mean(tmp);
      mc.second_stderr[q][r] = numerics::standard_error(tmp);
    }
    for (std::size_t q = 0; q < Q; ++q) {
      const std::span<const double> v(&cross[(r * Q + q) * M], M);
      mc.cross_moment[q][r] = numerics::mean(v);
      mc.cross_stderr[q][r] = numerics::standard_error(v);
    }
    for (std::size_t i = 0; i < M; ++i) tmp[i] = escaped[r * M + i];
    mc.escape_fraction[r] = numerics::mean(tmp);
  }
  return mc;
}

std::vector<double> apply_semigroup(const SimConfig& config, std::span<const double> field,
                                    double t) {
  SimConfig c = config;
  c.sigma = Sigma::zero();
  const Simulator sim(std::move(c));
  std::vector<double> out(field.begin(), field.end());
  sim.apply_semigroup(out, t);
  return out;
}

double refinement_error(const SimConfig& config, double t) {
  if (config.u0.kind == InitialKind::custom) {
    throw UnsupportedError("refinement_error: custom u0 is tied to one grid");
  }
  SimConfig coarse = config;
  coarse.sigma = Sigma::zero();
  SimConfig fine = coarse;
  fine.cells = 2 * coarse.cells;
  const Simulator a(coarse);
  const Simulator b(fine);
  auto ua = a.initial_field();
  auto ub = b.initial_field();
  a.apply_semigroup(ua, t);
  b.apply_semigroup(ub, t);
  const std::size_t N = coarse.cells;
  double err = 0.0;
  for (std::size_t idx = 0; idx < ua.size(); ++idx) {
    const std::size_t i = idx % N;
    const std::size_t j = idx / N;
    const std::size_t fine_idx = config.dim == 1 ? 2 * i : (2 * j) * (2 * N) + 2 * i;
    err = std::max(err, std::abs(ua[idx] - ub[fine_idx]));
  }
  return err;
}

}  // namespace blowup_lab
