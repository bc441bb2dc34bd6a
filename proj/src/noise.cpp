#include "blowup_lab/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <random>

#include <fftw3.h>
#include <Eigen/Dense>

#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"
#include "blowup_lab/rng.hpp"
#include "fftw_lock.hpp"

namespace blowup_lab {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return std::sqrt(s);
}

std::string format_number(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::white: return "white";
    case NoiseKind::riesz: return "riesz";
    case NoiseKind::exponential_type: return "exp";
    case NoiseKind::ou: return "ou";
    case NoiseKind::poisson: return "poisson";
    case NoiseKind::cauchy: return "cauchy";
    case NoiseKind::custom: return "custom";
  }
  return "unknown";
}

NoiseKernel NoiseKernel::white() {
  NoiseKernel k;
  k.kind_ = NoiseKind::white;
  k.id_ = "white";
  return k;
}

NoiseKernel NoiseKernel::riesz(double beta) {
  if (!(beta > 0.0)) throw DomainError("riesz: beta must be positive");
  NoiseKernel k;
  k.kind_ = NoiseKind::riesz;
  k.param_ = beta;
  k.id_ = "riesz:" + format_number(beta);
  return k;
}

NoiseKernel NoiseKernel::exponential_type() {
  NoiseKernel k;
  k.kind_ = NoiseKind::exponential_type;
  k.id_ = "exp";
  return k;
}

NoiseKernel NoiseKernel::ou(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("ou: alpha must lie in (0, 2]");
  NoiseKernel k;
  k.kind_ = NoiseKind::ou;
  k.param_ = alpha;
  k.id_ = "ou:" + format_number(alpha);
  return k;
}

NoiseKernel NoiseKernel::poisson() {
  NoiseKernel k;
  k.kind_ = NoiseKind::poisson;
  k.id_ = "poisson";
  return k;
}

NoiseKernel NoiseKernel::cauchy() {
  NoiseKernel k;
  k.kind_ = NoiseKind::cauchy;
  k.id_ = "cauchy";
  return k;
}

NoiseKernel NoiseKernel::custom(Covariance f, Radial g, Radial g_hat) {
  if (!f) throw DomainError("custom noise kernel needs a covariance function");
  NoiseKernel k;
  k.kind_ = NoiseKind::custom;
  k.id_ = "custom";
  k.f_ = std::move(f);
  k.g_ = std::move(g);
  k.g_hat_ = std::move(g_hat);
  return k;
}

bool NoiseKernel::stationary() const noexcept {
  switch (kind_) {
    case NoiseKind::riesz:
    case NoiseKind::ou:
    case NoiseKind::poisson:
    case NoiseKind::cauchy:
      return true;
    case NoiseKind::custom:
      return static_cast<bool>(g_);
    default:
      return false;
  }
}

double NoiseKernel::at_lag(std::span<const double> z) const {
  const double r = norm2(z);
  switch (kind_) {
    case NoiseKind::riesz: return std::pow(r, -param_);
    case NoiseKind::ou: return std::exp(-std::pow(r, param_));
    case NoiseKind::poisson:
      return std::pow(1.0 / (1.0 + r * r), (static_cast<double>(z.size()) + 1.0) / 2.0);
    case NoiseKind::cauchy: {
      double s = 0.0;
      for (double zj : z) s += 1.0 / (1.0 + zj * zj);
      return s;
    }
    case NoiseKind::custom:
      if (g_) return g_(r);
      break;
    default:
      break;
  }
  throw UnsupportedError("noise kernel " + id_ + " is not stationary");
}

double NoiseKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw DomainError("noise kernel: points differ in dimension");
  switch (kind_) {
    case NoiseKind::white:
      throw DomainError("white noise has no pointwise covariance");
    case NoiseKind::exponential_type: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return std::exp(-dot);
    }
    case NoiseKind::custom:
      return f_(x, y);
    default: {
      std::vector<double> z(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
      return at_lag(z);
    }
  }
}

bool NoiseKernel::has_g_hat(int d) const {
  switch (kind_) {
    case NoiseKind::white:
    case NoiseKind::riesz:
    case NoiseKind::poisson:
      return true;
    case NoiseKind::cauchy:
      return d == 1;
    case NoiseKind::ou:
      return param_ == 2.0;
    case NoiseKind::custom:
      return static_cast<bool>(g_hat_);
    case NoiseKind::exponential_type:
      return false;
  }
  return false;
}

double NoiseKernel::g_hat(double r, int d) const {
  if (!has_g_hat(d)) {
    throw UnsupportedError("no Fourier transform of g is available for noise kernel " + id_ +
                           " in dimension " + std::to_string(d));
  }
  switch (kind_) {
    case NoiseKind::white: return 1.0;
    case NoiseKind::riesz: return std::pow(r, param_ - d);
    case NoiseKind::poisson: return std::exp(-r);
    case NoiseKind::cauchy: return kPi * std::exp(-r);
    case NoiseKind::ou: return std::pow(kPi, d / 2.0) * std::exp(-r * r / 4.0);
    case NoiseKind::custom: return g_hat_(r);
    default: break;
  }
  return 0.0;
}

NoiseKernel parse_kernel(std::string_view id) {
  const auto colon = id.find(':');
  const std::string_view name = id.substr(0, colon);
  double p = 0.0;
  const bool has_param = colon != std::string_view::npos;
  if (has_param) {
    const std::string_view tok = id.substr(colon + 1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), p);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw DomainError("bad number in kernel id '" + std::string(id) + "'");
    }
  }
  const auto expect = [&](bool want) {
    if (has_param != want) {
      throw DomainError("kernel id '" + std::string(id) + "' has the wrong number of parameters");
    }
  };
  if (name == "white") return expect(false), NoiseKernel::white();
  if (name == "riesz") return expect(true), NoiseKernel::riesz(p);
  if (name == "exp") return expect(false), NoiseKernel::exponential_type();
  if (name == "ou") return expect(true), NoiseKernel::ou(p);
  if (name == "poisson") return expect(false), NoiseKernel::poisson();
  if (name == "cauchy") return expect(false), NoiseKernel::cauchy();
  throw DomainError("unknown kernel id '" + std::string(id) +
                    "'; known ids: white riesz:<beta> exp ou:<alpha> poisson cauchy");
}

KInfResult k_inf(const NoiseKernel& kernel, double R, int d) {
  if (kernel.kind() == NoiseKind::white) throw DomainError("k_inf: white noise has no K_{R,f}");
  if (!(R > 0.0)) throw DomainError("k_inf: R must be positive");
  if (d < 1 || d > 3) throw DomainError("k_inf: dimension must be 1, 2 or 3");

  const int per_axis = d <= 2 ? 33 : 9;
  std::vector<std::vector<double>> nodes;
  std::vector<int> idx(d, 0);
  for (;;) {
    std::vector<double> p(d);
    for (int j = 0; j < d; ++j) p[j] = -R + 2.0 * R * idx[j] / (per_axis - 1);
    if (norm2(p) <= R * (1.0 + 1e-12)) nodes.push_back(std::move(p));
    int j = 0;
    while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == d) break;
  }

  const auto value = [&](std::span<const double> x, std::span<const double> y) {
    const double v = kernel(x, y);
    return std::isnan(v) ? kInf : v;
  };

  KInfResult res;
  res.value = kInf;
  for (const auto& x : nodes) {
    for (const auto& y : nodes) {
      const double v = value(x, y);
      if (v < res.value) {
        res.value = v;
        res.x = x;
        res.y = y;
      }
    }
  }
  if (!std::isfinite(res.value)) {
    throw EvaluationError("k_inf: covariance is not finite anywhere on the grid");
  }

  // Compass search on (x, y), each projected back onto the closed ball.
  const auto project = [R](std::vector<double>& p) {
    const double n = norm2(p);
    if (n > R) {
      for (double& v : p) v *= R / n;
    }
  };
  double h = 2.0 * R / (per_axis - 1);
  std::vector<double> x = res.x;
  std::vector<double> y = res.y;
  double best = res.value;
  while (h > 1e-12 * R) {
    bool improved = false;
    for (int c = 0; c < 2 * d && !improved; ++c) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> xt = x;
        std::vector<double> yt = y;
        (c < d ? xt[c] : yt[c - d]) += sign * h;
        project(xt);
        project(yt);
        const double v = value(xt, yt);
        if (v < best) {
          best = v;
          x = std::move(xt);
          y = std::move(yt);
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  res.value = best;
  res.x = x;
  res.y = y;
  res.color_holds = res.value > 0.0;
  return res;
}

DalangResult dalang_check(const NoiseKernel& kernel, const BernsteinSpec& spec, int d) {
  if (d < 1 || d > 3) throw DomainError("dalang_check: dimension must be 1, 2 or 3");
  if (!kernel.has_g_hat(d)) {
    throw UnsupportedError("dalang_check: noise kernel " + kernel.id() +
                           " has no Fourier transform of g in dimension " + std::to_string(d));
  }
  DalangResult res;
  // A Riesz kernel with beta >= d is not locally integrable, so it is not an
  // admissible covariance whatever phi is.
  if (kernel.kind() == NoiseKind::riesz && kernel.param() >= d) {
    res.finite = false;
    res.value = kInf;
    return res;
  }
  const auto integrand = [&](double r) {
    // Only reached with a decaying tail once r^2 overflows.
    const double s = r * r;
    if (s > 1e300) return 0.0;
    const double p = s > 0.0 ? spec(s) : spec.killing();
    return kernel.g_hat(r, d) * std::pow(r, d - 1) / (1.0 + p);
  };
  res.tail_slope = numerics::loglog_slope(integrand, 1e6, 1e9);
  res.origin_slope = numerics::loglog_slope(integrand, 1e-9, 1e-6);
  if (res.tail_slope >= -1.0 || res.origin_slope <= -1.0) {
    res.finite = false;
    res.value = kInf;
    return res;
  }
  res.value = numerics::integrate_log(integrand, 0.0, kInf, 1e-8);
  res.finite = std::isfinite(res.value);
  return res;
}

std::size_t FieldGrid::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= n;
  return s;
}

struct FieldSampler::Impl {
  Impl(NoiseKernel k, FieldGrid g) : kernel(std::move(k)), grid(g) {}

  void build_dense();
  void build_circulant();

  NoiseKernel kernel;
  FieldGrid grid;
  bool white = false;
  bool dense = false;
  bool fell_back = false;
  double negative_mass = 0.0;
  // Circulant path: square roots of the scaled spectrum and an inverse plan.
  std::vector<double> sqrt_spectrum;
  fftw_plan plan = nullptr;
  // Dense path: covariance factor (columns scaled by sqrt(eigenvalue)).
  Eigen::MatrixXd factor;

  ~Impl() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

namespace {

std::vector<double> node(const FieldGrid& g, std::size_t flat) {
  std::vector<double> p(g.dim);
  for (int j = 0; j < g.dim; ++j) {
    p[j] = static_cast<double>(flat % g.n) * g.spacing();
    flat /= g.n;
  }
  return p;
}

// Value used for a zero lag of a Riesz kernel: the average of |z|^{-beta}
// over one cell (in d > 1, over the ball of the same volume).
double riesz_cell_average(double beta, int d, double dx) {
  if (d == 1) return std::pow(dx / 2.0, -beta) / (1.0 - beta);
  const double rho = dx * std::pow(1.0 / unit_ball_volume(d), 1.0 / d);
  return d / (d - beta) * std::pow(rho, -beta);
}

double lag_covariance(const NoiseKernel& k, const FieldGrid& g, std::span<const double> z) {
  if (k.kind() == NoiseKind::riesz && norm2(z) == 0.0) {
    if (k.param() >= g.dim) throw DomainError("riesz kernel with beta >= d cannot be sampled");
    return riesz_cell_average(k.param(), g.dim, g.spacing());
  }
  return k.at_lag(z);
}

}  // namespace

void FieldSampler::Impl::build_dense() {
  Impl& s = *this;
  const FieldGrid& g = s.grid;
  const std::size_t n = g.size();
  if (n > 4096) {
    throw UnsupportedError("dense field sampling is limited to 4096 nodes, grid has " +
                           std::to_string(n));
  }
  Eigen::MatrixXd c(n, n);
  std::vector<double> z(g.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = node(g, i);
    for (std::size_t j = 0; j <= i; ++j) {
      const auto xj = node(g, j);
      double v = 0.0;
      if (s.kernel.stationary()) {
        for (int a = 0; a < g.dim; ++a) {
          double dz = xi[a] - xj[a];
          if (g.periodic) dz -= g.length * std::round(dz / g.length);
          z[a] = dz;
        }
        v = lag_covariance(s.kernel, g, z);
      } else {
        v = s.kernel(xi, xj);
      }
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) throw EvaluationError("covariance eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double trace = std::max(lambda.sum(), 1e-300);
  s.negative_mass = std::min(0.0, lambda.minCoeff()) / trace;
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  s.factor = eig.eigenvectors() * lambda.asDiagonal();
  s.dense = true;
}

void FieldSampler::Impl::build_circulant() {
  Impl& s = *this;
  const FieldGrid& g = s.grid;
  const std::size_t n = g.size();
  auto* buf = fftw_alloc_complex(n);
  std::vector<double> z(g.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = node(g, i);
    for (int a = 0; a < g.dim; ++a) z[a] = p[a] - g.length * std::round(p[a] / g.length);
    buf[i][0] = lag_covariance(s.kernel, g, z);
    buf[i][1] = 0.0;
  }
  std::vector<int> dims(g.dim, static_cast<int>(g.n));
  fftw_plan forward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft(g.dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    s.plan = fftw_plan_dft(g.dim, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(forward);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
  }
  double trace = 0.0;
  double most_negative = 0.0;
  s.sqrt_spectrum.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = buf[i][0];
    trace += std::max(lambda, 0.0);
    most_negative = std::min(most_negative, lambda);
    s.sqrt_spectrum[i] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(n));
  }
  fftw_free(buf);
  s.negative_mass = most_negative / std::max(trace, 1e-300);
  if (s.negative_mass < -1e-10) {
    s.fell_back = true;
    s.sqrt_spectrum.clear();
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(s.plan);
    }
    s.plan = nullptr;
    build_dense();
  }
}

FieldSampler::FieldSampler(NoiseKernel kernel, FieldGrid grid) {
  if (grid.dim < 1 || grid.dim > 3) throw DomainError("field grid dimension must be 1, 2 or 3");
  if (grid.n < 2 || !(grid.length > 0.0)) throw DomainError("field grid needs n >= 2 and length > 0");
  impl_ = std::make_unique<Impl>(std::move(kernel), grid);
  switch (impl_->kernel.kind()) {
    case NoiseKind::white:
      impl_->white = true;
      return;
    case NoiseKind::exponential_type:
      throw UnsupportedError(
          "the exponential-type kernel exp(-x.y) is not a valid covariance in general; "
          "it is not sampled");
    default:
      break;
  }
  if (grid.periodic && impl_->kernel.stationary()) {
    impl_->build_circulant();
  } else {
    impl_->build_dense();
  }
}

FieldSampler::~FieldSampler() = default;
FieldSampler::FieldSampler(FieldSampler&&) noexcept = default;
FieldSampler& FieldSampler::operator=(FieldSampler&&) noexcept = default;

const FieldGrid& FieldSampler::grid() const noexcept { return impl_->grid; }
bool FieldSampler::dense() const noexcept { return impl_->dense; }
bool FieldSampler::fell_back() const noexcept { return impl_->fell_back; }
double FieldSampler::negative_mass() const noexcept { return impl_->negative_mass; }

void FieldSampler::sample(std::uint64_t seed, std::uint64_t stream, std::span<double> out) const {
  const Impl& s = *impl_;
  const std::size_t n = s.grid.size();
  if (out.size() != n) throw DomainError("sample_field: output has the wrong size");
  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal;
  if (s.white) {
    const double scale = std::pow(s.grid.spacing(), -s.grid.dim / 2.0);
    for (double& v : out) v = scale * normal(rng);
    return;
  }
  if (s.dense) {
    Eigen::VectorXd zeta(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < zeta.size(); ++i) zeta(i) = normal(rng);
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(n)) = s.factor * zeta;
    return;
  }
  auto* buf = fftw_alloc_complex(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = s.sqrt_spectrum[i] * normal(rng);
    buf[i][1] = s.sqrt_spectrum[i] * normal(rng);
  }
  fftw_execute_dft(s.plan, buf, buf);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i][0];
  fftw_free(buf);
}

std::vector<double> sample_field(const NoiseKernel& kernel, const FieldGrid& grid,
                                 std::uint64_t seed, std::uint64_t stream) {
  FieldSampler sampler(kernel, grid);
  std::vector<double> out(grid.size());
  sampler.sample(seed, stream, out);
  return out;
}

}  // namespace blowup_lab
