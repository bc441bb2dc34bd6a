#include "blowup_lab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "blowup_lab/error.hpp"

namespace blowup_lab::numerics {

namespace {

constexpr double kLogRange = 700.0;
constexpr double kPi = 3.14159265358979323846;

double gk(const RealFn& f, double a, double b, double rel_tol) {
  // Boost's adaptive step compares the error of the unit-interval rule with
  // a tolerance scaled by the interval length, so short intervals would
  // never pass; integrate over [0, 1] instead.
  const double w = b - a;
  const auto unit = [&f, a, w](double x) { return f(a + w * x) * w; };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      unit, 0.0, 1.0, 15, rel_tol, &err);
  if (!std::isfinite(v)) {
    throw QuadratureError("Gauss-Kronrod produced a non-finite value on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return v;
}

// Sum of unit-width panels of g over [u0, u1].
double panels(const RealFn& g, double u0, double u1, double rel_tol) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(u1 - u0)));
  std::vector<double> parts(n);
  const double h = (u1 - u0) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = u0 + h * static_cast<double>(k);
    const double b = (k + 1 == n) ? u1 : a + h;
    parts[k] = gk(g, a, b, rel_tol);
  }
  return pairwise_sum(parts);
}

// Integrates g from `start` towards +-infinity (dir = +1 / -1), stopping
// once panels are negligible relative to `reference` and the running sum.
double tail(const RealFn& g, double start, int dir, double reference_total, double peak,
            double rel_tol) {
  std::vector<double> parts;
  int quiet = 0;
  double running = reference_total;
  for (double u = start; std::abs(u) < kLogRange;) {
    const double next = u + dir;
    const double v = dir > 0 ? gk(g, u, next, rel_tol) : gk(g, next, u, rel_tol);
    parts.push_back(v);
    running += v;
    const double edge = std::abs(g(next));
    const double small = rel_tol * 1e-2 * std::max(std::abs(running), 1e-300);
    if (std::abs(v) <= small && edge <= rel_tol * 1e-2 * peak) {
      if (++quiet >= 2) return pairwise_sum(parts);
    } else {
      quiet = 0;
    }
    u = next;
  }
  throw QuadratureError("integrand does not decay on a logarithmic scale");
}

}  // namespace

double integrate(const RealFn& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  return gk(f, a, b, rel_tol);
}

double integrate_log(const RealFn& f, double a, double b, double rel_tol) {
  if (!(a >= 0.0) || !(b > a)) {
    throw DomainError("integrate_log: require 0 <= a < b");
  }
  const RealFn g = [&f](double u) {
    const double r = std::exp(u);
    return f(r) * r;
  };
  const bool open_lo = (a == 0.0);
  const bool open_hi = std::isinf(b);
  const double lo = open_lo ? -kLogRange : std::log(a);
  const double hi = open_hi ? kLogRange : std::log(b);
  if (!open_lo && !open_hi) return panels(g, lo, hi, rel_tol);

  // Locate the bulk of the integrand before truncating the open ends.
  double u_peak = open_lo ? hi : lo;
  double peak = 0.0;
  for (double u = lo; u <= hi; u += 2.0) {
    const double v = std::abs(g(u));
    if (std::isfinite(v) && v > peak) {
      peak = v;
      u_peak = u;
    }
  }
  if (!open_lo || !open_hi) {
    const double v = std::abs(g(open_lo ? hi : lo));
    if (std::isfinite(v) && v > peak) {
      peak = v;
      u_peak = open_lo ? hi : lo;
    }
  }
  if (peak == 0.0) return 0.0;

  double total = 0.0;
  if (open_lo && open_hi) {
    total = tail(g, u_peak, +1, 0.0, peak, rel_tol);
    total += tail(g, u_peak, -1, total, peak, rel_tol);
  } else if (open_lo) {
    if (u_peak < hi) total = panels(g, u_peak, hi, rel_tol);
    total += tail(g, u_peak, -1, total, peak, rel_tol);
  } else {
    if (u_peak > lo) total = panels(g, lo, u_peak, rel_tol);
    total += tail(g, u_peak, +1, total, peak, rel_tol);
  }
  return total;
}

double integrate_de(const RealFn& f, double a, double b, double rel_tol) {
  double err = 0.0;
  double l1 = 0.0;
  double v = 0.0;
  try {
    if (std::isinf(b)) {
      boost::math::quadrature::exp_sinh<double> rule;
      v = rule.integrate(f, a, b, rel_tol, &err, &l1);
    } else {
      boost::math::quadrature::tanh_sinh<double> rule;
      v = rule.integrate(f, a, b, rel_tol, &err, &l1);
    }
  } catch (const std::domain_error& e) {
    throw QuadratureError(e.what());
  }
  if (!std::isfinite(v) || err > std::max(1e3 * rel_tol * l1, 1e-300)) {
    throw QuadratureError("double-exponential quadrature did not converge");
  }
  return v;
}

double wynn_epsilon(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n == 0) return 0.0;
  if (n < 3) return s.back();
  std::vector<double> prev(n + 1, 0.0);  // column k-1
  std::vector<double> cur(s.begin(), s.end());  // column k
  double best = s.back();
  for (std::size_t k = 0; cur.size() > 1; ++k) {
    std::vector<double> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double diff = cur[i + 1] - cur[i];
      if (diff == 0.0 || !std::isfinite(diff)) return (k % 2 == 0) ? cur[i + 1] : best;
      next[i] = prev[i + 1] + 1.0 / diff;
    }
    if (k % 2 == 1) {
      if (!std::isfinite(next.back())) break;
      best = next.back();
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return best;
}

double oscillatory_integral(const RealFn& amplitude, Oscillator kind, double nu,
                            double omega, double scale, double rel_tol) {
  if (!(omega >= 0.0)) throw DomainError("oscillatory_integral: omega must be >= 0");
  if (omega == 0.0) {
    if (kind == Oscillator::sine || (kind == Oscillator::bessel_j && nu > 0.0)) return 0.0;
    return integrate_log(amplitude, 0.0, std::numeric_limits<double>::infinity(), rel_tol);
  }
  const auto weight = [kind, nu](double z) {
    switch (kind) {
      case Oscillator::cosine: return std::cos(z);
      case Oscillator::sine: return std::sin(z);
      case Oscillator::bessel_j: return boost::math::cyl_bessel_j(nu, z);
    }
    return 0.0;
  };
  const auto zero = [kind, nu, omega](std::size_t k) {
    const double kd = static_cast<double>(k);
    switch (kind) {
      case Oscillator::cosine: return (kd - 0.5) * kPi / omega;
      case Oscillator::sine: return kd * kPi / omega;
      case Oscillator::bessel_j:
        return boost::math::cyl_bessel_j_zero(nu, static_cast<int>(k)) / omega;
    }
    return 0.0;
  };
  const RealFn h = [&](double r) { return amplitude(r) * weight(omega * r); };

  // First panel: geometric sub-panels resolve an amplitude much narrower
  // than the first half-wave.
  double first_end = zero(1);
  double s = 0.0;
  {
    std::vector<double> parts;
    double a = 0.0;
    double b = std::min(first_end, scale * 0x1.0p-30);
    while (a < first_end) {
      parts.push_back(gk(h, a, b, rel_tol * 1e-2));
      a = b;
      b = std::min(first_end, 2.0 * b);
    }
    s = pairwise_sum(parts);
  }

  std::vector<double> partial{s};
  double biggest = std::abs(s);
  double last_estimate = std::numeric_limits<double>::quiet_NaN();
  int agree = 0;
  int quiet = 0;
  double left = first_end;
  constexpr std::size_t kMaxPanels = 20000;
  constexpr std::size_t kAccelerateAfter = 40;
  for (std::size_t k = 2; k <= kMaxPanels; ++k) {
    const double right = zero(k);
    const double v = gk(h, left, right, rel_tol * 1e-2);
    s += v;
    partial.push_back(s);
    biggest = std::max(biggest, std::abs(v));
    const double target = rel_tol * 1e-1 * std::max(std::abs(s), 1e-300);
    const double envelope = std::abs(amplitude(right)) * (right - left);
    if (std::abs(v) <= target && envelope <= target) {
      if (++quiet >= 2) return s;
    } else {
      quiet = 0;
    }
    left = right;
    if (k >= kAccelerateAfter && k % 4 == 0) {
      const std::size_t m = std::min<std::size_t>(partial.size(), 41);
      const double est = wynn_epsilon(std::span(partial).last(m));
      if (std::isfinite(last_estimate) &&
          std::abs(est - last_estimate) <= rel_tol * std::max(std::abs(est), 1e-300)) {
        if (++agree >= 2) return est;
      } else {
        agree = 0;
      }
      last_estimate = est;
    }
  }
  throw QuadratureError("oscillatory quadrature did not converge");
}

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw DomainError("fit_slope: need >= 2 paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  std::vector<double> grid(n);
  const double llo = std::log(lo);
  const double step = n > 1 ? (std::log(hi) - llo) / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) grid[i] = std::exp(llo + step * static_cast<double>(i));
  if (n > 0) {
    grid.front() = lo;
    grid.back() = hi;
  }
  return grid;
}

double loglog_slope(const RealFn& f, double lo, double hi, std::size_t n) {
  const auto grid = geometric_grid(lo, hi, n);
  std::vector<double> xs;
  std::vector<double> ys;
  for (double x : grid) {
    const double v = std::abs(f(x));
    if (!std::isfinite(v)) throw EvaluationError("loglog_slope: non-finite value");
    if (v == 0.0) {
      if (xs.size() < 2) return -std::numeric_limits<double>::infinity();
      break;
    }
    xs.push_back(std::log(x));
    ys.push_back(std::log(v));
  }
  if (xs.size() < grid.size()) return -std::numeric_limits<double>::infinity();
  return fit_slope(xs, ys);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(values);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - m) * (values[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BLOWUP_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace blowup_lab::numerics
