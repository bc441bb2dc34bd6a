#include "blowup_lab/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>

#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;
constexpr double kRefinementTolerance = 1e-6;
constexpr double kAutoMargin = 0.5;
constexpr int kLadderFirst = 4;   // epsilon = 10^{-1}
constexpr int kLadderLast = 48;   // epsilon = 10^{-12}
constexpr int kTableDensity = 64;  // nodes per decade

double ladder_eps(int k) { return std::pow(10.0, -k / 4.0); }

// Positive (beta/2)-stable variate with E e^{-r S} = e^{-r^beta}, from one
// uniform angle and one exponential (Kanter's representation).
double positive_stable(double beta, CounterRng& rng) {
  if (beta == 1.0) return 1.0;
  const double u = kPi * rng.uniform();
  const double e = -std::log(rng.uniform());
  const double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
  const double b = std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
  return a * b;
}

double typical_size(const BernsteinSpec& spec, double t) {
  return 1.0 / inverse(spec, 1.0 / t);
}

}  // namespace

std::string_view to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::stable_exact: return "stable_exact";
    case SamplingStrategy::gamma_exact: return "gamma_exact";
    case SamplingStrategy::composed: return "composed";
    case SamplingStrategy::triplet_approx: return "triplet_approx";
  }
  return "unknown";
}

// Compound Poisson law of the jumps larger than eps, together with the
// first and second moments of the discarded small jumps.
class JumpLaw {
 public:
  JumpLaw(const BernsteinSpec& spec, double eps) : eps_(eps) {
    const auto& nu = spec.levy_density();
    if (spec.kind() == BernsteinKind::stable || spec.kind() == BernsteinKind::relativistic) {
      beta_ = spec.alpha() / 2.0;
      c_ = beta_ / std::tgamma(1.0 - beta_);
    }
    if (spec.kind() == BernsteinKind::stable) {
      kind_ = Kind::pareto;
      rate_ = c_ / beta_ * std::pow(eps, -beta_);
      m1_ = c_ / (1.0 - beta_) * std::pow(eps, 1.0 - beta_);
      m2_ = c_ / (2.0 - beta_) * std::pow(eps, 2.0 - beta_);
      return;
    }
    m1_ = numerics::integrate_log([&nu](double x) { return x * nu(x); }, 0.0, eps, 1e-10);
    m2_ = numerics::integrate_log([&nu](double x) { return x * x * nu(x); }, 0.0, eps, 1e-10);
    rate_ = numerics::integrate_log(nu, eps, std::numeric_limits<double>::infinity(), 1e-10);
    if (spec.kind() == BernsteinKind::relativistic) {
      kind_ = Kind::tempered;
      lambda_ = std::pow(spec.mass(), 1.0 / beta_);
      return;
    }
    kind_ = Kind::table;
    build_table(nu);
  }

  double eps() const { return eps_; }
  double rate() const { return rate_; }
  double small_mean() const { return m1_; }
  double small_second() const { return m2_; }

  double jump(CounterRng& rng) const {
    switch (kind_) {
      case Kind::pareto:
        return eps_ * std::pow(rng.uniform(), -1.0 / beta_);
      case Kind::tempered:
        for (;;) {
          const double x = eps_ * std::pow(rng.uniform(), -1.0 / beta_);
          if (rng.uniform() < std::exp(-lambda_ * (x - eps_))) return x;
        }
      case Kind::table:
        return from_table(rng.uniform() * rate_);
    }
    return eps_;
  }

 private:
  enum class Kind { pareto, tempered, table };

  // Tail mass Pi(x) = nu((x, inf)) on a log grid; inverted by log-log
  // interpolation.
  void build_table(const BernsteinSpec::Density& nu) {
    const double step = std::pow(10.0, 1.0 / kTableDensity);
    std::vector<double> seg;
    xs_.push_back(eps_);
    double acc = 0.0;
    double x = eps_;
    while (x < 1e12) {
      const double next = x * step;
      const double v = numerics::integrate(nu, x, next, 1e-12);
      seg.push_back(v);
      xs_.push_back(next);
      acc += v;
      x = next;
      if (acc >= rate_ * (1.0 - 1e-15)) break;
    }
    tail_.resize(xs_.size());
    double remaining = rate_;
    tail_[0] = rate_;
    for (std::size_t k = 0; k < seg.size(); ++k) {
      remaining -= seg[k];
      tail_[k + 1] = std::max(remaining, 0.0);
    }
  }

  double from_table(double target) const {
    // tail_ is nonincreasing; find the last node with tail >= target.
    auto it = std::upper_bound(tail_.begin(), tail_.end(), target, std::greater<>());
    const auto k = static_cast<std::size_t>(std::distance(tail_.begin(), it));
    if (k == 0) return eps_;
    if (k >= tail_.size() || tail_[k] <= 0.0) return xs_[k - 1];
    const double l0 = std::log(tail_[k - 1]);
    const double l1 = std::log(tail_[k]);
    const double w = l1 == l0 ? 0.0 : (std::log(target) - l0) / (l1 - l0);
    return xs_[k - 1] * std::pow(xs_[k] / xs_[k - 1], w);
  }

  Kind kind_ = Kind::table;
  double eps_;
  double beta_ = 0.0;
  double c_ = 0.0;
  double lambda_ = 0.0;
  double rate_ = 0.0;
  double m1_ = 0.0;
  double m2_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> tail_;
};

struct SubordinatorSampler::Cache {
  std::mutex mutex;
  std::map<double, std::shared_ptr<const JumpLaw>> laws;
  std::map<int, double> auto_eps;  // keyed by quarter-decade bucket of t
};

SubordinatorSampler::SubordinatorSampler(BernsteinSpec spec, std::uint64_t seed,
                                         double truncation)
    : SubordinatorSampler(spec,
                          [&spec] {
                            switch (spec.kind()) {
                              case BernsteinKind::stable: return SamplingStrategy::stable_exact;
                              case BernsteinKind::gamma: return SamplingStrategy::gamma_exact;
                              case BernsteinKind::composed:
                              case BernsteinKind::geometric_stable:
                                return SamplingStrategy::composed;
                              default: return SamplingStrategy::triplet_approx;
                            }
                          }(),
                          seed, truncation) {}

SubordinatorSampler::SubordinatorSampler(BernsteinSpec spec, SamplingStrategy strategy,
                                         std::uint64_t seed, double truncation)
    : spec_(std::move(spec)),
      strategy_(strategy),
      seed_(seed),
      truncation_(truncation),
      cache_(std::make_shared<Cache>()) {
  if (spec_.killing() > 0.0) {
    throw UnsupportedError("sampling a killed subordinator is not supported (" + spec_.id() + ")");
  }
  switch (strategy_) {
    case SamplingStrategy::stable_exact:
      if (spec_.kind() != BernsteinKind::stable) {
        throw UnsupportedError("stable_exact needs a stable spec, got " + spec_.id());
      }
      break;
    case SamplingStrategy::gamma_exact:
      if (spec_.kind() != BernsteinKind::gamma) {
        throw UnsupportedError("gamma_exact needs the gamma spec, got " + spec_.id());
      }
      break;
    case SamplingStrategy::composed: {
      if (spec_.kind() == BernsteinKind::geometric_stable) {
        outer_ = std::make_shared<const SubordinatorSampler>(BernsteinSpec::gamma(), seed, truncation);
        inner_ = std::make_shared<const SubordinatorSampler>(
            BernsteinSpec::stable(spec_.alpha()), seed, truncation);
      } else if (spec_.kind() == BernsteinKind::composed) {
        outer_ = std::make_shared<const SubordinatorSampler>(spec_.outer(), seed, truncation);
        inner_ = std::make_shared<const SubordinatorSampler>(spec_.inner(), seed, truncation);
      } else {
        throw UnsupportedError("composed sampling needs a composed spec, got " + spec_.id());
      }
      break;
    }
    case SamplingStrategy::triplet_approx:
      if (!spec_.levy_density() && spec_.drift() == 0.0) {
        throw UnsupportedError("no sampler for " + spec_.id() +
                               ": it has no closed-form Levy density");
      }
      break;
  }
}

std::shared_ptr<const JumpLaw> SubordinatorSampler::jump_law(double eps) const {
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->laws.find(eps); it != cache_->laws.end()) return it->second;
  }
  auto law = std::make_shared<const JumpLaw>(spec_, eps);
  std::lock_guard lock(cache_->mutex);
  return cache_->laws.emplace(eps, std::move(law)).first->second;
}

double SubordinatorSampler::truncation_for(double t) const {
  if (!spec_.levy_density()) return 0.0;
  if (truncation_ > 0.0) {
    const double scale = typical_size(spec_, t);
    const double budget = kRefinementTolerance * scale * scale;
    const double var = t * jump_law(truncation_)->small_second();
    if (var > budget) {
      throw RefinementError("truncation " + std::to_string(truncation_) +
                            " leaves small-jump variance " + std::to_string(var) +
                            " above the budget " + std::to_string(budget) + " at t = " +
                            std::to_string(t) + "; use a smaller epsilon");
    }
    return truncation_;
  }
  // One epsilon per quarter decade of t, valid at both ends of the bucket,
  // so draws at random times (inner samplers) share a few jump laws.
  const int bucket = static_cast<int>(std::floor(4.0 * std::log10(t)));
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->auto_eps.find(bucket); it != cache_->auto_eps.end()) return it->second;
  }
  const double t_lo = std::pow(10.0, bucket / 4.0);
  const double t_hi = std::pow(10.0, (bucket + 1) / 4.0);
  const double scale_lo = typical_size(spec_, t_lo);
  const double scale_hi = typical_size(spec_, t_hi);
  double chosen = 0.0;
  for (int k = kLadderFirst; k <= kLadderLast; ++k) {
    const double eps = ladder_eps(k);
    const double m2 = jump_law(eps)->small_second();
    if (t_lo * m2 <= kAutoMargin * kRefinementTolerance * scale_lo * scale_lo &&
        t_hi * m2 <= kAutoMargin * kRefinementTolerance * scale_hi * scale_hi) {
      chosen = eps;
      break;
    }
  }
  if (chosen == 0.0) {
    throw RefinementError("no truncation down to 1e-12 meets the small-jump budget at t = " +
                          std::to_string(t));
  }
  std::lock_guard lock(cache_->mutex);
  cache_->auto_eps.emplace(bucket, chosen);
  return chosen;
}

double SubordinatorSampler::draw_triplet(double t, CounterRng& rng) const {
  double s = spec_.drift() * t;
  if (!spec_.levy_density()) return s;
  const auto law = jump_law(truncation_for(t));
  s += t * law->small_mean();
  std::poisson_distribution<long long> count(t * law->rate());
  const long long n = count(rng);
  for (long long i = 0; i < n; ++i) s += law->jump(rng);
  return s;
}

double SubordinatorSampler::draw(double t, CounterRng& rng) const {
  if (!(t > 0.0)) throw DomainError("sample: t must be positive");
  switch (strategy_) {
    case SamplingStrategy::stable_exact: {
      const double beta = spec_.alpha() / 2.0;
      return std::pow(t, 1.0 / beta) * positive_stable(beta, rng);
    }
    case SamplingStrategy::gamma_exact: {
      std::gamma_distribution<double> g(t, 1.0);
      return g(rng);
    }
    case SamplingStrategy::composed: {
      const double tau = outer_->draw(t, rng);
      return tau > 0.0 ? inner_->draw(tau, rng) : 0.0;
    }
    case SamplingStrategy::triplet_approx:
      return draw_triplet(t, rng);
  }
  return 0.0;
}

std::vector<double> SubordinatorSampler::sample(double t, std::size_t n,
                                                std::uint64_t stream_base) const {
  if (!(t > 0.0)) throw DomainError("sample: t must be positive");
  if (n == 0) throw DomainError("sample: n must be at least 1");
  if (strategy_ == SamplingStrategy::triplet_approx) truncation_for(t);
  std::vector<double> out(n);
  numerics::parallel_for(n, [&](std::size_t i) {
    CounterRng rng(seed_, stream_base + i);
    out[i] = draw(t, rng);
  });
  return out;
}

std::vector<double> SubordinatorSampler::sample_path(std::span<const double> times,
                                                     std::uint64_t stream) const {
  CounterRng rng(seed_, stream);
  std::vector<double> out;
  out.reserve(times.size());
  double prev_t = 0.0;
  double s = 0.0;
  for (double t : times) {
    if (!(t > prev_t)) throw DomainError("sample_path: times must increase from 0");
    s += draw(t - prev_t, rng);
    out.push_back(s);
    prev_t = t;
  }
  return out;
}

LaplaceCheck laplace_check(const BernsteinSpec& spec, std::span<const double> draws, double r,
                           double t) {
  if (!(r > 0.0) || !(t > 0.0)) throw DomainError("laplace_check: r and t must be positive");
  std::vector<double> v(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) v[i] = std::exp(-r * draws[i]);
  LaplaceCheck c;
  c.empirical = numerics::mean(v);
  c.stderr_ = numerics::standard_error(v);
  c.exact = std::exp(-t * spec(r));
  const double diff = c.empirical - c.exact;
  if (c.stderr_ > 0.0) {
    c.zscore = diff / c.stderr_;
  } else {
    c.zscore = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(c.exact))
                   ? 0.0
                   : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return c;
}

LaplaceCheck laplace_check(const SubordinatorSampler& sampler, double r, double t,
                           std::size_t n) {
  const auto draws = sampler.sample(t, n);
  return laplace_check(sampler.spec(), draws, r, t);
}

double neg_moment(const BernsteinSpec& spec, double beta, double t) {
  if (!(beta > 0.0) || !(t > 0.0)) throw DomainError("neg_moment: beta and t must be positive");
  // log of the integrand times r, as a function of u = log r; it must fall
  // off at +inf for the integral to exist.
  const auto log_integrand = [&](double u) {
    const double p = spec(std::exp(u));
    return beta * u - t * p;
  };
  const double u1 = std::log(1e8);
  const double u2 = std::log(1e12);
  const double slope = (log_integrand(u2) - log_integrand(u1)) / (u2 - u1);
  if (!(slope < -1e-3)) {
    throw DivergenceError("neg_moment: e^{-t phi(r)} r^{beta-1} is not integrable at infinity (" +
                          spec.id() + ", t = " + std::to_string(t) + ")");
  }
  const double v = numerics::integrate_log(
      [&](double r) { return std::exp(-t * spec(r)) * std::pow(r, beta - 1.0); }, 0.0,
      std::numeric_limits<double>::infinity(), 1e-10);
  return v / std::tgamma(beta);
}

double window_bound() { return (std::exp(1.5) - 2.0 * kE + 1.0) / (kE * (kE - 1.0)); }

double subord_bound(double c) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("subord_bound: c must lie in (0, 1)");
  return std::expm1(1.0 - c) / (kE - 1.0);
}

WindowReport window_probability(const SubordinatorSampler& sampler, double t, std::size_t n) {
  const auto& spec = sampler.spec();
  WindowReport w;
  w.t = t;
  w.lower = 1.0 / inverse(spec, 2.0 / t);
  w.upper = 1.0 / inverse(spec, 1.0 / (2.0 * t));
  w.threshold = 1.0 / inverse(spec, 0.5 / t);
  const auto draws = sampler.sample(t, n);
  std::size_t in_window = 0;
  std::size_t below = 0;
  for (double s : draws) {
    if (s >= w.lower && s <= w.upper) ++in_window;
    if (s <= w.threshold) ++below;
  }
  const double dn = static_cast<double>(n);
  w.window = static_cast<double>(in_window) / dn;
  w.below = static_cast<double>(below) / dn;
  w.window_stderr = std::sqrt(w.window * (1.0 - w.window) / dn);
  w.below_stderr = std::sqrt(w.below * (1.0 - w.below) / dn);
  w.window_floor = window_bound();
  w.below_floor = subord_bound(0.5);
  w.window_ok = w.window >= w.window_floor - 3.0 * w.window_stderr;
  w.below_ok = w.below >= w.below_floor - 3.0 * w.below_stderr;
  return w;
}

}  // namespace blowup_lab
