#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "blowup_lab/blowup.hpp"
#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// [phi^{-1}(1/(2s))]^{(1+eps)/2}. Past phi(0+), or once phi^{-1} drops
// below 1e-250, the value is 0 to double precision.
double renewal_integrand(const BernsteinSpec& spec, double eps, double s) {
  const double y = 0.5 / s;
  if (y <= spec.killing()) return 0.0;
  try {
    return std::pow(inverse(spec, y), 0.5 * (1.0 + eps));
  } catch (const RangeError&) {
    if (y < spec(1e-250)) return 0.0;
    throw;
  }
}

// First t >= 1 with int_1^t h = need, marching panels of width 1/2 in
// u = log s. Gives up when the integrand vanishes, when the tail is
// provably too small, or at t = 1e300.
std::optional<double> first_crossing(const BernsteinSpec& spec, double eps, double need) {
  const auto h = [&](double s) { return renewal_integrand(spec, eps, s); };
  const auto f = [&](double u) {
    const double s = std::exp(u);
    return s * h(s);
  };
  constexpr double kWidth = 0.5;
  const double u_max = std::log(1e300);
  double cum = 0.0;
  for (double u = 0.0; u < u_max; u += kWidth) {
    const double piece = numerics::integrate(f, u, u + kWidth, 1e-13);
    if (cum + piece >= need) {
      double lo = u;
      double hi = u + kWidth;
      for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cum + numerics::integrate(f, u, mid, 1e-13) >= need) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return std::exp(0.5 * (lo + hi));
    }
    cum += piece;
    const double h1 = h(std::exp(u + kWidth));
    if (h1 == 0.0) return std::nullopt;
    if (u > 10.0) {
      const double h0 = h(std::exp(u));
      const double slope = std::log(h1 / h0) / kWidth;
      if (slope < -1.001) {
        const double tail = std::exp(u + kWidth) * h1 / (-slope - 1.0);
        if (cum + 2.0 * tail < need) return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

void validate(const RenewalProfile& profile) {
  if (!(profile.A > 0.0) || !(profile.B > 0.0) || !(profile.exponent > 0.0)) {
    throw DomainError("renewal profile: A, B and the exponent must be positive");
  }
  if (profile.horizon && !(*profile.horizon > 0.0)) {
    throw DomainError("renewal profile: horizon must be positive");
  }
  if (profile.dim < 1) throw DomainError("renewal profile: dimension must be positive");
}

double renewal_integral(const BernsteinSpec& spec, double eps, double t) {
  if (!(t >= 1.0)) throw DomainError("renewal_integral: t must be >= 1");
  if (!(eps > 0.0)) throw DomainError("renewal_integral: eps must be positive");
  const auto f = [&](double u) {
    const double s = std::exp(u);
    return s * renewal_integrand(spec, eps, s);
  };
  const double end = std::log(t);
  double sum = 0.0;
  for (double u = 0.0; u < end; u += 0.5) {
    sum += numerics::integrate(f, u, std::min(u + 0.5, end), 1e-13);
  }
  return sum;
}

ExplodeResult solve_explode(const RenewalProfile& profile) {
  validate(profile);
  const auto& spec = profile.spec;
  const auto verdict = check_assumptions(spec);
  if (verdict.a2 != Verdict::holds) {
    throw IneligibleModeError("explode_time: Assumption 2 is " +
                              std::string(to_string(verdict.a2)) + " for " + spec.id());
  }
  const double m = inverse(spec, 0.5);

  ExplodeResult res;
  res.delta = std::min(std::max(0.0, 1.0 - verdict.rho0) + 0.01, 0.49);
  const auto attempt = [&](double eps, double B) {
    res.eps_used = eps;
    res.B_used = B;
    res.target = std::exp(-eps * std::log(profile.A) + 0.5 * eps * std::log(m));
    return first_crossing(spec, eps, res.target / (B * eps));
  };

  if (auto t = attempt(profile.exponent, profile.B)) {
    res.t0 = *t;
    return res;
  }
  const double eps2 = 1.0 - 2.0 * res.delta;
  if (eps2 < profile.exponent) {
    const double B2 = profile.B * std::pow(profile.A, profile.exponent - eps2);
    if (auto t = attempt(eps2, B2)) {
      res.t0 = *t;
      res.reduced = true;
      return res;
    }
  }
  throw NoBlowupCertificateError("explode_time: the renewal integral for " + spec.id() +
                                 " stays below its target up to t = 1e300");
}

double explode_time(const RenewalProfile& profile) { return solve_explode(profile).t0; }

bool IdentityResult::consistent() const {
  if (!lhs_finite && !rhs_finite) return true;
  return lhs_finite && rhs_finite && reldiff <= 1e-6;
}

IdentityResult integral_identity_check(const BernsteinSpec& spec, double eps) {
  if (!(eps > 0.0)) throw DomainError("integral_identity_check: eps must be positive");
  IdentityResult res;
  const auto h = [&](double s) { return renewal_integrand(spec, eps, s); };
  res.lhs_tail_slope = numerics::loglog_slope(h, 1e8, 1e12);
  res.lhs_finite = res.lhs_tail_slope < -1.0 - 1e-6;
  res.lhs = res.lhs_finite ? numerics::integrate_log(h, 1.0, kInf, 1e-13) : kInf;

  const double top = inverse(spec, 0.5);
  const auto q = [&](double s) { return std::pow(s, 0.5 * (eps - 1.0)) / spec(s); };
  res.rhs_origin_slope = numerics::loglog_slope(q, 1e-12 * top, 1e-8 * top);
  res.rhs_finite = res.rhs_origin_slope > -1.0 + 1e-6;
  res.rhs = res.rhs_finite ? 0.25 * (1.0 + eps) * numerics::integrate_log(q, 0.0, top, 1e-13) -
                                 std::pow(top, 0.5 * (1.0 + eps))
                           : kInf;
  res.reldiff = res.lhs_finite && res.rhs_finite ? std::abs(res.lhs - res.rhs) / std::abs(res.lhs)
                                                 : kInf;
  return res;
}

double comparison_blowup_time(const RenewalProfile& profile, double A) {
  validate(profile);
  if (!profile.horizon) throw DomainError("comparison: horizon T is not set");
  if (!(A > 0.0)) throw DomainError("comparison: A must be positive");
  const double gamma = profile.exponent;
  const double rate =
      profile.B * std::pow(inverse(profile.spec, 0.5 / *profile.horizon), profile.dim);
  return 1.0 / (gamma * std::pow(A, gamma) * rate);
}

ComparisonResult comparison_threshold(const RenewalProfile& profile, double t0) {
  validate(profile);
  if (!profile.horizon) throw DomainError("comparison: horizon T is not set");
  if (!(t0 > 0.0) || t0 > *profile.horizon) {
    throw DomainError("comparison: t0 must lie in (0, T]");
  }
  const double gamma = profile.exponent;
  const double m = inverse(profile.spec, 0.5 / *profile.horizon);
  ComparisonResult res;
  res.t0 = t0;
  res.rate = profile.B * std::pow(m, profile.dim);
  res.A0 = std::pow(gamma * t0 * profile.B, -1.0 / gamma) * std::pow(m, -profile.dim / gamma);
  res.blowup_time = 1.0 / (gamma * std::pow(profile.A, gamma) * res.rate);
  return res;
}

}  // namespace blowup_lab
