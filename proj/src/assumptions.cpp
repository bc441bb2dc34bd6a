#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

constexpr std::size_t kGridPoints = 25;

// Exponents within this band of 1/2 are resolved by a fit that also
// carries a log(log(1/s)) term; a bare power-law fit cannot separate
// s^{1/2} from s^{1/2} log^k(1/s) on a few decades.
constexpr double kBandLow = 0.48;
constexpr double kBandHigh = 0.52;
constexpr double kRefinedMargin = 1e-3;
constexpr double kRefinedMaxResidual = 1e-6;

struct RefinedFit {
  double exponent;
  double residual;
};

RefinedFit fit_with_loglog(const std::vector<double>& s, const std::vector<double>& phi) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ls = std::log(s[static_cast<std::size_t>(i)]);
    a(i, 0) = 1.0;
    a(i, 1) = ls;
    a(i, 2) = std::log(-ls);
    y(i) = std::log(phi[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  const double rms = std::sqrt((a * coef - y).squaredNorm() / static_cast<double>(n));
  return {coef(1), rms};
}

void check_zero(const BernsteinSpec& spec, AssumptionVerdict& v) {
  auto& d = v.diagnostics;
  d.zero_grid = numerics::geometric_grid(1e-12, 1e-6, kGridPoints);
  d.zero_phi.clear();
  std::vector<double> lx;
  std::vector<double> ly;
  bool positive = true;
  for (double s : d.zero_grid) {
    const double p = spec(s) - spec.killing();
    d.zero_phi.push_back(p);
    positive = positive && p > 0.0;
    lx.push_back(std::log(s));
    ly.push_back(std::log(p));
  }
  if (!positive) {
    v.rho0 = std::numeric_limits<double>::quiet_NaN();
    v.a2 = Verdict::inconclusive;
    return;
  }
  v.rho0 = numerics::fit_slope(lx, ly);
  const RefinedFit refined = fit_with_loglog(d.zero_grid, d.zero_phi);
  d.zero_refined_exponent = refined.exponent;
  d.zero_fit_residual = refined.residual;
  if (v.rho0 > kBandHigh) {
    v.a2 = Verdict::holds;
  } else if (v.rho0 < kBandLow) {
    v.a2 = Verdict::fails;
  } else if (refined.residual > kRefinedMaxResidual) {
    v.a2 = Verdict::inconclusive;
  } else {
    v.a2 = refined.exponent > 0.5 + kRefinedMargin ? Verdict::holds : Verdict::fails;
  }

  // Partial integrals whose growth (or lack of it) shows the verdict.
  double s0 = 1.0;
  try {
    if (spec.killing() < 0.5) s0 = std::min(1.0, inverse(spec, 0.5));
  } catch (const RangeError&) {
  }
  d.probe_upper = s0;
  d.probe_eps.clear();
  d.probe_values.clear();
  for (int k = 2; k <= 10; ++k) {
    const double eps = std::pow(10.0, -k);
    d.probe_eps.push_back(eps);
    if (eps >= s0) {
      d.probe_values.push_back(0.0);
      continue;
    }
    d.probe_values.push_back(numerics::integrate_log(
        [&spec](double s) { return std::pow(s, -0.49) / spec(s); }, eps, s0, 1e-8));
  }
}

void check_log_growth(const BernsteinSpec& spec, AssumptionVerdict& v) {
  auto& d = v.diagnostics;
  d.log_grid = numerics::geometric_grid(1e6, 1e12, kGridPoints);
  d.log_ratio.clear();
  std::vector<double> lx;
  std::vector<double> ly;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double s : d.log_grid) {
    const double p = spec(s);
    const double r = p / std::log(s);
    d.log_ratio.push_back(r);
    min_ratio = std::min(min_ratio, r);
    lx.push_back(std::log(std::log(s)));
    ly.push_back(std::log(p));
  }
  d.log_exponent = numerics::fit_slope(lx, ly);
  // phi must grow at least like a multiple of log s: bounded functions and
  // powers of log log s both show a clearly sub-unit log exponent.
  if (min_ratio > 1e-6 && d.log_exponent >= 0.95) {
    v.a3 = Verdict::holds;
  } else if (min_ratio <= 1e-6 || d.log_exponent < 0.9) {
    v.a3 = Verdict::fails;
  } else {
    v.a3 = Verdict::inconclusive;
  }
}

void check_doubling(const BernsteinSpec& spec, AssumptionVerdict& v) {
  auto& d = v.diagnostics;
  d.grow_grid = numerics::geometric_grid(1e4, 1e12, kGridPoints);
  d.grow_ratio.clear();
  std::vector<double> lx;
  std::vector<double> ly;
  std::vector<double> inv_log;
  std::vector<double> excess;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double r : d.grow_grid) {
    const double p = spec(r);
    const double q = spec(2.0 * r) / p;
    d.grow_ratio.push_back(q);
    min_ratio = std::min(min_ratio, q);
    lx.push_back(std::log(r));
    ly.push_back(std::log(p));
    inv_log.push_back(1.0 / std::log(r));
    excess.push_back(q - 1.0);
  }
  v.rho_inf = numerics::fit_slope(lx, ly);
  // Slowly varying functions keep phi(2r)/phi(r) - 1 of order 1/log r on any
  // finite grid; extrapolate that decay to r = inf with a quadratic in
  // 1/log r before comparing.
  const auto n = static_cast<Eigen::Index>(inv_log.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = inv_log[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = u;
    a(i, 2) = u * u;
    y(i) = excess[static_cast<std::size_t>(i)];
  }
  d.grow_limit = 1.0 + a.colPivHouseholderQr().solve(y)(0);
  v.grow = (min_ratio > 1.0 + 1e-3 && d.grow_limit > 1.0 + 1e-3) ? Verdict::holds
                                                                  : Verdict::fails;
}

}  // namespace

AssumptionVerdict check_assumptions(const BernsteinSpec& spec) {
  AssumptionVerdict v;
  check_zero(spec, v);
  check_log_growth(spec, v);
  check_doubling(spec, v);
  if (v.grow == Verdict::holds) v.a3 = Verdict::holds;
  return v;
}

}  // namespace blowup_lab
