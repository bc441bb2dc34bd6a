#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "blowup_lab/blowup.hpp"
#include "blowup_lab/error.hpp"
#include "blowup_lab/heat_kernel.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double unit_ball_volume(int d) { return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

double sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }

void require(bool ok, const std::string& what) {
  if (!ok) throw IneligibleModeError(what);
}

// inf over a t-grid of int p_t^2 / [phi^{-1}(1/(2t))]^{d/2}. Points where
// p_{2t}(0) is infinite do not constrain the infimum.
double measured_heat_constant(const BernsteinSpec& spec, int d) {
  const HeatKernelEngine engine(spec, d);
  double c = kInf;
  for (int k = -10; k <= 10; ++k) {
    const double t = std::ldexp(1.0, k);
    try {
      c = std::min(c, kernel_l2(engine, t) / std::pow(inverse(spec, 0.5 / t), d / 2.0));
    } catch (const DivergenceError&) {
    }
  }
  if (!std::isfinite(c)) {
    throw EvaluationError("heat constant: p_t(0) is infinite on the whole t-grid for " +
                          spec.id());
  }
  return c;
}

// Time shift t0 >= 2 / phi(1/4) with p_{t0}(0) < 1, found by doubling.
double energy_shift(const BernsteinSpec& spec, int d) {
  const HeatKernelEngine engine(spec, d);
  double t = 2.0 / spec(0.25);
  for (int k = 0; k < 80; ++k, t *= 2.0) {
    try {
      if (kernel_value_radial(engine, t, 0.0) < 1.0) return t;
    } catch (const DivergenceError&) {
    }
  }
  throw IneligibleModeError("energy mode: p_t(0) stays >= 1 for " + spec.id() +
                            " (Assumption 3 is needed)");
}

// Floor c of (G u)_{t + t0} >= c K_{u0} on B(0, 1), t <= t0: the constant
// chain with the pointwise lower-bound constant.
double energy_floor(const BernsteinSpec& spec, int d, double shift) {
  const double c = lower_bound_constant(d);
  return c * c * std::pow(2.0, -d) *
         std::pow(inverse(spec, 0.5 / shift) * inverse(spec, 0.25 / shift), d / 2.0);
}

// int_{B(0,R)} p_tau(x - y) dy at |x| = rho.
double ball_overlap_mass(const HeatKernelEngine& engine, double tau, double R, double rho) {
  const int d = engine.dim();
  if (d == 1) {
    return 0.5 * (ball_mass_fourier(engine, tau, R - rho) + ball_mass_fourier(engine, tau, R + rho));
  }
  const double inner = rho < R ? ball_mass_fourier(engine, tau, R - rho) : 0.0;
  if (rho == 0.0) return inner;
  // Spheres of radius r about x are partly inside the ball for
  // R - rho < r < R + rho; the inside fraction depends on
  // q = (R^2 - rho^2 - r^2) / (2 r rho).
  const auto fraction = [&](double r) {
    const double q = std::clamp((R * R - rho * rho - r * r) / (2.0 * r * rho), -1.0, 1.0);
    return d == 2 ? 1.0 - std::acos(q) / kPi : 0.5 * (1.0 + q);
  };
  const double shell = numerics::integrate_de(
      [&](double r) {
        return kernel_value_radial(engine, tau, r) * sphere_area(d) * std::pow(r, d - 1) *
               fraction(r);
      },
      std::abs(R - rho), R + rho, 1e-7);
  return inner + shell;
}

// Solves g >= (per_unit * amount)^2 + coefficient int_0^t g^{1+gamma} on
// (0, horizon] through the comparison lemma; times are shifted by `shift`.
void fill_comparison(BlowupReport& rep, const BernsteinSpec& spec, double coefficient,
                     double gamma, double horizon, int d, double shift, double per_unit,
                     std::optional<double> amount) {
  const double target = rep.t_target.value_or(horizon);
  if (!(target > 0.0) || target > horizon) {
    throw DomainError("t_target must lie in (0, " + std::to_string(horizon) + "]");
  }
  // The comparison lemma carries [phi^{-1}(1/(2T))]^d inside B.
  const double m = inverse(spec, 0.5 / horizon);
  const double A = amount ? std::pow(per_unit * *amount, 2) : 1.0;
  const RenewalProfile profile{A, coefficient / std::pow(m, d), gamma, spec, horizon, d};
  const auto cmp = comparison_threshold(profile, target);
  rep.t_target = target + shift;
  rep.constants["A0"] = cmp.A0;
  rep.threshold = std::sqrt(cmp.A0) / per_unit;
  rep.B = profile.B;
  if (!amount) return;
  rep.A = A;
  rep.constants["blowup_time"] = cmp.blowup_time;
  if (cmp.blowup_time < horizon) {
    rep.t0 = shift + cmp.blowup_time;
  } else {
    rep.notes.push_back("comparison solution does not blow up within the horizon");
  }
}

double color_constant(const std::optional<NoiseKernel>& noise, double R, int d,
                      BlowupReport& rep) {
  require(noise.has_value() && noise->kind() != NoiseKind::white,
          "colored modes need a spatially colored noise kernel");
  const auto k = k_inf(*noise, R, d);
  rep.constants["K_Rf"] = k.value;
  require(k.color_holds, "Assumption color fails: inf of f over B(0,R)^2 is not positive for " +
                             noise->id());
  return k.value;
}

}  // namespace

std::string_view to_string(ReportMode mode) {
  switch (mode) {
    case ReportMode::white_lower_bounded: return "white_lower_bounded";
    case ReportMode::white_energy: return "white_energy";
    case ReportMode::colored_lower_bounded: return "colored_lower_bounded";
    case ReportMode::colored_energy: return "colored_energy";
    case ReportMode::dirichlet: return "dirichlet";
  }
  return "unknown";
}

ReportMode parse_mode(std::string_view name) {
  for (auto m : {ReportMode::white_lower_bounded, ReportMode::white_energy,
                 ReportMode::colored_lower_bounded, ReportMode::colored_energy,
                 ReportMode::dirichlet}) {
    if (name == to_string(m)) return m;
  }
  throw DomainError("unknown mode '" + std::string(name) +
                    "'; expected white_lower_bounded, white_energy, colored_lower_bounded, "
                    "colored_energy or dirichlet");
}

double colored_kernel_constant(const BernsteinSpec& spec, int dim, double R, double horizon) {
  if (dim < 1 || dim > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(R > 0.0) || !(horizon > 0.0)) throw DomainError("R and the horizon must be positive");
  const HeatKernelEngine engine(spec, dim);

  // Distinct |x| over the 9-per-axis grid on [-R, R]^d inside the ball.
  std::set<double> radii;
  const int n = 9;
  const int total = static_cast<int>(std::pow(n, dim));
  for (int idx = 0; idx < total; ++idx) {
    double r2 = 0.0;
    for (int a = 0, rest = idx; a < dim; ++a, rest /= n) {
      const double x = R * (2.0 * (rest % n) / (n - 1) - 1.0);
      r2 += x * x;
    }
    const double r = std::sqrt(r2);
    if (r <= R * (1.0 + 1e-12)) radii.insert(std::min(r, R));
  }

  double c = kInf;
  for (int k = 1; k <= 9; ++k) {
    const double tau = horizon * k / 9.0;
    for (double rho : radii) {
      const double m = ball_overlap_mass(engine, tau, R, rho);
      c = std::min(c, m * m);
    }
  }
  return c;
}

BlowupReport theorem_report(ReportMode mode, const BernsteinSpec& spec,
                            const std::optional<NoiseKernel>& noise, const ReportParams& params) {
  const int d = params.dim;
  if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(params.gamma > 0.0)) throw DomainError("gamma must be positive");
  if (params.kappa && !(*params.kappa > 0.0)) throw DomainError("kappa must be positive");
  if (params.k_u0 && !(*params.k_u0 > 0.0)) throw DomainError("K_u0 must be positive");
  if (!(params.R > 0.0)) throw DomainError("R must be positive");

  BlowupReport rep;
  rep.mode = mode;
  rep.verdicts = check_assumptions(spec);
  rep.t_target = params.t_target;
  rep.exponent = params.gamma;
  const auto& v = rep.verdicts;

  switch (mode) {
    case ReportMode::white_lower_bounded: {
      require(d == 1, "white_lower_bounded is stated for d = 1");
      require(!noise || noise->kind() == NoiseKind::white,
              "white_lower_bounded needs white noise");
      require(v.a2 == Verdict::holds,
              "Assumption 2 is " + std::string(to_string(v.a2)) + " for " + spec.id());
      const double c = measured_heat_constant(spec, d);
      rep.constants["c_heat"] = c;
      rep.constants["c_heat_proof"] = l2_bound_constant(d);
      rep.B = c;
      if (params.kappa) {
        rep.A = *params.kappa * *params.kappa;
        try {
          const auto ex = solve_explode(RenewalProfile{rep.A, c, params.gamma, spec, {}, d});
          rep.t0 = ex.t0;
          rep.constants["delta"] = ex.delta;
          rep.constants["eps_used"] = ex.eps_used;
          if (ex.reduced) rep.notes.push_back("exponent lowered to 1 - 2 delta");
        } catch (const NoBlowupCertificateError& e) {
          rep.notes.push_back(e.what());
        }
      }
      if (params.t_target) {
        // At A = A0 the running integral meets the target exactly at
        // t_target, and it meets it earlier for every larger A.
        require(*params.t_target > 1.0, "white_lower_bounded: t_target must exceed 1");
        const double eps = params.gamma;
        const double I = renewal_integral(spec, eps, *params.t_target);
        const double m = inverse(spec, 0.5);
        if (I > 0.0) {
          const double A0 = std::pow(std::pow(m, eps / 2.0) / (c * eps * I), 1.0 / eps);
          rep.constants["A0"] = A0;
          rep.threshold = std::sqrt(A0);
        }
      }
      break;
    }

    case ReportMode::white_energy: {
      require(!noise || noise->kind() == NoiseKind::white, "white_energy needs white noise");
      require(v.a3 == Verdict::holds,
              "Assumption 3 is " + std::string(to_string(v.a3)) + " for " + spec.id());
      rep.notes.push_back(
          "run without Assumption color: white noise has no spatial covariance to bound");
      const double shift = energy_shift(spec, d);
      const double floor = energy_floor(spec, d, shift);
      const double cl = lower_bound_constant(d);
      const double coef = cl * cl * unit_ball_volume(d) * std::pow(inverse(spec, 0.5 / shift), d);
      rep.constants["shift_t0"] = shift;
      rep.constants["c_floor"] = floor;
      rep.constants["c_lower"] = cl;
      rep.horizon = shift;
      fill_comparison(rep, spec, coef, params.gamma, shift, d, shift, floor, params.k_u0);
      break;
    }

    case ReportMode::colored_lower_bounded: {
      const double K = color_constant(noise, params.R, d, rep);
      const double horizon = 1.0 / spec(std::pow(2.0 / params.R, 2));
      rep.horizon = horizon;
      const double c = colored_kernel_constant(spec, d, params.R, horizon);
      rep.constants["c_kernel"] = c;
      rep.notes.push_back("kernel constant from direct minimization over B(0,R)^2 x (0, horizon]");
      fill_comparison(rep, spec, c * K, params.gamma, horizon, d, 0.0, 1.0, params.kappa);
      break;
    }

    case ReportMode::colored_energy: {
      if (params.R > 1.0) throw DomainError("colored_energy: R must be <= 1");
      const double K = color_constant(noise, params.R, d, rep);
      const double shift = energy_shift(spec, d);
      const double floor = energy_floor(spec, d, shift);
      const double horizon = std::min(shift, 1.0 / spec(std::pow(2.0 / params.R, 2)));
      rep.horizon = horizon;
      const double c = colored_kernel_constant(spec, d, params.R, horizon);
      rep.constants["shift_t0"] = shift;
      rep.constants["c_floor"] = floor;
      rep.constants["c_kernel"] = c;
      rep.notes.push_back("kernel constant from direct minimization over B(0,R)^2 x (0, horizon]");
      fill_comparison(rep, spec, c * K, params.gamma, horizon, d, shift, floor, params.k_u0);
      break;
    }

    case ReportMode::dirichlet: {
      require(v.grow == Verdict::holds,
              "Assumption grow is " + std::string(to_string(v.grow)) + " for " + spec.id());
      require(spec.killing() == 0.0, "dirichlet mode needs phi(0+) = 0");
      if (!(params.dirichlet_c1 > 0.0) || !(params.dirichlet_c2 > 0.0)) {
        throw DomainError("dirichlet constants must be positive");
      }
      const double K = color_constant(noise, params.R, d, rep);
      const double horizon = phi_bar(spec, params.R / 8.0);
      rep.horizon = horizon;
      rep.constants["c1"] = params.dirichlet_c1;
      rep.constants["c2"] = params.dirichlet_c2;
      rep.notes.push_back("killed-kernel constants c1, c2 are configured inputs");
      fill_comparison(rep, spec, params.dirichlet_c2 * K, params.gamma, horizon, d, 0.0,
                      params.dirichlet_c1, params.kappa);
      break;
    }
  }
  return rep;
}

}  // namespace blowup_lab
