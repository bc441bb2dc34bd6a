#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/noise.hpp"

namespace blowup_lab {

// Coefficients of a renewal inequality
//   g(t) >= A + B [phi^{-1}(1/(2t))]^{1/2} int_0^t g^{1+eps}      (explode_time)
//   g(t) >= A + B [phi^{-1}(1/(2T))]^{d} int_0^t g^{1+gamma}, t <= T  (comparison)
struct RenewalProfile {
  double A = 1.0;
  double B = 1.0;
  double exponent = 1.0;
  BernsteinSpec spec;
  std::optional<double> horizon;
  int dim = 1;
};

// Throws DomainError unless every field is strictly positive.
void validate(const RenewalProfile& profile);

// int_1^t [phi^{-1}(1/(2s))]^{(1+eps)/2} ds.
double renewal_integral(const BernsteinSpec& spec, double eps, double t);

struct ExplodeResult {
  double t0 = 0.0;
  bool reduced = false;  // the exponent was lowered to 1 - 2 delta
  double delta = 0.0;
  double eps_used = 0.0;
  double B_used = 0.0;
  double target = 0.0;  // A^{-eps} [phi^{-1}(1/2)]^{eps/2}, for the exponent used
};

// Smallest t >= 1 at which the comparison ODE solution blows up. The
// exponent is used as given when the running integral reaches the target;
// otherwise it is lowered to 1 - 2 delta, delta = max(0, 1 - rho0) + 0.01
// clamped below 1/2, with B replaced by B A^{eps - (1 - 2 delta)}.
// Requires Assumption 2 to hold for the spec.
ExplodeResult solve_explode(const RenewalProfile& profile);
double explode_time(const RenewalProfile& profile);

struct IdentityResult {
  double lhs = 0.0;  // int_1^inf [phi^{-1}(1/(2s))]^{(1+eps)/2} ds
  double rhs = 0.0;  // (1+eps)/4 int_0^{s*} s^{(eps-1)/2} / phi(s) ds - s*^{(1+eps)/2}
  double reldiff = 0.0;
  bool lhs_finite = false;
  bool rhs_finite = false;
  double lhs_tail_slope = 0.0;    // of the lhs integrand over [1e8, 1e12]
  double rhs_origin_slope = 0.0;  // of the rhs integrand over [1e-12, 1e-8]
  // Both finite and equal to 1e-6, or both divergent.
  bool consistent() const;
};

IdentityResult integral_identity_check(const BernsteinSpec& spec, double eps);

struct ComparisonResult {
  double A0 = 0.0;
  double t0 = 0.0;
  double blowup_time = 0.0;  // at profile.A
  double rate = 0.0;         // B [phi^{-1}(1/(2T))]^d
};

// Blow-up time gamma^{-1} A^{-gamma} / rate of the comparison solution.
double comparison_blowup_time(const RenewalProfile& profile, double A);

// A0 = (gamma t0 B)^{-1/gamma} [phi^{-1}(1/(2T))]^{-d/gamma}; every A > A0
// blows up before t0. Requires 0 < t0 <= T.
ComparisonResult comparison_threshold(const RenewalProfile& profile, double t0);

enum class ReportMode {
  white_lower_bounded,
  white_energy,
  colored_lower_bounded,
  colored_energy,
  dirichlet
};

std::string_view to_string(ReportMode mode);
ReportMode parse_mode(std::string_view name);

struct ReportParams {
  int dim = 1;
  double gamma = 0.5;
  std::optional<double> kappa;   // inf u0 (lower-bounded and dirichlet modes)
  std::optional<double> k_u0;    // int_{B(0,1)} u0 (energy modes)
  double R = 1.0;                // ball radius for the colored modes
  std::optional<double> t_target;
  double dirichlet_c1 = 1.0;     // floor of the killed semigroup per unit of kappa
  double dirichlet_c2 = 1.0;     // killed-kernel analogue of the colored constant
};

struct BlowupReport {
  ReportMode mode = ReportMode::white_lower_bounded;
  AssumptionVerdict verdicts;
  std::optional<double> t0;
  std::optional<double> threshold;  // kappa_0 or K, for t_target
  std::optional<double> horizon;
  std::optional<double> t_target;
  double A = 0.0;
  double B = 0.0;
  double exponent = 0.0;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;
};

// Assembles the renewal inequality behind the chosen mode and solves it.
// Throws IneligibleModeError naming the assumption that fails.
BlowupReport theorem_report(ReportMode mode, const BernsteinSpec& spec,
                            const std::optional<NoiseKernel>& noise, const ReportParams& params);

// min over x1, x2 in B(0, R) and tau in (0, horizon] of
// m(x1, tau) m(x2, tau), m(x, tau) = int_{B(0,R)} p_tau(x - y) dy, on a
// grid of 9 points per axis (restricted to the ball) and 9 times.
double colored_kernel_constant(const BernsteinSpec& spec, int dim, double R, double horizon);

}  // namespace blowup_lab
