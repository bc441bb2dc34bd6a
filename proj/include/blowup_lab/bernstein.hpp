#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blowup_lab {

enum class BernsteinKind {
  stable,            // s^{a/2}
  relativistic,      // (s + m^{2/a})^{a/2} - m
  gamma,             // log(1 + s)
  geometric_stable,  // log(1 + s^{a/2})
  arcosh_log,        // log(1 + s + sqrt((1+s)^2 - 1))
  arcosh_log_sq,     // the square of the above
  stable_log_plus,   // s^{a/2} log^{b/2}(1 + s)
  stable_log_minus,  // s^{a/2} log^{-b/2}(1 + s)
  ratio,             // s (1 + s)^{-a/2}
  triplet,           // killing + drift s + int (1 - e^{-sx}) nu(dx)
  composed,          // outer(inner(s))
};

std::string_view to_string(BernsteinKind kind);

// A Bernstein function phi on (0, inf). Catalog members evaluate through
// their closed forms; triplets evaluate the Levy-Khintchine integral by
// double-exponential quadrature. Values are immutable and cheap to copy.
class BernsteinSpec {
 public:
  using Density = std::function<double(double)>;

  static BernsteinSpec stable(double alpha);
  static BernsteinSpec relativistic(double alpha, double mass);
  static BernsteinSpec gamma();
  static BernsteinSpec geometric_stable(double alpha);
  static BernsteinSpec arcosh_log();
  static BernsteinSpec arcosh_log_sq();
  static BernsteinSpec stable_log_plus(double alpha, double beta);
  static BernsteinSpec stable_log_minus(double alpha, double beta);
  static BernsteinSpec ratio(double alpha);
  // Checks numerically that int (1 ^ x) nu(dx) is finite.
  static BernsteinSpec triplet(double killing, double drift, Density levy_density = {});
  // phi(s) = s, the generator of the ordinary heat semigroup.
  static BernsteinSpec drift_only();
  static BernsteinSpec composed(const BernsteinSpec& outer, const BernsteinSpec& inner);

  BernsteinKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return params_[0]; }
  double beta() const noexcept { return params_[1]; }
  double mass() const noexcept { return params_[1]; }
  // phi(0+).
  double killing() const noexcept { return killing_; }
  double drift() const noexcept { return drift_; }
  // Closed-form Levy density when one is known (stable, relativistic,
  // gamma, triplets); empty otherwise.
  const Density& levy_density() const noexcept { return density_; }
  bool strictly_increasing() const noexcept { return increasing_; }
  const std::string& id() const noexcept { return id_; }

  const BernsteinSpec& outer() const;
  const BernsteinSpec& inner() const;

  // phi(s) for s > 0.
  double operator()(double s) const;

 private:
  BernsteinSpec() = default;

  BernsteinKind kind_ = BernsteinKind::triplet;
  std::array<double, 2> params_{0.0, 0.0};
  double killing_ = 0.0;
  double drift_ = 0.0;
  bool increasing_ = true;
  Density density_;
  std::shared_ptr<const std::pair<BernsteinSpec, BernsteinSpec>> parts_;
  std::string id_;
};

double eval(const BernsteinSpec& spec, double s);

// Solves phi(s) = y by bracket doubling from 1 (capped at 1e300) and
// bisection; |phi(s) - y| / y <= 1e-10 on return.
double inverse(const BernsteinSpec& spec, double y);

// Phi(r) = 1 / phi(r^{-2}) and its inverse.
double phi_bar(const BernsteinSpec& spec, double r);
double phi_bar_inv(const BernsteinSpec& spec, double y);

BernsteinSpec compose(const BernsteinSpec& outer, const BernsteinSpec& inner);

// Parses catalog ids such as "stable:1.5", "relativistic:1.5:1", "gamma",
// "stable_log_plus:0.8:0.4" or "drift". "outer@inner" composes.
BernsteinSpec parse_spec(std::string_view id);

// Human-readable list of accepted ids, used in error messages.
std::vector<std::string> catalog_ids();

enum class Verdict { holds, fails, inconclusive };

std::string_view to_string(Verdict v);

struct AssumptionDiagnostics {
  std::vector<double> zero_grid;       // s in [1e-12, 1e-6]
  std::vector<double> zero_phi;        // phi on zero_grid
  double zero_refined_exponent = 0.0;  // exponent with a log(log(1/s)) term
  double zero_fit_residual = 0.0;
  double probe_upper = 0.0;            // s0 = min(1, phi^{-1}(1/2))
  std::vector<double> probe_eps;       // 1e-2 ... 1e-10
  std::vector<double> probe_values;    // int_eps^s0 s^{-0.49} / phi(s) ds
  std::vector<double> log_grid;        // s in [1e6, 1e12]
  std::vector<double> log_ratio;       // phi(s) / log s
  double log_exponent = 0.0;           // d log phi / d log log s
  std::vector<double> grow_grid;       // r in [1e4, 1e12]
  std::vector<double> grow_ratio;      // phi(2r) / phi(r)
  double grow_limit = 0.0;             // extrapolated liminf of the ratio
};

struct AssumptionVerdict {
  Verdict a2 = Verdict::inconclusive;
  Verdict a3 = Verdict::inconclusive;
  Verdict grow = Verdict::inconclusive;
  double rho0 = 0.0;     // power exponent of phi at 0+
  double rho_inf = 0.0;  // power exponent of phi at infinity
  AssumptionDiagnostics diagnostics;
};

AssumptionVerdict check_assumptions(const BernsteinSpec& spec);

}  // namespace blowup_lab
