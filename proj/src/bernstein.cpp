#include "blowup_lab/bernstein.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "blowup_lab/error.hpp"
#include "blowup_lab/numerics.hpp"

namespace blowup_lab {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

double stable_levy_constant(double beta) { return beta / std::tgamma(1.0 - beta); }

// A singular density overflows before its integrable weight vanishes; the
// mass below 1e-150 is negligible once integrability has been checked.
double underflow_guard(double x, double v) { return std::isfinite(v) || x > 1e-150 ? v : 0.0; }

}  // namespace

std::string_view to_string(BernsteinKind kind) {
  switch (kind) {
    case BernsteinKind::stable: return "stable";
    case BernsteinKind::relativistic: return "relativistic";
    case BernsteinKind::gamma: return "gamma";
    case BernsteinKind::geometric_stable: return "geometric_stable";
    case BernsteinKind::arcosh_log: return "arcosh_log";
    case BernsteinKind::arcosh_log_sq: return "arcosh_log_sq";
    case BernsteinKind::stable_log_plus: return "stable_log_plus";
    case BernsteinKind::stable_log_minus: return "stable_log_minus";
    case BernsteinKind::ratio: return "ratio";
    case BernsteinKind::triplet: return "triplet";
    case BernsteinKind::composed: return "composed";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

BernsteinSpec BernsteinSpec::stable(double alpha) {
  require(alpha > 0.0 && alpha <= 2.0, "stable: alpha must lie in (0, 2]");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::stable;
  s.params_ = {alpha, 0.0};
  s.id_ = "stable:" + format_number(alpha);
  if (alpha == 2.0) {
    s.drift_ = 1.0;
  } else {
    const double beta = alpha / 2.0;
    const double c = stable_levy_constant(beta);
    s.density_ = [beta, c](double x) { return c * std::pow(x, -1.0 - beta); };
  }
  return s;
}

BernsteinSpec BernsteinSpec::relativistic(double alpha, double mass) {
  require(alpha > 0.0 && alpha < 2.0, "relativistic: alpha must lie in (0, 2)");
  require(mass > 0.0, "relativistic: m must be positive");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::relativistic;
  s.params_ = {alpha, mass};
  s.id_ = "relativistic:" + format_number(alpha) + ":" + format_number(mass);
  const double beta = alpha / 2.0;
  const double c = stable_levy_constant(beta);
  const double lambda = std::pow(mass, 1.0 / beta);
  s.density_ = [beta, c, lambda](double x) {
    return c * std::pow(x, -1.0 - beta) * std::exp(-lambda * x);
  };
  return s;
}

BernsteinSpec BernsteinSpec::gamma() {
  BernsteinSpec s;
  s.kind_ = BernsteinKind::gamma;
  s.id_ = "gamma";
  s.density_ = [](double x) { return std::exp(-x) / x; };
  return s;
}

BernsteinSpec BernsteinSpec::geometric_stable(double alpha) {
  require(alpha > 0.0 && alpha <= 2.0, "geometric_stable: alpha must lie in (0, 2]");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::geometric_stable;
  s.params_ = {alpha, 0.0};
  s.id_ = "geometric_stable:" + format_number(alpha);
  return s;
}

BernsteinSpec BernsteinSpec::arcosh_log() {
  BernsteinSpec s;
  s.kind_ = BernsteinKind::arcosh_log;
  s.id_ = "arcosh_log";
  return s;
}

BernsteinSpec BernsteinSpec::arcosh_log_sq() {
  BernsteinSpec s;
  s.kind_ = BernsteinKind::arcosh_log_sq;
  s.id_ = "arcosh_log_sq";
  return s;
}

BernsteinSpec BernsteinSpec::stable_log_plus(double alpha, double beta) {
  require(alpha > 0.0 && alpha < 2.0, "stable_log_plus: alpha must lie in (0, 2)");
  require(beta > 0.0 && beta <= 2.0 - alpha, "stable_log_plus: beta must lie in (0, 2 - alpha]");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::stable_log_plus;
  s.params_ = {alpha, beta};
  s.id_ = "stable_log_plus:" + format_number(alpha) + ":" + format_number(beta);
  return s;
}

BernsteinSpec BernsteinSpec::stable_log_minus(double alpha, double beta) {
  require(alpha > 0.0 && alpha < 2.0, "stable_log_minus: alpha must lie in (0, 2)");
  require(beta > 0.0 && beta <= alpha, "stable_log_minus: beta must lie in (0, alpha]");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::stable_log_minus;
  s.params_ = {alpha, beta};
  s.id_ = "stable_log_minus:" + format_number(alpha) + ":" + format_number(beta);
  return s;
}

BernsteinSpec BernsteinSpec::ratio(double alpha) {
  require(alpha > 0.0 && alpha < 2.0, "ratio: alpha must lie in (0, 2)");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::ratio;
  s.params_ = {alpha, 0.0};
  s.id_ = "ratio:" + format_number(alpha);
  return s;
}

BernsteinSpec BernsteinSpec::triplet(double killing, double drift, Density levy_density) {
  require(killing >= 0.0 && std::isfinite(killing), "triplet: killing must be >= 0");
  require(drift >= 0.0 && std::isfinite(drift), "triplet: drift must be >= 0");
  BernsteinSpec s;
  s.kind_ = BernsteinKind::triplet;
  s.killing_ = killing;
  s.drift_ = drift;
  s.increasing_ = drift > 0.0 || static_cast<bool>(levy_density);
  if (levy_density) {
    // x nu(x) must be integrable at 0: a power-law fit over [1e-12, 1e-8]
    // catches densities such as x^{-2-b} before quadrature does.
    const double origin_slope = numerics::loglog_slope(
        [&](double x) { return x * levy_density(x); }, 1e-12, 1e-8);
    require(!(origin_slope <= -1.0), "triplet: Levy density is not integrable against min(1, x)");
    double small = 0.0;
    double large = 0.0;
    try {
      small = numerics::integrate_de(
          [&](double x) { return underflow_guard(x, x * levy_density(x)); }, 0.0, 1.0);
      large = numerics::integrate_de(levy_density, 1.0, std::numeric_limits<double>::infinity());
    } catch (const QuadratureError&) {
      throw DomainError("triplet: Levy density is not integrable against min(1, x)");
    }
    require(std::isfinite(small) && std::isfinite(large) && small >= 0.0 && large >= 0.0,
            "triplet: Levy density is not integrable against min(1, x)");
    s.density_ = std::move(levy_density);
  }
  s.id_ = "triplet";
  return s;
}

BernsteinSpec BernsteinSpec::drift_only() {
  BernsteinSpec s = triplet(0.0, 1.0);
  s.id_ = "drift";
  return s;
}

BernsteinSpec BernsteinSpec::composed(const BernsteinSpec& outer, const BernsteinSpec& inner) {
  BernsteinSpec s;
  s.kind_ = BernsteinKind::composed;
  s.parts_ = std::make_shared<const std::pair<BernsteinSpec, BernsteinSpec>>(outer, inner);
  s.killing_ = inner.killing() > 0.0 ? outer(inner.killing()) : outer.killing();
  s.drift_ = outer.drift() * inner.drift();
  s.increasing_ = outer.strictly_increasing() && inner.strictly_increasing();
  s.id_ = outer.id() + "@" + inner.id();
  return s;
}

const BernsteinSpec& BernsteinSpec::outer() const {
  if (!parts_) throw DomainError("outer(): spec is not composed");
  return parts_->first;
}

const BernsteinSpec& BernsteinSpec::inner() const {
  if (!parts_) throw DomainError("inner(): spec is not composed");
  return parts_->second;
}

double BernsteinSpec::operator()(double s) const {
  if (!(s > 0.0)) throw DomainError("phi is evaluated on (0, inf) only");
  const double a = params_[0] / 2.0;
  const double b = params_[1] / 2.0;
  double v = 0.0;
  switch (kind_) {
    case BernsteinKind::stable:
      v = std::pow(s, a);
      break;
    case BernsteinKind::relativistic: {
      const double m = params_[1];
      const double lambda = std::pow(m, 1.0 / a);
      v = m * std::expm1(a * std::log1p(s / lambda));
      break;
    }
    case BernsteinKind::gamma:
      v = std::log1p(s);
      break;
    case BernsteinKind::geometric_stable:
      v = std::log1p(std::pow(s, a));
      break;
    case BernsteinKind::arcosh_log:
      v = std::log1p(s + std::sqrt(s) * std::sqrt(s + 2.0));
      break;
    case BernsteinKind::arcosh_log_sq: {
      const double l = std::log1p(s + std::sqrt(s) * std::sqrt(s + 2.0));
      v = l * l;
      break;
    }
    case BernsteinKind::stable_log_plus:
      v = std::pow(s, a) * std::pow(std::log1p(s), b);
      break;
    case BernsteinKind::stable_log_minus:
      v = std::pow(s, a) * std::pow(std::log1p(s), -b);
      break;
    case BernsteinKind::ratio:
      v = s * std::exp(-a * std::log1p(s));
      break;
    case BernsteinKind::triplet: {
      v = killing_ + drift_ * s;
      if (density_) {
        const Density& nu = density_;
        v += numerics::integrate_de(
            [&nu, s](double x) { return underflow_guard(x, -std::expm1(-s * x) * nu(x)); }, 0.0,
            std::numeric_limits<double>::infinity(), 1e-8);
      }
      break;
    }
    case BernsteinKind::composed:
      v = parts_->first(parts_->second(s));
      break;
  }
  if (!std::isfinite(v)) {
    throw EvaluationError("phi(" + format_number(s) + ") is not finite for " + id_);
  }
  return v;
}

double eval(const BernsteinSpec& spec, double s) { return spec(s); }

double inverse(const BernsteinSpec& spec, double y) {
  if (!spec.strictly_increasing()) {
    throw DomainError("inverse: " + spec.id() + " is not strictly increasing");
  }
  if (!(y > spec.killing()) || !std::isfinite(y)) {
    throw RangeError("inverse: y = " + format_number(y) + " is not above phi(0+) for " +
                     spec.id());
  }
  constexpr double kCap = 1e300;
  double lo = 1.0;
  double hi = 1.0;
  if (spec(1.0) < y) {
    while (spec(hi) < y) {
      if (hi > kCap) {
        throw RangeError("inverse: y = " + format_number(y) + " is beyond the range of " +
                         spec.id());
      }
      lo = hi;
      hi *= 2.0;
    }
  } else {
    while (spec(lo) >= y) {
      if (lo < 1e-300) {
        throw RangeError("inverse: y = " + format_number(y) + " is too close to phi(0+)");
      }
      hi = lo;
      lo *= 0.5;
    }
  }
  // phi(lo) < y <= phi(hi), hi = 2 lo.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (spec(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double flo = std::abs(spec(lo) - y);
  const double fhi = std::abs(spec(hi) - y);
  const double s = flo < fhi ? lo : hi;
  if (std::min(flo, fhi) > 1e-10 * y) {
    throw RangeError("inverse: phi is too flat near y = " + format_number(y));
  }
  return s;
}

double phi_bar(const BernsteinSpec& spec, double r) {
  if (!(r > 0.0)) throw DomainError("phi_bar: r must be positive");
  return 1.0 / spec(1.0 / (r * r));
}

double phi_bar_inv(const BernsteinSpec& spec, double y) {
  if (!(y > 0.0)) throw DomainError("phi_bar_inv: y must be positive");
  return 1.0 / std::sqrt(inverse(spec, 1.0 / y));
}

BernsteinSpec compose(const BernsteinSpec& outer, const BernsteinSpec& inner) {
  return BernsteinSpec::composed(outer, inner);
}

std::vector<std::string> catalog_ids() {
  return {"stable:<alpha>",
          "relativistic:<alpha>:<m>",
          "gamma",
          "geometric_stable:<alpha>",
          "arcosh_log",
          "arcosh_log_sq",
          "stable_log_plus:<alpha>:<beta>",
          "stable_log_minus:<alpha>:<beta>",
          "ratio:<alpha>",
          "drift",
          "<outer>@<inner>"};
}

namespace {

std::string catalog_message() {
  std::string msg = "known ids:";
  for (const auto& id : catalog_ids()) msg += " " + id;
  return msg;
}

std::vector<double> parse_params(std::string_view text, std::string_view full) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto colon = text.find(':');
    const std::string_view token = text.substr(0, colon);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
      throw DomainError("bad number '" + std::string(token) + "' in phi id '" +
                        std::string(full) + "'");
    }
    out.push_back(v);
    if (colon == std::string_view::npos) break;
    text.remove_prefix(colon + 1);
  }
  return out;
}

}  // namespace

BernsteinSpec parse_spec(std::string_view id) {
  if (const auto at = id.find('@'); at != std::string_view::npos) {
    return compose(parse_spec(id.substr(0, at)), parse_spec(id.substr(at + 1)));
  }
  const auto colon = id.find(':');
  const std::string_view name = id.substr(0, colon);
  const std::vector<double> p =
      colon == std::string_view::npos ? std::vector<double>{} : parse_params(id.substr(colon + 1), id);
  const auto need = [&](std::size_t n) {
    if (p.size() != n) {
      throw DomainError("phi id '" + std::string(id) + "' expects " + std::to_string(n) +
                        " parameter(s); " + catalog_message());
    }
  };
  if (name == "stable") return need(1), BernsteinSpec::stable(p[0]);
  if (name == "relativistic") return need(2), BernsteinSpec::relativistic(p[0], p[1]);
  if (name == "gamma") return need(0), BernsteinSpec::gamma();
  if (name == "geometric_stable") return need(1), BernsteinSpec::geometric_stable(p[0]);
  if (name == "arcosh_log") return need(0), BernsteinSpec::arcosh_log();
  if (name == "arcosh_log_sq") return need(0), BernsteinSpec::arcosh_log_sq();
  if (name == "stable_log_plus") return need(2), BernsteinSpec::stable_log_plus(p[0], p[1]);
  if (name == "stable_log_minus") return need(2), BernsteinSpec::stable_log_minus(p[0], p[1]);
  if (name == "ratio") return need(1), BernsteinSpec::ratio(p[0]);
  if (name == "drift") return need(0), BernsteinSpec::drift_only();
  throw DomainError("unknown phi id '" + std::string(id) + "'; " + catalog_message());
}

}  // namespace blowup_lab
