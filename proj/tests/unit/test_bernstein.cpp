#include <cmath>
#include <numbers>

#include <doctest.h>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/error.hpp"

using namespace blowup_lab;

TEST_CASE("catalog closed forms") {
  const double s = 0.37;
  CHECK(BernsteinSpec::stable(1.5)(s) == doctest::Approx(std::pow(s, 0.75)).epsilon(1e-14));
  CHECK(BernsteinSpec::gamma()(s) == doctest::Approx(std::log1p(s)).epsilon(1e-14));
  CHECK(BernsteinSpec::geometric_stable(1.5)(s) ==
        doctest::Approx(std::log1p(std::pow(s, 0.75))).epsilon(1e-13));
  CHECK(BernsteinSpec::relativistic(1.5, 2.0)(s) ==
        doctest::Approx(std::pow(s + std::pow(2.0, 4.0 / 3.0), 0.75) - 2.0).epsilon(1e-12));
  CHECK(BernsteinSpec::arcosh_log()(s) == doctest::Approx(std::acosh(1.0 + s)).epsilon(1e-13));
  CHECK(BernsteinSpec::arcosh_log_sq()(s) ==
        doctest::Approx(std::pow(std::acosh(1.0 + s), 2)).epsilon(1e-13));
  CHECK(BernsteinSpec::stable_log_plus(0.8, 0.4)(s) ==
        doctest::Approx(std::pow(s, 0.4) * std::pow(std::log1p(s), 0.2)).epsilon(1e-13));
  CHECK(BernsteinSpec::stable_log_minus(1.8, 0.4)(s) ==
        doctest::Approx(std::pow(s, 0.9) * std::pow(std::log1p(s), -0.2)).epsilon(1e-13));
  CHECK(BernsteinSpec::ratio(1.0)(s) == doctest::Approx(s / std::sqrt(1.0 + s)).epsilon(1e-14));
  CHECK(BernsteinSpec::drift_only()(s) == doctest::Approx(s));
}

TEST_CASE("triplet with a stable Levy density reproduces the power") {
  // nu(dx) = b / Gamma(1 - b) x^{-1-b} dx has exponent s^b.
  const double b = 0.6;
  const auto spec = BernsteinSpec::triplet(
      0.0, 0.0, [b](double x) { return b / std::tgamma(1.0 - b) * std::pow(x, -1.0 - b); });
  for (double s : {0.01, 0.5, 3.0, 40.0}) {
    CHECK(spec(s) == doctest::Approx(std::pow(s, b)).epsilon(1e-6));
  }
}

TEST_CASE("triplet with killing and drift") {
  const auto spec = BernsteinSpec::triplet(0.5, 2.0, [](double x) { return std::exp(-x) / x; });
  // int (1 - e^{-sx}) e^{-x} / x dx = log(1 + s).
  for (double s : {0.1, 1.0, 10.0}) {
    CHECK(spec(s) == doctest::Approx(0.5 + 2.0 * s + std::log1p(s)).epsilon(1e-7));
  }
  CHECK(spec.killing() == 0.5);
}

TEST_CASE("triplet rejects a density without a finite first moment near 0") {
  CHECK_THROWS_AS(BernsteinSpec::triplet(0.0, 0.0, [](double x) { return std::pow(x, -2.5); }),
                  DomainError);
}

TEST_CASE("composition") {
  const auto c = compose(BernsteinSpec::gamma(), BernsteinSpec::stable(1.0));
  for (double s : {0.01, 1.0, 100.0}) {
    CHECK(c(s) == doctest::Approx(std::log1p(std::sqrt(s))).epsilon(1e-13));
  }
  const auto parsed = parse_spec("gamma@stable:1");
  CHECK(parsed(2.0) == doctest::Approx(c(2.0)));
}

TEST_CASE("inverse round trip") {
  for (const char* id : {"stable:1.5", "gamma", "relativistic:1.5:1", "arcosh_log_sq",
                         "stable_log_minus:1.8:0.4", "ratio:1"}) {
    const auto spec = parse_spec(id);
    for (double y : {1e-3, 0.5, 2.0}) {
      const double s = inverse(spec, y);
      CHECK(std::abs(spec(s) - y) <= 1e-9 * y);
    }
  }
}

TEST_CASE("inverse outside the range of phi") {
  // A finite Levy measure e^{-x} dx gives s / (1 + s) < 1.
  const auto bounded = BernsteinSpec::triplet(0.0, 0.0, [](double x) { return std::exp(-x); });
  CHECK(bounded(3.0) == doctest::Approx(0.75).epsilon(1e-7));
  CHECK_THROWS_AS(inverse(bounded, 1.5), RangeError);
}

TEST_CASE("phi_bar of the stable family is a power") {
  const auto spec = BernsteinSpec::stable(1.5);
  for (double r : {0.2, 1.0, 7.0}) {
    CHECK(phi_bar(spec, r) == doctest::Approx(std::pow(r, 1.5)).epsilon(1e-12));
    CHECK(phi_bar_inv(spec, phi_bar(spec, r)) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("parse errors list the catalog") {
  try {
    parse_spec("levy:2");
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("stable") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_spec("stable:2.5"), DomainError);
  CHECK_THROWS_AS(parse_spec("stable"), DomainError);
}

TEST_CASE("assumption verdicts on clear-cut members") {
  const auto st = check_assumptions(BernsteinSpec::stable(1.5));
  CHECK(st.a2 == Verdict::holds);
  CHECK(st.a3 == Verdict::holds);
  CHECK(st.grow == Verdict::holds);
  CHECK(st.rho0 == doctest::Approx(0.75).epsilon(1e-3));

  const auto low = check_assumptions(BernsteinSpec::stable(0.6));
  CHECK(low.a2 == Verdict::fails);

  const auto g = check_assumptions(BernsteinSpec::gamma());
  CHECK(g.a2 == Verdict::holds);
  CHECK(g.a3 == Verdict::holds);
  CHECK(g.grow == Verdict::fails);

  const auto ac = check_assumptions(BernsteinSpec::arcosh_log());
  CHECK(ac.a2 == Verdict::fails);
  CHECK(ac.grow == Verdict::fails);

  // (1 + s)^{1/2} grows like s^{1/2}, so the doubling ratio tends to sqrt 2.
  const auto rel = check_assumptions(BernsteinSpec::relativistic(1.0, 1.0));
  CHECK(rel.grow == Verdict::holds);
  CHECK(rel.diagnostics.grow_limit == doctest::Approx(std::numbers::sqrt2).epsilon(5e-3));
}
