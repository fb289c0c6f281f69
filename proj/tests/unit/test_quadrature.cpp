#include <cmath>
#include <numbers>
#include <vector>

#include "oracles/oracles.hpp"
#include "soblab/errors.hpp"
#include "soblab/quadrature.hpp"
#include "support.hpp"

using namespace soblab;
namespace o = soblab::oracle;

TEST_SUITE("quadrature") {
  TEST_CASE("finite interval") {
    const auto r = integrate_interval([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK_REL(r.value, 2.0, 1e-14);
    CHECK(r.error_estimate < 1e-10);
  }

  TEST_CASE("Kronrod rule is exact on low degree polynomials") {
    const auto r = kronrod21_rule([](double x) { return x * x * x * x * x; }, 0.0, 2.0);
    CHECK_REL(r.value, 64.0 / 6.0, 1e-15);
  }

  TEST_CASE("breakpoints handle a kink") {
    QuadratureOptions opts;
    opts.breakpoints = {0.3};
    const auto r = integrate_interval([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, opts);
    CHECK_REL(r.value, 0.5 * (0.09 + 0.49), 1e-14);
  }

  TEST_CASE("algebraic tail") {
    const auto r = integrate_improper([](double x) { return 1.0 / ((1 + x * x) * (1 + x * x)); },
                                      AlgebraicTail{4.0});
    CHECK_REL(r.value, o::int_rational, 1e-12);
  }

  TEST_CASE("integrable origin singularity with exponential tail") {
    QuadratureOptions opts;
    opts.origin_exponent = -0.5;
    const auto r = integrate_improper([](double x) { return std::exp(-x) / std::sqrt(x); },
                                      ExponentialTail{}, opts);
    CHECK_REL(r.value, o::int_sqrt_exp, 1e-12);
  }

  TEST_CASE("scale moves the substitution to where the mass is") {
    QuadratureOptions opts;
    opts.scale = 1e4;
    const auto r = integrate_improper([](double x) { return std::exp(-x / 1e4); },
                                      ExponentialTail{}, opts);
    CHECK_REL(r.value, 1e4, 1e-12);
  }

  TEST_CASE("non-finite integrand is a domain error") {
    try {
      integrate_interval([](double x) { return 1.0 / (x - 0.5) / 0.0; }, 0.0, 1.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Domain);
    }
  }

  TEST_CASE("results are reproducible bit for bit") {
    auto f = [](double x) { return std::exp(-x * x) * std::cos(3 * x); };
    const double a = integrate_improper(f, ExponentialTail{}).value;
    const double b = integrate_improper(f, ExponentialTail{}).value;
    CHECK(a == b);
  }

  TEST_CASE("five point derivative") {
    const double d = numeric_derivative([](double x) { return std::log(x); }, 2.0, 1e-2);
    CHECK_REL(d, 0.5, 1e-9);
    CHECK_THROWS_AS(numeric_derivative([](double x) { return x; }, 0.01, 0.01), Error);
  }

  TEST_CASE("geometric grid") {
    const auto g = geometric_grid(1.0, 1000.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 1000.0);
    CHECK_REL(g[1], 10.0, 1e-14);
  }
}

TEST_SUITE("extrapolation") {
  std::vector<LimitSample> sample(const std::vector<double>& lambdas, double (*fn)(double)) {
    std::vector<LimitSample> out;
    for (double l : lambdas) out.push_back({l, fn(l)});
    return out;
  }

  TEST_CASE("constant sequence is recognized") {
    const auto s = sample(geometric_grid(1e2, 1e6, 10), [](double) { return 0.75; });
    const auto e = extrapolate_limit(s, LimitDirection::ToInfinity);
    CHECK(e.limit == 0.75);
    CHECK_FALSE(e.correction_exponent.has_value());
    CHECK(e.reliable);
  }

  TEST_CASE("power correction toward infinity, unknown exponent") {
    const auto s = sample(geometric_grid(1e1, 1e5, 12),
                          [](double l) { return 2.0 + 3.0 * std::pow(l, -0.5); });
    const auto e = extrapolate_limit(s, LimitDirection::ToInfinity);
    CHECK_REL(e.limit, 2.0, 1e-8);
    REQUIRE(e.correction_exponent.has_value());
    CHECK(*e.correction_exponent == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(e.reliable);
  }

  TEST_CASE("power correction toward zero") {
    const auto s = sample(geometric_grid(1e-6, 1e-1, 12),
                          [](double l) { return 1.5 - 0.7 * std::pow(l, 2.0 / 3.0); });
    const auto e = extrapolate_limit(s, LimitDirection::ToZero);
    CHECK_REL(e.limit, 1.5, 1e-9);
  }

  TEST_CASE("known exponent uses Richardson elimination") {
    const auto s = sample(geometric_grid(1e2, 1e6, 8), [](double l) {
      return 1.0 + 2.0 * std::pow(l, -0.5) + 5.0 * std::pow(l, -1.0);
    });
    ExtrapolationOptions opts;
    opts.known_exponent = 0.5;
    const auto e = extrapolate_limit(s, LimitDirection::ToInfinity, opts);
    CHECK_REL(e.limit, 1.0, 1e-11);
  }

  TEST_CASE("oscillating tail is flagged unreliable") {
    const auto s = sample(geometric_grid(1e2, 1e6, 12), [](double l) {
      return 1.0 + 0.1 * std::sin(std::log(l) * 7.0);
    });
    CHECK_FALSE(extrapolate_limit(s, LimitDirection::ToInfinity).reliable);
  }

  TEST_CASE("too few samples") {
    const std::vector<LimitSample> s{{1.0, 1.0}, {2.0, 1.5}};
    CHECK_THROWS_AS(extrapolate_limit(s, LimitDirection::ToInfinity), Error);
  }
}
