#include <cmath>
#include <numbers>

#include "oracles/oracles.hpp"
#include "soblab/bubbles.hpp"
#include "soblab/errors.hpp"
#include "soblab/inequalities.hpp"
#include "support.hpp"

using namespace soblab;
namespace o = soblab::oracle;
using soblab::test::data_file;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Usage;
}

RadialFunction constant_one() {
  return RadialFunction([](double) { return 1.0; }, [](double) { return 0.0; },
                        ExponentialDecay{}, 1.0, {}, "one");
}

}  // namespace

TEST_SUITE("inequalities") {
  TEST_CASE("bubbles are extremal for the Sobolev quotient") {
    for (double theta : {1.0, 0.5}) {
      const auto m = cone(3, theta);
      for (double p : {1.5, 2.0}) {
        const auto params = sobolev_exponents(3, p);
        const auto q = sobolev_quotient(m, params, talenti_bubble(3, p, 1.0));
        CHECK_REL(q.ratio, q.sharp_bound, 1e-9);
      }
    }
  }

  TEST_CASE("Sobolev quotient is invariant under scaling and dilation") {
    const auto m = cone(4, 0.3);
    const auto params = sobolev_exponents(4, 2.0);
    const auto f = bump(1.0, 3);
    const double base = sobolev_quotient(m, params, f).ratio;
    CHECK_REL(sobolev_quotient(m, params, f.scaled(7.0)).ratio, base, 1e-10);
    CHECK_REL(sobolev_quotient(m, params, f.dilated(0.2)).ratio, base, 1e-10);
  }

  TEST_CASE("property: non-extremal functions have positive Sobolev slack") {
    for (const auto& m : {euclidean(3), cone(3, 0.7), cone(5, 0.2)}) {
      const auto params = sobolev_exponents(m.dimension(), 2.0);
      for (const auto& f : {bump(1.0, 2), bump(2.0, 5), mollified_ball(1.0, 0.3),
                            gaussian_type(1.0, 0.5)}) {
        const auto q = sobolev_quotient(m, params, f);
        CHECK(q.slack > 0.0);
      }
    }
  }

  TEST_CASE("Sobolev scan") {
    for (double theta : {0.25, 0.5, 1.0}) {
      const auto m = cone(3, theta);
      const auto s = sobolev_sharpness_scan(m, sobolev_exponents(3, 2.0), default_large_lambda_grid());
      CHECK(s.limit.reliable);
      CHECK_REL(s.limit.limit, o::at_3_2 * std::pow(theta, -1.0 / 3.0), 1e-4);
    }
    CHECK_REL(sobolev_scan_value(euclidean(3), sobolev_exponents(3, 2.0), 17.0), o::at_3_2, 1e-10);
    CHECK(kind_of([] {
            sobolev_sharpness_scan(euclidean(3), sobolev_exponents(3, 1.0), {1, 2, 3, 4, 5});
          }) == ErrorKind::ExponentOutOfRange);
  }

  // Regression only: on cones the extracted C(lambda) does not move along the grid.
  TEST_CASE("Sobolev scan values are flat along the grid on cones") {
    const auto s = sobolev_sharpness_scan(cone(3, 0.5), sobolev_exponents(3, 2.0),
                                          default_large_lambda_grid());
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      CHECK(std::abs(s.points[i].value - s.points[i - 1].value) <= 1e-12 * s.points[i].value);
    }
  }

  TEST_CASE("Gaussian bubbles are extremal for log-Sobolev") {
    LogSobolevOptions opts;
    opts.auto_renormalize = true;
    for (double theta : {1.0, 0.4}) {
      const auto m = cone(3, theta);
      for (double p : {1.5, 2.0}) {
        const auto params = log_sobolev_exponents(3, p);
        const auto q = logsob_quotient(m, params, gaussian_bubble(params.p_conj, 0.8), opts);
        CHECK(std::abs(q.slack) < 1e-8);
        CHECK(q.details.at("mass") == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("log-Sobolev needs a normalized function unless asked") {
    const auto m = euclidean(3);
    const auto params = log_sobolev_exponents(3, 2.0);
    CHECK(kind_of([&] { logsob_quotient(m, params, bump(1.0, 2)); }) == ErrorKind::Precondition);
  }

  TEST_CASE("property: log-Sobolev slack is non-negative") {
    LogSobolevOptions opts;
    opts.auto_renormalize = true;
    for (const auto& m : {euclidean(2), cone(3, 0.6), cone(4, 0.1)}) {
      const auto params = log_sobolev_exponents(m.dimension(), 2.0);
      for (const auto& f : {bump(1.0, 2), mollified_ball(2.0, 0.5), gaussian_type(0.5, 1.0)}) {
        CHECK(logsob_quotient(m, params, f, opts).slack >= -1e-10);
      }
    }
  }

  TEST_CASE("log-Sobolev scan") {
    for (double p : {1.5, 2.0}) {
      for (double theta : {0.3, 1.0}) {
        const auto m = cone(3, theta);
        const auto s = logsob_sharpness_scan(m, log_sobolev_exponents(3, p),
                                             default_small_lambda_grid());
        CHECK_REL(s.limit.limit, log_sobolev_constant(3, p) * std::pow(theta, -p / 3.0), 1e-4);
      }
    }
    CHECK_REL(logsob_scan_value(euclidean(2), log_sobolev_exponents(2, 2.0), 0.3), o::inv_pi_e,
              1e-9);
  }

  TEST_CASE("Gaussian normalizer") {
    CHECK_REL(quadratic_potential(euclidean(3)).g_v, o::two_pi_pow_15, 1e-10);
    for (int n : {2, 3, 4}) {
      for (double theta : {0.2, 0.9}) {
        CHECK_REL(quadratic_potential(cone(n, theta)).g_v,
                  theta * std::pow(2 * std::numbers::pi, 0.5 * n), 1e-10);
      }
    }
    CHECK_REL(quadratic_potential(euclidean(3), 2.0).g_v, std::pow(std::numbers::pi, 1.5), 1e-10);
  }

  TEST_CASE("Gaussian LSI: constants on cones") {
    for (double theta : {0.2, 0.5, 1.0}) {
      const auto m = cone(3, theta);
      const auto r = gaussian_lsi_check(m, quadratic_potential(m), constant_one());
      CHECK(std::abs(r.details.at("full_constant")) < 1e-10);
      CHECK_REL(r.details.at("simplified_constant"), -std::log(theta), 1e-14);
      CHECK(std::abs(r.slack) < 1e-10);
    }
  }

  TEST_CASE("property: Gaussian LSI slack on gaussian-type functions") {
    GaussianLsiOptions opts;
    opts.auto_renormalize = true;
    for (const auto& m : {euclidean(3), cone(3, 0.7), cone(2, 0.3)}) {
      for (double k : {0.5, 1.0, 2.0}) {
        const auto v = quadratic_potential(m, k);
        for (double w : {0.2, 0.5, 1.5}) {
          for (double poly : {0.0, 0.4}) {
            const auto r = gaussian_lsi_check(m, v, gaussian_type(w, poly), opts);
            CHECK(r.slack >= -1e-8);
            CHECK(r.details.at("simplified_slack") >= -1e-8);
          }
        }
      }
    }
  }

  TEST_CASE("Gaussian LSI rejects a potential that breaks the hypothesis") {
    const auto m = euclidean(3);
    auto v = quadratic_potential(m);
    v.value = [](double r) { return 0.5 * r * r + 0.3 * std::cos(r); };
    v.derivative = [](double r) { return r - 0.3 * std::sin(r); };
    v.second_derivative = [](double r) { return 1.0 - 0.3 * std::cos(r); };
    v.g_v = potential_normalizer(m, v.value, 1.0);
    CHECK(kind_of([&] { gaussian_lsi_check(m, v, constant_one()); }) ==
          ErrorKind::HypothesisViolation);
  }

  TEST_CASE("isoperimetric equality on cone balls") {
    for (int n : {2, 3, 5}) {
      for (double theta : {0.05, 0.5, 1.0}) {
        const auto r = isoperimetric_check(cone(n, theta), geometric_grid(1e-3, 1e3, 40));
        CHECK(r.passed);
        CHECK(std::abs(r.min_relative_slack) <= 1e-12);
      }
    }
  }

  TEST_CASE("isoperimetric inequality on the table corpus") {
    for (const char* name : {"blend_rational.csv", "blend_sqrt.csv"}) {
      const auto m = construct_manifold(TableSpec{3, load_volume_profile(data_file(name))});
      const auto r = isoperimetric_check(m, geometric_grid(1e-3, 1e6, 400));
      CHECK(r.passed);
    }
  }

  TEST_CASE("noncollapse bound") {
    const auto params = ckn_constants(4, 0.3, 0.5);
    const double theta = 0.3;
    const double c = params.k_ab * std::pow(theta, -params.weight_gap() / 4.0);
    const auto r = noncollapse_bound(4, 0.3, 0.5, c);
    CHECK_REL(r.bound, theta, 1e-13);
    CHECK_FALSE(r.clamped);
    CHECK(r.warning.empty());
  }

  TEST_CASE("noncollapse clamps constants below the sharp value") {
    const auto params = ckn_constants(3, 0.0, 0.0);
    const auto r = noncollapse_bound(3, 0.0, 0.0, 0.5 * params.k_ab);
    CHECK(r.clamped);
    CHECK(r.bound == 1.0);
    CHECK_FALSE(r.warning.empty());
    CHECK(kind_of([] { noncollapse_bound(3, 0.0, 0.0, -1.0); }) == ErrorKind::ParameterDomain);
  }

  TEST_CASE("weighted scan and noncollapse round trip") {
    const auto m = cone(4, 0.3);
    const auto s = ckn_sharpness_scan(m, 0.3, 0.5, default_large_lambda_grid());
    CHECK_REL(s.limit.limit, s.expected, 1e-4);
    CHECK(std::abs(noncollapse_bound(4, 0.3, 0.5, s.limit.limit).bound - 0.3) < 1e-3);
  }

  TEST_CASE("unweighted scan agrees with the p = 2 Sobolev scan") {
    for (const auto& m : {euclidean(3), cone(4, 0.3), cone(5, 0.6)}) {
      const int n = m.dimension();
      const auto ckn = ckn_constants(n, 0.0, 0.0);
      const auto sob = sobolev_exponents(n, 2.0);
      for (double lambda : geometric_grid(1.0, 1e6, 7)) {
        CHECK_REL(ckn_scan_value(m, ckn, lambda), sobolev_scan_value(m, sob, lambda), 1e-8);
      }
    }
  }
}
