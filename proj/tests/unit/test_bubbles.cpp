#include <cmath>
#include <numbers>

#include "oracles/oracles.hpp"
#include "soblab/bubbles.hpp"
#include "soblab/errors.hpp"
#include "support.hpp"

using namespace soblab;
namespace o = soblab::oracle;
using soblab::test::data_file;

namespace {

// Beta-function reductions on euclidean(n).
double h_closed(int n, double pc, double lambda, double s) {
  const double a = n / pc;
  return volume_unit_ball(n) * std::tgamma(a + 1) * std::tgamma(s - a) / std::tgamma(s) *
         std::pow(lambda, a - s);
}
double k_closed(int n, double lambda, double r, double t, double s) {
  const double a = (n + r) / t;
  return (n / t) * volume_unit_ball(n) * std::tgamma(a) * std::tgamma(s - a) / std::tgamma(s) *
         std::pow(lambda, a - s);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Usage;
}

}  // namespace

TEST_SUITE("bubbles") {
  TEST_CASE("H on the plane reduces to pi/2") {
    CHECK_REL(talenti_H(euclidean(2), log_sobolev_exponents(2, 2.0), 1.0, 3.0),
              std::numbers::pi / 2, 1e-12);
  }

  TEST_CASE("direct quadrature oracles") {
    CHECK_REL(talenti_H(euclidean(5), sobolev_exponents(5, 3.0), 2.0, 4.0), o::h_euclid5_p3_lam2_s4,
              1e-11);
    const auto l = gaussian_L(euclidean(4), log_sobolev_exponents(4, 1.5), 0.5);
    CHECK_REL(l.first, o::l1_euclid4_p15_lam05, 1e-11);
    CHECK_REL(l.second, o::l2_euclid4_p15_lam05, 1e-11);
    CHECK_REL(ckn_K(euclidean(5), 3.0, 1.0, 1.5, 5.0), o::k_euclid5_lam3_r1_t15_s5, 1e-11);
  }

  TEST_CASE("Gaussian functionals on the plane") {
    const auto params = log_sobolev_exponents(2, 2.0);
    for (double lambda : {0.01, 1.0, 30.0}) {
      const auto l = gaussian_L(euclidean(2), params, lambda);
      CHECK_REL(l.first, std::numbers::pi / lambda, 1e-12);
      CHECK_REL(l.second, std::numbers::pi / (lambda * lambda), 1e-12);
    }
  }

  TEST_CASE("H matches the Beta reduction over a parameter sweep") {
    for (int n : {2, 3, 4, 5}) {
      for (double p : {1.5, 2.0, 3.0}) {
        const auto params = log_sobolev_exponents(n, p);
        for (double ds : {0.3, 1.0, 2.5}) {
          const double s = n / params.p_conj + ds;
          for (double lambda : {0.2, 1.0, 7.0}) {
            CHECK_REL(talenti_H(euclidean(n), params, lambda, s),
                      h_closed(n, params.p_conj, lambda, s), 1e-10);
          }
        }
      }
    }
  }

  TEST_CASE("K matches the Beta reduction, including negative r") {
    for (int n : {3, 4, 5}) {
      for (double r : {-1.0, 0.0, 2.0}) {
        for (double t : {1.5, 2.0}) {
          const double s = (n + r) / t + 0.8;
          CHECK_REL(ckn_K(euclidean(n), 2.0, r, t, s), k_closed(n, 2.0, r, t, s), 1e-10);
        }
      }
    }
  }

  TEST_CASE("cone factorization") {
    const auto params = sobolev_exponents(3, 2.0);
    for (double theta : {0.1, 0.5, 0.9}) {
      const auto c = cone(3, theta);
      const auto e = euclidean(3);
      CHECK_REL(talenti_H(c, params, 2.0, 3.0), theta * talenti_H(e, params, 2.0, 3.0), 1e-12);
      const auto lc = gaussian_L(c, params, 0.7);
      const auto le = gaussian_L(e, params, 0.7);
      CHECK_REL(lc.first, theta * le.first, 1e-12);
      CHECK_REL(lc.second, theta * le.second, 1e-12);
      CHECK_REL(ckn_K(c, 1.3, -0.5, 2.0, 3.0), theta * ckn_K(e, 1.3, -0.5, 2.0, 3.0), 1e-12);
    }
  }

  TEST_CASE("scaled forms are constant on cones") {
    const auto c = cone(4, 0.3);
    const auto params = sobolev_exponents(4, 2.0);
    const double h0 = talenti_H_scaled(c, params, 1.0, 3.0);
    const auto l0 = gaussian_L_scaled(c, params, 1.0);
    const double k0 = ckn_K_scaled(c, 1.0, 0.0, 2.0, 4.0);
    for (double lambda : {1e-6, 1e-2, 1e3, 1e8}) {
      CHECK_REL(talenti_H_scaled(c, params, lambda, 3.0), h0, 1e-12);
      CHECK_REL(gaussian_L_scaled(c, params, lambda).first, l0.first, 1e-12);
      CHECK_REL(gaussian_L_scaled(c, params, lambda).second, l0.second, 1e-12);
      CHECK_REL(ckn_K_scaled(c, lambda, 0.0, 2.0, 4.0), k0, 1e-12);
    }
  }

  TEST_CASE("H on a table profile") {
    const auto m = construct_manifold(TableSpec{3, load_volume_profile(data_file("blend_rational.csv"))});
    CHECK_REL(talenti_H(m, sobolev_exponents(3, 2.0), 1.0, 3.0), o::h_table_blend, 1e-7);
  }

  TEST_CASE("divergent exponents and p = 1 are rejected") {
    const auto e = euclidean(3);
    CHECK(kind_of([&] { talenti_H(e, sobolev_exponents(3, 2.0), 1.0, 1.5); }) ==
          ErrorKind::DivergentIntegral);
    CHECK(kind_of([&] { talenti_H(e, sobolev_exponents(3, 1.0), 1.0, 3.0); }) ==
          ErrorKind::ExponentOutOfRange);
    CHECK(kind_of([&] { ckn_K(e, 1.0, -3.5, 2.0, 5.0); }) == ErrorKind::DivergentIntegral);
    CHECK(kind_of([&] { ckn_K(e, 1.0, 0.0, 2.0, 1.0); }) == ErrorKind::DivergentIntegral);
  }

  TEST_CASE("truncation weight") {
    CHECK(truncation_weight(2.0, 1.0) == 1.0);
    CHECK(truncation_weight(2.0, 2.5) == 0.5);
    CHECK(truncation_weight(2.0, 3.5) == 0.0);
  }

  TEST_CASE("truncated integrals increase to the full one") {
    const auto m = cone(3, 0.5);
    const auto params = sobolev_exponents(3, 2.0);
    const double full = talenti_H(m, params, 1.0, 3.0);
    double prev = 0.0;
    for (double k : {1.0, 5.0, 10.0, 20.0, 80.0}) {
      const double v = truncated_bubble_integral(m, params, 1.0, 3.0, k);
      CHECK(v > prev);
      CHECK(v < full);
      prev = v;
    }
    CHECK_REL(prev, full, 1e-4);
    CHECK(truncated_bubble_integral(m, params, 1.0, 3.0, std::numeric_limits<double>::infinity()) ==
          full);
  }

  TEST_CASE("predicted limits") {
    const auto c = cone(3, 0.5);
    const auto params = sobolev_exponents(3, 2.0);
    CHECK_REL(predicted_H_limit(c, params, 2.5), o::h_limit_cone3_half_s25, 1e-13);
    CHECK_REL(predicted_H_limit(c, params, 3.0), o::h_limit_cone3_half_s3, 1e-13);
    CHECK_REL(predicted_K_limit(cone(4, 0.25), 0.0, 2.0, 4.0), o::k_limit_cone4_quarter, 1e-13);
  }

  TEST_CASE("derivative identity L2 = -dL1/dlambda") {
    for (const auto& m : {euclidean(3), cone(3, 0.4), cone(2, 1.0)}) {
      const auto params = log_sobolev_exponents(m.dimension(), 2.0);
      for (double lambda : {0.1, 1.0, 10.0}) {
        const double d = numeric_derivative(
            [&](double l) { return gaussian_L(m, params, l).first; }, lambda, 0.01 * lambda);
        CHECK_REL(gaussian_L(m, params, lambda).second, -d, 1e-6);
      }
    }
  }

  TEST_CASE("asymptotic verifiers on a table profile") {
    const auto m = construct_manifold(TableSpec{3, load_volume_profile(data_file("blend_sqrt.csv"))});
    const auto params = sobolev_exponents(3, 2.0);
    const auto h = verify_H_asymptotic(m, params, 3.0, default_large_lambda_grid());
    CHECK(h.relative_deviation < 1e-4);
    const auto l = verify_L_asymptotics(m, params, default_small_lambda_grid());
    CHECK(l.first.relative_deviation < 1e-4);
    CHECK(l.ratio.relative_deviation < 1e-4);
  }
}
