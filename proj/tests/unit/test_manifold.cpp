#include <cmath>
#include <numbers>
#include <sstream>

#include "soblab/constants.hpp"
#include "soblab/errors.hpp"
#include "soblab/manifold.hpp"
#include "support.hpp"

using namespace soblab;
using soblab::test::data_file;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

VolumeProfileTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_volume_profile(in);
}

}  // namespace

TEST_SUITE("manifold") {
  TEST_CASE("euclidean and cone models") {
    const auto e3 = euclidean(3);
    CHECK_REL(e3.ball_volume(1.0), 4.0 * std::numbers::pi / 3.0, 1e-15);
    CHECK(e3.avr() == 1.0);
    CHECK_FALSE(e3.is_diagnostic());
    const auto c = cone(3, 0.25);
    CHECK(c.avr() == 0.25);
    for (double r : {1e-3, 0.7, 42.0}) {
      CHECK_REL(c.ball_volume(r), 0.25 * e3.ball_volume(r), 1e-15);
      CHECK_REL(c.area_density(r), 0.25 * e3.area_density(r), 1e-15);
      CHECK_REL(c.log_area_derivative(r), 2.0 / r, 1e-15);
    }
    CHECK(asymptotic_volume_ratio(c) == 0.25);
  }

  TEST_CASE("construction errors") {
    CHECK(kind_of([] { cone(3, 1.5); }) == ErrorKind::ParameterDomain);
    CHECK(kind_of([] { cone(3, 0.0); }) == ErrorKind::ParameterDomain);
    CHECK(kind_of([] { euclidean(1); }) == ErrorKind::InvalidDimension);
    CHECK(kind_of([] { euclidean(3).log_area_derivative(0.0); }) == ErrorKind::Domain);
  }

  TEST_CASE("radial integrals") {
    // area of the unit disk
    const auto disk = radial_integral(
        euclidean(2), [](double r) { return r <= 1.0 ? 1.0 : 0.0; }, AlgebraicTail{2.0},
        [] {
          QuadratureOptions o;
          o.breakpoints = {1.0};
          return o;
        }());
    CHECK_REL(disk.value, std::numbers::pi, 1e-12);
    for (int n : {2, 3, 4, 5}) {
      const auto g = radial_integral(euclidean(n), [](double r) { return std::exp(-r * r); },
                                     ExponentialTail{});
      CHECK_REL(g.value, std::pow(std::numbers::pi, 0.5 * n), 1e-11);
      const auto gc = radial_integral(cone(n, 0.3), [](double r) { return std::exp(-r * r); },
                                      ExponentialTail{});
      CHECK_REL(gc.value, 0.3 * g.value, 1e-12);
    }
  }

  TEST_CASE("csv parsing") {
    const auto t = parse("# comment\n# tail_exponent: 1.5\nrho,volume\n1,2\n2,9\n\n4,40\n");
    CHECK(t.rho.size() == 3);
    CHECK(t.volume[2] == 40.0);
    REQUIRE(t.tail_exponent_hint.has_value());
    CHECK(*t.tail_exponent_hint == 1.5);
    CHECK(kind_of([] { parse("rho,volume\n1,2\n1,3\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse("rho,volume\n1,x\n"); }) == ErrorKind::Format);
    CHECK(kind_of([] { parse("radius,vol\n1,2\n"); }) == ErrorKind::Format);
  }

  TEST_CASE("csv round trip") {
    const auto t = load_volume_profile(data_file("blend_sqrt.csv"));
    std::ostringstream out;
    write_volume_profile(out, t);
    const auto back = parse(out.str());
    CHECK(back.rho == t.rho);
    CHECK(back.volume == t.volume);
    CHECK(back.tail_exponent_hint == t.tail_exponent_hint);
  }

  TEST_CASE("table model reproduces the generating profile") {
    const auto table = load_volume_profile(data_file("blend_rational.csv"));
    const auto m = construct_manifold(TableSpec{3, table});
    CHECK(m.is_diagnostic());
    CHECK(m.kind() == ManifoldKind::Table);
    CHECK_REL(m.avr(), 0.5, 1e-8);
    const double omega = volume_unit_ball(3);
    for (double r : {1e-4, 3e-3, 0.5, 1.0, 7.3, 1e3, 5e5, 1e7}) {
      const double g = 0.5 + 0.5 / (1.0 + r);
      const double dg = -0.5 / ((1.0 + r) * (1.0 + r));
      CHECK_REL(m.ball_volume(r), omega * r * r * r * g, 1e-6);
      CHECK_REL(m.area_density(r), omega * r * r * (3 * g + r * dg), 1e-4);
    }
  }

  TEST_CASE("table rows are reproduced exactly") {
    const auto table = load_volume_profile(data_file("blend_sqrt.csv"));
    const auto m = construct_manifold(TableSpec{3, table});
    for (std::size_t i = 0; i < table.rho.size(); i += 17) {
      CHECK_REL(m.ball_volume(table.rho[i]), table.volume[i], 1e-13);
    }
    CHECK_REL(m.avr(), 0.5, 1e-12);
    CHECK(m.breakpoints().size() == table.rho.size());
  }

  TEST_CASE("table constructed from a cone is a cone") {
    VolumeProfileTable t;
    for (int i = 0; i <= 60; ++i) {
      const double r = std::pow(10.0, -2.0 + 0.1 * i);
      t.rho.push_back(r);
      t.volume.push_back(0.4 * volume_unit_ball(4) * std::pow(r, 4));
    }
    t.tail_exponent_hint = 1.0;
    const auto m = construct_manifold(TableSpec{4, t});
    CHECK_REL(m.avr(), 0.4, 1e-12);
    CHECK_REL(m.log_area_derivative(3.0), 1.0, 1e-10);
  }

  TEST_CASE("non-monotone table is rejected on construction") {
    const auto table = load_volume_profile(data_file("bump_nonmonotone.csv"));
    CHECK(kind_of([&] { construct_manifold(TableSpec{3, table}); }) == ErrorKind::Format);
  }

  TEST_CASE("volume comparison validator") {
    for (const auto& m : {euclidean(3), cone(3, 0.5)}) {
      const auto r = validate_bishop_gromov(m, default_validation_grid(m));
      CHECK(r.passed);
      CHECK(r.max_monotonicity_violation == 0.0);
      CHECK_FALSE(r.violation_interval.has_value());
    }
    const auto good = construct_manifold(
        TableSpec{3, load_volume_profile(data_file("blend_rational.csv"))});
    CHECK(validate_bishop_gromov(good, default_validation_grid(good)).passed);

    ConstructOptions lax;
    lax.enforce_bishop_gromov = false;
    const auto bad = construct_manifold(
        TableSpec{3, load_volume_profile(data_file("bump_nonmonotone.csv"))}, lax);
    const auto r = validate_bishop_gromov(bad, default_validation_grid(bad));
    CHECK_FALSE(r.passed);
    REQUIRE(r.violation_interval.has_value());
    CHECK(r.violation_interval->first < r.violation_interval->second);
    CHECK(r.violation_interval->first > 1.0);
    CHECK(r.violation_interval->second < 100.0);
  }

  TEST_CASE("short table without a tail hint") {
    VolumeProfileTable t;
    for (double r : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      t.rho.push_back(r);
      t.volume.push_back(volume_unit_ball(3) * r * r * r * (0.5 + 0.5 / (1 + r)));
    }
    CHECK(kind_of([&] { construct_manifold(TableSpec{3, t}); }) == ErrorKind::InsufficientData);
  }

  TEST_CASE("property: Bishop-Gromov ratio is non-increasing on the corpus") {
    for (const char* name : {"blend_rational.csv", "blend_sqrt.csv"}) {
      const auto m = construct_manifold(TableSpec{3, load_volume_profile(data_file(name))});
      double prev = 1.0 + 1e-15;
      for (double r : geometric_grid(1e-5, 1e8, 500)) {
        const double g = m.volume_ratio(r);
        CHECK(g <= prev * (1 + 1e-13));
        CHECK(g >= m.avr() * (1 - 1e-13));
        prev = g;
      }
    }
  }
}
