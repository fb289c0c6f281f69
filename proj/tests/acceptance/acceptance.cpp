// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "soblab/bubbles.hpp"
#include "soblab/constants.hpp"
#include "soblab/errors.hpp"
#include "soblab/inequalities.hpp"
#include "soblab/manifold.hpp"
#include "soblab/transport.hpp"

using namespace soblab;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string data(const char* name) { return std::string(SOBLAB_TEST_DATA) + "/" + name; }

// Collects the worst value of one measured quantity against its limit.
struct Tracker {
  double worst = 0.0;
  bool ok = true;
  void at_most(double v, double tol) {
    worst = std::max(worst, v);
    if (!(v <= tol)) ok = false;
  }
};

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* label, double v) {
  std::ostringstream s;
  s << label << '=' << v;
  return s.str();
}

Outcome closed_forms() {
  Tracker t;
  for (int n = 2; n <= 5; ++n) {
    const auto m = euclidean(n);
    const double w = volume_unit_ball(n);
    for (double p : {1.5, 2.0, 3.0}) {
      const auto params = log_sobolev_exponents(n, p);
      const double pc = params.p_conj;
      const double a = n / pc;
      for (double lambda : {0.3, 1.0, 4.0}) {
        for (double s : {a + 0.5, a + 2.0}) {
          const double h = w * std::tgamma(a + 1) * std::tgamma(s - a) / std::tgamma(s) *
                           std::pow(lambda, a - s);
          t.at_most(rel(talenti_H(m, params, lambda, s), h), 1e-9);
        }
        const auto l = gaussian_L(m, params, lambda);
        const double l1 = n * w / pc * std::tgamma(a) * std::pow(lambda, -a);
        const double l2 = n * w / pc * std::tgamma(a + 1) * std::pow(lambda, -a - 1);
        t.at_most(rel(l.first, l1), 1e-9);
        t.at_most(rel(l.second, l2), 1e-9);
        const double r = 0.5, s = (n + r) / pc + 1.0;
        const double ak = (n + r) / pc;
        const double k = (n / pc) * w * std::tgamma(ak) * std::tgamma(s - ak) / std::tgamma(s) *
                         std::pow(lambda, ak - s);
        t.at_most(rel(ckn_K(m, lambda, r, pc, s), k), 1e-9);
      }
    }
  }
  return {t.ok, fmt("max_rel_err", t.worst)};
}

Outcome h_limit() {
  Tracker t;
  const auto m = cone(3, 0.5);
  for (double s : {2.5, 3.0}) {
    const auto r = verify_H_asymptotic(m, sobolev_exponents(3, 2.0), s, default_large_lambda_grid());
    t.at_most(r.relative_deviation, 1e-6);
  }
  return {t.ok, fmt("max_rel_dev", t.worst)};
}

Outcome l_limits() {
  Tracker lim, ratio;
  for (auto [n, theta] : {std::pair{2, 1.0}, {3, 0.5}, {4, 0.25}}) {
    const auto r = verify_L_asymptotics(cone(n, theta), log_sobolev_exponents(n, 2.0),
                                        default_small_lambda_grid());
    lim.at_most(r.first.relative_deviation, 1e-6);
    lim.at_most(r.second.relative_deviation, 1e-6);
    ratio.at_most(r.ratio.relative_deviation, 1e-8);
  }
  return {lim.ok && ratio.ok, fmt("max_limit_dev", lim.worst) + " " + fmt("max_ratio_dev", ratio.worst)};
}

Outcome sobolev_scans() {
  Tracker scan, exact;
  const auto params = sobolev_exponents(3, 2.0);
  for (double theta : {0.25, 0.5, 1.0}) {
    const auto s = sobolev_sharpness_scan(cone(3, theta), params, default_large_lambda_grid());
    const double dev = rel(s.limit.limit, aubin_talenti(3, 2.0) * std::pow(theta, -1.0 / 3.0));
    scan.at_most(s.limit.reliable ? dev : INFINITY, 1e-4);
  }
  for (double lambda : default_large_lambda_grid()) {
    exact.at_most(rel(sobolev_scan_value(euclidean(3), params, lambda), aubin_talenti(3, 2.0)), 1e-10);
  }
  return {scan.ok && exact.ok, fmt("max_scan_dev", scan.worst) + " " + fmt("euclid_dev", exact.worst)};
}

Outcome logsob_scans() {
  Tracker scan, exact;
  for (double p : {1.5, 2.0}) {
    for (double theta : {0.25, 0.5, 1.0}) {
      const auto s = logsob_sharpness_scan(cone(3, theta), log_sobolev_exponents(3, p),
                                           default_small_lambda_grid());
      scan.at_most(rel(s.limit.limit, log_sobolev_constant(3, p) * std::pow(theta, -p / 3.0)), 1e-4);
    }
  }
  const double target = 1.0 / (std::numbers::pi * std::numbers::e);
  for (double lambda : default_small_lambda_grid()) {
    exact.at_most(rel(logsob_scan_value(euclidean(2), log_sobolev_exponents(2, 2.0), lambda), target),
                  1e-9);
  }
  return {scan.ok && exact.ok, fmt("max_scan_dev", scan.worst) + " " + fmt("euclid_dev", exact.worst)};
}

Outcome determinant_trace() {
  Tracker eq;
  double min_slack = INFINITY;
  std::size_t count = 0;
  for (const auto& m : {euclidean(3), cone(3, 0.7)}) {
    const auto b1 = uniform_ball_measure(m, 1.0);
    eq.at_most(determinant_trace_check(solve_radial_transport(b1, b1)).max_abs_slack, 1e-10);
    eq.at_most(determinant_trace_check(solve_radial_transport(b1, uniform_ball_measure(m, 2.0)))
                   .max_abs_slack,
               1e-10);
    const auto c = determinant_trace_campaign(m, 100, 20240611);
    min_slack = std::min(min_slack, c.min_slack);
    count += c.instances;
  }
  const bool ok = eq.ok && count >= 200 && min_slack >= -1e-8;
  return {ok, fmt("equality_abs_slack", eq.worst) + " " + fmt("campaign_min_slack", min_slack) + " " +
                  fmt("instances", static_cast<double>(count))};
}

Outcome monge_ampere() {
  const auto m = cone(3, 0.5);
  const auto params = sobolev_exponents(3, 2.0);
  const auto src = profile_measure(m, talenti_bubble(3, 2.0, 1.0).cut_off(1.0, 2.0), params.p_star);
  const auto tgt = bubble_target(m, params, 1.0);
  TransportOptions coarse, fine;
  coarse.grid_nodes = 4096;
  fine.grid_nodes = 8192;
  const double r1 = monge_ampere_residual(solve_radial_transport(src, tgt, coarse)).sup_residual;
  const double r2 = monge_ampere_residual(solve_radial_transport(src, tgt, fine)).sup_residual;
  return {r1 <= 1e-8 && r1 / r2 >= 4.0, fmt("residual_4096", r1) + " " + fmt("refinement_ratio", r1 / r2)};
}

Outcome isoperimetric() {
  Tracker eq;
  for (int n : {2, 3, 4, 5}) {
    for (double theta : {0.1, 0.5, 1.0}) {
      const auto r = isoperimetric_check(cone(n, theta), geometric_grid(1e-4, 1e4, 81));
      eq.at_most(std::abs(r.min_relative_slack), 1e-12);
    }
  }
  double table_min = INFINITY;
  for (const char* name : {"blend_rational.csv", "blend_sqrt.csv"}) {
    const auto m = construct_manifold(TableSpec{3, load_volume_profile(data(name))});
    table_min = std::min(table_min, isoperimetric_check(m, default_validation_grid(m)).min_relative_slack);
  }
  return {eq.ok && table_min >= -1e-12,
          fmt("cone_abs_slack", eq.worst) + " " + fmt("table_min_rel_slack", table_min)};
}

Outcome weighted_noncollapse() {
  const auto m = cone(4, 0.3);
  const auto s = ckn_sharpness_scan(m, 0.3, 0.5, default_large_lambda_grid());
  const double bound = noncollapse_bound(4, 0.3, 0.5, s.limit.limit).bound;
  Tracker agree;
  const auto ckn = ckn_constants(4, 0.0, 0.0);
  const auto sob = sobolev_exponents(4, 2.0);
  for (double lambda : default_large_lambda_grid()) {
    agree.at_most(rel(ckn_scan_value(m, ckn, lambda), sobolev_scan_value(m, sob, lambda)), 1e-8);
  }
  const double err = std::abs(bound - 0.3);
  return {err <= 1e-3 && agree.ok, fmt("recovered_avr", bound) + " " + fmt("unweighted_dev", agree.worst)};
}

Outcome gaussian_lsi() {
  Tracker gv, constant;
  double min_slack = INFINITY;
  GaussianLsiOptions opts;
  opts.auto_renormalize = true;
  for (int n : {2, 3}) {
    const double euclid_gv = std::pow(2 * std::numbers::pi, 0.5 * n);
    for (double theta : {1.0, 0.7, 0.2}) {
      const auto m = theta == 1.0 ? euclidean(n) : cone(n, theta);
      gv.at_most(rel(quadratic_potential(m).g_v, theta * euclid_gv), 1e-8);
      for (double k : {1.0, 0.5, 2.0}) {
        const auto v = quadratic_potential(m, k);
        for (double w : {0.3, 1.0, 2.0}) {
          for (double poly : {0.0, 0.5}) {
            const auto r = gaussian_lsi_check(m, v, gaussian_type(w, poly), opts);
            constant.at_most(std::abs(r.details.at("simplified_constant") + std::log(theta)), 1e-12);
            min_slack = std::min({min_slack, r.slack, r.details.at("simplified_slack")});
          }
        }
      }
    }
  }
  return {gv.ok && constant.ok && min_slack >= -1e-8,
          fmt("g_v_dev", gv.worst) + " " + fmt("min_slack", min_slack)};
}

Outcome derivative_identity() {
  Tracker t;
  std::vector<RadialManifold> ms;
  for (int n : {2, 3, 4, 5}) {
    ms.push_back(euclidean(n));
    ms.push_back(cone(n, 0.5));
  }
  for (const auto& m : ms) {
    const auto params = log_sobolev_exponents(m.dimension(), 2.0);
    for (double lambda : {0.1, 1.0, 10.0}) {
      const double d = numeric_derivative(
          [&](double l) { return gaussian_L(m, params, l).first; }, lambda, 0.01 * lambda);
      t.at_most(rel(gaussian_L(m, params, lambda).second, -d), 1e-6);
    }
  }
  return {t.ok, fmt("max_rel_err", t.worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"euclidean closed forms", closed_forms},
      {"H limit on cone", h_limit},
      {"L limits and ratio", l_limits},
      {"Sobolev sharpness scan", sobolev_scans},
      {"log-Sobolev sharpness scan", logsob_scans},
      {"determinant-trace inequality", determinant_trace},
      {"Monge-Ampere residual", monge_ampere},
      {"isoperimetric inequality", isoperimetric},
      {"weighted scan and noncollapse", weighted_noncollapse},
      {"Gaussian log-Sobolev", gaussian_lsi},
      {"L2 = -dL1/dlambda", derivative_identity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("criterion %2zu %-32s %s  %s\n", i + 1, criteria[i].first, o.passed ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
