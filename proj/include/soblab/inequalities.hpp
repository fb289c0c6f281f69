#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soblab/constants.hpp"
#include "soblab/manifold.hpp"
#include "soblab/quadrature.hpp"
#include "soblab/radial_function.hpp"

namespace soblab {

/// Both sides of one inequality for one test function. For the Sobolev
/// quotient slack = sharp_bound - ratio; for the entropy forms slack = rhs - lhs.
struct QuotientReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double sharp_bound = 0.0;
  double slack = 0.0;
  std::map<std::string, double> details;
};

struct ScanPoint {
  double lambda = 0.0;
  double value = 0.0;
  double error = 0.0;
};

/// Extracted constants along a lambda grid plus their extrapolated limit.
struct ScanReport {
  std::string name;
  std::vector<ScanPoint> points;
  LimitEstimate limit;
  double expected = 0.0;
  double relative_deviation = 0.0;
};

QuotientReport sobolev_quotient(const RadialManifold& m, const SobolevParams& params,
                                const RadialFunction& f);

/// C(lambda) from the Talentian bubble family, lambda -> inf.
double sobolev_scan_value(const RadialManifold& m, const SobolevParams& params, double lambda);
ScanReport sobolev_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                  const std::vector<double>& lambdas);

struct LogSobolevOptions {
  bool auto_renormalize = false;
  double normalization_tolerance = 1e-8;
};
QuotientReport logsob_quotient(const RadialManifold& m, const SobolevParams& params,
                               const RadialFunction& f, const LogSobolevOptions& options = {});

/// C(lambda) from the Gaussian bubble family, lambda -> 0.
double logsob_scan_value(const RadialManifold& m, const SobolevParams& params, double lambda);
ScanReport logsob_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                 const std::vector<double>& lambdas);

/// Radial potential V(d) with the data of the Gaussian LSI hypothesis.
struct PotentialSpec {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second_derivative;
  double c_v = 0.0;
  /// Curvature scale K of the generalized hypothesis (1 for the plain one).
  double k = 1.0;
  /// integral of exp(-V) over the manifold.
  double g_v = 0.0;
  /// Length scale of exp(-V), used to place quadrature.
  double scale = 1.0;
  std::string name = "V";
};

/// integral of exp(-V) dv.
double potential_normalizer(const RadialManifold& m, const std::function<double(double)>& v,
                            double scale);
/// V = K d^2 / 2, C_V = 0, G_V integrated on m.
PotentialSpec quadratic_potential(const RadialManifold& m, double k = 1.0);

struct GaussianLsiOptions {
  bool auto_renormalize = false;
  double normalization_tolerance = 1e-8;
  /// Slack allowed in the sampled hypothesis V - V'^2/2K + LapV/K - n <= C_V.
  double hypothesis_margin = 1e-9;
  std::vector<double> hypothesis_grid;  // default: geometric 1e-3 .. 1e2 / sqrt(K)
};

/// lhs = entropy of h^2 under gamma_V, rhs = (2/K) int h'^2 dgamma_V +
/// log(K^{n/2} G_V e^{C_V} / ((2 pi)^{n/2} AVR)). details carry the
/// simplified right side (2/K) int h'^2 - log AVR and its slack.
QuotientReport gaussian_lsi_check(const RadialManifold& m, const PotentialSpec& potential,
                                  const RadialFunction& h, const GaussianLsiOptions& options = {});

struct IsoperimetricPoint {
  double rho = 0.0;
  double perimeter = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double relative_slack = 0.0;
};
struct IsoperimetricReport {
  std::vector<IsoperimetricPoint> points;
  double min_relative_slack = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};
/// A(rho) against n (omega_n AVR)^{1/n} V(rho)^{(n-1)/n} on metric balls.
IsoperimetricReport isoperimetric_check(const RadialManifold& m, const std::vector<double>& grid,
                                        double tolerance = 1e-12);

struct NoncollapseResult {
  double bound = 0.0;
  bool clamped = false;
  std::string warning;
  CknParams params;
};
/// AVR lower bound (K_ab / C)^{n/(a+1-b)} forced by a weighted Sobolev
/// inequality with constant C.
NoncollapseResult noncollapse_bound(int n, double a, double b, double c);

double ckn_scan_value(const RadialManifold& m, const CknParams& params, double lambda);
ScanReport ckn_sharpness_scan(const RadialManifold& m, double a, double b,
                              const std::vector<double>& lambdas);

}  // namespace soblab
