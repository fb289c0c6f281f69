#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "soblab/constants.hpp"
#include "soblab/inequalities.hpp"
#include "soblab/manifold.hpp"
#include "soblab/radial_function.hpp"

namespace soblab {

/// Radial probability measure phi(d) dv: the mass of [rho, rho + d rho] is
/// phi(rho) A(rho) d rho. The density is normalized on construction.
class RadialMeasure {
 public:
  /// `raw_density` need not be normalized. A finite `support_radius` means
  /// the density vanishes beyond it; `scale` is its characteristic length.
  RadialMeasure(const RadialManifold& m, std::function<double(double)> raw_density,
                std::optional<double> support_radius, double scale,
                std::vector<double> breakpoints = {}, std::string name = "measure");

  const RadialManifold& manifold() const noexcept;
  const std::string& name() const noexcept;
  double density(double rho) const;
  /// Normalization constant: integral of the raw density.
  double raw_mass() const noexcept;
  std::optional<double> support_radius() const noexcept;
  const std::vector<double>& breakpoints() const noexcept;
  double scale() const noexcept;

  /// Mass of the ball B(rho) and of its complement, each computed directly.
  double cdf(double rho) const;
  double complement(double rho) const;
  /// Radius x with cdf(x) = mass; uses the complement equation when
  /// complement_mass < mass. +inf if the mass lies beyond the tabulated range.
  double quantile(double mass, double complement_mass) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Uniform probability on B(radius).
RadialMeasure uniform_ball_measure(const RadialManifold& m, double radius);
/// |f|^power dv, normalized.
RadialMeasure profile_measure(const RadialManifold& m, const RadialFunction& f, double power);
/// P_k(d) (lambda + d^{p'})^{-n} dv normalized; k = inf drops the truncation.
RadialMeasure bubble_target(const RadialManifold& m, const SobolevParams& params, double lambda,
                            double k = std::numeric_limits<double>::infinity());

struct TransportOptions {
  int grid_nodes = 4096;
  /// Grid spans [inner_fraction * R, R] for the source support radius R.
  double inner_fraction = 1e-3;
  /// Nodes whose remaining source mass is below this are dropped when the
  /// target is unbounded (the map runs off to infinity there).
  double drop_threshold = 1e-14;
};

struct TransportNode {
  double rho = 0.0;
  double map = 0.0;             // T(rho)
  double potential_slope = 0.0; // u'(rho) = rho - T(rho)
  double map_slope = 0.0;       // T'(rho), finite differences
  double jacobian = 0.0;        // T' A(T) / A(rho)
  double laplacian = 0.0;       // u'' + (A'/A) u'
  double det_root = 0.0;        // J^{1/n}
  double trace_bound = 0.0;     // 1 - Lap u / n
  double slack = 0.0;
  double residual = 0.0;        // |phi_src - phi_tgt(T) J|
  double pushforward_error = 0.0;
};

/// Radial monotone rearrangement between two measures on one manifold.
class TransportInstance {
 public:
  TransportInstance(RadialMeasure source, RadialMeasure target, std::vector<TransportNode> nodes,
                    double source_radius);

  const RadialMeasure& source() const noexcept { return source_; }
  const RadialMeasure& target() const noexcept { return target_; }
  const RadialManifold& manifold() const noexcept { return source_.manifold(); }
  const std::vector<TransportNode>& nodes() const noexcept { return nodes_; }
  /// K0: radius of the source support.
  double source_radius() const noexcept { return source_radius_; }

  /// T(rho) solved on demand (not interpolated).
  double map(double rho) const;
  /// T'(rho) from mass balance, phi_src A(rho) / (phi_tgt(T) A(T)).
  double map_slope(double rho) const;

 private:
  RadialMeasure source_;
  RadialMeasure target_;
  std::vector<TransportNode> nodes_;
  double source_radius_;
};

TransportInstance solve_radial_transport(const RadialMeasure& source, const RadialMeasure& target,
                                         const TransportOptions& options = {});

struct MongeAmpereReport {
  double sup_residual = 0.0;  // relative to max source density on the grid
  double worst_rho = 0.0;
  double pushforward_error = 0.0;
  std::size_t nodes = 0;
};
MongeAmpereReport monge_ampere_residual(const TransportInstance& inst);

struct DeterminantTraceReport {
  double min_slack = 0.0;
  double max_abs_slack = 0.0;
  double worst_rho = 0.0;
  bool passed = true;
  /// Set on table manifolds, where a violation may just mean the profile
  /// does not come from a Ric >= 0 metric.
  bool diagnostic = false;
  double tolerance = 0.0;
};
DeterminantTraceReport determinant_trace_check(const TransportInstance& inst,
                                               double tolerance = 1e-8);

/// Named quantity in a chain of (in)equalities; `relation` links it to the
/// next entry ("=", "<=", or "" for the last one).
struct ChainStep {
  std::string name;
  double value = 0.0;
  std::string relation;
};

struct ChainReport {
  std::vector<ChainStep> steps;
  bool holds = true;
  /// Largest relative violation among the links (<= 0 when everything holds).
  double worst_violation = 0.0;
  std::string worst_link;
  std::map<std::string, double> details;
};

struct PipelineOptions {
  TransportOptions transport;
  double equality_tolerance = 1e-7;
  double inequality_tolerance = 1e-9;
  bool auto_normalize = false;
};

/// Transport proof of the L^p-Sobolev inequality (1 < p < n) for a compactly
/// supported f with int f^{p*} = 1 against the truncated bubble target.
ChainReport proof_pipeline_p_gt_1(const RadialManifold& m, const SobolevParams& params,
                                  const RadialFunction& f, double lambda,
                                  double k = std::numeric_limits<double>::infinity(),
                                  const PipelineOptions& options = {});

/// Transport-free part of the chain: C(lambda) such that 1 <= C(lambda) ||f'||_p
/// follows from the H-form; tends to AT(n,p) AVR^{-1/n}.
double pipeline_constant(const RadialManifold& m, const SobolevParams& params, double c_f,
                         double lambda);
/// The lambda-independent constant C(f, p, n, Omega) of the chain.
double pipeline_offset(const RadialManifold& m, const SobolevParams& params,
                       const RadialFunction& f);

/// Transport proof for p = 1 with the uniform target on B(lambda).
ChainReport proof_pipeline_p_eq_1(const RadialManifold& m, const RadialFunction& f, double lambda,
                                  const PipelineOptions& options = {});

/// V(B(lambda))^{1/n} / lambda along a grid, lambda -> inf; the limit is
/// (omega_n AVR)^{1/n}.
ScanReport ball_growth_scan(const RadialManifold& m, const std::vector<double>& lambdas);

/// pipeline_constant along a grid, extrapolated with the known correction
/// order 1/p'.
ScanReport pipeline_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                   const RadialFunction& f, const std::vector<double>& lambdas);

struct CompositionReport {
  double sup_deviation = 0.0;
  double worst_rho = 0.0;
  std::size_t nodes = 0;
};
/// Solves a -> b and b -> a and measures how far T_ba(T_ab(rho)) is from rho.
CompositionReport composition_inverse_check(const RadialMeasure& a, const RadialMeasure& b,
                                            const TransportOptions& options = {});

struct CampaignReport {
  std::size_t instances = 0;
  double min_slack = 0.0;
  double max_residual = 0.0;
  std::size_t worst_instance = 0;
  std::uint64_t seed = 0;
};
/// Random smooth compactly supported sources and gaussian-type targets.
CampaignReport determinant_trace_campaign(const RadialManifold& m, std::size_t instances,
                                          std::uint64_t seed,
                                          const TransportOptions& options = {});

}  // namespace soblab
