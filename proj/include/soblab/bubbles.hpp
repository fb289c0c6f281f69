#pragma once

#include <limits>
#include <vector>

#include "soblab/constants.hpp"
#include "soblab/manifold.hpp"
#include "soblab/quadrature.hpp"

namespace soblab {

/// Relative tolerance used for every bubble integral.
inline constexpr double kBubbleRelTol = 1e-12;

/// H(lambda, s) = integral of (lambda + d^{p'})^{-s} over the manifold,
/// evaluated through the layer-cake form with the ball volume V.
double talenti_H(const RadialManifold& m, const SobolevParams& params, double lambda, double s);
/// lambda^{s - n/p'} H(lambda, s); constant in lambda on cones.
double talenti_H_scaled(const RadialManifold& m, const SobolevParams& params, double lambda,
                        double s);

struct GaussianPair {
  double first = 0.0;   // L1 = integral of exp(-lambda d^{p'})
  double second = 0.0;  // L2 = integral of exp(-lambda d^{p'}) d^{p'}
};
GaussianPair gaussian_L(const RadialManifold& m, const SobolevParams& params, double lambda);
/// (lambda^{n/p'} L1, lambda^{n/p'+1} L2).
GaussianPair gaussian_L_scaled(const RadialManifold& m, const SobolevParams& params,
                               double lambda);

/// K(lambda, r, t, s) = integral of d^r (lambda + d^t)^{-s}.
double ckn_K(const RadialManifold& m, double lambda, double r, double t, double s);
/// lambda^{s - (n+r)/t} K(lambda, r, t, s).
double ckn_K_scaled(const RadialManifold& m, double lambda, double r, double t, double s);

/// P_k(rho): 1 on [0, k], linear down to 0 at k + 1.
double truncation_weight(double k, double rho);
/// integral of P_k(d) (lambda + d^{p'})^{-s}; k = inf gives talenti_H.
double truncated_bubble_integral(const RadialManifold& m, const SobolevParams& params,
                                 double lambda, double s, double k);

/// Closed-form limits with the manifold's AVR.
double predicted_H_limit(const RadialManifold& m, const SobolevParams& params, double s);
double predicted_K_limit(const RadialManifold& m, double r, double t, double s);
GaussianPair predicted_L_limits(const RadialManifold& m, const SobolevParams& params);

struct AsymptoticReport {
  LimitEstimate measured;
  double predicted = 0.0;
  double relative_deviation = 0.0;
};

AsymptoticReport verify_H_asymptotic(const RadialManifold& m, const SobolevParams& params,
                                     double s, const std::vector<double>& lambdas);

struct GaussianAsymptotics {
  AsymptoticReport first;
  AsymptoticReport second;
  /// lambda L2 / L1 as lambda -> 0, predicted n/p'.
  AsymptoticReport ratio;
};
GaussianAsymptotics verify_L_asymptotics(const RadialManifold& m, const SobolevParams& params,
                                         const std::vector<double>& lambdas);

AsymptoticReport verify_K_asymptotic(const RadialManifold& m, double r, double t, double s,
                                     const std::vector<double>& lambdas);

/// lambda in [1e2, 1e6] and [1e-6, 1e-1], geometric.
std::vector<double> default_large_lambda_grid(int count = 12);
std::vector<double> default_small_lambda_grid(int count = 12);

}  // namespace soblab
