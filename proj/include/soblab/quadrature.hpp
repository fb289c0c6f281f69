#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace soblab {

using Integrand = std::function<double(double)>;

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

/// Integrand decays like rho^{-exponent} (exponent > 1).
struct AlgebraicTail {
  double exponent = 2.0;
};
/// Integrand decays at least exponentially on the declared scale.
struct ExponentialTail {};

using TailClass = std::variant<AlgebraicTail, ExponentialTail>;

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
  /// Characteristic length of the integrand: [0, scale] is the head and
  /// [scale, inf) the tail of an improper integral.
  double scale = 1.0;
  /// Leading power at the origin, f ~ rho^{origin_exponent}. Negative values
  /// (> -1) switch on the substitution rho = scale * u^{1/(1+origin_exponent)}.
  double origin_exponent = 0.0;
  /// Points where the integrand is not smooth; split before adapting.
  std::vector<double> breakpoints;
};

/// Globally adaptive Gauss-Kronrod (10/21) on a finite interval.
IntegralResult integrate_interval(const Integrand& f, double a, double b,
                                  const QuadratureOptions& options = {});

/// One 21-point Kronrod rule on [a, b] with its error estimate; no adaptivity.
IntegralResult kronrod21_rule(const Integrand& f, double a, double b);

/// Integral of f over [0, inf) with head/tail substitutions chosen by `tail`.
IntegralResult integrate_improper(const Integrand& f, const TailClass& tail,
                                  const QuadratureOptions& options = {});

// ---------------------------------------------------------------------------
// Limits of sampled sequences
// ---------------------------------------------------------------------------

enum class LimitDirection { ToInfinity, ToZero };

struct LimitSample {
  double lambda = 0.0;
  double value = 0.0;
};

/// Result of fitting g(lambda) = L + c * lambda^{-alpha} (lambda -> inf) or
/// L + c * lambda^{alpha} (lambda -> 0) to the samples nearest the limit.
struct LimitEstimate {
  double limit = 0.0;
  /// nullopt when the tail samples are constant to within the noise floor.
  std::optional<double> correction_exponent;
  double residual = 0.0;
  bool reliable = true;
  std::string note;
  std::vector<LimitSample> samples;
};

struct ExtrapolationOptions {
  /// Number of samples (closest to the limit) used in the fit.
  int tail_samples = 6;
  /// Relative spread below which the tail is treated as constant.
  double constant_tolerance = 1e-11;
  /// Relative fit residual above which the estimate is flagged unreliable.
  double residual_threshold = 1e-6;
  /// When set, alpha is taken as known and Richardson elimination of the
  /// terms lambda^{-alpha}, lambda^{-2 alpha}, ... replaces the fit.
  std::optional<double> known_exponent;
};

LimitEstimate extrapolate_limit(std::span<const LimitSample> samples, LimitDirection direction,
                                const ExtrapolationOptions& options = {});

/// Five-point central difference, O(h^4). Requires 0 < 2h < x.
double numeric_derivative(const std::function<double(double)>& f, double x, double h);

/// count points from lo to hi with constant ratio (both ends included).
std::vector<double> geometric_grid(double lo, double hi, int count);

}  // namespace soblab
