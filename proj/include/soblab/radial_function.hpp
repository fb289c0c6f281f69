#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "soblab/manifold.hpp"

namespace soblab {

struct CompactSupport {
  double radius = 1.0;
};
/// |f| ~ rho^{-exponent} at infinity.
struct AlgebraicDecay {
  double exponent = 1.0;
};
struct ExponentialDecay {};
using Decay = std::variant<CompactSupport, AlgebraicDecay, ExponentialDecay>;

/// Radial profile f(x) = phi(d(pole, x)) with its derivative phi'.
class RadialFunction {
 public:
  using Profile = std::function<double(double)>;

  RadialFunction(Profile value, Profile derivative, Decay decay, double scale,
                 std::vector<double> breakpoints = {}, std::string name = "f");

  double operator()(double rho) const { return value_(rho); }
  double value(double rho) const { return value_(rho); }
  double derivative(double rho) const { return derivative_(rho); }
  const Decay& decay() const noexcept { return decay_; }
  /// Length scale on which the profile varies (used to place quadrature).
  double scale() const noexcept { return scale_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::string& name() const noexcept { return name_; }
  std::optional<double> support_radius() const;

  /// c * f
  RadialFunction scaled(double c) const;
  /// rho -> f(c rho)
  RadialFunction dilated(double c) const;
  /// f times a smooth cutoff equal to 1 on [0, inner] and 0 beyond outer.
  RadialFunction cut_off(double inner, double outer) const;

 private:
  Profile value_;
  Profile derivative_;
  Decay decay_;
  double scale_;
  std::vector<double> breakpoints_;
  std::string name_;
};

/// (lambda + rho^{p'})^{(p-n)/p}, the extremal family of the L^p-Sobolev inequality.
RadialFunction talenti_bubble(int n, double p, double lambda);
/// exp(-lambda rho^{p'}) for the conjugate exponent p_conj.
RadialFunction gaussian_bubble(double p_conj, double lambda);
/// exp(-width_factor rho^2 / 2) with an optional polynomial prefactor (1 + c rho^2).
RadialFunction gaussian_type(double width_factor, double poly = 0.0);
/// (1 - (rho/R)^2)^m on [0, R].
RadialFunction bump(double radius, int power);
/// 1 on [0, radius - width], smooth (C-infinity) descent to 0 at radius.
RadialFunction mollified_ball(double radius, double width);

/// C-infinity transition: 0 for t <= 0, 1 for t >= 1, with derivative.
double smooth_step(double t);
double smooth_step_derivative(double t);

/// Tail class of |f|^power * |f'|^dpower * A against the manifold; throws
/// Admissibility if the integral cannot converge.
TailClass integrand_tail(const RadialManifold& m, const RadialFunction& f, double power,
                         double derivative_power = 0.0);

/// integral of F(f(rho), f'(rho)) A(rho) over the support of f. `power` and
/// `derivative_power` describe the decay of F for tail selection.
IntegralResult integrate_profile(const RadialManifold& m, const RadialFunction& f,
                                 const std::function<double(double, double)>& integrand,
                                 double power, double derivative_power = 0.0,
                                 double rel_tol = 1e-11);

}  // namespace soblab
