#include "soblab/bubbles.hpp"

#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "soblab/errors.hpp"

namespace soblab {
namespace {

void require_p_gt_one(const SobolevParams& params) {
  if (params.is_p_one() || !(params.p > 1.0)) {
    throw Error(ErrorKind::ExponentOutOfRange, "bubble functionals need p > 1");
  }
}

void require_H_domain(const SobolevParams& params, double s) {
  require_p_gt_one(params);
  const double critical = params.n / params.p_conj;
  if (!(s > critical)) {
    std::ostringstream msg;
    msg << "H(lambda, s) diverges for s=" << s << " <= n/p'=" << critical;
    throw Error(ErrorKind::DivergentIntegral, msg.str());
  }
}

void require_K_domain(int n, double r, double t, double s) {
  if (!(t > 0.0) || !(n + r > 0.0) || !(s * t > n + r)) {
    std::ostringstream msg;
    msg << "K(lambda, r, t, s) needs s t > n + r > 0 and t > 0 (r=" << r << ", t=" << t
        << ", s=" << s << ")";
    throw Error(ErrorKind::DivergentIntegral, msg.str());
  }
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::Domain, "lambda must be positive and finite");
  }
}

// Table knots expressed in a rescaled radial variable.
std::vector<double> mapped_knots(const RadialManifold& m, const std::function<double(double)>& map) {
  std::vector<double> out;
  for (double rho : m.breakpoints()) out.push_back(map(rho));
  return out;
}

QuadratureOptions bubble_options() {
  QuadratureOptions o;
  o.rel_tol = kBubbleRelTol;
  o.max_intervals = 20000;
  return o;
}

AsymptoticReport compare(LimitEstimate measured, double predicted) {
  AsymptoticReport r;
  r.predicted = predicted;
  r.relative_deviation = std::abs(measured.limit - predicted) / std::abs(predicted);
  r.measured = std::move(measured);
  return r;
}

}  // namespace

double talenti_H_scaled(const RadialManifold& m, const SobolevParams& params, double lambda,
                        double s) {
  require_H_domain(params, s);
  require_lambda(lambda);
  const int n = m.dimension();
  const double pc = params.p_conj;
  const double stretch = std::pow(lambda, 1.0 / pc);
  // rho = lambda^{1/p'} r in the layer-cake integral s p' int V (lambda + rho^{p'})^{-s-1} rho^{p'-1}.
  const Integrand f = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double base = std::pow(r, n + pc - 1.0) * std::pow(1.0 + std::pow(r, pc), -s - 1.0);
    return base == 0.0 ? 0.0 : base * m.volume_ratio(stretch * r);
  };
  QuadratureOptions o = bubble_options();
  o.breakpoints = mapped_knots(m, [&](double rho) { return rho / stretch; });
  const double integral = integrate_improper(f, AlgebraicTail{pc * s - n + 1.0}, o).value;
  return volume_unit_ball(n) * s * pc * integral;
}

double talenti_H(const RadialManifold& m, const SobolevParams& params, double lambda, double s) {
  const double scaled = talenti_H_scaled(m, params, lambda, s);
  return std::pow(lambda, m.dimension() / params.p_conj - s) * scaled;
}

GaussianPair gaussian_L_scaled(const RadialManifold& m, const SobolevParams& params,
                               double lambda) {
  require_p_gt_one(params);
  require_lambda(lambda);
  const int n = m.dimension();
  const double pc = params.p_conj;
  const double k = n / pc;
  // w = lambda rho^{p'}
  auto radius = [&](double w) { return std::pow(w / lambda, 1.0 / pc); };
  QuadratureOptions o = bubble_options();
  o.scale = 1.0 + k;
  o.breakpoints = mapped_knots(m, [&](double rho) { return lambda * std::pow(rho, pc); });

  const Integrand f1 = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double base = std::pow(w, k) * std::exp(-w);
    return base == 0.0 ? 0.0 : base * m.volume_ratio(radius(w));
  };
  const Integrand f2 = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double base = std::pow(w, k) * std::exp(-w);
    return base == 0.0 ? 0.0 : base * m.area_ratio(radius(w));
  };
  GaussianPair out;
  out.first = volume_unit_ball(n) * integrate_improper(f1, ExponentialTail{}, o).value;
  out.second = integrate_improper(f2, ExponentialTail{}, o).value / pc;
  return out;
}

GaussianPair gaussian_L(const RadialManifold& m, const SobolevParams& params, double lambda) {
  const GaussianPair s = gaussian_L_scaled(m, params, lambda);
  const double k = m.dimension() / params.p_conj;
  return {std::pow(lambda, -k) * s.first, std::pow(lambda, -k - 1.0) * s.second};
}

double ckn_K_scaled(const RadialManifold& m, double lambda, double r, double t, double s) {
  const int n = m.dimension();
  require_K_domain(n, r, t, s);
  require_lambda(lambda);
  const double stretch = std::pow(lambda, 1.0 / t);
  const double origin = r + n - 1.0;
  const Integrand f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double base = std::pow(u, origin) * std::pow(1.0 + std::pow(u, t), -s);
    return base == 0.0 ? 0.0 : base * m.area_ratio(stretch * u);
  };
  QuadratureOptions o = bubble_options();
  o.origin_exponent = std::min(0.0, origin);
  o.breakpoints = mapped_knots(m, [&](double rho) { return rho / stretch; });
  return integrate_improper(f, AlgebraicTail{s * t - r - n + 1.0}, o).value;
}

double ckn_K(const RadialManifold& m, double lambda, double r, double t, double s) {
  const double scaled = ckn_K_scaled(m, lambda, r, t, s);
  return std::pow(lambda, (m.dimension() + r) / t - s) * scaled;
}

double truncation_weight(double k, double rho) {
  return std::max(0.0, std::min(0.0, k - rho) + 1.0);
}

double truncated_bubble_integral(const RadialManifold& m, const SobolevParams& params,
                                 double lambda, double s, double k) {
  if (std::isinf(k)) return talenti_H(m, params, lambda, s);
  require_p_gt_one(params);
  require_lambda(lambda);
  if (!(k >= 0.0)) throw Error(ErrorKind::Domain, "truncation level must be non-negative");
  const double pc = params.p_conj;
  const Integrand f = [&](double rho) {
    return truncation_weight(k, rho) * std::pow(lambda + std::pow(rho, pc), -s) *
           m.area_density(rho);
  };
  QuadratureOptions o = bubble_options();
  o.breakpoints = m.breakpoints();
  o.breakpoints.push_back(k);
  return integrate_interval(f, 0.0, k + 1.0, o).value;
}

double predicted_H_limit(const RadialManifold& m, const SobolevParams& params, double s) {
  require_H_domain(params, s);
  const double k = m.dimension() / params.p_conj;
  return volume_unit_ball(m.dimension()) * m.avr() *
         std::exp(std::lgamma(k + 1.0) + std::lgamma(s - k) - std::lgamma(s));
}

double predicted_K_limit(const RadialManifold& m, double r, double t, double s) {
  const int n = m.dimension();
  require_K_domain(n, r, t, s);
  const double e = (n + r) / t;
  return (n / t) * volume_unit_ball(n) * m.avr() *
         std::exp(std::lgamma(e) + std::lgamma(s - e) - std::lgamma(s));
}

GaussianPair predicted_L_limits(const RadialManifold& m, const SobolevParams& params) {
  require_p_gt_one(params);
  const double k = m.dimension() / params.p_conj;
  const double base = volume_unit_ball(m.dimension()) * m.avr() * std::tgamma(k + 1.0);
  return {base, base * k};
}

AsymptoticReport verify_H_asymptotic(const RadialManifold& m, const SobolevParams& params,
                                     double s, const std::vector<double>& lambdas) {
  const double predicted = predicted_H_limit(m, params, s);
  const auto values = detail::parallel_map(
      lambdas.size(), [&](std::size_t i) { return talenti_H_scaled(m, params, lambdas[i], s); });
  std::vector<LimitSample> samples;
  for (std::size_t i = 0; i < lambdas.size(); ++i) samples.push_back({lambdas[i], values[i]});
  return compare(extrapolate_limit(samples, LimitDirection::ToInfinity), predicted);
}

GaussianAsymptotics verify_L_asymptotics(const RadialManifold& m, const SobolevParams& params,
                                         const std::vector<double>& lambdas) {
  const GaussianPair predicted = predicted_L_limits(m, params);
  const auto values = detail::parallel_map(
      lambdas.size(), [&](std::size_t i) { return gaussian_L_scaled(m, params, lambdas[i]); });
  std::vector<LimitSample> first;
  std::vector<LimitSample> second;
  std::vector<LimitSample> ratio;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    first.push_back({lambdas[i], values[i].first});
    second.push_back({lambdas[i], values[i].second});
    ratio.push_back({lambdas[i], values[i].second / values[i].first});
  }
  GaussianAsymptotics out;
  out.first = compare(extrapolate_limit(first, LimitDirection::ToZero), predicted.first);
  out.second = compare(extrapolate_limit(second, LimitDirection::ToZero), predicted.second);
  out.ratio = compare(extrapolate_limit(ratio, LimitDirection::ToZero),
                      m.dimension() / params.p_conj);
  return out;
}

AsymptoticReport verify_K_asymptotic(const RadialManifold& m, double r, double t, double s,
                                     const std::vector<double>& lambdas) {
  const double predicted = predicted_K_limit(m, r, t, s);
  const auto values = detail::parallel_map(
      lambdas.size(), [&](std::size_t i) { return ckn_K_scaled(m, lambdas[i], r, t, s); });
  std::vector<LimitSample> samples;
  for (std::size_t i = 0; i < lambdas.size(); ++i) samples.push_back({lambdas[i], values[i]});
  return compare(extrapolate_limit(samples, LimitDirection::ToInfinity), predicted);
}

std::vector<double> default_large_lambda_grid(int count) { return geometric_grid(1e2, 1e6, count); }
std::vector<double> default_small_lambda_grid(int count) { return geometric_grid(1e-6, 1e-1, count); }

}  // namespace soblab
