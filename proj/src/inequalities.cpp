#include "soblab/inequalities.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "parallel.hpp"
#include "soblab/bubbles.hpp"
#include "soblab/errors.hpp"

namespace soblab {
namespace {

double integrate_or_admissibility(const RadialManifold& m, const RadialFunction& f,
                                  const std::function<double(double, double)>& integrand,
                                  double power, double derivative_power) {
  try {
    return integrate_profile(m, f, integrand, power, derivative_power).value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DivergentIntegral) {
      throw Error(ErrorKind::Admissibility, e.what());
    }
    throw;
  }
}

ScanReport run_scan(std::string name, const std::vector<double>& lambdas, LimitDirection dir,
                    double expected, double nominal_rel_error,
                    const std::function<double(double)>& value_at) {
  ScanReport report;
  report.name = std::move(name);
  report.expected = expected;
  const auto values =
      detail::parallel_map(lambdas.size(), [&](std::size_t i) { return value_at(lambdas[i]); });
  std::vector<LimitSample> samples;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    report.points.push_back({lambdas[i], values[i], std::abs(values[i]) * nominal_rel_error});
    samples.push_back({lambdas[i], values[i]});
  }
  report.limit = extrapolate_limit(samples, dir);
  report.relative_deviation = std::abs(report.limit.limit - expected) / std::abs(expected);
  return report;
}

}  // namespace

QuotientReport sobolev_quotient(const RadialManifold& m, const SobolevParams& params,
                                const RadialFunction& f) {
  const int n = m.dimension();
  if (params.n != n) throw Error(ErrorKind::InvalidDimension, "exponents and manifold disagree on n");
  const double ps = params.p_star;
  const double p = params.p;
  const double mass = integrate_or_admissibility(
      m, f, [ps](double v, double) { return std::pow(std::abs(v), ps); }, ps, 0.0);
  const double grad = integrate_or_admissibility(
      m, f, [p](double, double d) { return std::pow(std::abs(d), p); }, 0.0, p);
  if (!(grad > 0.0)) throw Error(ErrorKind::Admissibility, "test function has zero gradient norm");
  QuotientReport r;
  r.lhs = std::pow(mass, 1.0 / ps);
  r.rhs = std::pow(grad, 1.0 / p);
  r.ratio = r.lhs / r.rhs;
  r.sharp_bound = aubin_talenti(n, p) * std::pow(m.avr(), -1.0 / n);
  r.slack = r.sharp_bound - r.ratio;
  r.details["integral_f_pstar"] = mass;
  r.details["integral_grad_p"] = grad;
  return r;
}

double sobolev_scan_value(const RadialManifold& m, const SobolevParams& params, double lambda) {
  const int n = m.dimension();
  const double p = params.p;
  const double pc = params.p_conj;
  // H(lambda, n) and H(lambda, n-1) - lambda H(lambda, n) = K(lambda, p', p', n),
  // both in their lambda-free scaled forms.
  const double h = talenti_H_scaled(m, params, lambda, n);
  const double k = ckn_K_scaled(m, lambda, pc, pc, n);
  return std::pow(h, 1.0 / params.p_star) / (((n - p) / p) * pc * std::pow(k, 1.0 / p));
}

ScanReport sobolev_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                  const std::vector<double>& lambdas) {
  if (params.is_p_one() || !(params.p > 1.0)) {
    throw Error(ErrorKind::ExponentOutOfRange, "the bubble scan needs 1 < p < n");
  }
  const int n = m.dimension();
  const double expected = aubin_talenti(n, params.p) * std::pow(m.avr(), -1.0 / n);
  return run_scan("sobolev", lambdas, LimitDirection::ToInfinity, expected, 2 * kBubbleRelTol,
                  [&](double lam) { return sobolev_scan_value(m, params, lam); });
}

QuotientReport logsob_quotient(const RadialManifold& m, const SobolevParams& params,
                               const RadialFunction& f_in, const LogSobolevOptions& options) {
  const int n = m.dimension();
  const double p = params.p;
  if (!(p >= 1.0)) throw Error(ErrorKind::ExponentOutOfRange, "log-Sobolev needs p >= 1");
  auto mass_of = [&](const RadialFunction& f) {
    return integrate_or_admissibility(
        m, f, [p](double v, double) { return std::pow(std::abs(v), p); }, p, 0.0);
  };
  double mass = mass_of(f_in);
  RadialFunction f = f_in;
  double renormalized_by = 1.0;
  if (std::abs(mass - 1.0) > options.normalization_tolerance) {
    if (!options.auto_renormalize) {
      std::ostringstream msg;
      msg << "test function must satisfy int |f|^p = 1 (got " << mass << ")";
      throw Error(ErrorKind::Precondition, msg.str());
    }
    renormalized_by = std::pow(mass, -1.0 / p);
    f = f_in.scaled(renormalized_by);
    mass = mass_of(f);
  }
  const double entropy = integrate_or_admissibility(
      m, f,
      [p](double v, double) {
        const double a = std::pow(std::abs(v), p);
        return a > 0.0 ? a * std::log(a) : 0.0;
      },
      p, 0.0);
  const double grad = integrate_or_admissibility(
      m, f, [p](double, double d) { return std::pow(std::abs(d), p); }, 0.0, p);
  QuotientReport r;
  r.sharp_bound = log_sobolev_constant(n, p) * std::pow(m.avr(), -p / n);
  r.lhs = entropy;
  r.rhs = (n / p) * std::log(r.sharp_bound * grad);
  r.ratio = std::exp((p / n) * entropy) / grad;
  r.slack = r.rhs - r.lhs;
  r.details["mass"] = mass;
  r.details["integral_grad_p"] = grad;
  r.details["renormalization_factor"] = renormalized_by;
  return r;
}

double logsob_scan_value(const RadialManifold& m, const SobolevParams& params, double lambda) {
  const int n = m.dimension();
  const double p = params.p;
  const GaussianPair s = gaussian_L_scaled(m, params, lambda);
  // lambda L2 / L1 = s.second / s.first; all powers of lambda cancel.
  return std::exp(-(p / n) * s.second / s.first) * std::pow(s.first, 1.0 - p / n) /
         (std::pow(params.p_conj / p, p) * s.second);
}

ScanReport logsob_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                 const std::vector<double>& lambdas) {
  if (params.is_p_one() || !(params.p > 1.0)) {
    throw Error(ErrorKind::ExponentOutOfRange, "the Gaussian bubble scan needs p > 1");
  }
  const int n = m.dimension();
  const double expected = log_sobolev_constant(n, params.p) * std::pow(m.avr(), -params.p / n);
  return run_scan("logsob", lambdas, LimitDirection::ToZero, expected, 4 * kBubbleRelTol,
                  [&](double lam) { return logsob_scan_value(m, params, lam); });
}

// ---------------------------------------------------------------------------

double potential_normalizer(const RadialManifold& m, const std::function<double(double)>& v,
                            double scale) {
  QuadratureOptions o;
  o.rel_tol = 1e-12;
  o.scale = scale;
  o.max_intervals = 20000;
  return radial_integral(m, [&v](double r) { return std::exp(-v(r)); }, ExponentialTail{}, o)
      .value;
}

PotentialSpec quadratic_potential(const RadialManifold& m, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::Domain, "potential scale K must be positive");
  PotentialSpec spec;
  spec.value = [k](double r) { return 0.5 * k * r * r; };
  spec.derivative = [k](double r) { return k * r; };
  spec.second_derivative = [k](double) { return k; };
  spec.c_v = 0.0;
  spec.k = k;
  spec.scale = 1.0 / std::sqrt(k);
  spec.g_v = potential_normalizer(m, spec.value, spec.scale);
  std::ostringstream name;
  name << "quadratic(K=" << k << ")";
  spec.name = name.str();
  return spec;
}

QuotientReport gaussian_lsi_check(const RadialManifold& m, const PotentialSpec& potential,
                                  const RadialFunction& h_in, const GaussianLsiOptions& options) {
  const int n = m.dimension();
  const double k = potential.k;
  if (!(k > 0.0) || !(potential.g_v > 0.0) || !std::isfinite(potential.g_v)) {
    throw Error(ErrorKind::Precondition, "potential needs K > 0 and a finite positive G_V");
  }

  // Sampled hypothesis V - V'^2/(2K) + (V'' + V' A'/A)/K - n <= C_V.
  std::vector<double> grid = options.hypothesis_grid;
  if (grid.empty()) grid = geometric_grid(1e-3 * potential.scale, 1e2 * potential.scale, 400);
  double worst = -std::numeric_limits<double>::infinity();
  double worst_rho = 0.0;
  for (double r : grid) {
    const double v1 = potential.derivative(r);
    const double lap = potential.second_derivative(r) + v1 * m.log_area_derivative(r);
    const double value = potential.value(r) - v1 * v1 / (2.0 * k) + lap / k - n;
    if (value > worst) {
      worst = value;
      worst_rho = r;
    }
  }
  if (worst > potential.c_v + options.hypothesis_margin * (1.0 + std::abs(potential.c_v))) {
    std::ostringstream msg;
    msg << "potential hypothesis fails: value " << worst << " > C_V=" << potential.c_v
        << " at rho=" << worst_rho;
    throw Error(ErrorKind::HypothesisViolation, msg.str());
  }

  const double gv = potential.g_v;
  QuadratureOptions o;
  o.rel_tol = 1e-11;
  o.scale = std::min(potential.scale, h_in.scale());
  o.max_intervals = 20000;
  o.breakpoints = h_in.breakpoints();
  auto against_gamma = [&](const RadialFunction& h, const std::function<double(double, double)>& F) {
    return radial_integral(
               m,
               [&](double r) {
                 const double w = F(h.value(r), h.derivative(r));
                 return w == 0.0 ? 0.0 : w * std::exp(-potential.value(r));
               },
               ExponentialTail{}, o)
               .value /
           gv;
  };
  auto square = [](double v, double) { return v * v; };

  double norm = against_gamma(h_in, square);
  RadialFunction h = h_in;
  double factor = 1.0;
  if (std::abs(norm - 1.0) > options.normalization_tolerance) {
    if (!options.auto_renormalize) {
      std::ostringstream msg;
      msg << "test function must satisfy int h^2 dgamma_V = 1 (got " << norm << ")";
      throw Error(ErrorKind::Precondition, msg.str());
    }
    factor = 1.0 / std::sqrt(norm);
    h = h_in.scaled(factor);
    norm = against_gamma(h, square);
  }
  const double entropy = against_gamma(h, [](double v, double) {
    const double a = v * v;
    return a > 0.0 ? a * std::log(a) : 0.0;
  });
  const double energy = against_gamma(h, [](double, double d) { return d * d; });

  QuotientReport r;
  const double full_constant =
      std::log(std::pow(k, 0.5 * n) * gv * std::exp(potential.c_v) /
               (std::pow(2.0 * std::numbers::pi, 0.5 * n) * m.avr()));
  const double simplified_constant = -std::log(m.avr());
  r.lhs = entropy;
  r.rhs = (2.0 / k) * energy + full_constant;
  r.ratio = energy > 0.0 ? entropy / energy : 0.0;
  r.sharp_bound = 2.0 / k;
  r.slack = r.rhs - r.lhs;
  r.details["normalization"] = norm;
  r.details["renormalization_factor"] = factor;
  r.details["energy"] = energy;
  r.details["g_v"] = gv;
  r.details["full_constant"] = full_constant;
  r.details["simplified_constant"] = simplified_constant;
  r.details["simplified_rhs"] = (2.0 / k) * energy + simplified_constant;
  r.details["simplified_slack"] = r.details["simplified_rhs"] - entropy;
  r.details["hypothesis_max"] = worst;
  r.details["hypothesis_worst_rho"] = worst_rho;
  return r;
}

// ---------------------------------------------------------------------------

IsoperimetricReport isoperimetric_check(const RadialManifold& m, const std::vector<double>& grid,
                                        double tolerance) {
  const int n = m.dimension();
  const double c = n * std::pow(volume_unit_ball(n) * m.avr(), 1.0 / n);
  IsoperimetricReport report;
  report.tolerance = tolerance;
  report.min_relative_slack = std::numeric_limits<double>::infinity();
  for (double r : grid) {
    if (!(r > 0.0)) throw Error(ErrorKind::Domain, "isoperimetric grid must be positive");
    IsoperimetricPoint pt;
    pt.rho = r;
    pt.perimeter = m.area_density(r);
    pt.bound = c * std::pow(m.ball_volume(r), (n - 1.0) / n);
    pt.slack = pt.perimeter - pt.bound;
    pt.relative_slack = pt.slack / pt.perimeter;
    report.min_relative_slack = std::min(report.min_relative_slack, pt.relative_slack);
    report.points.push_back(pt);
  }
  if (grid.empty()) report.min_relative_slack = 0.0;
  report.passed = report.min_relative_slack >= -tolerance;
  return report;
}

NoncollapseResult noncollapse_bound(int n, double a, double b, double c) {
  NoncollapseResult out;
  out.params = ckn_constants(n, a, b);
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::ParameterDomain, "inequality constant must be positive and finite");
  }
  double used = c;
  if (c < out.params.k_ab) {
    std::ostringstream msg;
    msg << "constant " << c << " is below the sharp euclidean value " << out.params.k_ab
        << "; clamped (such constants cannot occur under Ric >= 0)";
    out.warning = msg.str();
    out.clamped = true;
    used = out.params.k_ab;
  }
  out.bound = std::pow(out.params.k_ab / used, n / out.params.weight_gap());
  return out;
}

double ckn_scan_value(const RadialManifold& m, const CknParams& params, double lambda) {
  const int n = m.dimension();
  const double a = params.a;
  const double b = params.b;
  const double q = params.q;
  const double t = 2.0 - b * q + 2.0 * a;
  const double k1 = ckn_K_scaled(m, lambda, -b * q, t, q * (n - 2.0 * a - 2.0) / t);
  const double k2 = ckn_K_scaled(m, lambda, 2.0 * a + 2.0 - 2.0 * b * q, t, 2.0 * (n - b * q) / t);
  return std::pow(k1, 1.0 / q) / ((n - 2.0 * a - 2.0) * std::sqrt(k2));
}

ScanReport ckn_sharpness_scan(const RadialManifold& m, double a, double b,
                              const std::vector<double>& lambdas) {
  const int n = m.dimension();
  const CknParams params = ckn_constants(n, a, b);
  const double expected = params.k_ab * std::pow(m.avr(), -params.weight_gap() / n);
  return run_scan("ckn", lambdas, LimitDirection::ToInfinity, expected, 2 * kBubbleRelTol,
                  [&](double lam) { return ckn_scan_value(m, params, lam); });
}

}  // namespace soblab
