#include "soblab/radial_function.hpp"

#include <algorithm>
#include <cmath>

#include "soblab/errors.hpp"

namespace soblab {

RadialFunction::RadialFunction(Profile value, Profile derivative, Decay decay, double scale,
                               std::vector<double> breakpoints, std::string name)
    : value_(std::move(value)),
      derivative_(std::move(derivative)),
      decay_(decay),
      scale_(scale),
      breakpoints_(std::move(breakpoints)),
      name_(std::move(name)) {
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw Error(ErrorKind::Domain, "radial function scale must be positive");
  }
}

std::optional<double> RadialFunction::support_radius() const {
  if (const auto* c = std::get_if<CompactSupport>(&decay_)) return c->radius;
  return std::nullopt;
}

RadialFunction RadialFunction::scaled(double c) const {
  auto v = value_;
  auto d = derivative_;
  return RadialFunction([v, c](double r) { return c * v(r); },
                        [d, c](double r) { return c * d(r); }, decay_, scale_, breakpoints_,
                        name_);
}

RadialFunction RadialFunction::dilated(double c) const {
  if (!(c > 0.0)) throw Error(ErrorKind::Domain, "dilation factor must be positive");
  auto v = value_;
  auto d = derivative_;
  Decay decay = decay_;
  if (auto* cs = std::get_if<CompactSupport>(&decay)) cs->radius /= c;
  std::vector<double> br;
  for (double b : breakpoints_) br.push_back(b / c);
  return RadialFunction([v, c](double r) { return v(c * r); },
                        [d, c](double r) { return c * d(c * r); }, decay, scale_ / c, br, name_);
}

RadialFunction RadialFunction::cut_off(double inner, double outer) const {
  if (!(inner >= 0.0 && outer > inner)) {
    throw Error(ErrorKind::Domain, "cutoff needs 0 <= inner < outer");
  }
  auto v = value_;
  auto d = derivative_;
  const double width = outer - inner;
  auto chi = [inner, width](double r) { return 1.0 - smooth_step((r - inner) / width); };
  auto dchi = [inner, width](double r) { return -smooth_step_derivative((r - inner) / width) / width; };
  double radius = outer;
  if (const auto* cs = std::get_if<CompactSupport>(&decay_)) radius = std::min(radius, cs->radius);
  std::vector<double> br;
  for (double b : breakpoints_) {
    if (b < radius) br.push_back(b);
  }
  if (inner > 0.0 && inner < radius) br.push_back(inner);
  br.push_back(radius);
  std::sort(br.begin(), br.end());
  return RadialFunction(
      [v, chi, radius](double r) { return r >= radius ? 0.0 : v(r) * chi(r); },
      [v, d, chi, dchi, radius](double r) {
        return r >= radius ? 0.0 : d(r) * chi(r) + v(r) * dchi(r);
      },
      CompactSupport{radius}, std::min(scale_, radius), br, name_ + "*cutoff");
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  const double s = a + b;
  return (a * b) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

RadialFunction talenti_bubble(int n, double p, double lambda) {
  if (!(p > 1.0) || !(p < n)) {
    throw Error(ErrorKind::ExponentOutOfRange, "talentian bubble needs 1 < p < n");
  }
  if (!(lambda > 0.0)) throw Error(ErrorKind::Domain, "bubble parameter must be positive");
  const double pc = p / (p - 1.0);
  const double e = (p - n) / p;
  return RadialFunction(
      [=](double r) { return std::pow(lambda + std::pow(r, pc), e); },
      [=](double r) {
        if (r <= 0.0) return 0.0;
        return e * std::pow(lambda + std::pow(r, pc), e - 1.0) * pc * std::pow(r, pc - 1.0);
      },
      AlgebraicDecay{pc * (n - p) / p}, std::pow(lambda, 1.0 / pc), {}, "talenti");
}

RadialFunction gaussian_bubble(double p_conj, double lambda) {
  if (!(p_conj > 1.0) || !std::isfinite(p_conj)) {
    throw Error(ErrorKind::ExponentOutOfRange, "gaussian bubble needs a finite conjugate exponent");
  }
  if (!(lambda > 0.0)) throw Error(ErrorKind::Domain, "bubble parameter must be positive");
  return RadialFunction(
      [=](double r) { return std::exp(-lambda * std::pow(r, p_conj)); },
      [=](double r) {
        if (r <= 0.0) return 0.0;
        return -lambda * p_conj * std::pow(r, p_conj - 1.0) * std::exp(-lambda * std::pow(r, p_conj));
      },
      ExponentialDecay{}, std::pow(lambda, -1.0 / p_conj), {}, "gaussian");
}

RadialFunction gaussian_type(double width_factor, double poly) {
  if (!(width_factor > 0.0) || poly < 0.0) {
    throw Error(ErrorKind::Domain, "gaussian-type profile needs a > 0 and c >= 0");
  }
  const double a = width_factor;
  const double c = poly;
  return RadialFunction(
      [=](double r) { return (1.0 + c * r * r) * std::exp(-0.5 * a * r * r); },
      [=](double r) {
        return (2.0 * c * r - a * r * (1.0 + c * r * r)) * std::exp(-0.5 * a * r * r);
      },
      ExponentialDecay{}, 1.0 / std::sqrt(a), {}, "gaussian-type");
}

RadialFunction bump(double radius, int power) {
  if (!(radius > 0.0) || power < 1) throw Error(ErrorKind::Domain, "bump needs R > 0 and m >= 1");
  const double R = radius;
  const int m = power;
  return RadialFunction(
      [=](double r) {
        if (r >= R) return 0.0;
        const double s = r / R;
        return std::pow(1.0 - s * s, m);
      },
      [=](double r) {
        if (r >= R) return 0.0;
        const double s = r / R;
        return m * std::pow(1.0 - s * s, m - 1) * (-2.0 * r / (R * R));
      },
      CompactSupport{R}, R, {R}, "bump");
}

RadialFunction mollified_ball(double radius, double width) {
  if (!(radius > 0.0) || !(width > 0.0) || width > radius) {
    throw Error(ErrorKind::Domain, "mollified ball needs 0 < width <= radius");
  }
  const double inner = radius - width;
  std::vector<double> br{radius};
  if (inner > 0.0) br.insert(br.begin(), inner);
  return RadialFunction([=](double r) { return 1.0 - smooth_step((r - inner) / width); },
                        [=](double r) { return -smooth_step_derivative((r - inner) / width) / width; },
                        CompactSupport{radius}, width, br, "mollified-ball");
}

TailClass integrand_tail(const RadialManifold& m, const RadialFunction& f, double power,
                         double derivative_power) {
  if (const auto* a = std::get_if<AlgebraicDecay>(&f.decay())) {
    const double decay = power * a->exponent + derivative_power * (a->exponent + 1.0) -
                         (m.dimension() - 1);
    if (!(decay > 1.0)) {
      throw Error(ErrorKind::Admissibility,
                  "integrand decays like rho^-" + std::to_string(decay) + ", not integrable");
    }
    return AlgebraicTail{decay};
  }
  return ExponentialTail{};
}

IntegralResult integrate_profile(const RadialManifold& m, const RadialFunction& f,
                                 const std::function<double(double, double)>& integrand,
                                 double power, double derivative_power, double rel_tol) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.max_intervals = 20000;
  opts.breakpoints = f.breakpoints();
  const Integrand g = [&](double r) {
    const double v = integrand(f.value(r), f.derivative(r));
    return v == 0.0 ? 0.0 : v * m.area_density(r);
  };
  IntegralResult result;
  if (const auto radius = f.support_radius()) {
    for (double b : m.breakpoints()) {
      if (b < *radius) opts.breakpoints.push_back(b);
    }
    result = integrate_interval(g, 0.0, *radius, opts);
  } else {
    opts.scale = f.scale();
    opts.breakpoints.insert(opts.breakpoints.end(), m.breakpoints().begin(),
                            m.breakpoints().end());
    result = integrate_improper(g, integrand_tail(m, f, power, derivative_power), opts);
  }
  if (!std::isfinite(result.value)) {
    throw Error(ErrorKind::Admissibility, "profile integral is not finite");
  }
  return result;
}

}  // namespace soblab
