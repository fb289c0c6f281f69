#include "soblab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "soblab/bubbles.hpp"
#include "soblab/errors.hpp"

namespace soblab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Radial measures: cumulative mass tabulated at knots that are fine enough for
// a single Kronrod rule to integrate any sub-interval to rounding accuracy.
// ---------------------------------------------------------------------------

struct RadialMeasure::Impl {
  RadialManifold manifold;
  std::function<double(double)> raw;
  std::optional<double> support;
  double scale = 1.0;
  std::vector<double> breaks;
  std::string name;
  double norm = 1.0;
  std::vector<double> knots;
  std::vector<double> prefix;  // normalized mass of [0, knots[i]]
  std::vector<double> suffix;  // normalized mass of [knots[i], inf)

  Impl(const RadialManifold& m) : manifold(m) {}

  double weight(double r) const {
    if (r <= 0.0) return 0.0;
    if (support && r > *support) return 0.0;
    const double v = raw(r);
    return v == 0.0 ? 0.0 : v * manifold.area_density(r);
  }
  double piece(double a, double b) const {
    if (b <= a) return 0.0;
    return kronrod21_rule([this](double r) { return weight(r); }, a, b).value / norm;
  }
  double upper() const { return knots.back(); }

  void build();
  double mass_floor = 0.0;  // absolute refinement tolerance
  void refine(double a, double b, int depth, std::vector<double>& out_knots,
              std::vector<double>& masses) const;
  double solve_in_segment(std::size_t j, double target, bool use_complement) const;
};

void RadialMeasure::Impl::refine(double a, double b, int depth, std::vector<double>& out_knots,
                                 std::vector<double>& masses) const {
  const Integrand w = [this](double r) { return weight(r); };
  const double whole = kronrod21_rule(w, a, b).value;
  const double mid = (a > 0.0 && b / a > 2.0) ? std::sqrt(a * b) : 0.5 * (a + b);
  const double left = kronrod21_rule(w, a, mid).value;
  const double right = kronrod21_rule(w, mid, b).value;
  const double fine = left + right;
  const bool accurate = std::abs(whole - fine) <= 1e-14 * std::abs(fine) + mass_floor;
  if (accurate || depth >= 40 || !(mid > a && mid < b)) {
    out_knots.push_back(b);
    masses.push_back(fine);
    return;
  }
  refine(a, mid, depth + 1, out_knots, masses);
  refine(mid, b, depth + 1, out_knots, masses);
}

void RadialMeasure::Impl::build() {
  const double upper_radius = support ? *support : scale * 1e30;
  const double lower_radius = std::min(scale, upper_radius) * 1e-8;
  std::vector<double> initial{0.0};
  for (double r : geometric_grid(lower_radius, upper_radius, 1 + static_cast<int>(std::ceil(
                                                                     8 * std::log10(upper_radius / lower_radius))))) {
    initial.push_back(r);
  }
  if (support) {
    for (int i = 1; i < 16; ++i) initial.push_back(*support * i / 16.0);
  }
  for (double b : breaks) {
    if (b > 0.0 && b < upper_radius) initial.push_back(b);
  }
  for (double b : manifold.breakpoints()) {
    if (b > 0.0 && b < upper_radius) initial.push_back(b);
  }
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());

  const Integrand w = [this](double r) { return weight(r); };
  double rough = 0.0;
  for (std::size_t i = 0; i + 1 < initial.size(); ++i) {
    rough += std::abs(kronrod21_rule(w, initial[i], initial[i + 1]).value);
  }
  mass_floor = std::max(1e-18 * rough, 1e-300);

  knots = {0.0};
  std::vector<double> masses;
  for (std::size_t i = 0; i + 1 < initial.size(); ++i) {
    refine(initial[i], initial[i + 1], 0, knots, masses);
  }
  for (double v : masses) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::Domain, "measure density must be finite and non-negative");
    }
  }

  double tail = 0.0;
  if (!support && weight(upper_radius) > 0.0) {
    QuadratureOptions o;
    o.rel_tol = 1e-10;
    o.scale = upper_radius;
    try {
      tail = integrate_improper([this, upper_radius](double x) { return weight(upper_radius + x); },
                                AlgebraicTail{2.0}, o)
                 .value;
    } catch (const Error&) {
      tail = 0.0;
    }
  }

  double total = tail;
  for (auto it = masses.rbegin(); it != masses.rend(); ++it) total += *it;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::Admissibility, "measure '" + name + "' has no finite positive mass");
  }
  norm = total;

  // A zero-mass stretch followed by positive mass would make the inverse
  // cumulative map ill-defined.
  bool seen_mass = false;
  std::optional<std::size_t> gap;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    if (masses[j] > 0.0) {
      if (gap && seen_mass) {
        std::ostringstream msg;
        msg << "measure '" << name << "' has a zero-density plateau on [" << knots[*gap] << ", "
            << knots[j] << "] inside its support";
        throw Error(ErrorKind::IllConditionedInverse, msg.str());
      }
      seen_mass = true;
      gap.reset();
    } else if (seen_mass && !gap) {
      gap = j;
    }
  }

  const std::size_t k = knots.size();
  prefix.assign(k, 0.0);
  suffix.assign(k, 0.0);
  for (std::size_t j = 0; j + 1 < k; ++j) prefix[j + 1] = prefix[j] + masses[j] / norm;
  suffix[k - 1] = tail / norm;
  for (std::size_t j = k - 1; j-- > 0;) suffix[j] = suffix[j + 1] + masses[j] / norm;
}

double RadialMeasure::Impl::solve_in_segment(std::size_t j, double target,
                                             bool use_complement) const {
  const double left = knots[j];
  const double right = knots[j + 1];
  auto residual = [&](double x) {
    // increasing in x in both branches
    if (use_complement) return target - (suffix[j + 1] + piece(x, right));
    return prefix[j] + piece(left, x) - target;
  };
  double lo = left;
  double hi = right;
  const double f_lo = use_complement ? target - suffix[j] : prefix[j] - target;
  const double f_hi = use_complement ? target - suffix[j + 1] : prefix[j + 1] - target;
  if (f_lo >= 0.0) return lo;
  if (f_hi <= 0.0) return hi;
  double x = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
  double flo = f_lo;
  double fhi = f_hi;
  for (int it = 0; it < 200; ++it) {
    const double fx = residual(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double slope = weight(x) / norm;
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  // Last bracket: pick the end with the smaller residual.
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

RadialMeasure::RadialMeasure(const RadialManifold& m, std::function<double(double)> raw_density,
                             std::optional<double> support_radius, double scale,
                             std::vector<double> breakpoints, std::string name) {
  auto impl = std::make_shared<Impl>(m);
  if (support_radius && !(*support_radius > 0.0)) {
    throw Error(ErrorKind::Domain, "support radius must be positive");
  }
  if (!(scale > 0.0)) throw Error(ErrorKind::Domain, "measure scale must be positive");
  impl->raw = std::move(raw_density);
  impl->support = support_radius;
  impl->scale = scale;
  impl->breaks = std::move(breakpoints);
  impl->name = std::move(name);
  impl->build();
  impl_ = std::move(impl);
}

const RadialManifold& RadialMeasure::manifold() const noexcept { return impl_->manifold; }
const std::string& RadialMeasure::name() const noexcept { return impl_->name; }
double RadialMeasure::raw_mass() const noexcept { return impl_->norm; }
std::optional<double> RadialMeasure::support_radius() const noexcept { return impl_->support; }
const std::vector<double>& RadialMeasure::breakpoints() const noexcept { return impl_->breaks; }
double RadialMeasure::scale() const noexcept { return impl_->scale; }

double RadialMeasure::density(double rho) const {
  if (rho < 0.0) return 0.0;
  if (impl_->support && rho > *impl_->support) return 0.0;
  return impl_->raw(rho) / impl_->norm;
}

double RadialMeasure::cdf(double rho) const {
  const Impl& m = *impl_;
  if (rho <= 0.0) return 0.0;
  if (rho >= m.upper()) return m.support ? 1.0 : 1.0 - complement(rho);
  const std::size_t j =
      static_cast<std::size_t>(std::upper_bound(m.knots.begin(), m.knots.end(), rho) -
                               m.knots.begin()) - 1;
  return m.prefix[j] + m.piece(m.knots[j], rho);
}

double RadialMeasure::complement(double rho) const {
  const Impl& m = *impl_;
  if (rho <= 0.0) return 1.0;
  if (rho >= m.upper()) {
    if (m.support || m.suffix.back() == 0.0) return 0.0;
    QuadratureOptions o;
    o.rel_tol = 1e-10;
    o.scale = rho;
    return integrate_improper([&m, rho](double x) { return m.weight(rho + x); },
                              AlgebraicTail{2.0}, o)
               .value /
           m.norm;
  }
  const std::size_t j =
      static_cast<std::size_t>(std::upper_bound(m.knots.begin(), m.knots.end(), rho) -
                               m.knots.begin()) - 1;
  return m.suffix[j + 1] + m.piece(rho, m.knots[j + 1]);
}

double RadialMeasure::quantile(double mass, double complement_mass) const {
  const Impl& m = *impl_;
  const std::size_t last = m.knots.size() - 1;
  if (complement_mass < mass) {
    if (complement_mass <= 0.0) return m.support ? *m.support : kInf;
    if (complement_mass < m.suffix[last]) return kInf;
    // suffix is non-increasing: first j with suffix[j+1] <= c.
    std::size_t lo = 0;
    std::size_t hi = last;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (m.suffix[mid] >= complement_mass) lo = mid; else hi = mid;
    }
    return m.solve_in_segment(lo, complement_mass, true);
  }
  if (mass <= 0.0) return 0.0;
  std::size_t lo = 0;
  std::size_t hi = last;
  if (mass > m.prefix[last]) return m.support ? *m.support : kInf;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (m.prefix[mid] < mass) lo = mid; else hi = mid;
  }
  return m.solve_in_segment(lo, mass, false);
}

RadialMeasure uniform_ball_measure(const RadialManifold& m, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Domain, "ball radius must be positive");
  return RadialMeasure(
      m, [radius](double r) { return r <= radius ? 1.0 : 0.0; }, radius, radius, {radius},
      "uniform-ball");
}

RadialMeasure profile_measure(const RadialManifold& m, const RadialFunction& f, double power) {
  return RadialMeasure(
      m, [f, power](double r) { return std::pow(std::abs(f.value(r)), power); },
      f.support_radius(), f.scale(), f.breakpoints(), f.name());
}

RadialMeasure bubble_target(const RadialManifold& m, const SobolevParams& params, double lambda,
                            double k) {
  if (params.is_p_one() || !(params.p > 1.0)) {
    throw Error(ErrorKind::ExponentOutOfRange, "bubble targets need p > 1");
  }
  const double pc = params.p_conj;
  const int n = m.dimension();
  std::optional<double> support;
  std::vector<double> br;
  if (std::isfinite(k)) {
    support = k + 1.0;
    br = {k, k + 1.0};
  }
  return RadialMeasure(
      m,
      [=](double r) { return truncation_weight(k, r) * std::pow(lambda + std::pow(r, pc), -n); },
      support, std::pow(lambda, 1.0 / pc), br, "bubble");
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

TransportInstance::TransportInstance(RadialMeasure source, RadialMeasure target,
                                     std::vector<TransportNode> nodes, double source_radius)
    : source_(std::move(source)),
      target_(std::move(target)),
      nodes_(std::move(nodes)),
      source_radius_(source_radius) {}

double TransportInstance::map(double rho) const {
  if (rho <= 0.0) return 0.0;
  return target_.quantile(source_.cdf(rho), source_.complement(rho));
}

double TransportInstance::map_slope(double rho) const {
  const double t = map(rho);
  const auto& m = manifold();
  double den = target_.density(t) * m.area_density(t);
  const double num = source_.density(rho) * m.area_density(rho);
  if (!(den > 0.0) && num > 0.0 && std::isfinite(t) && t > 0.0) {
    // T rounded onto the edge of the target support; step inward until the
    // density is resolved again.
    double step = std::nextafter(t, kInf) - t;
    for (int i = 0; i < 64 && !(den > 0.0) && step < t; ++i, step *= 2.0) {
      den = target_.density(t - step) * m.area_density(t - step);
    }
  }
  if (!(den > 0.0)) return kInf;
  return num / den;
}

namespace {

// Five-point first-derivative weights at stencil position j (0..4), unit spacing.
constexpr double kStencil[5][5] = {
    {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12},
    {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12},
    {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12},
    {-1.0 / 12, 6.0 / 12, -18.0 / 12, 10.0 / 12, 3.0 / 12},
    {3.0 / 12, -16.0 / 12, 36.0 / 12, -48.0 / 12, 25.0 / 12},
};

// d/dx of y on a uniform x-grid, never differentiating across a kink.
std::vector<double> stencil_derivative(const std::vector<double>& x, const std::vector<double>& y,
                                       const std::vector<double>& kinks) {
  const std::size_t count = x.size();
  const double h = count > 1 ? x[1] - x[0] : 1.0;
  const double guard = 1e-9 * h;
  auto clean = [&](std::size_t a, std::size_t b) {
    for (double k : kinks) {
      if (k > x[a] + guard && k < x[b] - guard) return false;
    }
    return true;
  };
  std::vector<double> d(count, 0.0);
  static constexpr int order[5] = {2, 1, 3, 0, 4};  // preferred stencil positions
  for (std::size_t i = 0; i < count; ++i) {
    bool done = false;
    for (int pos : order) {
      if (static_cast<long>(i) - pos < 0 || i - pos + 4 >= count) continue;
      const std::size_t start = i - pos;
      if (!clean(start, start + 4)) continue;
      double acc = 0.0;
      for (int s = 0; s < 5; ++s) acc += kStencil[pos][s] * y[start + s];
      d[i] = acc / h;
      done = true;
      break;
    }
    if (!done) {
      if (i + 1 < count && clean(i, i + 1)) {
        d[i] = (y[i + 1] - y[i]) / h;
      } else if (i > 0) {
        d[i] = (y[i] - y[i - 1]) / h;
      }
    }
  }
  return d;
}

}  // namespace

TransportInstance solve_radial_transport(const RadialMeasure& source, const RadialMeasure& target,
                                         const TransportOptions& options) {
  if (!source.support_radius()) {
    throw Error(ErrorKind::Precondition, "transport source must be compactly supported");
  }
  if (options.grid_nodes < 8) throw Error(ErrorKind::Precondition, "transport grid too small");
  const RadialManifold& m = source.manifold();
  if (m.dimension() != target.manifold().dimension()) {
    throw Error(ErrorKind::Precondition, "source and target live on different manifolds");
  }
  const int n = m.dimension();
  const double radius = *source.support_radius();
  const double x0 = std::log(options.inner_fraction * radius);
  const double x1 = std::log(radius);
  const int count = options.grid_nodes;
  const double h = (x1 - x0) / (count - 1);

  struct Raw {
    double rho, f, s, t;
  };
  const auto raw = detail::parallel_map(static_cast<std::size_t>(count), [&](std::size_t i) {
    const double rho = i + 1 == static_cast<std::size_t>(count) ? radius : std::exp(x0 + h * i);
    const double f = source.cdf(rho);
    const double s = source.complement(rho);
    double t = kInf;
    if (target.support_radius() || s >= options.drop_threshold) t = target.quantile(f, s);
    return Raw{rho, f, s, t};
  });
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<Raw> kept;
  for (const Raw& r : raw) {
    if (!std::isfinite(r.t)) break;
    xs.push_back(x0 + h * kept.size());
    ts.push_back(r.t);
    kept.push_back(r);
  }
  if (kept.size() < 5) throw Error(ErrorKind::ConvergenceFailure, "transport grid collapsed");
  xs.back() = std::log(kept.back().rho);

  // Kinks of T in log-radius: source breakpoints and preimages of target ones.
  std::vector<double> kinks;
  auto add_kink = [&](double rho) {
    if (rho > 0.0 && std::isfinite(rho)) kinks.push_back(std::log(rho));
  };
  for (double b : source.breakpoints()) add_kink(b);
  for (double b : m.breakpoints()) add_kink(b);
  std::vector<double> target_breaks = target.breakpoints();
  target_breaks.insert(target_breaks.end(), m.breakpoints().begin(), m.breakpoints().end());
  for (double b : target_breaks) {
    add_kink(source.quantile(target.cdf(b), target.complement(b)));
  }

  const std::vector<double> dtdx = stencil_derivative(xs, ts, kinks);
  std::vector<TransportNode> nodes(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    TransportNode& node = nodes[i];
    const double rho = kept[i].rho;
    const double t = kept[i].t;
    node.rho = rho;
    node.map = t;
    node.potential_slope = rho - t;
    node.map_slope = dtdx[i] / rho;
    node.jacobian = node.map_slope * m.area_density(t) / m.area_density(rho);
    node.laplacian = (1.0 - node.map_slope) + m.log_area_derivative(rho) * node.potential_slope;
    node.det_root = std::copysign(std::pow(std::abs(node.jacobian), 1.0 / n), node.jacobian);
    node.trace_bound = 1.0 - node.laplacian / n;
    node.slack = node.trace_bound - node.det_root;
    node.residual = std::abs(source.density(rho) - target.density(t) * node.jacobian);
    if (kept[i].f <= kept[i].s) {
      node.pushforward_error = std::abs(kept[i].f - target.cdf(t));
    } else {
      node.pushforward_error = std::abs(kept[i].s - target.complement(t));
    }
  }
  return TransportInstance(source, target, std::move(nodes), radius);
}

MongeAmpereReport monge_ampere_residual(const TransportInstance& inst) {
  MongeAmpereReport r;
  double scale = 0.0;
  for (const auto& node : inst.nodes()) scale = std::max(scale, inst.source().density(node.rho));
  if (!(scale > 0.0)) scale = 1.0;
  for (const auto& node : inst.nodes()) {
    const double rel = node.residual / scale;
    if (rel > r.sup_residual) {
      r.sup_residual = rel;
      r.worst_rho = node.rho;
    }
    r.pushforward_error = std::max(r.pushforward_error, node.pushforward_error);
  }
  r.nodes = inst.nodes().size();
  return r;
}

DeterminantTraceReport determinant_trace_check(const TransportInstance& inst, double tolerance) {
  DeterminantTraceReport r;
  r.tolerance = tolerance;
  r.diagnostic = inst.manifold().is_diagnostic();
  r.min_slack = kInf;
  for (const auto& node : inst.nodes()) {
    if (node.slack < r.min_slack) {
      r.min_slack = node.slack;
      r.worst_rho = node.rho;
    }
    r.max_abs_slack = std::max(r.max_abs_slack, std::abs(node.slack));
  }
  if (inst.nodes().empty()) r.min_slack = 0.0;
  r.passed = r.min_slack >= -tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Proof chains
// ---------------------------------------------------------------------------

namespace {

void close_chain(ChainReport& report, const PipelineOptions& options) {
  report.holds = true;
  report.worst_violation = -kInf;
  for (std::size_t i = 0; i + 1 < report.steps.size(); ++i) {
    const ChainStep& a = report.steps[i];
    const ChainStep& b = report.steps[i + 1];
    if (a.relation.empty()) continue;
    const double scale = std::max(std::abs(a.value), std::abs(b.value));
    double violation = 0.0;
    double tol = 0.0;
    if (a.relation == "=") {
      violation = std::abs(a.value - b.value) / scale;
      tol = options.equality_tolerance;
    } else {
      violation = (a.value - b.value) / scale;
      tol = options.inequality_tolerance;
    }
    if (!std::isfinite(violation)) violation = kInf;
    if (violation - tol > report.worst_violation) {
      report.worst_violation = violation - tol;
      report.worst_link = a.name + " " + a.relation + " " + b.name;
    }
    if (violation > tol) report.holds = false;
  }
  if (report.worst_violation == -kInf) report.worst_violation = 0.0;
}

double source_integral(const TransportInstance& inst, const RadialFunction& f,
                       const std::vector<double>& extra_breaks,
                       const std::function<double(double)>& integrand) {
  const RadialManifold& m = inst.manifold();
  QuadratureOptions o;
  o.rel_tol = 1e-11;
  o.max_intervals = 20000;
  o.breakpoints = f.breakpoints();
  o.breakpoints.insert(o.breakpoints.end(), extra_breaks.begin(), extra_breaks.end());
  o.breakpoints.insert(o.breakpoints.end(), m.breakpoints().begin(), m.breakpoints().end());
  const Integrand g = [&](double r) {
    const double v = integrand(r);
    return v == 0.0 ? 0.0 : v * m.area_density(r);
  };
  return integrate_interval(g, 0.0, inst.source_radius(), o).value;
}

RadialFunction normalized_source(const RadialManifold& m, const RadialFunction& f, double power,
                                 const PipelineOptions& options, double& factor) {
  if (!f.support_radius()) {
    throw Error(ErrorKind::Precondition, "pipeline test function must be compactly supported");
  }
  const double mass =
      integrate_profile(m, f, [power](double v, double) { return std::pow(std::abs(v), power); },
                        power)
          .value;
  factor = 1.0;
  if (std::abs(mass - 1.0) > 1e-8) {
    if (!options.auto_normalize) {
      std::ostringstream msg;
      msg << "pipeline test function must be normalized (integral of f^" << power << " is "
          << mass << ")";
      throw Error(ErrorKind::Precondition, msg.str());
    }
    factor = std::pow(mass, -1.0 / power);
    return f.scaled(factor);
  }
  return f;
}

// Target integrals of the truncated bubble: mass, G^{1-1/n} and G d^{p'}.
struct BubbleMoments {
  double mass, root, moment;
};

BubbleMoments bubble_moments(const RadialManifold& m, const SobolevParams& params, double lambda,
                             double k) {
  const int n = m.dimension();
  const double pc = params.p_conj;
  if (std::isinf(k)) {
    return {talenti_H(m, params, lambda, n), talenti_H(m, params, lambda, n - 1.0),
            ckn_K(m, lambda, pc, pc, n)};
  }
  QuadratureOptions o;
  o.rel_tol = kBubbleRelTol;
  o.max_intervals = 20000;
  o.breakpoints = m.breakpoints();
  o.breakpoints.push_back(k);
  auto integral = [&](const std::function<double(double)>& g) {
    return integrate_interval([&](double r) { return g(r) * m.area_density(r); }, 0.0, k + 1.0, o)
        .value;
  };
  const double root_power = 1.0 - 1.0 / n;
  return {truncated_bubble_integral(m, params, lambda, n, k), integral([&](double r) {
            return std::pow(truncation_weight(k, r), root_power) *
                   std::pow(lambda + std::pow(r, pc), -(n - 1.0));
          }),
          integral([&](double r) {
            return truncation_weight(k, r) * std::pow(lambda + std::pow(r, pc), -n) *
                   std::pow(r, pc);
          })};
}

}  // namespace

double pipeline_offset(const RadialManifold& m, const SobolevParams& params,
                       const RadialFunction& f) {
  const int n = m.dimension();
  const double alpha = params.p_star * (1.0 - 1.0 / n);
  const auto radius = f.support_radius();
  if (!radius) throw Error(ErrorKind::Precondition, "offset needs a compactly supported f");
  const double a = integrate_profile(
                       m, f, [alpha](double v, double) { return std::pow(std::abs(v), alpha); },
                       alpha)
                       .value;
  const double b = integrate_profile(
                       m, f,
                       [alpha](double v, double d) {
                         return std::pow(std::abs(v), alpha - 1.0) * std::abs(d);
                       },
                       alpha - 1.0, 1.0)
                       .value;
  return a + *radius * (alpha / n) * b;
}

double pipeline_constant(const RadialManifold& m, const SobolevParams& params, double c_f,
                         double lambda) {
  const int n = m.dimension();
  const double p = params.p;
  const double pc = params.p_conj;
  const double alpha = params.p_star * (1.0 - 1.0 / n);
  const double hn = talenti_H_scaled(m, params, lambda, n);
  const double hn1 = talenti_H_scaled(m, params, lambda, n - 1.0);
  const double k = ckn_K_scaled(m, lambda, pc, pc, n);
  const double den = std::pow(hn, 1.0 / n - 1.0 / p) * hn1 -
                     c_f * std::pow(lambda, -1.0 / pc) * std::pow(hn, 1.0 / pc);
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (alpha / n) * std::pow(k, 1.0 / pc) / den;
}

ChainReport proof_pipeline_p_gt_1(const RadialManifold& m, const SobolevParams& params,
                                  const RadialFunction& f_in, double lambda, double k,
                                  const PipelineOptions& options) {
  const int n = m.dimension();
  if (params.is_p_one() || !(params.p > 1.0) || !(params.p < n)) {
    throw Error(ErrorKind::ExponentOutOfRange, "this pipeline needs 1 < p < n");
  }
  const double p = params.p;
  const double pc = params.p_conj;
  const double ps = params.p_star;
  const double alpha = ps * (1.0 - 1.0 / n);
  double factor = 1.0;
  const RadialFunction f = normalized_source(m, f_in, ps, options, factor);

  const RadialMeasure source = profile_measure(m, f, ps);
  const RadialMeasure target = bubble_target(m, params, lambda, k);
  const TransportInstance inst = solve_radial_transport(source, target, options.transport);
  const double k0 = inst.source_radius();

  std::vector<double> kinks;
  for (double b : target.breakpoints()) {
    kinks.push_back(source.quantile(target.cdf(b), target.complement(b)));
  }

  auto fa = [&](double r, double e) { return std::pow(std::abs(f.value(r)), e); };
  // Transported quantities; the map is solved at each quadrature node.
  auto with_map = [&](const std::function<double(double, double)>& g) {
    return source_integral(inst, f, kinks, [&](double r) {
      if (f.value(r) == 0.0) return 0.0;
      const double t = inst.map(r);
      if (!std::isfinite(t)) return 0.0;
      return g(r, t);
    });
  };
  const double int_alpha = source_integral(inst, f, kinks, [&](double r) { return fa(r, alpha); });
  const double grad_abs = source_integral(inst, f, kinks, [&](double r) {
    return fa(r, alpha - 1.0) * std::abs(f.derivative(r));
  });
  const double grad_p = source_integral(
      inst, f, kinks, [&](double r) { return std::pow(std::abs(f.derivative(r)), p); });
  const double m_cov = with_map([&](double r, double t) {
    const double jac = inst.map_slope(r) * m.area_density(t) / m.area_density(r);
    return fa(r, alpha) * std::pow(jac, 1.0 / n);
  });
  const double trace = with_map([&](double r, double t) {
    const double lap = (1.0 - inst.map_slope(r)) + m.log_area_derivative(r) * (r - t);
    return fa(r, alpha) * (1.0 - lap / n);
  });
  const double div = with_map(
      [&](double r, double t) { return fa(r, alpha - 1.0) * f.derivative(r) * (r - t); });
  const double div_abs = with_map([&](double r, double t) {
    return fa(r, alpha - 1.0) * std::abs(f.derivative(r)) * std::abs(r - t);
  });
  const double tri = with_map(
      [&](double r, double t) { return fa(r, alpha - 1.0) * std::abs(f.derivative(r)) * t; });
  const double moment_src = with_map([&](double r, double t) { return fa(r, ps) * std::pow(t, pc); });

  const BubbleMoments g = bubble_moments(m, params, lambda, k);
  const double c_f = int_alpha + k0 * (alpha / n) * grad_abs;
  const double w = alpha / n;
  const double grad_norm = std::pow(grad_p, 1.0 / p);

  ChainReport report;
  report.steps = {
      {"target_root_integral", std::pow(g.mass, 1.0 / n - 1.0) * g.root, "="},
      {"transported_root", m_cov, "<="},
      {"trace_bound", trace, "="},
      {"divergence_form", int_alpha + w * div, "<="},
      {"absolute_form", int_alpha + w * div_abs, "<="},
      {"triangle_form", c_f + w * tri, "<="},
      {"holder_form", c_f + w * std::pow(moment_src, 1.0 / pc) * grad_norm, "="},
      {"moment_form", c_f + w * std::pow(g.moment / g.mass, 1.0 / pc) * grad_norm, ""},
      {"h_form_lhs", std::pow(g.mass, 1.0 / n - 1.0 / p) * g.root, "<="},
      {"h_form_rhs",
       c_f * std::pow(g.mass, 1.0 / pc) + w * std::pow(g.moment, 1.0 / pc) * grad_norm, ""},
  };
  close_chain(report, options);
  const double den = std::pow(g.mass, 1.0 / n - 1.0 / p) * g.root - c_f * std::pow(g.mass, 1.0 / pc);
  report.details["lambda"] = lambda;
  report.details["truncation"] = k;
  report.details["source_radius"] = k0;
  report.details["offset_c_f"] = c_f;
  report.details["gradient_norm"] = grad_norm;
  report.details["normalization_factor"] = factor;
  report.details["extracted_constant"] =
      den > 0.0 ? w * std::pow(g.moment, 1.0 / pc) / den : std::numeric_limits<double>::quiet_NaN();
  const double rhs = report.steps[9].value;
  report.details["h_form_relative_gap"] = (rhs - report.steps[8].value) / rhs;
  const MongeAmpereReport ma = monge_ampere_residual(inst);
  const DeterminantTraceReport dt = determinant_trace_check(inst);
  report.details["monge_ampere_residual"] = ma.sup_residual;
  report.details["pushforward_error"] = ma.pushforward_error;
  report.details["min_determinant_trace_slack"] = dt.min_slack;
  report.details["grid_nodes"] = static_cast<double>(ma.nodes);
  return report;
}

ChainReport proof_pipeline_p_eq_1(const RadialManifold& m, const RadialFunction& f_in,
                                  double lambda, const PipelineOptions& options) {
  const int n = m.dimension();
  const double ps = n / (n - 1.0);
  double factor = 1.0;
  const RadialFunction f = normalized_source(m, f_in, ps, options, factor);
  const RadialMeasure source = profile_measure(m, f, ps);
  const RadialMeasure target = uniform_ball_measure(m, lambda);
  const TransportInstance inst = solve_radial_transport(source, target, options.transport);
  const double k0 = inst.source_radius();

  std::vector<double> kinks;
  for (double b : target.breakpoints()) {
    kinks.push_back(source.quantile(target.cdf(b), target.complement(b)));
  }
  auto with_map = [&](const std::function<double(double, double)>& g) {
    return source_integral(inst, f, kinks, [&](double r) {
      if (f.value(r) == 0.0) return 0.0;
      return g(r, inst.map(r));
    });
  };
  const double int_f = source_integral(inst, f, kinks, [&](double r) { return std::abs(f.value(r)); });
  const double grad = source_integral(inst, f, kinks, [&](double r) { return std::abs(f.derivative(r)); });
  const double m_cov = with_map([&](double r, double t) {
    const double jac = inst.map_slope(r) * m.area_density(t) / m.area_density(r);
    return std::abs(f.value(r)) * std::pow(jac, 1.0 / n);
  });
  const double trace = with_map([&](double r, double t) {
    const double lap = (1.0 - inst.map_slope(r)) + m.log_area_derivative(r) * (r - t);
    return std::abs(f.value(r)) * (1.0 - lap / n);
  });
  const double div = with_map([&](double r, double t) { return f.derivative(r) * (r - t); });
  const double div_abs =
      with_map([&](double r, double t) { return std::abs(f.derivative(r)) * std::abs(r - t); });
  double sup_u = 0.0;
  for (const auto& node : inst.nodes()) sup_u = std::max(sup_u, std::abs(node.potential_slope));
  sup_u = std::max(sup_u, std::abs(k0 - lambda));

  const double vol = m.ball_volume(lambda);
  ChainReport report;
  report.steps = {
      {"ball_volume_root", std::pow(vol, 1.0 / n), "="},
      {"transported_root", m_cov, "<="},
      {"trace_bound", trace, "="},
      {"divergence_form", int_f + div / n, "<="},
      {"absolute_form", int_f + div_abs / n, "<="},
      {"sup_form", int_f + sup_u * grad / n, "<="},
      {"radius_form", int_f + (k0 + lambda) * grad / n, ""},
  };
  close_chain(report, options);
  report.details["lambda"] = lambda;
  report.details["source_radius"] = k0;
  report.details["normalization_factor"] = factor;
  report.details["volume_root_over_lambda"] = std::pow(vol, 1.0 / n) / lambda;
  report.details["isoperimetric_constant"] = std::pow(volume_unit_ball(n) * m.avr(), 1.0 / n);
  report.details["gradient_bound"] = grad / n;
  report.details["divided_rhs"] = (int_f + (k0 + lambda) * grad / n) / lambda;
  const MongeAmpereReport ma = monge_ampere_residual(inst);
  const DeterminantTraceReport dt = determinant_trace_check(inst);
  report.details["monge_ampere_residual"] = ma.sup_residual;
  report.details["pushforward_error"] = ma.pushforward_error;
  report.details["min_determinant_trace_slack"] = dt.min_slack;
  return report;
}

ScanReport ball_growth_scan(const RadialManifold& m, const std::vector<double>& lambdas) {
  const int n = m.dimension();
  ScanReport report;
  report.name = "ball-growth";
  report.expected = std::pow(volume_unit_ball(n) * m.avr(), 1.0 / n);
  std::vector<LimitSample> samples;
  for (double lam : lambdas) {
    const double v = std::pow(m.ball_volume(lam), 1.0 / n) / lam;
    report.points.push_back({lam, v, 0.0});
    samples.push_back({lam, v});
  }
  report.limit = extrapolate_limit(samples, LimitDirection::ToInfinity);
  report.relative_deviation = std::abs(report.limit.limit - report.expected) / report.expected;
  return report;
}

ScanReport pipeline_sharpness_scan(const RadialManifold& m, const SobolevParams& params,
                                   const RadialFunction& f, const std::vector<double>& lambdas) {
  const int n = m.dimension();
  const double c_f = pipeline_offset(m, params, f);
  ScanReport report;
  report.name = "pipeline";
  report.expected = aubin_talenti(n, params.p) * std::pow(m.avr(), -1.0 / n);
  const auto values = detail::parallel_map(
      lambdas.size(), [&](std::size_t i) { return pipeline_constant(m, params, c_f, lambdas[i]); });
  std::vector<LimitSample> samples;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    report.points.push_back({lambdas[i], values[i], std::abs(values[i]) * 3 * kBubbleRelTol});
    if (std::isfinite(values[i])) samples.push_back({lambdas[i], values[i]});
  }
  ExtrapolationOptions opts;
  opts.known_exponent = 1.0 / params.p_conj;
  report.limit = extrapolate_limit(samples, LimitDirection::ToInfinity, opts);
  report.relative_deviation = std::abs(report.limit.limit - report.expected) / report.expected;
  return report;
}

CompositionReport composition_inverse_check(const RadialMeasure& a, const RadialMeasure& b,
                                            const TransportOptions& options) {
  const TransportInstance ab = solve_radial_transport(a, b, options);
  const TransportInstance ba = solve_radial_transport(b, a, options);
  CompositionReport r;
  const double b_radius = *b.support_radius();
  for (const auto& node : ab.nodes()) {
    if (!(node.map > 0.0) || node.map >= b_radius) continue;
    const double back = ba.map(node.map);
    const double dev = std::abs(back - node.rho);
    if (dev > r.sup_deviation) {
      r.sup_deviation = dev;
      r.worst_rho = node.rho;
    }
    ++r.nodes;
  }
  return r;
}

CampaignReport determinant_trace_campaign(const RadialManifold& m, std::size_t instances,
                                          std::uint64_t seed, const TransportOptions& options) {
  struct Params {
    double radius, power, src_poly, width, tgt_poly;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Params> params(instances);
  for (auto& p : params) {
    p.radius = 0.5 + 1.5 * unit(rng);
    p.power = 3.0 + std::floor(4.0 * unit(rng));
    p.src_poly = 2.0 * unit(rng);
    p.width = 0.5 + 2.5 * unit(rng);
    p.tgt_poly = 2.0 * unit(rng);
  }
  const auto results = detail::parallel_map(instances, [&](std::size_t i) {
    const Params& p = params[i];
    const RadialMeasure source(
        m,
        [p](double r) {
          if (r >= p.radius) return 0.0;
          const double s = r / p.radius;
          return (1.0 + p.src_poly * r * r) * std::pow(1.0 - s * s, p.power);
        },
        p.radius, p.radius, {p.radius}, "random-source");
    const RadialMeasure target(
        m, [p](double r) { return (1.0 + p.tgt_poly * r * r) * std::exp(-p.width * r * r); },
        std::nullopt, 1.0 / std::sqrt(p.width), {}, "random-target");
    const TransportInstance inst = solve_radial_transport(source, target, options);
    return std::make_pair(determinant_trace_check(inst).min_slack,
                          monge_ampere_residual(inst).sup_residual);
  });
  CampaignReport report;
  report.instances = instances;
  report.seed = seed;
  report.min_slack = kInf;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].first < report.min_slack) {
      report.min_slack = results[i].first;
      report.worst_instance = i;
    }
    report.max_residual = std::max(report.max_residual, results[i].second);
  }
  if (instances == 0) report.min_slack = 0.0;
  return report;
}

}  // namespace soblab
