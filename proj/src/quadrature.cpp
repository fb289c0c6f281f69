#include "soblab/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "soblab/errors.hpp"

namespace soblab {
namespace {

using Kronrod21 = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss10 = boost::math::quadrature::gauss<double, 10>;

constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

double checked(double value, double x) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "integrand returned " << value << " at " << x;
    throw Error(ErrorKind::Domain, msg.str());
  }
  return value;
}

struct RuleResult {
  double value = 0.0;
  double error = 0.0;
};

// 21-point Kronrod with the embedded 10-point Gauss rule; error estimate in
// the QUADPACK style (scaled |K - G| with a roundoff floor).
RuleResult kronrod21(const Integrand& g, double a, double b) {
  const auto& nodes = Kronrod21::abscissa();
  const auto& kw = Kronrod21::weights();
  const auto& gw = Gauss10::weights();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fvals[21];
  fvals[0] = checked(g(center), center);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double dx = half * nodes[i];
    fvals[2 * i - 1] = checked(g(center - dx), center - dx);
    fvals[2 * i] = checked(g(center + dx), center + dx);
  }

  double kronrod = fvals[0] * kw[0];
  double gauss = 0.0;
  double resabs = std::abs(fvals[0]) * kw[0];
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double pair = fvals[2 * i - 1] + fvals[2 * i];
    kronrod += pair * kw[i];
    resabs += (std::abs(fvals[2 * i - 1]) + std::abs(fvals[2 * i])) * kw[i];
    if (i % 2 == 1) gauss += pair * gw[i / 2];
  }
  const double mean = 0.5 * kronrod;
  double resasc = std::abs(fvals[0] - mean) * kw[0];
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    resasc += (std::abs(fvals[2 * i - 1] - mean) + std::abs(fvals[2 * i] - mean)) * kw[i];
  }

  const double scale = std::abs(half);
  RuleResult out;
  out.value = kronrod * half;
  double err = std::abs((kronrod - gauss) * half);
  resasc *= scale;
  resabs *= scale;
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEpsilon)) {
    err = std::max(50.0 * kEpsilon * resabs, err);
  }
  out.error = err;
  return out;
}

struct Piece {
  Integrand g;
  std::vector<double> cuts;  // ascending, includes both ends
};

struct Cell {
  int piece = 0;
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct ByError {
  bool operator()(const Cell& x, const Cell& y) const { return x.error < y.error; }
};

IntegralResult adapt(const std::vector<Piece>& pieces, const QuadratureOptions& options) {
  std::priority_queue<Cell, std::vector<Cell>, ByError> queue;
  std::vector<Cell> frozen;
  int evaluations = 0;
  double total = 0.0;
  double total_error = 0.0;

  auto evaluate = [&](int piece, double a, double b) {
    const RuleResult r = kronrod21(pieces[piece].g, a, b);
    evaluations += 21;
    return Cell{piece, a, b, r.value, r.error};
  };

  for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
    const auto& cuts = pieces[k].cuts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (!(cuts[i + 1] > cuts[i])) continue;
      Cell c = evaluate(k, cuts[i], cuts[i + 1]);
      total += c.value;
      total_error += c.error;
      queue.push(c);
    }
  }

  auto tolerance = [&]() { return std::max(options.abs_tol, options.rel_tol * std::abs(total)); };
  int cells = static_cast<int>(queue.size());

  while (total_error > tolerance() && !queue.empty()) {
    if (cells >= options.max_intervals) break;
    Cell worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const bool splittable =
        (mid > worst.a && mid < worst.b) &&
        (worst.b - worst.a) > 64.0 * kEpsilon * std::max(std::abs(worst.a), std::abs(worst.b));
    if (!splittable) {
      frozen.push_back(worst);
      continue;
    }
    const Cell left = evaluate(worst.piece, worst.a, mid);
    const Cell right = evaluate(worst.piece, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++cells;
  }

  // Re-sum in a fixed order so the result does not depend on heap layout.
  std::vector<Cell> all = std::move(frozen);
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Cell& x, const Cell& y) {
    return x.piece != y.piece ? x.piece < y.piece : x.a < y.a;
  });
  IntegralResult result;
  for (const Cell& c : all) {
    result.value += c.value;
    result.error_estimate += c.error;
  }
  result.evaluations = evaluations;

  const double tol = std::max(options.abs_tol, options.rel_tol * std::abs(result.value));
  if (result.error_estimate > tol) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not converge: estimate " << result.value << " with error "
        << result.error_estimate << " after " << cells << " intervals (tolerance " << tol << ")";
    throw Error(ErrorKind::ConvergenceFailure, msg.str());
  }
  return result;
}

std::vector<double> with_cuts(double lo, double hi, const std::vector<double>& interior) {
  std::vector<double> cuts{lo};
  for (double x : interior) {
    if (x > lo && x < hi) cuts.push_back(x);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

void check_origin_exponent(double gamma) {
  if (!(gamma > -1.0)) {
    throw Error(ErrorKind::Domain,
                "origin exponent " + std::to_string(gamma) + " is not integrable (must exceed -1)");
  }
}

// Local decay exponent of |f| between two far points; NaN if either is zero.
double observed_decay(const Integrand& f, double r1, double r2) {
  const double f1 = std::abs(f(r1));
  const double f2 = std::abs(f(r2));
  if (!(f1 > 0.0) || !(f2 > 0.0) || !std::isfinite(f1) || !std::isfinite(f2)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return -std::log(f2 / f1) / std::log(r2 / r1);
}

}  // namespace

IntegralResult kronrod21_rule(const Integrand& f, double a, double b) {
  const RuleResult r = kronrod21(f, a, b);
  return {r.value, r.error, 21};
}

IntegralResult integrate_interval(const Integrand& f, double a, double b,
                                  const QuadratureOptions& options) {
  if (!(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorKind::Domain, "integration interval must be finite with a <= b");
  }
  if (a == b) return {};
  Piece piece;
  if (options.origin_exponent < 0.0 && a == 0.0) {
    check_origin_exponent(options.origin_exponent);
    const double kappa = 1.0 / (1.0 + options.origin_exponent);
    const double width = b - a;
    piece.g = [&f, kappa, width](double u) {
      if (u <= 0.0) return 0.0;
      return f(width * std::pow(u, kappa)) * width * kappa * std::pow(u, kappa - 1.0);
    };
    std::vector<double> mapped;
    for (double x : options.breakpoints) {
      if (x > a && x < b) mapped.push_back(std::pow(x / width, 1.0 / kappa));
    }
    piece.cuts = with_cuts(0.0, 1.0, mapped);
  } else {
    piece.g = f;
    piece.cuts = with_cuts(a, b, options.breakpoints);
  }
  return adapt({piece}, options);
}

IntegralResult integrate_improper(const Integrand& f, const TailClass& tail,
                                  const QuadratureOptions& options) {
  const double c = options.scale;
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::Domain, "integration scale must be positive and finite");
  }

  const bool algebraic = std::holds_alternative<AlgebraicTail>(tail);
  const double alpha = algebraic ? std::get<AlgebraicTail>(tail).exponent : 0.0;
  if (algebraic && !(alpha > 1.0)) {
    throw Error(ErrorKind::DivergentIntegral,
                "algebraic tail exponent " + std::to_string(alpha) + " must exceed 1");
  }

  // Check the declared tail class against the observed decay far out.
  const double decay = observed_decay(f, c * 1e4, c * 1e8);
  if (std::isfinite(decay)) {
    if (algebraic && decay <= 1.0) {
      throw Error(ErrorKind::ConvergenceFailure,
                  "declared algebraic tail but integrand decays like rho^-" +
                      std::to_string(decay));
    }
    if (!algebraic && decay < 20.0) {
      throw Error(ErrorKind::ConvergenceFailure,
                  "declared exponential tail but integrand decays algebraically (rho^-" +
                      std::to_string(decay) + ")");
    }
  }

  std::vector<double> head_breaks;
  std::vector<double> tail_breaks;
  for (double x : options.breakpoints) {
    if (x > 0.0 && x < c) head_breaks.push_back(x);
    if (x > c && std::isfinite(x)) tail_breaks.push_back(x);
  }

  std::vector<Piece> pieces(2);

  // Head: [0, c].
  const double gamma = options.origin_exponent;
  if (gamma < 0.0) {
    check_origin_exponent(gamma);
    const double kappa = 1.0 / (1.0 + gamma);
    pieces[0].g = [&f, c, kappa](double u) {
      if (u <= 0.0) return 0.0;
      return f(c * std::pow(u, kappa)) * c * kappa * std::pow(u, kappa - 1.0);
    };
    for (double& x : head_breaks) x = std::pow(x / c, 1.0 / kappa);
  } else {
    pieces[0].g = [&f, c](double u) { return f(c * u) * c; };
    for (double& x : head_breaks) x /= c;
  }
  pieces[0].cuts = with_cuts(0.0, 1.0, head_breaks);

  // Tail: [c, inf).
  if (algebraic) {
    // rho = c v^{-1/(alpha-1)} flattens an integrand that decays like rho^{-alpha}.
    const double beta = 1.0 / (alpha - 1.0);
    pieces[1].g = [&f, c, beta, alpha](double v) {
      if (v <= 0.0) return 0.0;
      const double rho = c * std::pow(v, -beta);
      if (!std::isfinite(rho)) return 0.0;
      const double value = f(rho);
      if (value == 0.0) return 0.0;
      return value * c * beta * std::pow(v, -alpha * beta);
    };
    for (double& x : tail_breaks) x = std::pow(x / c, -1.0 / beta);
  } else {
    pieces[1].g = [&f, c](double u) {
      if (u <= 0.0) return 0.0;
      const double rho = c * (1.0 - std::log(u));
      const double value = f(rho);
      if (value == 0.0) return 0.0;
      return value * c / u;
    };
    for (double& x : tail_breaks) x = std::exp(1.0 - x / c);
  }
  pieces[1].cuts = with_cuts(0.0, 1.0, tail_breaks);

  return adapt(pieces, options);
}

// ---------------------------------------------------------------------------

namespace {

struct LinearFit {
  double limit = 0.0;
  double coefficient = 0.0;
  double rms = 0.0;
};

// Least squares for g_i = L + c (x_i / x_ref)^{-alpha}.
LinearFit fit_with_exponent(const std::vector<double>& x, const std::vector<double>& g,
                            double alpha) {
  const std::size_t m = x.size();
  const double x_ref = x.back();
  std::vector<double> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = std::pow(x[i] / x_ref, -alpha);
  const double mb = std::accumulate(basis.begin(), basis.end(), 0.0) / m;
  const double mg = std::accumulate(g.begin(), g.end(), 0.0) / m;
  double sbb = 0.0;
  double sbg = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sbb += (basis[i] - mb) * (basis[i] - mb);
    sbg += (basis[i] - mb) * (g[i] - mg);
  }
  LinearFit fit;
  fit.coefficient = sbb > 0.0 ? sbg / sbb : 0.0;
  fit.limit = mg - fit.coefficient * mb;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = g[i] - fit.limit - fit.coefficient * basis[i];
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / m);
  return fit;
}

}  // namespace

LimitEstimate extrapolate_limit(std::span<const LimitSample> samples, LimitDirection direction,
                                const ExtrapolationOptions& options) {
  if (samples.size() < 4) {
    throw Error(ErrorKind::Precondition, "limit extrapolation needs at least 4 samples");
  }
  std::vector<LimitSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted) {
    if (!(s.lambda > 0.0) || !std::isfinite(s.lambda) || !std::isfinite(s.value)) {
      throw Error(ErrorKind::Precondition, "samples need positive finite lambda and finite values");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const LimitSample& a, const LimitSample& b) { return a.lambda < b.lambda; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i].lambda > sorted[i - 1].lambda)) {
      throw Error(ErrorKind::Precondition, "sample lambdas must be strictly monotone");
    }
  }
  if (direction == LimitDirection::ToZero) std::reverse(sorted.begin(), sorted.end());

  // Work in x (x -> inf) with the model L + c x^{-alpha}.
  const std::size_t m = std::min<std::size_t>(sorted.size(),
                                              std::max(4, options.tail_samples));
  std::vector<double> x;
  std::vector<double> g;
  for (std::size_t i = sorted.size() - m; i < sorted.size(); ++i) {
    const double lam = sorted[i].lambda;
    x.push_back(direction == LimitDirection::ToInfinity ? lam : 1.0 / lam);
    g.push_back(sorted[i].value);
  }
  const double ratio = x[1] / x[0];
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs((x[i] / x[i - 1]) / ratio - 1.0) > 1e-6) {
      throw Error(ErrorKind::Precondition, "limit extrapolation expects geometric lambda spacing");
    }
  }

  LimitEstimate out;
  out.samples.assign(samples.begin(), samples.end());
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;

  double spread = 0.0;
  for (double v : g) spread = std::max(spread, std::abs(v - g.back()));
  if (spread <= options.constant_tolerance * scale) {
    out.limit = std::accumulate(g.begin(), g.end(), 0.0) / m;
    out.residual = spread;
    out.note = "constant tail";
    return out;
  }

  if (options.known_exponent) {
    const double alpha = *options.known_exponent;
    if (!(alpha > 0.0)) throw Error(ErrorKind::Precondition, "known exponent must be positive");
    // Richardson: eliminate x^{-alpha}, x^{-2 alpha}, ... level by level.
    std::vector<double> level = g;
    double previous_top = g.back();
    for (std::size_t k = 1; k < m; ++k) {
      const double factor = std::pow(ratio, alpha * static_cast<double>(k));
      std::vector<double> next(level.size() - 1);
      for (std::size_t i = 0; i + 1 < level.size(); ++i) {
        next[i] = (factor * level[i + 1] - level[i]) / (factor - 1.0);
      }
      previous_top = level.back();
      level = std::move(next);
    }
    out.limit = level.back();
    out.correction_exponent = alpha;
    out.residual = std::abs(out.limit - previous_top);
    out.reliable = out.residual <= options.residual_threshold * scale;
    out.note = "richardson";
    return out;
  }

  const double d1 = g[m - 2] - g[m - 3];
  const double d2 = g[m - 1] - g[m - 2];
  if (d1 * d2 <= 0.0 || std::abs(d2) >= std::abs(d1)) {
    out.limit = g.back();
    out.residual = std::abs(d2);
    out.reliable = false;
    out.note = "non-monotone or non-contracting tail";
    return out;
  }
  const double alpha0 = std::log(d1 / d2) / std::log(ratio);

  LinearFit best = fit_with_exponent(x, g, alpha0);
  double best_alpha = alpha0;
  // Golden-section refinement of alpha on [alpha0/2, 2 alpha0].
  double lo = 0.5 * alpha0;
  double hi = 2.0 * alpha0;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = fit_with_exponent(x, g, x1).rms;
  double f2 = fit_with_exponent(x, g, x2).rms;
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = fit_with_exponent(x, g, x1).rms;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = fit_with_exponent(x, g, x2).rms;
    }
  }
  const double refined_alpha = 0.5 * (lo + hi);
  const LinearFit refined = fit_with_exponent(x, g, refined_alpha);
  if (refined.rms < best.rms) {
    best = refined;
    best_alpha = refined_alpha;
  }

  out.limit = best.limit;
  out.correction_exponent = best_alpha;
  out.residual = best.rms;
  out.reliable = best.rms <= options.residual_threshold * scale;
  out.note = out.reliable ? "power-law fit" : "fit residual above threshold";
  return out;
}

double numeric_derivative(const std::function<double(double)>& f, double x, double h) {
  if (!(h > 0.0) || !(x - 2.0 * h > 0.0)) {
    throw Error(ErrorKind::StepSize, "step h=" + std::to_string(h) +
                                         " requires 0 < 2h < x=" + std::to_string(x));
  }
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw Error(ErrorKind::Precondition, "geometric grid needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> grid(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = lo * std::exp(step * i);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace soblab
