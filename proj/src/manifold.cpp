#include "soblab/manifold.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "soblab/constants.hpp"
#include "soblab/errors.hpp"

namespace soblab {

namespace detail {

// Monotone cubic Hermite model of g = V/(omega_n rho^n) as a function of
// x = log(rho), with analytic continuations below the first row and beyond
// the last one. When every row lies strictly above the fitted limit the
// interpolated quantity is log(g - limit) instead of g: power-law tails are
// then nearly linear and A, A' come out far more accurately at large rho.
struct TableModel {
  std::vector<double> x;
  std::vector<double> g;
  std::vector<double> knot_values;  // g, or log(g - tail_limit) in residual mode
  std::vector<double> slope;        // d knot_values / dx
  std::vector<double> rho;
  bool residual_mode = false;
  double origin_exponent = 2.0;  // g = 1 + (g0 - 1) (rho/rho0)^beta near the pole
  double tail_limit = 0.0;       // g -> tail_limit like (rho/rho_last)^{-tail_alpha}
  double tail_alpha = 1.0;

  struct Value {
    double g, gx, gxx;
  };

  Value eval(double xv) const {
    const std::size_t last = x.size() - 1;
    if (xv <= x.front()) {
      const double e = std::exp(origin_exponent * (xv - x.front()));
      const double c = g.front() - 1.0;
      return {1.0 + c * e, origin_exponent * c * e, origin_exponent * origin_exponent * c * e};
    }
    if (xv >= x[last]) {
      const double e = std::exp(-tail_alpha * (xv - x[last]));
      const double c = g[last] - tail_limit;
      return {tail_limit + c * e, -tail_alpha * c * e, tail_alpha * tail_alpha * c * e};
    }
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xv) - x.begin()) - 1;
    const double h = x[k + 1] - x[k];
    const double t = (xv - x[k]) / h;
    const double g0 = knot_values[k];
    const double g1 = knot_values[k + 1];
    const double m0 = slope[k];
    const double m1 = slope[k + 1];
    const double t2 = t * t;
    const double t3 = t2 * t;
    Value v{};
    v.g = (2 * t3 - 3 * t2 + 1) * g0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * g1 +
          (t3 - t2) * h * m1;
    v.gx = (6 * t2 - 6 * t) * (g0 - g1) / h + (3 * t2 - 4 * t + 1) * m0 + (3 * t2 - 2 * t) * m1;
    v.gxx = ((12 * t - 6) * (g0 - g1) / h + (6 * t - 4) * m0 + (6 * t - 2) * m1) / h;
    if (!residual_mode) return v;
    const double e = std::exp(v.g);
    return {tail_limit + e, e * v.gx, e * (v.gxx + v.gx * v.gx)};
  }
};

}  // namespace detail

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, int line) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw Error(ErrorKind::Format,
                "line " + std::to_string(line) + ": cannot parse number '" + t + "'");
  }
  return value;
}

// Fritsch-Butland weighted harmonic slopes; zero at local extrema.
void pchip_slopes(detail::TableModel& t) {
  const std::size_t n = t.x.size();
  std::vector<double> h(n - 1);
  std::vector<double> d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t.x[k + 1] - t.x[k];
    d[k] = (t.knot_values[k + 1] - t.knot_values[k]) / h[k];
  }
  t.slope.assign(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    t.slope[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  t.slope[0] = d[0];
  t.slope[n - 1] = d[n - 2];
}

void set_end_slope(detail::TableModel& t, std::size_t k, double wanted, double delta) {
  if (delta == 0.0 || wanted * delta < 0.0) {
    t.slope[k] = 0.0;
  } else if (std::abs(wanted) > 3.0 * std::abs(delta)) {
    t.slope[k] = 3.0 * delta;
  } else {
    t.slope[k] = wanted;
  }
}

struct TailFit {
  double limit;
  double alpha;
};

TailFit fit_tail(const detail::TableModel& t, std::optional<double> hint) {
  const double rho_first = t.rho.front();
  const double rho_last = t.rho.back();
  const double span = rho_last / rho_first;
  if (!hint && span < 100.0) {
    throw Error(ErrorKind::InsufficientData,
                "volume table spans less than two decades and has no tail exponent hint");
  }
  if (hint && span < 8.0) {
    throw Error(ErrorKind::InsufficientData, "volume table too short to resolve its tail");
  }
  // Rows nearest to rho_last / 2^j: raw data, no interpolation error.
  std::vector<LimitSample> samples;
  std::size_t prev = t.rho.size();
  for (int j = 7; j >= 0; --j) {
    const double r = rho_last * std::ldexp(1.0, -j);
    if (r < rho_first) continue;
    const auto it = std::lower_bound(t.rho.begin(), t.rho.end(), r);
    std::size_t i = static_cast<std::size_t>(it - t.rho.begin());
    if (i > 0 && (i == t.rho.size() || r / t.rho[i - 1] < t.rho[i] / r)) --i;
    if (i == prev) continue;
    prev = i;
    samples.push_back({t.rho[i], t.g[i]});
  }
  ExtrapolationOptions opts;
  opts.tail_samples = static_cast<int>(samples.size());
  opts.residual_threshold = 1e-5;
  if (hint) {
    opts.known_exponent = *hint;
    opts.tail_samples = std::min<int>(4, static_cast<int>(samples.size()));
  }
  const LimitEstimate est = extrapolate_limit(samples, LimitDirection::ToInfinity, opts);
  if (!hint && !est.reliable) {
    throw Error(ErrorKind::InsufficientData,
                "volume table tail does not resolve the asymptotic ratio (" + est.note + ")");
  }
  TailFit fit{est.limit, est.correction_exponent.value_or(hint.value_or(2.0))};
  if (!(fit.alpha > 0.0)) fit.alpha = 2.0;
  return fit;
}

}  // namespace

VolumeProfileTable read_volume_profile(std::istream& in) {
  VolumeProfileTable table;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string key = "tail_exponent:";
      const auto pos = t.find(key);
      if (pos != std::string::npos) {
        table.tail_exponent_hint = parse_number(t.substr(pos + key.size()), lineno);
      }
      continue;
    }
    if (!header) {
      std::string compact;
      for (char c : t) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != "rho,volume") {
        throw Error(ErrorKind::Format, "line " + std::to_string(lineno) +
                                           ": expected header 'rho,volume', got '" + t + "'");
      }
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorKind::Format, "line " + std::to_string(lineno) + ": expected two columns");
    }
    const double rho = parse_number(t.substr(0, comma), lineno);
    const double vol = parse_number(t.substr(comma + 1), lineno);
    if (!(rho > 0.0) || !(vol > 0.0) || !std::isfinite(rho) || !std::isfinite(vol)) {
      throw Error(ErrorKind::Format,
                  "line " + std::to_string(lineno) + ": rho and volume must be positive");
    }
    if (!table.rho.empty() && (rho <= table.rho.back() || vol <= table.volume.back())) {
      throw Error(ErrorKind::Format, "line " + std::to_string(lineno) +
                                         ": rows must be strictly increasing in rho and volume");
    }
    table.rho.push_back(rho);
    table.volume.push_back(vol);
  }
  if (!header) throw Error(ErrorKind::Format, "missing 'rho,volume' header");
  return table;
}

VolumeProfileTable load_volume_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open volume table '" + path + "'");
  return read_volume_profile(in);
}

void write_volume_profile(std::ostream& out, const VolumeProfileTable& table) {
  if (table.tail_exponent_hint) out << "# tail_exponent: " << *table.tail_exponent_hint << "\n";
  out << "rho,volume\n" << std::setprecision(17);
  for (std::size_t i = 0; i < table.rho.size(); ++i) {
    out << table.rho[i] << "," << table.volume[i] << "\n";
  }
}

// ---------------------------------------------------------------------------

RadialManifold construct_manifold(const ManifoldSpec& spec, const ConstructOptions& options) {
  RadialManifold m;
  if (const auto* e = std::get_if<EuclideanSpec>(&spec)) {
    m.n_ = e->n;
    m.kind_ = ManifoldKind::Euclidean;
  } else if (const auto* c = std::get_if<ConeSpec>(&spec)) {
    m.n_ = c->n;
    m.kind_ = ManifoldKind::Cone;
    if (!(c->theta > 0.0 && c->theta <= 1.0)) {
      throw Error(ErrorKind::ParameterDomain,
                  "cone volume ratio theta must lie in (0, 1], got " + std::to_string(c->theta));
    }
    m.theta_ = c->theta;
  } else {
    const auto& ts = std::get<TableSpec>(spec);
    m.n_ = ts.n;
    m.kind_ = ManifoldKind::Table;
  }
  if (m.n_ < 2) {
    throw Error(ErrorKind::InvalidDimension,
                "manifold dimension must be at least 2, got " + std::to_string(m.n_));
  }
  m.omega_ = volume_unit_ball(m.n_);
  m.avr_ = m.theta_;
  if (m.kind_ != ManifoldKind::Table) return m;

  const auto& table = std::get<TableSpec>(spec).table;
  if (table.rho.size() != table.volume.size() || table.rho.size() < 4) {
    throw Error(ErrorKind::InsufficientData, "volume table needs at least 4 rows");
  }
  auto model = std::make_shared<detail::TableModel>();
  for (std::size_t i = 0; i < table.rho.size(); ++i) {
    const double r = table.rho[i];
    const double v = table.volume[i];
    if (!(r > 0.0) || !(v > 0.0)) throw Error(ErrorKind::Format, "table entries must be positive");
    if (i > 0 && (r <= table.rho[i - 1] || v <= table.volume[i - 1])) {
      std::ostringstream msg;
      msg << "table rows must be strictly increasing (row " << i << ", rho=" << r << ")";
      throw Error(ErrorKind::Format, msg.str());
    }
    model->rho.push_back(r);
    model->x.push_back(std::log(r));
    model->g.push_back(v / (m.omega_ * std::pow(r, m.n_)));
  }
  const auto& g = model->g;
  if (options.enforce_bishop_gromov) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] > 1.0 + options.tolerance) {
        std::ostringstream msg;
        msg << "volume exceeds the euclidean ball volume at rho=" << table.rho[i]
            << " (ratio " << g[i] << ")";
        throw Error(ErrorKind::Format, msg.str());
      }
      if (i > 0 && g[i] > g[i - 1] * (1.0 + options.tolerance)) {
        std::ostringstream msg;
        msg << "V/rho^n increases on [" << table.rho[i - 1] << ", " << table.rho[i] << "]";
        throw Error(ErrorKind::Format, msg.str());
      }
    }
  }

  model->knot_values = g;
  pchip_slopes(*model);
  const std::size_t last = g.size() - 1;
  if (g[0] < 1.0 && g[1] < 1.0 && (1.0 - g[1]) > (1.0 - g[0])) {
    model->origin_exponent =
        std::clamp(std::log((1.0 - g[1]) / (1.0 - g[0])) / (model->x[1] - model->x[0]), 0.5, 4.0);
  }
  set_end_slope(*model, 0, model->origin_exponent * (g[0] - 1.0),
                (g[1] - g[0]) / (model->x[1] - model->x[0]));

  m.tail_hint_ = table.tail_exponent_hint;
  TailFit tail{g[last], 2.0};
  try {
    model->tail_limit = g[last];
    tail = fit_tail(*model, table.tail_exponent_hint);
  } catch (const Error&) {
    if (options.enforce_bishop_gromov) throw;
  }
  if (options.enforce_bishop_gromov && !(tail.limit > 0.0)) {
    throw Error(ErrorKind::InsufficientData, "fitted asymptotic volume ratio is not positive");
  }
  tail.limit = std::clamp(tail.limit, std::min(g[last], 1e-300), g[last]);
  model->tail_limit = tail.limit;
  model->tail_alpha = tail.alpha;
  set_end_slope(*model, last, -tail.alpha * (g[last] - tail.limit),
                (g[last] - g[last - 1]) / (model->x[last] - model->x[last - 1]));

  const bool above = tail.limit > 0.0 && std::all_of(g.begin(), g.end(), [&](double v) {
                       return v > tail.limit;
                     });
  if (above) {
    auto& y = model->knot_values;
    for (std::size_t i = 0; i < g.size(); ++i) y[i] = std::log(g[i] - tail.limit);
    pchip_slopes(*model);
    model->residual_mode = true;
    const double h0 = model->x[1] - model->x[0];
    const double hl = model->x[last] - model->x[last - 1];
    set_end_slope(*model, 0, model->origin_exponent * (g[0] - 1.0) / (g[0] - tail.limit),
                  (y[1] - y[0]) / h0);
    set_end_slope(*model, last, -tail.alpha, (y[last] - y[last - 1]) / hl);
  }
  m.avr_ = tail.limit;
  m.table_ = std::move(model);
  return m;
}

RadialManifold euclidean(int n) { return construct_manifold(EuclideanSpec{n}); }
RadialManifold cone(int n, double theta) { return construct_manifold(ConeSpec{n, theta}); }

double asymptotic_volume_ratio(const RadialManifold& m) { return m.avr(); }

std::string RadialManifold::describe() const {
  std::ostringstream out;
  out << std::setprecision(17);
  switch (kind_) {
    case ManifoldKind::Euclidean:
      out << "euclidean(n=" << n_ << ")";
      break;
    case ManifoldKind::Cone:
      out << "cone(n=" << n_ << ", theta=" << theta_ << ")";
      break;
    case ManifoldKind::Table:
      out << "table(n=" << n_ << ", rows=" << table_->rho.size() << ")";
      break;
  }
  return out.str();
}

double RadialManifold::volume_ratio(double rho) const {
  if (!table_) return theta_;
  if (rho <= 0.0) return 1.0;
  return table_->eval(std::log(rho)).g;
}

double RadialManifold::ball_volume(double rho) const {
  if (rho <= 0.0) return 0.0;
  return omega_ * std::pow(rho, n_) * volume_ratio(rho);
}

double RadialManifold::area_ratio(double rho) const {
  if (!table_) return n_ * omega_ * theta_;
  if (rho <= 0.0) return n_ * omega_;
  const auto v = table_->eval(std::log(rho));
  return omega_ * (n_ * v.g + v.gx);
}

double RadialManifold::area_density(double rho) const {
  if (rho <= 0.0) return 0.0;
  return area_ratio(rho) * std::pow(rho, n_ - 1);
}

double RadialManifold::log_area_derivative(double rho) const {
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::Domain, "A'/A is singular at the pole");
  }
  if (!table_) return (n_ - 1) / rho;
  const auto v = table_->eval(std::log(rho));
  return ((n_ - 1) + (n_ * v.gx + v.gxx) / (n_ * v.g + v.gx)) / rho;
}

const std::vector<double>& RadialManifold::breakpoints() const noexcept {
  static const std::vector<double> none;
  return table_ ? table_->rho : none;
}

BishopGromovReport validate_bishop_gromov(const RadialManifold& m, const std::vector<double>& grid,
                                          double tolerance) {
  BishopGromovReport report;
  report.tolerance = tolerance;
  report.max_upper_violation = -std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = m.volume_ratio(grid[i]);
    if (g - 1.0 > report.max_upper_violation) {
      report.max_upper_violation = g - 1.0;
      report.worst_upper_rho = grid[i];
    }
    if (i > 0 && g - prev > report.max_monotonicity_violation) {
      report.max_monotonicity_violation = g - prev;
      report.violation_interval = std::make_pair(grid[i - 1], grid[i]);
    }
    prev = g;
  }
  if (grid.empty()) report.max_upper_violation = 0.0;
  report.passed = report.max_upper_violation <= tolerance &&
                  report.max_monotonicity_violation <= tolerance;
  if (report.max_monotonicity_violation <= tolerance) report.violation_interval.reset();
  return report;
}

std::vector<double> default_validation_grid(const RadialManifold& m, int count) {
  const auto& rows = m.breakpoints();
  double lo = 1e-3;
  double hi = 1e6;
  if (!rows.empty()) {
    lo = rows.front();
    hi = rows.back();
  }
  std::vector<double> grid = geometric_grid(lo, hi, count);
  grid.insert(grid.end(), rows.begin(), rows.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

IntegralResult radial_integral(const RadialManifold& m, const std::function<double(double)>& phi,
                               const TailClass& tail, QuadratureOptions options) {
  const auto& knots = m.breakpoints();
  options.breakpoints.insert(options.breakpoints.end(), knots.begin(), knots.end());
  const Integrand integrand = [&m, &phi](double rho) {
    const double v = phi(rho);
    return v == 0.0 ? 0.0 : v * m.area_density(rho);
  };
  return integrate_improper(integrand, tail, options);
}

}  // namespace soblab
