#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "soblab/quadrature.hpp"

namespace soblab {

/// Sampled ball volumes V(rho) around the pole.
struct VolumeProfileTable {
  std::vector<double> rho;
  std::vector<double> volume;
  /// Leading order of V/(omega_n rho^n) - AVR at infinity, if known.
  std::optional<double> tail_exponent_hint;
};

/// CSV with header `rho,volume`; `#` starts a comment line. An optional
/// `# tail_exponent: <alpha>` comment sets the tail hint.
VolumeProfileTable read_volume_profile(std::istream& in);
VolumeProfileTable load_volume_profile(const std::string& path);
void write_volume_profile(std::ostream& out, const VolumeProfileTable& table);

struct EuclideanSpec {
  int n = 0;
};
struct ConeSpec {
  int n = 0;
  double theta = 1.0;
};
struct TableSpec {
  int n = 0;
  VolumeProfileTable table;
};
using ManifoldSpec = std::variant<EuclideanSpec, ConeSpec, TableSpec>;

enum class ManifoldKind { Euclidean, Cone, Table };

struct ConstructOptions {
  /// Reject tables that break V <= omega_n rho^n or the monotonicity of
  /// V/rho^n. Validation front ends switch this off to report instead.
  bool enforce_bishop_gromov = true;
  double tolerance = 1e-12;
};

namespace detail {
struct TableModel;
}

/// Pole-centred radial model: everything is a function of the distance rho
/// to the pole. Immutable; copies share the table data.
class RadialManifold {
 public:
  int dimension() const noexcept { return n_; }
  ManifoldKind kind() const noexcept { return kind_; }
  /// Asymptotic volume ratio (exact for analytic kinds, fitted for tables).
  double avr() const noexcept { return avr_; }
  std::optional<double> tail_exponent_hint() const noexcept { return tail_hint_; }
  /// euclidean and cone models are genuine Ric >= 0 spaces; tables are only
  /// volumetrically checked, so results on them are diagnostic.
  bool is_diagnostic() const noexcept { return kind_ == ManifoldKind::Table; }
  std::string describe() const;

  double ball_volume(double rho) const;
  double area_density(double rho) const;
  /// V(rho) / (omega_n rho^n), tends to 1 at the pole and to avr() at infinity.
  double volume_ratio(double rho) const;
  /// A(rho) / rho^{n-1}; constant n omega_n theta on cones.
  double area_ratio(double rho) const;
  /// A'(rho) / A(rho), i.e. the Laplacian of the distance function.
  double log_area_derivative(double rho) const;
  /// Radii where A is only piecewise smooth (table knots); empty otherwise.
  const std::vector<double>& breakpoints() const noexcept;

  friend RadialManifold construct_manifold(const ManifoldSpec&, const ConstructOptions&);

 private:
  RadialManifold() = default;
  int n_ = 0;
  ManifoldKind kind_ = ManifoldKind::Euclidean;
  double theta_ = 1.0;
  double avr_ = 1.0;
  double omega_ = 0.0;
  std::optional<double> tail_hint_;
  std::shared_ptr<const detail::TableModel> table_;
};

RadialManifold construct_manifold(const ManifoldSpec& spec, const ConstructOptions& options = {});
RadialManifold euclidean(int n);
RadialManifold cone(int n, double theta);

double asymptotic_volume_ratio(const RadialManifold& m);

struct BishopGromovReport {
  bool passed = true;
  double tolerance = 0.0;
  /// max of V/(omega_n rho^n) - 1 over the grid (<= 0 when fine).
  double max_upper_violation = 0.0;
  double worst_upper_rho = 0.0;
  /// Largest increase of V/rho^n between consecutive grid points.
  double max_monotonicity_violation = 0.0;
  std::optional<std::pair<double, double>> violation_interval;
};

BishopGromovReport validate_bishop_gromov(const RadialManifold& m, const std::vector<double>& grid,
                                          double tolerance = 1e-10);

/// Default validation grid: geometric over the table range (or 1e-3..1e6).
std::vector<double> default_validation_grid(const RadialManifold& m, int count = 400);

/// integral over [0, inf) of phi(rho) A(rho) d rho.
IntegralResult radial_integral(const RadialManifold& m, const std::function<double(double)>& phi,
                               const TailClass& tail, QuadratureOptions options = {});

}  // namespace soblab
