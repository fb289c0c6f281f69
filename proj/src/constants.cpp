#include "soblab/constants.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "soblab/errors.hpp"

namespace soblab {
namespace {

void require_dimension(int n, int min_n) {
  if (n < min_n) {
    throw Error(ErrorKind::InvalidDimension,
                "dimension n=" + std::to_string(n) + " must be at least " + std::to_string(min_n));
  }
}

double log_volume_unit_ball(int n) {
  const double half_n = 0.5 * n;
  return half_n * std::log(std::numbers::pi) - std::lgamma(half_n + 1.0);
}

}  // namespace

double volume_unit_ball(int n) {
  require_dimension(n, 1);
  return std::exp(log_volume_unit_ball(n));
}

SobolevParams sobolev_exponents(int n, double p) {
  require_dimension(n, 2);
  if (!(p >= 1.0) || !(p < n)) {
    throw Error(ErrorKind::ExponentOutOfRange,
                "Sobolev exponent p=" + std::to_string(p) + " must satisfy 1 <= p < n=" +
                    std::to_string(n));
  }
  SobolevParams params = log_sobolev_exponents(n, p);
  params.p_star = p * n / (n - p);
  return params;
}

SobolevParams log_sobolev_exponents(int n, double p) {
  require_dimension(n, 2);
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::ExponentOutOfRange,
                "exponent p=" + std::to_string(p) + " must satisfy p >= 1");
  }
  SobolevParams params;
  params.n = n;
  params.p = p;
  params.p_conj = (p == 1.0) ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
  if (p < n) params.p_star = p * n / (n - p);
  return params;
}

double aubin_talenti(int n, double p) {
  const SobolevParams params = sobolev_exponents(n, p);
  const double dn = n;
  if (params.is_p_one()) {
    return std::exp(-std::log(dn) - log_volume_unit_ball(n) / dn);
  }
  const double pc = params.p_conj;
  const double log_gamma_part = std::lgamma(1.0 + 0.5 * dn) + std::lgamma(dn) -
                                std::lgamma(dn / p) - std::lgamma(1.0 + dn / pc);
  const double log_value = -0.5 * std::log(std::numbers::pi) - std::log(dn) / p +
                           std::log((p - 1.0) / (dn - p)) / pc + log_gamma_part / dn;
  return std::exp(log_value);
}

double log_sobolev_constant(int n, double p) {
  const SobolevParams params = log_sobolev_exponents(n, p);
  const double dn = n;
  if (params.is_p_one()) {
    return std::exp(-std::log(dn) - log_volume_unit_ball(n) / dn);
  }
  const double pc = params.p_conj;
  // (p-1)^{p-1} is evaluated as exp((p-1) log(p-1)), which tends to 1 as p -> 1.
  const double log_value = std::log(p / dn) + (p - 1.0) * (std::log(p - 1.0) - 1.0) -
                           (p / dn) * (log_volume_unit_ball(n) + std::lgamma(dn / pc + 1.0));
  return std::exp(log_value);
}

bool ckn_admissible(int n, double a, double b) noexcept {
  return n >= 3 && a >= 0.0 && a < 0.5 * (n - 2) && b >= a && b < a + 1.0;
}

CknParams ckn_constants(int n, double a, double b) {
  require_dimension(n, 3);
  if (!ckn_admissible(n, a, b)) {
    throw Error(ErrorKind::ParameterDomain,
                "weights (a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                    ") violate 0 <= a < (n-2)/2, a <= b < a+1");
  }
  const double dn = n;
  CknParams out;
  out.n = n;
  out.a = a;
  out.b = b;
  out.q = 2.0 * dn / (dn - 2.0 + 2.0 * (b - a));
  const double gap = out.weight_gap();
  const double bq = b * out.q;
  const double log_inner = std::log((2.0 - bq + 2.0 * a) / dn) - log_volume_unit_ball(n) +
                           std::lgamma(dn / gap) - 2.0 * std::lgamma(dn / (2.0 * gap));
  const double log_value =
      -0.5 * std::log((dn - 2.0 * a - 2.0) * (dn - bq)) + (gap / dn) * log_inner;
  out.k_ab = std::exp(log_value);
  return out;
}

}  // namespace soblab
