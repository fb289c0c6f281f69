#pragma once

#include <limits>

namespace soblab {

/// Exponent data of an L^p-Sobolev or L^p-log-Sobolev problem in dimension n.
///
/// p = 1 is a separate case everywhere: it is stored exactly as 1.0 and the
/// conjugate exponent then holds +infinity. `p_star` is NaN whenever p >= n
/// (log-Sobolev parameters allow that range).
struct SobolevParams {
  int n = 0;
  double p = 0.0;
  double p_conj = 0.0;
  double p_star = std::numeric_limits<double>::quiet_NaN();

  bool is_p_one() const noexcept { return p == 1.0; }
};

/// Weighted (Caffarelli-Kohn-Nirenberg) exponent data; `k_ab` is the sharp
/// Euclidean constant of the weighted inequality.
struct CknParams {
  int n = 0;
  double a = 0.0;
  double b = 0.0;
  double q = 0.0;
  double k_ab = 0.0;

  /// a + 1 - b, the exponent that appears in the volume bound.
  double weight_gap() const noexcept { return a + 1.0 - b; }
};

/// Volume of the Euclidean unit ball, pi^{n/2} / Gamma(n/2 + 1).
double volume_unit_ball(int n);

/// Exponents for the Sobolev range 1 <= p < n.
SobolevParams sobolev_exponents(int n, double p);

/// Exponents for the log-Sobolev range p >= 1 (no upper bound on p).
SobolevParams log_sobolev_exponents(int n, double p);

/// Sharp Euclidean L^p-Sobolev constant AT(n, p).
double aubin_talenti(int n, double p);

/// Sharp Euclidean L^p-log-Sobolev constant L(n, p).
double log_sobolev_constant(int n, double p);

/// Admissibility of (a, b): 0 <= a < (n-2)/2 and a <= b < a + 1.
bool ckn_admissible(int n, double a, double b) noexcept;

CknParams ckn_constants(int n, double a, double b);

}  // namespace soblab
