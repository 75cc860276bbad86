#pragma once

#include <span>

#include "fkball/numerics.hpp"
#include "fkball/report.hpp"

namespace fkball::weights {

/// kappa t F[1, 1, 2 - n/2; 2, 1 + n/2; t] with kappa = (n - 1)(2 - n) / n,
/// so that Phi_n(r) = exp(exponent(n, r^2)) (1 - r^2)^(n - 1).
double log_phi_exponent(int n, double t);

/// d/dt of log_phi_exponent: kappa F[1, 2 - n/2; 1 + n/2; t].
double log_phi_exponent_derivative(int n, double t);

/// Phi_n(r) for r in [0, 1]; Phi_n(1) = 0.
double phi(int n, double r);

/// Explicit formulas for n = 2, 3, 4; DomainError otherwise.
double phi_closed_form(int n, double r);

struct LogPhiDerivatives {
  double value;
  double d1;
  double d2;
};

/// log Phi_n and its first two radial derivatives for r in (0, 1).
///   (log Phi)'  = 2 r (kappa G(t) - (n - 1) / (1 - t))
///   (log Phi)'' = 2 kappa (G + 2 t G') - 2 (n - 1)(1 + t) / (1 - t)^2
/// with t = r^2 and G = F[1, 2 - n/2; 1 + n/2; t].
LogPhiDerivatives log_phi_derivatives(int n, double r);

/// E_n = exp(kappa F[1, 1, 2 - n/2; 2, 1 + n/2; 1]), the lower sandwich
/// constant in E_n (1 - r^2)^(n-1) < Phi_n(r) <= (1 - r^2)^(n-1).
double sandwich_constant(int n);

/// max over the grid of |Delta_h log Phi_n + 4 (n - 1)^2|.
ResidualReport certify_weight_ode(int n, std::span<const double> grid,
                                  double tolerance = 1e-6);

/// Cubic Hermite table of log_phi_exponent in t, on nodes clustered toward
/// t = 1. Shared per dimension and built on first use (thread-safe).
class LogPhiTable {
 public:
  static const LogPhiTable& get(int n);

  /// Interpolated exponent; exact zero for n = 2.
  double exponent(double t) const;
  /// Phi_n^alpha(r) / (1 - r^2)^(alpha (n - 1)) = exp(alpha * exponent(t)).
  double weight_ratio(double alpha, double t) const;
  /// Phi_n^alpha(r) from t = r^2 and 1 - t.
  double phi_pow(double alpha, double t, double one_minus_t) const;

 private:
  explicit LogPhiTable(int n);

  int n_;
  numerics::HermiteTable table_;
};

/// n * int_a^b r^(n-1) Phi_n^alpha(r) (1 - r^2)^(-n) dr for 0 <= a < b <= 1,
/// computed in t = r^2 with exact endpoint distances. `tabulated` evaluates
/// Phi_n through LogPhiTable instead of the series.
double radial_mass(int n, double alpha, double a, double b,
                   const NumericsConfig& cfg = {}, bool tabulated = false);

/// c(alpha) = 1 / radial_mass(n, alpha, 0, 1).
double normalization(int n, double alpha, const NumericsConfig& cfg = {});

/// Dimension, exponent and the derived constants. Immutable.
class WeightParams {
 public:
  /// Throws DomainError unless n >= 2 and alpha > 1.
  WeightParams(int n, double alpha, const NumericsConfig& cfg = {});

  int n() const { return n_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double c_alpha() const { return c_alpha_; }

  /// int_B Phi_n^alpha dtau = 2^n omega_n / c(alpha) with omega_n the unit
  /// ball volume.
  double total_mass() const;

 private:
  int n_;
  double alpha_;
  double gamma_;
  double c_alpha_;
};

}  // namespace fkball::weights
