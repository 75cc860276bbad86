#pragma once

#include <span>
#include <vector>

#include "fkball/numerics.hpp"
#include "fkball/report.hpp"
#include "fkball/weights.hpp"

namespace fkball::bounds {

/// n = 2: theta(s) = 1 - (1 + s / (4 pi))^(1 - alpha).
double theta_closed_n2(double alpha, double s);

/// theta(s) = n c(alpha) int_0^v(s) r^(n-1) Phi_n^alpha (1 - r^2)^-n dr with a
/// cached table for fast queries.
///
/// Table nodes are 2048 log-spaced s in [1e-4, s_max], where s_max is found
/// by doubling from 10 until theta(s_max) >= 0.9999. Node values are cumulative
/// Gauss-Legendre segment integrals; interpolation is cubic Hermite in log s
/// with exact slopes.
class ThetaProfile {
 public:
  explicit ThetaProfile(const weights::WeightParams& params,
                        const NumericsConfig& cfg = {});

  const weights::WeightParams& params() const { return params_; }
  const NumericsConfig& config() const { return cfg_; }
  int n() const { return params_.n(); }

  /// Direct quadrature (used for all certification).
  double theta(double s) const;
  /// Table lookup; falls back to theta() outside the table.
  double theta_table(double s) const;

  /// theta'(s) = n c v^(n-1) Phi^alpha(v) (1 - v^2)^-n v'(s).
  double theta_prime(double s) const;
  /// theta''(s) / theta'(s) by differentiating the expression above.
  double theta_log_derivative(double s) const;

  /// T(x) = theta^-1(x) for x in [0, 1); DomainError otherwise.
  double inverse(double x) const;

  double s_min() const { return s_.front(); }
  double s_max() const { return s_.back(); }
  std::span<const double> s_nodes() const { return s_; }
  std::span<const double> v_nodes() const { return v_; }
  std::span<const double> theta_nodes() const { return theta_; }

 private:
  weights::WeightParams params_;
  NumericsConfig cfg_;
  std::vector<double> s_;
  std::vector<double> v_;
  std::vector<double> theta_;
  numerics::HermiteTable table_;  // theta against log s
};

double theta(const ThetaProfile& profile, double s);
double theta_inverse(const ThetaProfile& profile, double x);

/// |theta''/theta' + gamma Upsilon(s)| on the grid.
ResidualReport certify_theta_ode(const ThetaProfile& profile,
                                 std::span<const double> s_grid,
                                 double tolerance = 1e-5);

/// Relative residual of (log Phi_n)'(v) v' = -(n-1)^2 Upsilon, the right side
/// in its hypergeometric form and v' from the closed derivative formula.
ResidualReport certify_merk(int n, std::span<const double> v_grid,
                            double tolerance = 1e-7);

/// -((n-1) + (n+1) v^2) v' / (v (v^2 - 1)) + v''/v' = 0 with v' from the
/// closed formula and v'' by central differences of radius_from_volume.
ResidualReport certify_claim(int n, std::span<const double> s_grid,
                             double tolerance = 1e-4);

/// v'(s) closed form against central differences of radius_from_volume
/// (relative).
ResidualReport certify_radius_derivative(int n, std::span<const double> s_grid,
                                         double tolerance = 1e-6);

/// F[a,b,c,x] = (1-x)^(c-a-b) F[c-a,c-b,c,x] for the triples
/// (1, 2 - n/2, 1 + n/2) and (n/2, n, 1 + n/2), n = 2..6 (relative).
ResidualReport certify_euler(std::span<const double> x_grid,
                             double tolerance = 1e-10);

/// The Gamma identity behind the series expansion, m in [0, 20],
/// n in [3, 10] (relative).
ResidualReport certify_gamma_identity(double tolerance = 1e-10);

/// d/ds F[n/2, n, 1 + n/2, s] = n ((1 - s)^-n - F) / (2 s) against central
/// differences, n = 2..6 (relative).
ResidualReport certify_hyp_derivative(std::span<const double> s_grid,
                                      double tolerance = 1e-6);

}  // namespace fkball::bounds
