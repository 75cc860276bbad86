#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "fkball/report.hpp"

namespace fkball::wavelet {

/// P_n(t) = t^(n/2) K_(n/2)(t) for t > 0.
double p_n(int n, double t);
/// P_n(0) = 2^(n/2 - 1) Gamma(n/2).
double p_n_zero(int n);
/// P_n'(t) = -t^(n/2) K_(n/2 - 1)(t).
double p_n_derivative(int n, double t);
/// P_n''(t) = t^(n/2) K_(n/2 - 2)(t) - t^(n/2 - 1) K_(n/2 - 1)(t).
double p_n_second_derivative(int n, double t);
/// P_n''(0) = -2^(n/2 - 2) Gamma(n/2 - 1) from the t^2 coefficient of the
/// ascending series. DomainError for n = 2, where P_2''(t) -> -infinity.
double p_n_second_derivative_zero(int n);

enum class WindowKind {
  k_window,  // r^beta K_(n/2)(r), the admissible solution
  i_window,  // r^beta I_(n/2)(r), the second solution
  power,     // r^alpha_exp, the rejected degenerate case
};

/// Radial window profile r^beta Z_(n/2)(r); the weight is w(t) = t^-beta and
/// alpha_exp = n/2 - beta.
struct WindowSpec {
  int n = 2;
  double beta = 1.5;
  double alpha_exp = -0.5;
  bool admissible = true;  // beta > n/2

  /// Throws DomainError for n < 1.
  static WindowSpec make(int n, double beta);
};

struct WindowValue {
  double phi;
  double d1;
  double d2;
};

/// phi and its derivatives from Bessel recurrences
/// (K' = -(K_(nu-1) + K_(nu+1)) / 2, I' = (I_(nu-1) + I_(nu+1)) / 2) and the
/// product rule.
WindowValue window(const WindowSpec& spec, WindowKind kind, double r);

/// |(n a - a^2 + r^2) phi + (n - 1 - 2a) r phi' - r^2 phi''| divided by the
/// sum of the absolute values of the three terms (a = alpha_exp).
double ode_residual(const WindowSpec& spec, WindowKind kind, double r);

/// |r phi' - alpha_exp phi| / |phi| for the power window.
double power_first_order_residual(const WindowSpec& spec, double r);

/// ode_residual over n in `dims`, both Bessel windows and the r grid.
ResidualReport certify_window_ode(std::span<const int> dims, double beta_offset,
                                  std::span<const double> r_grid,
                                  double tolerance = 1e-8);

struct HalfSpacePoint {
  double y1;
  double t;
};

/// Function of the active horizontal coordinate y1 and the height t.
using HalfSpaceFunction = std::function<double(double y1, double t)>;

/// Richardson-extrapolated finite difference with an error estimate (the
/// change between two extrapolation levels plus a rounding bound).
struct FdValue {
  double value = 0.0;
  double error = 0.0;
};

struct HalfSpaceDerivatives {
  FdValue f_y;
  FdValue f_yy;
  FdValue f_t;
  FdValue f_tt;
};

/// Central differences at steps h, h/2, h/4 in each direction. `f_noise` is
/// an absolute bound on the evaluation error of F near p. Throws StencilError
/// if t - h_t <= 0.
HalfSpaceDerivatives halfspace_derivatives(const HalfSpaceFunction& F, HalfSpacePoint p,
                                           double h_y, double h_t, double f_noise = 0.0);

/// Delta_h F = t^2 F_y1y1 + t^2 F_tt - (n - 1) t F_t. The remaining horizontal
/// directions do not contribute since F depends on y1 only.
FdValue laplacian_h_halfspace(int n, const HalfSpaceFunction& F, HalfSpacePoint p,
                              double h_y, double h_t, double f_noise = 0.0);

/// u = P_n(t)^2 + P_n(2t)^2 - 2 P_n(t) P_n(2t) cos(y1); n = 1 gives the
/// exponential control case.
double theorem42_u(int n, double y1, double t);

struct UDerivatives {
  double u;
  double u_y;
  double u_yy;
  double u_t;
  double u_tt;
};

/// u and its partial derivatives in closed form.
UDerivatives theorem42_u_derivatives(int n, double y1, double t);

/// u Delta_h u / t^2 - (u_y^2 + u_t^2), closed form. Delta_h log u has the
/// sign of this expression.
double equivalence_form(int n, double y1, double t);

/// Delta_h log u in closed form: (t^2 / u^2) * equivalence_form.
double log_laplacian_closed(int n, double y1, double t);

/// 2 P0^2 (1 - cos y1) (10 (n - 2) P0 P''(0) (1 - cos y1) + 2 P0^2), with
/// (n - 2) P''(0) read as -1 when n = 2.
double theorem42_limit_expression(int n, double y1);

/// Largest y1_max in (0, pi] with the limit expression positive on (0, y1_max).
double limit_positivity_bound(int n);

struct WitnessSearch {
  double t_min = 1e-3;
  double t_max = 0.0;  // 0: 0.5 for n = 2, 0.3 otherwise
  std::size_t grid = 200;
  std::size_t refine_grid = 21;
  double margin_factor = 10.0;
  unsigned workers = 1;
};

struct WitnessReport {
  int n = 0;
  double y1 = 0.0;
  double t = 0.0;
  double fd_value = 0.0;        // Delta_h log u by finite differences
  double fd_error = 0.0;
  double closed_value = 0.0;    // same quantity in closed form
  double equivalence = 0.0;     // must be negative
  bool certified = false;       // fd_value < -margin_factor * fd_error and equivalence < 0
  std::size_t evaluated_points = 0;
};

/// Grid search (log-spaced t, linear y1 in (0, pi)) for the most negative
/// fd_value + margin_factor * fd_error, refined once around the best cell.
/// Ties go to the smallest (row, column) index. Throws NoWitnessFound when
/// no certified point exists.
WitnessReport find_negativity_witness(int n, const WitnessSearch& search = {});

struct ControlReport {
  double min_value = 0.0;        // most negative fd value on the grid
  double y1 = 0.0;
  double t = 0.0;
  double error_at_min = 0.0;
  double max_abs_closed = 0.0;   // max |Delta_h log u| in closed form
  bool witness_free = false;     // no point with value < -margin_factor * error
};

/// The n = 1 analogue on the n = 2 search grid.
ControlReport n1_control(const WitnessSearch& search = {});

/// Components of Delta_h u at small t against their t -> 0 limits, per y1:
/// Delta_y u -> 2 P0^2 cos y1, d_t u -> 0, d_t^2 u -> 10 P0 P''(0)(1 - cos y1)
/// (n > 2) or d_t^2 u - d_t u / t -> 10 P0 (1 - cos y1) (n = 2). Residuals
/// are relative to max(|limit|, P0^2 (1 - cos y1)); the zero limit of d_t u
/// is measured as t |d_t u| / u.
ResidualReport check_limits(int n, std::span<const double> y1_grid, double t = 1e-3,
                            double tolerance = 5e-2);

}  // namespace fkball::wavelet
