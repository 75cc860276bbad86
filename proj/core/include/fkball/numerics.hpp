#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fkball {

/// Controls for truncated power series.
///
/// Summation stops once |term| < rel_eps * |partial sum| holds for three
/// consecutive terms. When `accelerate_tail` is set, series that are still
/// running after `tail_switch` terms get their remainder from an
/// Euler-Maclaurin estimate instead of being summed to `max_terms`.
struct SeriesTolerance {
  double rel_eps = 1e-17;
  int max_terms = 200000;
  bool accelerate_tail = true;
  int tail_switch = 512;

  /// Throws std::invalid_argument unless rel_eps > 0 and max_terms >= 16.
  void validate() const;
};

struct NumericsConfig {
  int quad_max_level = 9;     // tanh-sinh halvings of the step h = 1
  double quad_tol = 1e-14;    // relative change between successive levels
  SeriesTolerance series{};
  double fd_step = 1e-3;
  std::uint64_t seed = 20240611;
  std::size_t samples = 20000;
  unsigned workers = 1;
};

namespace numerics {

/// A quadrature abscissa together with its distances to both endpoints,
/// computed without cancellation.
struct Node {
  double x;
  double from_a;  // x - a
  double to_b;    // b - x
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // |I(level) - I(level - 1)|
  int level = 0;
  std::size_t evaluations = 0;
};

using NodeFunction = std::function<double(const Node&)>;

/// Double-exponential (tanh-sinh) rule on [a, b].
///
/// Handles integrable algebraic singularities at either endpoint; the
/// integrand receives the endpoint distances so that it can form (1 - r)
/// or (1 - r^2) accurately near r = 1. Refines from h = 1 until the relative
/// change drops below `tol` or `max_level` is reached; throws
/// QuadratureFailure in the latter case when `throw_on_failure` is set.
QuadResult tanh_sinh(const NodeFunction& f, double a, double b, double tol,
                     int max_level, bool throw_on_failure = true);

/// Same rule at a fixed refinement level (no convergence test).
double tanh_sinh_fixed(const NodeFunction& f, double a, double b, int level);

/// Integral over [a, +inf) through x = a + u / (1 - u).
QuadResult tanh_sinh_semi_infinite(const std::function<double(double)>& f,
                                   double a, double tol, int max_level);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rules are computed once per order and cached (thread-safe).
const GaussLegendre& gauss_legendre(int order);

double integrate_gauss_legendre(const std::function<double(double)>& f,
                                double a, double b, int order);

/// Central differences with one Richardson step (error O(h^4)).
double derivative(const std::function<double(double)>& f, double x, double h);
double second_derivative(const std::function<double(double)>& f, double x,
                         double h);

/// Piecewise cubic Hermite interpolant on strictly increasing abscissae with
/// caller-supplied slopes.
class HermiteTable {
 public:
  HermiteTable() = default;
  HermiteTable(std::vector<double> x, std::vector<double> y,
               std::vector<double> dy);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::span<const double> dy() const { return dy_; }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

/// Safeguarded Newton iteration for f(x) = 0 on a bracket [lo, hi] with
/// f(lo) and f(hi) of opposite sign. Falls back to bisection whenever the
/// Newton step leaves the bracket. Iterates until the bracket or step is at
/// the level of rounding.
double newton_bracketed(const std::function<double(double)>& f,
                        const std::function<double(double)>& df, double lo,
                        double hi, double x0, int max_iter = 200);

}  // namespace numerics
}  // namespace fkball
