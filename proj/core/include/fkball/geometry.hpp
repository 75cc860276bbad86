#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace fkball::geometry {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Density of the invariant measure, 2^n / (1 - |x|^2)^n.
double tau_density(const Point& x);

/// Moebius self-map x -> Q sigma_a(x) of the unit ball, where sigma_a is the
/// involution exchanging 0 and a.
class MobiusMap {
 public:
  /// Throws DomainError unless |a| < 1 - 1e-12 and Q^T Q = I to 1e-12.
  MobiusMap(Point a, Matrix q);

  static MobiusMap identity(int n);
  /// Involution sigma_a (Q = I).
  static MobiusMap involution(const Point& a);
  /// Center uniform in direction with |a| uniform in [0, max_norm]; Q Haar
  /// distributed (QR of a Gaussian matrix with sign correction).
  static MobiusMap random(int n, double max_norm, std::mt19937_64& rng);

  int dim() const { return static_cast<int>(a_.size()); }
  const Point& center() const { return a_; }
  const Matrix& rotation() const { return q_; }

  Point operator()(const Point& x) const;
  Point inverse(const Point& y) const;
  /// |m(x)|^2 and 1 - |m(x)|^2 without forming m(x); both only depend on a.
  double image_norm_sq(const Point& x) const;
  double image_one_minus_norm_sq(const Point& x) const;

 private:
  Point a_;
  Matrix q_;
};

/// The involution sigma_a(x).
Point sigma(const Point& a, const Point& x);

Point mobius_apply(const MobiusMap& m, const Point& x);

/// Jacobian determinant (1 - |m(x)|^2)^n / (1 - |x|^2)^n.
double mobius_jacobian(const MobiusMap& m, const Point& x);

/// Signed determinant of the finite-difference Jacobian matrix of m at x.
double mobius_jacobian_fd(const MobiusMap& m, const Point& x, double h = 1e-5);

/// Hyperbolic distance 2 artanh |sigma_x(y)|.
double hyperbolic_distance(const Point& x, const Point& y);

/// Radial function on [0, 1) with optional exact derivatives. Missing
/// derivatives are replaced by Richardson-extrapolated central differences.
struct RadialFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

/// (1 - r^2)^2 (u'' + (n - 1) u' / r) + 2 (n - 2)(1 - r^2) r u'.
/// Throws DomainError for r <= 0 or r >= 1; see laplacian_h_radial_origin.
double laplacian_h_radial(int n, const RadialFunction& u, double r,
                          double fd_step = 1e-3);

/// Limit r -> 0 of the radial Laplacian: n u''(0).
double laplacian_h_radial_origin(int n, const RadialFunction& u,
                                 double fd_step = 1e-3);

using PointFunction = std::function<double(const Point&)>;

/// Hyperbolic Laplacian from central differences on the 2n + 1 point stencil,
/// one Richardson step (steps h and h / 2). Throws StencilError if a stencil
/// point leaves the ball.
double laplacian_h_fd(const PointFunction& f, const Point& x, double h);

/// Poisson kernel (1 - |x|^2)^(n-1) / |x - zeta|^(2n-2).
double poisson_kernel(const Point& x, const Point& zeta);

/// Hyperbolic volume of the centered ball of Euclidean radius r.
double ball_volume(int n, double r);

/// Hyperbolic surface measure of its boundary,
/// 2^n pi^(n/2) r^(n-1) (1 - r^2)^(1-n) / Gamma(n/2).
double ball_perimeter(int n, double r);

/// dV/dr = 2 P(r) / (1 - r^2).
double ball_volume_derivative(int n, double r);

/// Inverse of ball_volume; Newton on log V with a bracket.
double radius_from_volume(int n, double s);

/// v'(s) = 1 / V'(v(s)).
double radius_derivative(int n, double s);

/// s / P(v(s))^2.
double isoperimetric_profile(int n, double s);

/// Same quantity through the hypergeometric closed expression.
double isoperimetric_profile_closed(int n, double s);

/// Hyperbolic ball sigma_a(B(rho)): all points at hyperbolic distance
/// < 2 artanh(rho) from a.
struct HyperbolicBall {
  Point center;
  double rho = 0.0;  // Euclidean radius of the centered copy

  bool contains(const Point& x) const;
  double measure() const;
  double perimeter() const;
};

/// Union of hyperbolic balls.
struct BallUnion {
  std::vector<HyperbolicBall> balls;

  bool contains(const Point& x) const;
  /// Sum of the measures; exact when the balls are pairwise disjoint.
  double measure_if_disjoint() const;
  bool pairwise_disjoint() const;
};

/// Monte Carlo value with one standard error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Perimeter of a union by sampling each sphere with the invariant surface
/// measure and keeping the fraction not covered by the other balls.
Estimate union_perimeter(const BallUnion& u, std::size_t samples_per_ball,
                         std::uint64_t seed);

/// Measure of a union: each ball is sampled uniformly in tau, and a point
/// of ball i counts 1 / (number of balls containing it).
Estimate union_measure(const BallUnion& u, std::size_t samples_per_ball,
                       std::uint64_t seed);

/// Uniform direction on the unit sphere S^(n-1).
Point random_direction(int n, std::mt19937_64& rng);

/// Point of B(rho) distributed uniformly with respect to tau.
Point random_tau_uniform(int n, double rho, std::mt19937_64& rng);

}  // namespace fkball::geometry
