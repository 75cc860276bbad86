#include "fkball/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fkball/errors.hpp"
#include "fkball/numerics.hpp"
#include "fkball/specfun.hpp"

namespace fkball::geometry {
namespace {

constexpr double kPi = std::numbers::pi;

void require_inside(const Point& x, const char* what) {
  if (!(x.squaredNorm() < 1.0)) {
    throw DomainError(std::string(what) + ": point outside the unit ball");
  }
}

void require_dim(int n, const char* what) {
  if (n < 2) {
    throw DomainError(std::string(what) + ": dimension must be >= 2");
  }
}

// 1 - |x|^2 as (1 - |x|)(1 + |x|).
double one_minus_sq(const Point& x) {
  const double r = x.norm();
  return (1.0 - r) * (1.0 + r);
}

// [x, a]^2 = 1 - 2 <x, a> + |x|^2 |a|^2.
double bracket_sq(const Point& x, const Point& a) {
  return 1.0 - 2.0 * x.dot(a) + x.squaredNorm() * a.squaredNorm();
}

// Unit ball volume pi^(n/2) / Gamma(1 + n/2).
double unit_ball_volume(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(1.0 + 0.5 * n);
}

}  // namespace

double tau_density(const Point& x) {
  require_inside(x, "tau_density");
  const int n = static_cast<int>(x.size());
  return std::pow(2.0 / one_minus_sq(x), n);
}

MobiusMap::MobiusMap(Point a, Matrix q) : a_(std::move(a)), q_(std::move(q)) {
  const auto n = a_.size();
  if (n < 1 || q_.rows() != n || q_.cols() != n) {
    throw DomainError("MobiusMap: dimension mismatch");
  }
  if (!(a_.norm() < 1.0 - 1e-12)) {
    throw DomainError("MobiusMap: center must satisfy |a| < 1 - 1e-12");
  }
  const double orth = (q_.transpose() * q_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-12)) {
    throw DomainError("MobiusMap: rotation is not orthogonal");
  }
}

MobiusMap MobiusMap::identity(int n) {
  // sigma_0(x) = -x.
  return MobiusMap(Point::Zero(n), -Matrix::Identity(n, n));
}

MobiusMap MobiusMap::involution(const Point& a) {
  const auto n = a.size();
  return MobiusMap(a, Matrix::Identity(n, n));
}

MobiusMap MobiusMap::random(int n, double max_norm, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Matrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  const Point a = random_direction(n, rng) * (max_norm * unit(rng));
  return MobiusMap(a, q);
}

Point sigma(const Point& a, const Point& x) {
  const double denom = bracket_sq(x, a);
  const Point d = x - a;
  return (a * d.squaredNorm() + (1.0 - a.squaredNorm()) * (a - x)) / denom;
}

Point MobiusMap::operator()(const Point& x) const {
  require_inside(x, "MobiusMap");
  return q_ * sigma(a_, x);
}

Point MobiusMap::inverse(const Point& y) const {
  require_inside(y, "MobiusMap::inverse");
  return sigma(a_, q_.transpose() * y);
}

double MobiusMap::image_one_minus_norm_sq(const Point& x) const {
  return (1.0 - a_.squaredNorm()) * one_minus_sq(x) / bracket_sq(x, a_);
}

double MobiusMap::image_norm_sq(const Point& x) const {
  return sigma(a_, x).squaredNorm();
}

Point mobius_apply(const MobiusMap& m, const Point& x) { return m(x); }

double mobius_jacobian(const MobiusMap& m, const Point& x) {
  require_inside(x, "mobius_jacobian");
  const int n = m.dim();
  return std::pow((1.0 - m.center().squaredNorm()) / bracket_sq(x, m.center()), n);
}

double mobius_jacobian_fd(const MobiusMap& m, const Point& x, double h) {
  const int n = m.dim();
  Matrix jac(n, n);
  for (int j = 0; j < n; ++j) {
    const auto column = [&](double step) {
      Point xp = x;
      Point xm = x;
      xp(j) += step;
      xm(j) -= step;
      return Point((m(xp) - m(xm)) / (2.0 * step));
    };
    jac.col(j) = (4.0 * column(0.5 * h) - column(h)) / 3.0;
  }
  return jac.determinant();
}

double hyperbolic_distance(const Point& x, const Point& y) {
  require_inside(x, "hyperbolic_distance");
  require_inside(y, "hyperbolic_distance");
  return 2.0 * std::atanh(sigma(x, y).norm());
}

double laplacian_h_radial(int n, const RadialFunction& u, double r,
                          double fd_step) {
  if (!(r > 0.0 && r < 1.0)) {
    throw DomainError("laplacian_h_radial: r must lie in (0, 1)");
  }
  const double h = std::min({fd_step, 0.5 * r, 0.5 * (1.0 - r)});
  const double d1 = u.d1 ? u.d1(r) : numerics::derivative(u.value, r, h);
  const double d2 = u.d2 ? u.d2(r) : numerics::second_derivative(u.value, r, h);
  const double w = (1.0 - r) * (1.0 + r);
  return w * w * (d2 + (n - 1) * d1 / r) + 2.0 * (n - 2) * w * r * d1;
}

double laplacian_h_radial_origin(int n, const RadialFunction& u,
                                 double fd_step) {
  const double d2 = u.d2 ? u.d2(0.0) : numerics::second_derivative(u.value, 0.0, fd_step);
  return n * d2;
}

double laplacian_h_fd(const PointFunction& f, const Point& x, double h) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    for (double sgn : {-1.0, 1.0}) {
      Point p = x;
      p(i) += sgn * h;
      if (!(p.squaredNorm() < 1.0)) {
        throw StencilError("laplacian_h_fd: stencil point leaves the ball");
      }
    }
  }
  const double f0 = f(x);
  Point grad(n);
  double lap = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto eval = [&](double step) {
      Point p = x;
      p(i) += step;
      return f(p);
    };
    const double fp = eval(h), fm = eval(-h);
    const double fp2 = eval(0.5 * h), fm2 = eval(-0.5 * h);
    const double g1 = (fp - fm) / (2.0 * h);
    const double g2 = (fp2 - fm2) / h;
    grad(i) = (4.0 * g2 - g1) / 3.0;
    const double l1 = (fp - 2.0 * f0 + fm) / (h * h);
    const double l2 = (fp2 - 2.0 * f0 + fm2) / (0.25 * h * h);
    lap += (4.0 * l2 - l1) / 3.0;
  }
  const double w = one_minus_sq(x);
  return w * w * lap + 2.0 * (n - 2) * w * x.dot(grad);
}

double poisson_kernel(const Point& x, const Point& zeta) {
  require_inside(x, "poisson_kernel");
  if (std::abs(zeta.norm() - 1.0) > 1e-12) {
    throw DomainError("poisson_kernel: zeta must be a unit vector");
  }
  const int n = static_cast<int>(x.size());
  return std::pow(one_minus_sq(x) / (x - zeta).squaredNorm(), n - 1);
}

double ball_volume(int n, double r) {
  require_dim(n, "ball_volume");
  if (!(r >= 0.0 && r < 1.0)) {
    throw DomainError("ball_volume: r must lie in [0, 1)");
  }
  if (r == 0.0) return 0.0;
  const double x = r * r;
  const double c = 0.5 * n + 1.0;
  double f;
  if (x <= 0.5) {
    f = specfun::hyp2f1(0.5 * n, n, c, x);
  } else {
    const double w = (1.0 - r) * (1.0 + r);
    f = std::pow(w, 1 - n) * specfun::hyp2f1(1.0, 1.0 - 0.5 * n, c, x);
  }
  return std::pow(2.0, n) * unit_ball_volume(n) * f * std::pow(r, n);
}

double ball_perimeter(int n, double r) {
  require_dim(n, "ball_perimeter");
  if (!(r >= 0.0 && r < 1.0)) {
    throw DomainError("ball_perimeter: r must lie in [0, 1)");
  }
  const double w = (1.0 - r) * (1.0 + r);
  return std::pow(2.0, n) * std::pow(kPi, 0.5 * n) * std::pow(r, n - 1) *
         std::pow(w, 1 - n) / std::tgamma(0.5 * n);
}

double ball_volume_derivative(int n, double r) {
  const double w = (1.0 - r) * (1.0 + r);
  return 2.0 * ball_perimeter(n, r) / w;
}

double radius_from_volume(int n, double s) {
  require_dim(n, "radius_from_volume");
  if (!(s >= 0.0) || std::isinf(s)) {
    throw DomainError("radius_from_volume: s must be finite and >= 0");
  }
  if (s == 0.0) return 0.0;
  if (n == 2) {
    return std::sqrt(s / (4.0 * kPi + s));
  }
  // On B(r) the density lies between 2^n and 2^n (1 - r^2)^-n, so re bounds
  // the root from above and the solution of r / (1 - r^2) = re from below.
  const double re = std::pow(s / (std::pow(2.0, n) * unit_ball_volume(n)), 1.0 / n);
  const double r_lo = 2.0 * re / (1.0 + std::sqrt(1.0 + 4.0 * re * re));
  const double r_hi = std::min(re, std::nextafter(1.0, 0.0));
  // Newton runs in u = log(r^2 / (1 - r^2)), in which log V is close to
  // linear both for small and for large volumes.
  const auto to_u = [](double r) { return std::log(r * r / ((1.0 - r) * (1.0 + r))); };
  const auto to_r = [](double u) { return std::sqrt(1.0 / (1.0 + std::exp(-u))); };
  const double log_s = std::log(s);
  const auto f = [&](double u) { return std::log(ball_volume(n, to_r(u))) - log_s; };
  const auto df = [&](double u) {
    const double r = to_r(u);
    const double one_minus_t = 1.0 / (1.0 + std::exp(u));
    return ball_volume_derivative(n, r) / ball_volume(n, r) * 0.5 * r * one_minus_t;
  };
  const double u_hi = to_u(r_hi);
  const double u_lo = std::min(to_u(r_lo), u_hi);
  if (f(u_hi) < 0.0) {
    throw DomainError("radius_from_volume: s too large for double precision");
  }
  const double u = numerics::newton_bracketed(f, df, u_lo, u_hi, 0.5 * (u_lo + u_hi));
  return to_r(u);
}

double radius_derivative(int n, double s) {
  return 1.0 / ball_volume_derivative(n, radius_from_volume(n, s));
}

double isoperimetric_profile(int n, double s) {
  if (!(s > 0.0)) {
    throw DomainError("isoperimetric_profile: s must be positive");
  }
  const double p = ball_perimeter(n, radius_from_volume(n, s));
  return s / (p * p);
}

double isoperimetric_profile_closed(int n, double s) {
  if (!(s > 0.0)) {
    throw DomainError("isoperimetric_profile_closed: s must be positive");
  }
  const double v = radius_from_volume(n, s);
  const double x = v * v;
  const double w = (1.0 - v) * (1.0 + v);
  const double c = 0.5 * n + 1.0;
  // (1 - x)^(2n - 2) F[n/2, n, c, x], Euler-transformed when x > 1/2.
  double wf;
  if (x <= 0.5) {
    wf = std::pow(w, 2 * n - 2) * specfun::hyp2f1(0.5 * n, n, c, x);
  } else {
    wf = std::pow(w, n - 1) * specfun::hyp2f1(1.0, 1.0 - 0.5 * n, c, x);
  }
  return wf * std::tgamma(0.5 * n) /
         (n * std::pow(2.0, n - 1) * std::pow(kPi, 0.5 * n) * std::pow(v, n - 2));
}

bool HyperbolicBall::contains(const Point& x) const {
  return sigma(center, x).squaredNorm() < rho * rho;
}

double HyperbolicBall::measure() const {
  return ball_volume(static_cast<int>(center.size()), rho);
}

double HyperbolicBall::perimeter() const {
  return ball_perimeter(static_cast<int>(center.size()), rho);
}

bool BallUnion::contains(const Point& x) const {
  return std::any_of(balls.begin(), balls.end(),
                     [&](const HyperbolicBall& b) { return b.contains(x); });
}

double BallUnion::measure_if_disjoint() const {
  double s = 0.0;
  for (const auto& b : balls) s += b.measure();
  return s;
}

bool BallUnion::pairwise_disjoint() const {
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      const double d = hyperbolic_distance(balls[i].center, balls[j].center);
      const double ri = 2.0 * std::atanh(balls[i].rho);
      const double rj = 2.0 * std::atanh(balls[j].rho);
      if (d < ri + rj) return false;
    }
  }
  return true;
}

Estimate union_perimeter(const BallUnion& u, std::size_t samples_per_ball,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Estimate est;
  double var = 0.0;
  for (std::size_t i = 0; i < u.balls.size(); ++i) {
    const auto& b = u.balls[i];
    const int n = static_cast<int>(b.center.size());
    std::size_t exposed = 0;
    for (std::size_t k = 0; k < samples_per_ball; ++k) {
      const Point x = sigma(b.center, random_direction(n, rng) * b.rho);
      bool covered = false;
      for (std::size_t j = 0; j < u.balls.size() && !covered; ++j) {
        covered = j != i && u.balls[j].contains(x);
      }
      if (!covered) ++exposed;
    }
    const double p = static_cast<double>(exposed) / samples_per_ball;
    const double area = b.perimeter();
    est.value += area * p;
    var += area * area * p * (1.0 - p) / samples_per_ball;
  }
  est.error = std::sqrt(var);
  return est;
}

Estimate union_measure(const BallUnion& u, std::size_t samples_per_ball,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Estimate est;
  double var = 0.0;
  for (const auto& b : u.balls) {
    const int n = static_cast<int>(b.center.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < samples_per_ball; ++k) {
      const Point x = sigma(b.center, random_tau_uniform(n, b.rho, rng));
      int count = 0;
      for (const auto& other : u.balls) count += other.contains(x) ? 1 : 0;
      const double w = 1.0 / std::max(count, 1);
      sum += w;
      sum_sq += w * w;
    }
    const double mean = sum / samples_per_ball;
    const double v = std::max(0.0, sum_sq / samples_per_ball - mean * mean);
    const double s = b.measure();
    est.value += s * mean;
    var += s * s * v / samples_per_ball;
  }
  est.error = std::sqrt(var);
  return est;
}

Point random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Point g(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) g(i) = normal(rng);
    norm = g.norm();
  } while (norm < 1e-300);
  return g / norm;
}

Point random_tau_uniform(int n, double rho, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit;
  const double r = radius_from_volume(n, unit(rng) * ball_volume(n, rho));
  return random_direction(n, rng) * r;
}

}  // namespace fkball::geometry
