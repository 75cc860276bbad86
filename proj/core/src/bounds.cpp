#include "fkball/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fkball/errors.hpp"
#include "fkball/geometry.hpp"
#include "fkball/specfun.hpp"

namespace fkball::bounds {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNodes = 2048;
constexpr double kSMin = 1e-4;
constexpr int kSegmentOrder = 20;

// Closed form of v'(s) at radius v:
// 2^-n pi^(-n/2) v^(1-n) (1 - v^2)^n Gamma(1 + n/2) / n.
double radius_derivative_at(int n, double v) {
  const double w = (1.0 - v) * (1.0 + v);
  return std::pow(2.0, -n) * std::pow(kPi, -0.5 * n) * std::pow(v, 1 - n) *
         std::pow(w, n) * std::tgamma(1.0 + 0.5 * n) / n;
}

// (1 - x)^(2n - 2) F[n, n/2, 1 + n/2, x], Euler-transformed for x > 1/2.
double weighted_f(int n, double v) {
  const double x = v * v;
  const double w = (1.0 - v) * (1.0 + v);
  const double c = 1.0 + 0.5 * n;
  if (x <= 0.5) {
    return std::pow(w, 2 * n - 2) * specfun::hyp2f1(n, 0.5 * n, c, x);
  }
  return std::pow(w, n - 1) * specfun::hyp2f1(1.0 - 0.5 * n, 1.0, c, x);
}

double relative(double value, double reference) {
  const double scale = std::max(std::abs(reference), 1e-300);
  return std::abs(value - reference) / scale;
}

}  // namespace

double theta_closed_n2(double alpha, double s) {
  if (!(s >= 0.0)) {
    throw DomainError("theta_closed_n2: s must be >= 0");
  }
  return -std::expm1((1.0 - alpha) * std::log1p(s / (4.0 * kPi)));
}

ThetaProfile::ThetaProfile(const weights::WeightParams& params,
                           const NumericsConfig& cfg)
    : params_(params), cfg_(cfg) {
  const int n = params_.n();
  const double alpha = params_.alpha();
  const double c = params_.c_alpha();

  const auto tail = [&](double s) {
    const double v = geometry::radius_from_volume(n, s);
    return c * weights::radial_mass(n, alpha, v, 1.0, cfg_, true);
  };
  double s_top = 10.0;
  while (tail(s_top) > 1e-4) {
    s_top *= 2.0;
    if (s_top > 1e300) {
      throw NonConvergence("ThetaProfile: theta does not approach 1");
    }
  }

  s_.resize(kNodes);
  v_.resize(kNodes);
  theta_.resize(kNodes);
  std::vector<double> log_s(kNodes), slope(kNodes);
  const double step = std::log(s_top / kSMin) / (kNodes - 1);
  for (int i = 0; i < kNodes; ++i) {
    s_[i] = i == kNodes - 1 ? s_top : kSMin * std::exp(step * i);
    v_[i] = geometry::radius_from_volume(n, s_[i]);
    log_s[i] = std::log(s_[i]);
  }

  const weights::LogPhiTable& table = weights::LogPhiTable::get(n);
  const numerics::GaussLegendre& rule = numerics::gauss_legendre(kSegmentOrder);
  const double p = alpha * (n - 1.0) - n;
  theta_[0] = theta(s_[0]);
  for (int i = 1; i < kNodes; ++i) {
    const double ta = v_[i - 1] * v_[i - 1];
    const double tb = v_[i] * v_[i];
    const double gap_b = (1.0 - v_[i]) * (1.0 + v_[i]);
    const double half = 0.5 * (tb - ta);
    double sum = 0.0;
    for (int k = 0; k < kSegmentOrder; ++k) {
      const double to_b = half * (1.0 - rule.nodes[k]);
      const double t = tb - to_b;
      const double one_minus_t = gap_b + to_b;
      sum += rule.weights[k] * std::pow(t, 0.5 * n - 1.0) *
             std::exp(alpha * table.exponent(t) + p * std::log(one_minus_t));
    }
    theta_[i] = theta_[i - 1] + c * 0.5 * n * half * sum;
  }
  for (int i = 0; i < kNodes; ++i) {
    slope[i] = s_[i] * theta_prime(s_[i]);
  }
  table_ = numerics::HermiteTable(std::move(log_s), theta_, std::move(slope));
}

double ThetaProfile::theta(double s) const {
  if (!(s >= 0.0)) {
    throw DomainError("theta: s must be >= 0");
  }
  if (s == 0.0) return 0.0;
  if (std::isinf(s)) return 1.0;
  const int n = params_.n();
  const double alpha = params_.alpha();
  const double c = params_.c_alpha();
  const double v = geometry::radius_from_volume(n, s);
  const double lower = c * weights::radial_mass(n, alpha, 0.0, v, cfg_);
  if (lower <= 0.5) return lower;
  return 1.0 - c * weights::radial_mass(n, alpha, v, 1.0, cfg_);
}

double ThetaProfile::theta_table(double s) const {
  if (!(s >= s_.front() && s <= s_.back())) return theta(s);
  return table_(std::log(s));
}

double ThetaProfile::theta_prime(double s) const {
  if (!(s > 0.0)) {
    throw DomainError("theta_prime: s must be positive");
  }
  const int n = params_.n();
  const double v = geometry::radius_from_volume(n, s);
  const double w = (1.0 - v) * (1.0 + v);
  const double log_phi = weights::log_phi_derivatives(n, v).value;
  return n * params_.c_alpha() * std::pow(v, n - 1) *
         std::exp(params_.alpha() * log_phi - n * std::log(w)) *
         radius_derivative_at(n, v);
}

double ThetaProfile::theta_log_derivative(double s) const {
  if (!(s > 0.0)) {
    throw DomainError("theta_log_derivative: s must be positive");
  }
  const int n = params_.n();
  const double v = geometry::radius_from_volume(n, s);
  const double w = (1.0 - v) * (1.0 + v);
  const double vp = radius_derivative_at(n, v);
  const double dlog_phi = weights::log_phi_derivatives(n, v).d1;
  const double vpp_over_vp = -((n - 1.0) + (n + 1.0) * v * v) * vp / (v * w);
  return vp * ((n - 1.0) / v + params_.alpha() * dlog_phi + 2.0 * n * v / w) +
         vpp_over_vp;
}

double ThetaProfile::inverse(double x) const {
  if (!(x >= 0.0 && x < 1.0)) {
    throw DomainError("theta_inverse: x must lie in [0, 1)");
  }
  if (x == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 0.0;
  if (x < theta_.front()) {
    hi = s_.front();
  } else if (x <= theta_.back()) {
    const auto it = std::lower_bound(theta_.begin(), theta_.end(), x);
    const auto i = static_cast<std::size_t>(it - theta_.begin());
    lo = i == 0 ? 0.0 : s_[i - 1];
    hi = s_[std::min(i, s_.size() - 1)];
    // The table and direct quadrature differ by rounding; widen by a node.
    if (i >= 2) lo = s_[i - 2];
    if (i + 1 < s_.size()) hi = s_[i + 1];
  } else {
    lo = s_.back();
    hi = 2.0 * lo;
    while (theta(hi) < x) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) {
        throw NonConvergence("theta_inverse: x too close to 1");
      }
    }
  }
  const auto f = [&](double s) { return theta(s) - x; };
  const auto df = [&](double s) { return s > 0.0 ? theta_prime(s) : 1.0; };
  return numerics::newton_bracketed(f, df, lo, hi, 0.5 * (lo + hi), 100);
}

double theta(const ThetaProfile& profile, double s) { return profile.theta(s); }

double theta_inverse(const ThetaProfile& profile, double x) {
  return profile.inverse(x);
}

ResidualReport certify_theta_ode(const ThetaProfile& profile,
                                 std::span<const double> s_grid,
                                 double tolerance) {
  ResidualReport rep;
  rep.name = "theta-ode n=" + std::to_string(profile.n()) +
             " alpha=" + std::to_string(profile.params().alpha());
  rep.tolerance = tolerance;
  const double gamma = profile.params().gamma();
  for (double s : s_grid) {
    const double lhs = profile.theta_log_derivative(s);
    const double rhs = -gamma * geometry::isoperimetric_profile(profile.n(), s);
    rep.add(s, lhs, rhs, std::abs(lhs - rhs));
  }
  return rep;
}

ResidualReport certify_merk(int n, std::span<const double> v_grid,
                            double tolerance) {
  ResidualReport rep;
  rep.name = "merk n=" + std::to_string(n);
  rep.tolerance = tolerance;
  for (double v : v_grid) {
    const double s = geometry::ball_volume(n, v);
    const double vs = geometry::radius_from_volume(n, s);
    const double lhs = weights::log_phi_derivatives(n, vs).d1 * radius_derivative_at(n, vs);
    const double rhs = -(n - 1.0) * (n - 1.0) * std::tgamma(0.5 * n) * weighted_f(n, vs) /
                       (n * std::pow(2.0, n - 1) * std::pow(kPi, 0.5 * n) *
                        std::pow(vs, n - 2));
    rep.add(v, lhs, rhs, relative(lhs, rhs));
  }
  return rep;
}

ResidualReport certify_claim(int n, std::span<const double> s_grid,
                             double tolerance) {
  ResidualReport rep;
  rep.name = "claim n=" + std::to_string(n);
  rep.tolerance = tolerance;
  for (double s : s_grid) {
    const double v = geometry::radius_from_volume(n, s);
    const double vp = radius_derivative_at(n, v);
    const double h = 1e-3 * s;
    const auto radius = [n](double x) { return geometry::radius_from_volume(n, x); };
    const double vpp = numerics::second_derivative(radius, s, h);
    const double first = -((n - 1.0) + (n + 1.0) * v * v) * vp / (v * (v * v - 1.0));
    const double value = first + vpp / vp;
    rep.add(s, value, 0.0, std::abs(value));
  }
  return rep;
}

ResidualReport certify_radius_derivative(int n, std::span<const double> s_grid,
                                         double tolerance) {
  ResidualReport rep;
  rep.name = "radius-derivative n=" + std::to_string(n);
  rep.tolerance = tolerance;
  for (double s : s_grid) {
    const double v = geometry::radius_from_volume(n, s);
    const double closed = radius_derivative_at(n, v);
    const auto radius = [n](double x) { return geometry::radius_from_volume(n, x); };
    const double fd = numerics::derivative(radius, s, 1e-3 * s);
    rep.add(s, fd, closed, relative(fd, closed));
  }
  return rep;
}

ResidualReport certify_euler(std::span<const double> x_grid, double tolerance) {
  ResidualReport rep;
  rep.name = "euler";
  rep.tolerance = tolerance;
  for (int n = 2; n <= 6; ++n) {
    const double triples[2][3] = {{1.0, 2.0 - 0.5 * n, 1.0 + 0.5 * n},
                                  {0.5 * n, static_cast<double>(n), 1.0 + 0.5 * n}};
    for (const auto& p : triples) {
      const double a = p[0], b = p[1], c = p[2];
      for (double x : x_grid) {
        const double lhs = specfun::hyp2f1(a, b, c, x);
        const double rhs = std::pow(1.0 - x, c - a - b) * specfun::hyp2f1(c - a, c - b, c, x);
        rep.add(x, lhs, rhs, relative(lhs, rhs));
      }
    }
  }
  return rep;
}

ResidualReport certify_gamma_identity(double tolerance) {
  ResidualReport rep;
  rep.name = "gamma-identity";
  rep.tolerance = tolerance;
  for (int n = 3; n <= 10; ++n) {
    for (int m = 0; m <= 20; ++m) {
      const double g = std::tgamma(m + n - 1.0);
      const double f = std::tgamma(1.0 + m);
      const double lhs = 2.0 * g / ((2.0 * m + n) * f * std::tgamma(n - 2.0)) +
                         2.0 * g / (f * std::tgamma(n - 1.0));
      const double rhs = 4.0 * std::tgamma(m + n + 0.0) /
                         ((2.0 * m + n) * f * std::tgamma(n - 1.0));
      rep.add(100.0 * n + m, lhs, rhs, relative(lhs, rhs));
    }
  }
  return rep;
}

ResidualReport certify_hyp_derivative(std::span<const double> s_grid,
                                      double tolerance) {
  ResidualReport rep;
  rep.name = "hyp-derivative";
  rep.tolerance = tolerance;
  for (int n = 2; n <= 6; ++n) {
    const auto f = [n](double x) {
      return specfun::hyp2f1(0.5 * n, n, 1.0 + 0.5 * n, x);
    };
    for (double s : s_grid) {
      const double fd = numerics::derivative(f, s, 1e-4);
      const double closed = n * (std::pow(1.0 - s, -n) - f(s)) / (2.0 * s);
      rep.add(s, fd, closed, relative(fd, closed));
    }
  }
  return rep;
}

}  // namespace fkball::bounds
