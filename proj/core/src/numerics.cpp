#include "fkball/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <limits>
#include <string>

#include "fkball/errors.hpp"

namespace fkball {

void SeriesTolerance::validate() const {
  if (!(rel_eps > 0.0)) {
    throw std::invalid_argument("SeriesTolerance: rel_eps must be positive");
  }
  if (max_terms < 16) {
    throw std::invalid_argument("SeriesTolerance: max_terms must be >= 16");
  }
  if (tail_switch < 16) {
    throw std::invalid_argument("SeriesTolerance: tail_switch must be >= 16");
  }
}

namespace numerics {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Sum of the tanh-sinh contributions at abscissae t = k h for the given k
// (k odd only when `odd_only`). Returns the weighted sum without the factor h.
double tanh_sinh_sweep(const NodeFunction& f, double a, double b, double h,
                       bool odd_only, std::size_t& evaluations) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  if (!odd_only) {
    ++evaluations;
    sum += half * kHalfPi * f(Node{mid, half, half});
  }
  const int step = odd_only ? 2 : 1;
  for (int k = 1;; k += step) {
    const double t = k * h;
    const double u = kHalfPi * std::sinh(t);
    const double e = std::exp(-2.0 * u);
    // Distance of the node from the nearer endpoint: (b - a) e / (1 + e).
    const double near = (b - a) * e / (1.0 + e);
    if (near <= (b - a) * 1e-300 || !std::isfinite(u)) {
      break;
    }
    const double ch = std::cosh(u);
    const double w = half * kHalfPi * std::cosh(t) / (ch * ch);
    if (w < 1e-300) {
      break;
    }
    const double far = (b - a) - near;
    const Node right{b - near, far, near};
    const Node left{a + near, near, far};
    const double fr = f(right);
    const double fl = f(left);
    evaluations += 2;
    sum += w * (fr + fl);
  }
  return sum;
}

}  // namespace

QuadResult tanh_sinh(const NodeFunction& f, double a, double b, double tol,
                     int max_level, bool throw_on_failure) {
  QuadResult res;
  if (a == b) {
    return res;
  }
  if (b < a) {
    QuadResult r = tanh_sinh(
        [&](const Node& n) { return f(Node{n.x, -n.to_b, -n.from_a}); }, b, a,
        tol, max_level, throw_on_failure);
    r.value = -r.value;
    return r;
  }
  double h = 1.0;
  double sum = tanh_sinh_sweep(f, a, b, h, false, res.evaluations);
  double prev = sum * h;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    sum += tanh_sinh_sweep(f, a, b, h, true, res.evaluations);
    const double cur = sum * h;
    res.value = cur;
    res.error = std::abs(cur - prev);
    res.level = level;
    if (level >= 3 && res.error <= tol * std::abs(cur)) {
      return res;
    }
    if (level >= 3 && cur == 0.0 && prev == 0.0) {
      return res;
    }
    prev = cur;
  }
  if (throw_on_failure) {
    throw QuadratureFailure("tanh-sinh did not stabilise: relative change " +
                            std::to_string(res.error / std::abs(res.value)));
  }
  return res;
}

double tanh_sinh_fixed(const NodeFunction& f, double a, double b, int level) {
  std::size_t evals = 0;
  double h = 1.0;
  double sum = tanh_sinh_sweep(f, a, b, h, false, evals);
  for (int l = 1; l <= level; ++l) {
    h *= 0.5;
    sum += tanh_sinh_sweep(f, a, b, h, true, evals);
  }
  return sum * h;
}

QuadResult tanh_sinh_semi_infinite(const std::function<double(double)>& f,
                                   double a, double tol, int max_level) {
  return tanh_sinh(
      [&](const Node& n) {
        const double one_minus_u = n.to_b;
        if (one_minus_u <= 0.0) {
          return 0.0;
        }
        const double v = f(a + n.x / one_minus_u);
        return v == 0.0 ? 0.0 : v / one_minus_u / one_minus_u;
      },
      0.0, 1.0, tol, max_level);
}

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  if (order < 1) {
    throw std::invalid_argument("gauss_legendre: order must be >= 1");
  }
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) {
    return it->second;
  }
  GaussLegendre rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        break;
      }
    }
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double integrate_gauss_legendre(const std::function<double(double)>& f,
                                double a, double b, int order) {
  const GaussLegendre& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

double derivative(const std::function<double(double)>& f, double x, double h) {
  const auto central = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

double second_derivative(const std::function<double(double)>& f, double x,
                         double h) {
  const double f0 = f(x);
  const auto central = [&](double s) {
    return (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s);
  };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y,
                           std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
  if (x_.size() < 2 || y_.size() != x_.size() || dy_.size() != x_.size()) {
    throw std::invalid_argument("HermiteTable: need >= 2 matching nodes");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("HermiteTable: abscissae must increase");
    }
  }
}

std::size_t HermiteTable::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double HermiteTable::operator()(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
}

double HermiteTable::derivative(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * y_[i] + d10 * dy_[i] + d01 * y_[i + 1] + d11 * dy_[i + 1];
}

double newton_bracketed(const std::function<double(double)>& f,
                        const std::function<double(double)>& df, double lo,
                        double hi, double x0, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw std::invalid_argument("newton_bracketed: root not bracketed");
  }
  if (flo > 0) {
    std::swap(lo, hi);
  }
  double x = std::clamp(x0, std::min(lo, hi), std::max(lo, hi));
  for (int iter = 0; iter < max_iter; ++iter) {
    const double fx = f(x);
    if (fx == 0.0) {
      return x;
    }
    if (fx < 0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = df(x);
    double next = x - fx / d;
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    if (!(next > a && next < b) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x || std::abs(b - a) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      return next;
    }
    if (std::abs(next - x) <= 0.5 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace numerics
}  // namespace fkball
