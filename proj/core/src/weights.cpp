#include "fkball/weights.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fkball/errors.hpp"
#include "fkball/geometry.hpp"
#include "fkball/specfun.hpp"

namespace fkball::weights {
namespace {

void require_dim(int n, const char* what) {
  if (n < 2) {
    throw DomainError(std::string(what) + ": dimension must be >= 2");
  }
}

double kappa(int n) { return (n - 1.0) * (2.0 - n) / n; }

specfun::HypParams32 phi_params(int n) {
  return {1.0, 1.0, 2.0 - 0.5 * n, 2.0, 1.0 + 0.5 * n};
}

// G(t) = F[1, 2 - n/2; 1 + n/2; t] and its derivative.
double g_series(int n, double t) {
  return specfun::hyp2f1(1.0, 2.0 - 0.5 * n, 1.0 + 0.5 * n, t);
}

double g_series_derivative(int n, double t) {
  const double c = 2.0 - 0.5 * n;
  const double v = 1.0 + 0.5 * n;
  if (c == 0.0) return 0.0;
  return c / v * specfun::hyp2f1(2.0, c + 1.0, v + 1.0, t);
}

constexpr int kTableCells = 2048;

}  // namespace

double log_phi_exponent(int n, double t) {
  require_dim(n, "log_phi_exponent");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("log_phi_exponent: t must lie in [0, 1]");
  }
  if (n == 2 || t == 0.0) return 0.0;
  return kappa(n) * t * specfun::hyp3f2(phi_params(n), t);
}

double log_phi_exponent_derivative(int n, double t) {
  require_dim(n, "log_phi_exponent_derivative");
  if (n == 2) return 0.0;
  return kappa(n) * g_series(n, t);
}

double phi(int n, double r) {
  require_dim(n, "phi");
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError("phi: r must lie in [0, 1]");
  }
  if (r == 1.0) return 0.0;
  const double w = (1.0 - r) * (1.0 + r);
  return std::exp(log_phi_exponent(n, r * r)) * std::pow(w, n - 1);
}

double phi_closed_form(int n, double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError("phi_closed_form: r must lie in [0, 1]");
  }
  const double w = (1.0 - r) * (1.0 + r);
  switch (n) {
    case 2:
      return w;
    case 3: {
      if (r == 0.0) return 1.0;
      if (r == 1.0) return 0.0;
      // log((1 - r) / (1 + r)) = -2 artanh(r)
      return std::exp(2.0 - 2.0 * (1.0 + r * r) * std::atanh(r) / r);
    }
    case 4:
      return std::exp(-1.5 * r * r) * w * w * w;
    default:
      throw DomainError("phi_closed_form: only n = 2, 3, 4 have explicit formulas");
  }
}

LogPhiDerivatives log_phi_derivatives(int n, double r) {
  require_dim(n, "log_phi_derivatives");
  if (!(r > 0.0 && r < 1.0)) {
    throw DomainError("log_phi_derivatives: r must lie in (0, 1)");
  }
  const double t = r * r;
  const double w = (1.0 - r) * (1.0 + r);
  const double k = kappa(n);
  LogPhiDerivatives d{};
  d.value = log_phi_exponent(n, t) + (n - 1) * std::log(w);
  if (n == 2) {
    d.d1 = -2.0 * r / w;
    d.d2 = -2.0 * (1.0 + t) / (w * w);
    return d;
  }
  const double g = g_series(n, t);
  const double dg = g_series_derivative(n, t);
  d.d1 = 2.0 * r * (k * g - (n - 1) / w);
  d.d2 = 2.0 * k * (g + 2.0 * t * dg) - 2.0 * (n - 1) * (1.0 + t) / (w * w);
  return d;
}

double sandwich_constant(int n) {
  require_dim(n, "sandwich_constant");
  return std::exp(log_phi_exponent(n, 1.0));
}

ResidualReport certify_weight_ode(int n, std::span<const double> grid,
                                  double tolerance) {
  ResidualReport rep;
  rep.name = "weight-ode n=" + std::to_string(n);
  rep.tolerance = tolerance;
  const double target = -4.0 * (n - 1.0) * (n - 1.0);
  for (double r : grid) {
    const LogPhiDerivatives d = log_phi_derivatives(n, r);
    geometry::RadialFunction u;
    u.value = [n](double x) { return std::log(phi(n, x)); };
    u.d1 = [&](double) { return d.d1; };
    u.d2 = [&](double) { return d.d2; };
    const double lap = geometry::laplacian_h_radial(n, u, r);
    rep.add(r, lap, target, std::abs(lap - target));
  }
  return rep;
}

LogPhiTable::LogPhiTable(int n) : n_(n) {
  if (n == 2) return;
  std::vector<double> x(kTableCells + 1), y(kTableCells + 1), dy(kTableCells + 1);
  for (int i = 0; i <= kTableCells; ++i) {
    const double u = 1.0 - static_cast<double>(i) / kTableCells;
    const double t = i == kTableCells ? 1.0 : 1.0 - u * u;
    x[i] = t;
    y[i] = log_phi_exponent(n, t);
    dy[i] = log_phi_exponent_derivative(n, t);
  }
  table_ = numerics::HermiteTable(std::move(x), std::move(y), std::move(dy));
}

const LogPhiTable& LogPhiTable::get(int n) {
  require_dim(n, "LogPhiTable");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<LogPhiTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot.reset(new LogPhiTable(n));
  return *slot;
}

double LogPhiTable::exponent(double t) const {
  if (n_ == 2) return 0.0;
  return table_(t);
}

double LogPhiTable::weight_ratio(double alpha, double t) const {
  return std::exp(alpha * exponent(t));
}

double LogPhiTable::phi_pow(double alpha, double t, double one_minus_t) const {
  if (one_minus_t <= 0.0) return 0.0;
  return std::exp(alpha * (exponent(t) + (n_ - 1) * std::log(one_minus_t)));
}

double radial_mass(int n, double alpha, double a, double b,
                   const NumericsConfig& cfg, bool tabulated) {
  require_dim(n, "radial_mass");
  if (!(0.0 <= a && a <= b && b <= 1.0)) {
    throw DomainError("radial_mass: need 0 <= a <= b <= 1");
  }
  if (a == b) return 0.0;
  const double p = alpha * (n - 1.0) - n;
  const double ta = a * a;
  const double tb = b * b;
  const double gap_b = (1.0 - b) * (1.0 + b);  // 1 - tb
  const LogPhiTable* table = tabulated ? &LogPhiTable::get(n) : nullptr;
  const numerics::QuadResult res = numerics::tanh_sinh(
      [&](const numerics::Node& node) {
        const double t = node.x;
        const double one_minus_t = gap_b + node.to_b;
        if (one_minus_t <= 0.0) return 0.0;
        const double e = table ? table->exponent(t) : log_phi_exponent(n, t);
        return std::pow(t, 0.5 * n - 1.0) *
               std::exp(alpha * e + p * std::log(one_minus_t));
      },
      ta, tb, cfg.quad_tol, cfg.quad_max_level);
  return 0.5 * n * res.value;
}

double normalization(int n, double alpha, const NumericsConfig& cfg) {
  if (!(alpha > 1.0)) {
    throw DomainError("normalization: alpha must exceed 1");
  }
  return 1.0 / radial_mass(n, alpha, 0.0, 1.0, cfg);
}

WeightParams::WeightParams(int n, double alpha, const NumericsConfig& cfg)
    : n_(n), alpha_(alpha), gamma_(alpha * (n - 1.0) * (n - 1.0)), c_alpha_(0.0) {
  require_dim(n, "WeightParams");
  if (!(alpha > 1.0)) {
    throw DomainError("WeightParams: alpha must exceed 1");
  }
  c_alpha_ = normalization(n, alpha, cfg);
}

double WeightParams::total_mass() const {
  const double omega = std::pow(std::numbers::pi, 0.5 * n_) / std::tgamma(1.0 + 0.5 * n_);
  return std::pow(2.0, n_) * omega / c_alpha_;
}

}  // namespace fkball::weights
