#include "fkball/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fkball/errors.hpp"
#include "fkball/specfun.hpp"
#include "parallel.hpp"

namespace fkball::wavelet {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_positive(double t, const char* what) {
  if (!(t > 0.0)) throw DomainError(std::string(what) + ": t must be positive");
}

void require_dim(int n, const char* what) {
  if (n < 1) throw DomainError(std::string(what) + ": n must be >= 1");
}

// Bessel function of order twice/2 for either window kind.
double bessel(WindowKind kind, int twice, double r) {
  return kind == WindowKind::k_window ? specfun::bessel_k_half(twice, r)
                                      : specfun::bessel_i_half(twice, r);
}

struct Central {
  double d1;
  double d2;
};

Central central(const std::function<double(double)>& f, double x, double h, double f0) {
  const double fp = f(x + h);
  const double fm = f(x - h);
  return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

// Two Richardson levels from steps h, h/2, h/4.
std::pair<FdValue, FdValue> richardson(const std::function<double(double)>& f, double x,
                                       double h, double noise) {
  const double f0 = f(x);
  const Central c1 = central(f, x, h, f0);
  const Central c2 = central(f, x, 0.5 * h, f0);
  const Central c4 = central(f, x, 0.25 * h, f0);
  const double r1_12 = (4.0 * c2.d1 - c1.d1) / 3.0;
  const double r1_24 = (4.0 * c4.d1 - c2.d1) / 3.0;
  const double r2_12 = (4.0 * c2.d2 - c1.d2) / 3.0;
  const double r2_24 = (4.0 * c4.d2 - c2.d2) / 3.0;
  const double hq = 0.25 * h;
  const double round = noise + 4.0 * kEps * std::abs(f0);
  FdValue d1{r1_24, std::abs(r1_24 - r1_12) + 2.0 * round / hq};
  FdValue d2{r2_24, std::abs(r2_24 - r2_12) + 8.0 * round / (hq * hq)};
  return {d1, d2};
}

double witness_t_max(int n, const WitnessSearch& s) {
  if (s.t_max > 0.0) return s.t_max;
  return n == 2 ? 0.5 : 0.3;
}

struct GridPoint {
  double y1;
  double t;
  FdValue lap;
};

GridPoint evaluate_log_laplacian(int n, double y1, double t) {
  const double h = 0.05 * std::min(t, y1);
  const double p1 = p_n(n, t);
  const double p2 = p_n(n, 2.0 * t);
  const double u = theorem42_u(n, y1, t);
  // u is a difference of O((P1 + P2)^2) terms.
  const double noise = 4.0 * kEps * (p1 + p2) * (p1 + p2) / u;
  const HalfSpaceFunction log_u = [n](double y, double tt) {
    return std::log(theorem42_u(n, y, tt));
  };
  return {y1, t, laplacian_h_halfspace(n, log_u, {y1, t}, h, h, noise)};
}

double score(const GridPoint& g, double margin) { return g.lap.value + margin * g.lap.error; }

// Evaluates a rows x cols grid; returns all points row-major.
std::vector<GridPoint> scan(int n, std::span<const double> ts, std::span<const double> ys,
                            unsigned workers) {
  std::vector<GridPoint> out(ts.size() * ys.size());
  detail::parallel_for(ts.size(), workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      out[i * ys.size() + j] = evaluate_log_laplacian(n, ys[j], ts[i]);
    }
  });
  return out;
}

std::size_t argmin_score(const std::vector<GridPoint>& pts, double margin) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (score(pts[k], margin) < score(pts[best], margin)) best = k;
  }
  return best;
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return v;
}

std::vector<double> lin_space(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    v[i] = lo + f * (hi - lo);
  }
  return v;
}

std::vector<double> open_interval_grid(std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t j = 0; j < count; ++j) {
    v[j] = std::numbers::pi * (j + 1.0) / (count + 1.0);
  }
  return v;
}

}  // namespace

double p_n(int n, double t) {
  require_dim(n, "p_n");
  require_positive(t, "p_n");
  return std::pow(t, 0.5 * n) * specfun::bessel_k_half(n, t);
}

double p_n_zero(int n) {
  require_dim(n, "p_n_zero");
  return std::pow(2.0, 0.5 * n - 1.0) * std::tgamma(0.5 * n);
}

double p_n_derivative(int n, double t) {
  require_dim(n, "p_n_derivative");
  require_positive(t, "p_n_derivative");
  return -std::pow(t, 0.5 * n) * specfun::bessel_k_half(n - 2, t);
}

double p_n_second_derivative(int n, double t) {
  require_dim(n, "p_n_second_derivative");
  require_positive(t, "p_n_second_derivative");
  const double tn = std::pow(t, 0.5 * n);
  return tn * specfun::bessel_k_half(n - 4, t) - tn / t * specfun::bessel_k_half(n - 2, t);
}

double p_n_second_derivative_zero(int n) {
  require_dim(n, "p_n_second_derivative_zero");
  if (n == 2) {
    throw DomainError("p_n_second_derivative_zero: P_2''(t) diverges as t -> 0");
  }
  return -std::pow(2.0, 0.5 * n - 2.0) * std::tgamma(0.5 * n - 1.0);
}

WindowSpec WindowSpec::make(int n, double beta) {
  require_dim(n, "WindowSpec");
  return {n, beta, 0.5 * n - beta, beta > 0.5 * n};
}

WindowValue window(const WindowSpec& spec, WindowKind kind, double r) {
  if (!(r > 0.0)) throw DomainError("window: r must be positive");
  const double b = spec.beta;
  if (kind == WindowKind::power) {
    const double c = spec.alpha_exp;
    const double v = std::pow(r, c);
    return {v, c * v / r, c * (c - 1.0) * v / (r * r)};
  }
  const int m = spec.n;  // order m / 2
  const double z = bessel(kind, m, r);
  const double zm1 = bessel(kind, m - 2, r);
  const double zp1 = bessel(kind, m + 2, r);
  const double zm2 = bessel(kind, m - 4, r);
  const double zp2 = bessel(kind, m + 4, r);
  const double sign = kind == WindowKind::k_window ? -1.0 : 1.0;
  const double dz = sign * 0.5 * (zm1 + zp1);
  const double d2z = 0.25 * (zm2 + 2.0 * z + zp2);
  const double rb = std::pow(r, b);
  return {rb * z, rb * (b * z / r + dz),
          rb * (b * (b - 1.0) * z / (r * r) + 2.0 * b * dz / r + d2z)};
}

double ode_residual(const WindowSpec& spec, WindowKind kind, double r) {
  const WindowValue w = window(spec, kind, r);
  const double a = spec.alpha_exp;
  const double n = spec.n;
  const double t1 = (n * a - a * a + r * r) * w.phi;
  const double t2 = (n - 1.0 - 2.0 * a) * r * w.d1;
  const double t3 = -r * r * w.d2;
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
  return scale == 0.0 ? 0.0 : std::abs(t1 + t2 + t3) / scale;
}

double power_first_order_residual(const WindowSpec& spec, double r) {
  const WindowValue w = window(spec, WindowKind::power, r);
  return std::abs(r * w.d1 - spec.alpha_exp * w.phi) / std::abs(w.phi);
}

ResidualReport certify_window_ode(std::span<const int> dims, double beta_offset,
                                  std::span<const double> r_grid, double tolerance) {
  ResidualReport rep;
  rep.name = "window-ode";
  rep.tolerance = tolerance;
  for (int n : dims) {
    const WindowSpec spec = WindowSpec::make(n, 0.5 * n + beta_offset);
    for (WindowKind kind : {WindowKind::k_window, WindowKind::i_window}) {
      for (double r : r_grid) {
        const double res = ode_residual(spec, kind, r);
        rep.add(r, res, 0.0, res);
      }
    }
  }
  return rep;
}

HalfSpaceDerivatives halfspace_derivatives(const HalfSpaceFunction& F, HalfSpacePoint p,
                                           double h_y, double h_t, double f_noise) {
  if (!(h_y > 0.0) || !(h_t > 0.0)) {
    throw DomainError("halfspace_derivatives: steps must be positive");
  }
  if (!(p.t - h_t > 0.0)) {
    throw StencilError("halfspace_derivatives: stencil crosses t = 0");
  }
  const auto [fy, fyy] = richardson([&](double y) { return F(y, p.t); }, p.y1, h_y, f_noise);
  const auto [ft, ftt] = richardson([&](double t) { return F(p.y1, t); }, p.t, h_t, f_noise);
  return {fy, fyy, ft, ftt};
}

FdValue laplacian_h_halfspace(int n, const HalfSpaceFunction& F, HalfSpacePoint p,
                              double h_y, double h_t, double f_noise) {
  const HalfSpaceDerivatives d = halfspace_derivatives(F, p, h_y, h_t, f_noise);
  const double t2 = p.t * p.t;
  return {t2 * (d.f_yy.value + d.f_tt.value) - (n - 1.0) * p.t * d.f_t.value,
          t2 * (d.f_yy.error + d.f_tt.error) + std::abs(n - 1.0) * p.t * d.f_t.error};
}

double theorem42_u(int n, double y1, double t) {
  const double a = p_n(n, t);
  const double b = p_n(n, 2.0 * t);
  return a * a + b * b - 2.0 * a * b * std::cos(y1);
}

UDerivatives theorem42_u_derivatives(int n, double y1, double t) {
  const double a = p_n(n, t);
  const double b = p_n(n, 2.0 * t);
  const double da = p_n_derivative(n, t);
  const double db = 2.0 * p_n_derivative(n, 2.0 * t);
  const double dda = p_n_second_derivative(n, t);
  const double ddb = 4.0 * p_n_second_derivative(n, 2.0 * t);
  const double c = std::cos(y1);
  const double s = std::sin(y1);
  UDerivatives d{};
  d.u = a * a + b * b - 2.0 * a * b * c;
  d.u_y = 2.0 * a * b * s;
  d.u_yy = 2.0 * a * b * c;
  d.u_t = 2.0 * a * da + 2.0 * b * db - 2.0 * (da * b + a * db) * c;
  d.u_tt = 2.0 * (da * da + a * dda) + 2.0 * (db * db + b * ddb) -
           2.0 * (dda * b + 2.0 * da * db + a * ddb) * c;
  return d;
}

double equivalence_form(int n, double y1, double t) {
  const UDerivatives d = theorem42_u_derivatives(n, y1, t);
  const double lap_over_t2 = d.u_yy + d.u_tt - (n - 1.0) * d.u_t / t;
  return d.u * lap_over_t2 - (d.u_y * d.u_y + d.u_t * d.u_t);
}

double log_laplacian_closed(int n, double y1, double t) {
  const double u = theorem42_u(n, y1, t);
  return t * t / (u * u) * equivalence_form(n, y1, t);
}

double theorem42_limit_expression(int n, double y1) {
  if (n < 2) throw DomainError("theorem42_limit_expression: n must be >= 2");
  const double p0 = p_n_zero(n);
  const double k = n == 2 ? -1.0 : (n - 2.0) * p_n_second_derivative_zero(n);
  const double one_minus_c = 1.0 - std::cos(y1);
  return 2.0 * p0 * p0 * one_minus_c * (10.0 * k * p0 * one_minus_c + 2.0 * p0 * p0);
}

double limit_positivity_bound(int n) {
  if (n < 2) throw DomainError("limit_positivity_bound: n must be >= 2");
  const double p0 = p_n_zero(n);
  const double k = n == 2 ? -1.0 : (n - 2.0) * p_n_second_derivative_zero(n);
  // 10 k p0 (1 - c) + 2 p0^2 = 0  <=>  1 - c = p0 / (5 |k|)
  const double x = p0 / (5.0 * std::abs(k));
  if (x >= 2.0) return std::numbers::pi;
  return std::acos(1.0 - x);
}

WitnessReport find_negativity_witness(int n, const WitnessSearch& search) {
  if (n < 2) throw DomainError("find_negativity_witness: n must be >= 2");
  if (search.grid < 2 || search.refine_grid < 2) {
    throw DomainError("find_negativity_witness: grids need at least 2 points");
  }
  const double t_max = witness_t_max(n, search);
  const std::vector<double> ts = log_space(search.t_min, t_max, search.grid);
  const std::vector<double> ys = open_interval_grid(search.grid);
  const double margin = search.margin_factor;

  std::vector<GridPoint> coarse = scan(n, ts, ys, search.workers);
  const std::size_t best = argmin_score(coarse, margin);
  const std::size_t bi = best / ys.size();
  const std::size_t bj = best % ys.size();

  // One refinement over the neighbouring cells.
  const double t_lo = ts[bi == 0 ? 0 : bi - 1];
  const double t_hi = ts[std::min(bi + 1, ts.size() - 1)];
  const double y_lo = bj == 0 ? 0.5 * ys[0] : ys[bj - 1];
  const double y_hi = bj + 1 < ys.size() ? ys[bj + 1] : 0.5 * (ys.back() + std::numbers::pi);
  const std::vector<double> rts = log_space(t_lo, t_hi, search.refine_grid);
  const std::vector<double> rys = lin_space(y_lo, y_hi, search.refine_grid);
  std::vector<GridPoint> fine = scan(n, rts, rys, search.workers);
  const std::size_t fbest = argmin_score(fine, margin);
  const GridPoint& g = score(fine[fbest], margin) < score(coarse[best], margin)
                           ? fine[fbest]
                           : coarse[best];

  WitnessReport rep;
  rep.n = n;
  rep.y1 = g.y1;
  rep.t = g.t;
  rep.fd_value = g.lap.value;
  rep.fd_error = g.lap.error;
  rep.closed_value = log_laplacian_closed(n, g.y1, g.t);
  rep.equivalence = equivalence_form(n, g.y1, g.t);
  rep.evaluated_points = coarse.size() + fine.size();
  rep.certified = rep.fd_value < -margin * rep.fd_error && rep.equivalence < 0.0;
  if (!rep.certified) {
    throw NoWitnessFound("find_negativity_witness: no certified negative point for n = " +
                         std::to_string(n));
  }
  return rep;
}

ControlReport n1_control(const WitnessSearch& search) {
  const double t_max = witness_t_max(2, search);
  const std::vector<double> ts = log_space(search.t_min, t_max, search.grid);
  const std::vector<double> ys = open_interval_grid(search.grid);
  const std::vector<GridPoint> pts = scan(1, ts, ys, search.workers);
  ControlReport rep;
  rep.witness_free = true;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (const auto& g : pts) {
    if (g.lap.value < rep.min_value) {
      rep.min_value = g.lap.value;
      rep.y1 = g.y1;
      rep.t = g.t;
      rep.error_at_min = g.lap.error;
    }
    if (g.lap.value < -search.margin_factor * g.lap.error) rep.witness_free = false;
    rep.max_abs_closed = std::max(rep.max_abs_closed, std::abs(log_laplacian_closed(1, g.y1, g.t)));
  }
  return rep;
}

ResidualReport check_limits(int n, std::span<const double> y1_grid, double t,
                            double tolerance) {
  if (n < 2) throw DomainError("check_limits: n must be >= 2");
  ResidualReport rep;
  rep.name = "limits n=" + std::to_string(n);
  rep.tolerance = tolerance;
  const double p0 = p_n_zero(n);
  const HalfSpaceFunction u = [n](double y, double tt) { return theorem42_u(n, y, tt); };
  const double h = 0.2 * t;
  for (double y1 : y1_grid) {
    const double c = std::cos(y1);
    const double scale_floor = p0 * p0 * (1.0 - c);
    const HalfSpaceDerivatives d = halfspace_derivatives(u, {y1, t}, h, h);
    auto add = [&](double value, double limit) {
      const double denom = std::max(std::abs(limit), scale_floor);
      rep.add(y1, value, limit, std::abs(value - limit) / denom);
    };
    add(d.f_yy.value, 2.0 * p0 * p0 * c);
    // Zero limit: measured as the scale-free derivative t |d_t u| / u.
    const double u0 = theorem42_u(n, y1, t);
    rep.add(y1, d.f_t.value, 0.0, t * std::abs(d.f_t.value) / u0);
    if (n == 2) {
      add(d.f_tt.value - d.f_t.value / t, 10.0 * p0 * (1.0 - c));
    } else {
      add(d.f_tt.value, 10.0 * p0 * p_n_second_derivative_zero(n) * (1.0 - c));
    }
  }
  return rep;
}

}  // namespace fkball::wavelet
