#include "fkball/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "fkball/errors.hpp"

namespace fkball::specfun {
namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

// Coefficients c_k(a), k = 1..6, of the large-x expansion
//   log Gamma(x + a) = (x + a - 1/2) log x - x + log(2 pi) / 2 + sum_k c_k(a) x^-k,
// c_k(a) = (-1)^(k+1) B_{k+1}(a) / (k (k + 1)) with Bernoulli polynomials B_j.
std::array<double, 6> stirling_coefficients(double a) {
  const double a2 = a * a;
  const double a3 = a2 * a;
  const double a4 = a3 * a;
  const double a5 = a4 * a;
  const double a6 = a5 * a;
  const double a7 = a6 * a;
  const std::array<double, 6> bernoulli{
      a2 - a + 1.0 / 6.0,
      a3 - 1.5 * a2 + 0.5 * a,
      a4 - 2.0 * a3 + a2 - 1.0 / 30.0,
      a5 - 2.5 * a4 + (5.0 / 3.0) * a3 - a / 6.0,
      a6 - 3.0 * a5 + 2.5 * a4 - 0.5 * a2 + 1.0 / 42.0,
      a7 - 3.5 * a6 + 3.5 * a5 - (7.0 / 6.0) * a3 + a / 6.0,
  };
  std::array<double, 6> c{};
  for (int k = 1; k <= 6; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    c[k - 1] = sign * bernoulli[k - 1] / (k * (k + 1.0));
  }
  return c;
}

// Generalised hypergeometric series sum_k prod (num_i)_k / (k! prod (den_j)_k) t^k.
class HypergeometricSeries {
 public:
  HypergeometricSeries(std::span<const double> num, std::span<const double> den,
                       double t)
      : num_(num), den_(den), t_(t) {}

  double sum(const SeriesTolerance& tol) const {
    tol.validate();
    if (!(t_ >= 0.0 && t_ <= 1.0)) {
      throw DomainError("hypergeometric series: t must lie in [0, 1], got " +
                        std::to_string(t_));
    }
    for (double d : den_) {
      if (is_nonpositive_integer(d)) {
        throw DomainError("hypergeometric series: denominator parameter is a "
                          "nonpositive integer");
      }
    }
    if (t_ == 0.0) {
      return 1.0;
    }
    if (t_ == 1.0 && !terminates() && decay_exponent() > -2.0) {
      throw DomainError(
          "hypergeometric series at t = 1 needs terms decaying like k^-2 or "
          "faster");
    }

    double term = 1.0;
    double total = 1.0;
    int small_run = 0;
    for (int k = 0;; ++k) {
      const double ratio = term_ratio(k);
      const double next = term * ratio;
      if (ratio == 0.0) {
        return total;
      }
      const int index = k + 1;
      if (tol.accelerate_tail && index >= tol.tail_switch &&
          tail_applicable(index, ratio)) {
        return total + euler_maclaurin_tail(index, next, total);
      }
      total += next;
      term = next;
      if (std::abs(next) < tol.rel_eps * std::abs(total)) {
        if (++small_run == 3) {
          return total;
        }
      } else {
        small_run = 0;
      }
      if (index >= tol.max_terms) {
        throw NonConvergence("hypergeometric series: " +
                             std::to_string(tol.max_terms) +
                             " terms without reaching the tail bound");
      }
    }
  }

 private:
  double term_ratio(int k) const {
    double r = t_ / (k + 1.0);
    for (double a : num_) r *= (a + k);
    for (double b : den_) r /= (b + k);
    return r;
  }

  bool terminates() const {
    return std::any_of(num_.begin(), num_.end(), is_nonpositive_integer);
  }

  double decay_exponent() const {
    double p = -1.0;
    for (double a : num_) p += a;
    for (double b : den_) p -= b;
    return p;
  }

  bool tail_applicable(int k, double ratio) const {
    if (std::abs(ratio) >= 1.0) return false;
    for (double a : num_) {
      if (a + k <= 1.0) return false;
    }
    for (double b : den_) {
      if (b + k <= 1.0) return false;
    }
    return true;
  }

  // Sum over parameters of the Stirling corrections c_k: numerator
  // parameters and the implicit k! (a = 1) enter with opposite signs.
  std::array<double, 6> correction_coefficients() const {
    std::array<double, 6> total{};
    const auto add = [&](double a, double sign) {
      const auto c = stirling_coefficients(a);
      for (int k = 0; k < 6; ++k) total[k] += sign * c[k];
    };
    for (double a : num_) add(a, 1.0);
    add(1.0, -1.0);
    for (double b : den_) add(b, -1.0);
    return total;
  }

  // Sum of the terms with index >= k, given the value of term k. The terms
  // extend to real x >= k through Gamma functions,
  //   f(x) = term_k exp(L(x) - L(k) + (x - k) log t),
  // and since there is one more numerator than denominator parameter,
  //   L(x) = p log x + sum_j C_j x^-j
  // with p the algebraic decay exponent. This avoids differencing lgamma
  // values of size x log x.
  double euler_maclaurin_tail(int k, double term_k, double total) const {
    const double p = decay_exponent();
    const auto c = correction_coefficients();
    const double log_t = std::log(t_);
    const double xk = static_cast<double>(k);

    const auto series = [&](double x) {
      double s = 0.0;
      double xp = 1.0 / x;
      for (int j = 0; j < 6; ++j, xp /= x) s += c[j] * xp;
      return s;
    };
    const double base = series(xk);
    const auto log_ratio = [&](double x) {
      return p * std::log(x / xk) + series(x) - base + (x - xk) * log_t;
    };

    // Derivatives of g(x) = log f(x) at x = k.
    double g = p / xk + log_t;
    double g1 = -p / (xk * xk);
    double g2 = 2.0 * p / (xk * xk * xk);
    for (int j = 1; j <= 6; ++j) {
      const double cj = c[j - 1];
      g += -j * cj * std::pow(xk, -j - 1);
      g1 += j * (j + 1.0) * cj * std::pow(xk, -j - 2);
      g2 += -j * (j + 1.0) * (j + 2.0) * cj * std::pow(xk, -j - 3);
    }
    const double d1 = term_k * g;
    const double d3 = term_k * (g * g * g + 3.0 * g * g1 + g2);

    // The integral only has to be accurate relative to the whole sum. Its
    // size is about k term_k / |p + 1|.
    const double tail_size = std::abs(xk * term_k / (p + 1.0));
    const double tail_tolerance = std::clamp(
        1e-17 * std::abs(total) / std::max(tail_size, 1e-300), 1e-12, 1e-6);

    // x = k / (1 - u) maps [0, 1) onto [k, inf) with the natural scale k.
    // Beyond x = 1e15 k the remaining mass is below 1e-15 of the tail.
    const numerics::QuadResult integral = numerics::tanh_sinh(
        [&](const numerics::Node& n) {
          const double one_minus_u = n.to_b;
          if (one_minus_u < 1e-15) return 0.0;
          const double x = xk / one_minus_u;
          return term_k * std::exp(log_ratio(x) + std::log(xk) -
                                   2.0 * std::log(one_minus_u));
        },
        0.0, 1.0, tail_tolerance, 8, false);

    return integral.value + 0.5 * term_k - d1 / 12.0 + d3 / 720.0;
  }

  std::span<const double> num_;
  std::span<const double> den_;
  double t_;
};

// K_0 and K_1 for t <= 2 from the ascending series with logarithmic terms.
std::array<double, 2> bessel_k01_series(double t) {
  const double q = 0.25 * t * t;
  const double log_half = std::log(0.5 * t);

  double i0 = 0.0;
  double i1 = 0.0;
  double s0 = 0.0;  // sum psi(k+1) q^k / (k!)^2
  double s1 = 0.0;  // sum (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
  double term0 = 1.0;         // q^k / (k!)^2
  double term1 = 1.0;         // q^k / (k! (k+1)!)
  double psi = -kEulerGamma;  // psi(k+1)
  for (int k = 0; k < 200; ++k) {
    const double psi_next = psi + 1.0 / (k + 1.0);
    i0 += term0;
    i1 += term1;
    s0 += psi * term0;
    s1 += (psi + psi_next) * term1;
    if (term0 < 1e-18 * i0 && k > 2) break;
    term0 *= q / ((k + 1.0) * (k + 1.0));
    term1 *= q / ((k + 1.0) * (k + 2.0));
    psi = psi_next;
  }
  i1 *= 0.5 * t;
  const double k0 = -log_half * i0 + s0;
  const double k1 = 1.0 / t + log_half * i1 - 0.25 * t * s1;
  return {k0, k1};
}

// K_mu and K_{mu+1} for t >= 2 and |mu| <= 1/2 (Steed's CF2, Temme's
// normalisation).
std::array<double, 2> bessel_k_steed(double mu, double t) {
  const double a1 = 0.25 - mu * mu;
  double b = 2.0 * (1.0 + t);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  h *= a1;
  const double k_mu = std::sqrt(std::numbers::pi / (2.0 * t)) * std::exp(-t) / s;
  const double k_mu1 = k_mu * (mu + t + 0.5 - h) / t;
  return {k_mu, k_mu1};
}

double bessel_i_series(double nu, double t) {
  if (t == 0.0) {
    return nu == 0.0 ? 1.0 : 0.0;
  }
  const double q = 0.25 * t * t;
  double term = std::exp(nu * std::log(0.5 * t) - std::lgamma(nu + 1.0));
  double total = 0.0;
  for (int k = 0; k < 100000; ++k) {
    total += term;
    if (term < 1e-18 * total && k > q) break;
    term *= q / ((k + 1.0) * (nu + k + 1.0));
  }
  return total;
}

}  // namespace

double pochhammer(double a, unsigned k) {
  double p = 1.0;
  for (unsigned i = 0; i < k; ++i) {
    p *= a + i;
  }
  return p;
}

double gamma(double x) {
  if (is_nonpositive_integer(x)) {
    throw DomainError("gamma: pole at " + std::to_string(x));
  }
  return std::tgamma(x);
}

double hyp2f1(double a, double b, double c, double t,
              const SeriesTolerance& tol) {
  const std::array<double, 2> num{a, b};
  const std::array<double, 1> den{c};
  return HypergeometricSeries(num, den, t).sum(tol);
}

double hyp3f2(const HypParams32& p, double t, const SeriesTolerance& tol) {
  const std::array<double, 3> num{p.a, p.b, p.c};
  const std::array<double, 2> den{p.u, p.v};
  return HypergeometricSeries(num, den, t).sum(tol);
}

double bessel_k_half(int n, double t) {
  if (!(t > 0.0)) {
    throw DomainError("bessel_k_half: argument must be positive");
  }
  n = std::abs(n);
  if (n % 2 == 1) {
    double k_prev = std::sqrt(std::numbers::pi / (2.0 * t)) * std::exp(-t);
    if (n == 1) return k_prev;
    double k_cur = k_prev * (1.0 + 1.0 / t);
    for (int twice = 3; twice < n; twice += 2) {
      const double nu = 0.5 * twice;
      const double next = k_prev + (2.0 * nu / t) * k_cur;
      k_prev = k_cur;
      k_cur = next;
    }
    return k_cur;
  }
  const int m = n / 2;
  const auto [k0, k1] = t <= 2.0 ? bessel_k01_series(t) : bessel_k_steed(0.0, t);
  if (m == 0) return k0;
  double k_prev = k0;
  double k_cur = k1;
  for (int j = 1; j < m; ++j) {
    const double next = k_prev + (2.0 * j / t) * k_cur;
    k_prev = k_cur;
    k_cur = next;
  }
  return k_cur;
}

double bessel_i_half(int n, double t) {
  if (t < 0.0) {
    throw DomainError("bessel_i_half: argument must be nonnegative");
  }
  if (t > kBesselIOverflowThreshold) {
    throw OverflowError("bessel_i_half: argument " + std::to_string(t) +
                        " beyond overflow threshold");
  }
  if (n >= 0 || n % 2 == 0) {
    return bessel_i_series(0.5 * std::abs(n), t);
  }
  if (t == 0.0) {
    throw DomainError("bessel_i_half: negative half-integer order is singular at 0");
  }
  const int m = -n;                               // odd, nu = m / 2
  const double sign = ((m - 1) / 2) % 2 == 0 ? 1.0 : -1.0;  // sin(nu pi)
  return bessel_i_series(0.5 * m, t) +
         (2.0 / std::numbers::pi) * sign * bessel_k_half(m, t);
}

}  // namespace fkball::specfun
