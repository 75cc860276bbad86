#pragma once

#include "fkball/numerics.hpp"

namespace fkball::specfun {

/// Parameters of F[a, b, c; u, v; t] = sum (a)_k (b)_k (c)_k / (k! (u)_k (v)_k) t^k.
struct HypParams32 {
  double a;
  double b;
  double c;
  double u;
  double v;
};

/// Rising factorial a (a + 1) ... (a + k - 1); 1 for k = 0.
double pochhammer(double a, unsigned k);

/// Gamma function; throws DomainError at the poles 0, -1, -2, ...
double gamma(double x);

/// Gauss hypergeometric series F[a, b, c; t] for t in [0, 1].
///
/// t = 1 is accepted when the series terminates or its terms decay at least
/// like k^-2 (a + b - c <= -1). Terms that are still significant after
/// `tol.tail_switch` are replaced by an Euler-Maclaurin tail, so t close to 1
/// costs a bounded amount of work. Callers that need t near 1 with slowly
/// decaying terms should pre-apply the Euler transformation.
///
/// Throws DomainError for t outside [0, 1] or c in {0, -1, -2, ...}, and
/// NonConvergence if `tol.max_terms` is reached first.
double hyp2f1(double a, double b, double c, double t,
              const SeriesTolerance& tol = {});

/// F[a, b, c; u, v; t] for t in [0, 1]; same conventions as hyp2f1.
/// t = 1 requires a + b + c - u - v - 1 <= -2 unless the series terminates.
double hyp3f2(const HypParams32& p, double t, const SeriesTolerance& tol = {});

/// Modified Bessel function of the second kind K_{n/2}(t).
///
/// Odd n uses the half-integer closed forms for K_{1/2}, K_{3/2} and the
/// upward recurrence. Even n starts from K_0, K_1: ascending series with the
/// logarithmic term for t <= 2, Steed's continued fraction above. Negative n
/// is accepted through K_{-nu} = K_nu. Throws DomainError for t <= 0.
double bessel_k_half(int n, double t);

/// Above this argument I_{n/2} is reported as overflowing.
inline constexpr double kBesselIOverflowThreshold = 700.0;

/// Modified Bessel function of the first kind I_{n/2}(t) from its ascending
/// series. Negative odd n goes through the reflection
/// I_{-nu} = I_nu + (2 / pi) sin(nu pi) K_nu.
/// Throws DomainError for t < 0 and OverflowError for
/// t > kBesselIOverflowThreshold.
double bessel_i_half(int n, double t);

}  // namespace fkball::specfun
