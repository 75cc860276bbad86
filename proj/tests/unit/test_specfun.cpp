#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "fkball/errors.hpp"
#include "fkball/specfun.hpp"

using namespace fkball;
using namespace fkball::specfun;

namespace {

// Plain partial sum of F[a, b, c; u, v; t], no acceleration.
double brute_3f2(const HypParams32& p, double t, long terms) {
  long double term = 1.0L;
  long double sum = 1.0L;
  for (long k = 0; k < terms; ++k) {
    term *= (p.a + k) * (p.b + k) * (p.c + k) * static_cast<long double>(t) /
            ((k + 1.0L) * (p.u + k) * (p.v + k));
    sum += term;
  }
  return static_cast<double>(sum);
}

double brute_2f1(double a, double b, double c, double t, long terms) {
  long double term = 1.0L;
  long double sum = 1.0L;
  for (long k = 0; k < terms; ++k) {
    term *= (a + k) * (b + k) * static_cast<long double>(t) / ((k + 1.0L) * (c + k));
    sum += term;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST(Pochhammer, Examples) {
  EXPECT_EQ(pochhammer(3.0, 4), 360.0);
  EXPECT_EQ(pochhammer(2.7, 0), 1.0);
  EXPECT_DOUBLE_EQ(pochhammer(-0.5, 3), -0.375);
}

TEST(Pochhammer, GammaRatio) {
  for (double a : {0.3, 1.0, 2.5, 7.25}) {
    for (unsigned k : {1u, 5u, 12u}) {
      EXPECT_NEAR(pochhammer(a, k) / (std::tgamma(a + k) / std::tgamma(a)), 1.0, 1e-13);
    }
  }
}

TEST(Gamma, AgreesWithStd) {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.3, 20.0, -0.5, -2.7}) {
    EXPECT_NEAR(specfun::gamma(x) / std::tgamma(x), 1.0, 1e-13) << x;
  }
  EXPECT_THROW(specfun::gamma(0.0), DomainError);
  EXPECT_THROW(specfun::gamma(-3.0), DomainError);
}

TEST(Hyp2f1, Examples) {
  EXPECT_NEAR(hyp2f1(1, 2, 2, 0.25), 4.0 / 3.0, 1e-15);
  EXPECT_EQ(hyp2f1(0.3, -1.7, 2.2, 0.0), 1.0);
  const double ref = brute_2f1(1.5, 3, 2.5, 0.64, 1000000);
  EXPECT_NEAR(hyp2f1(1.5, 3, 2.5, 0.64) / ref, 1.0, 1e-12);
}

TEST(Hyp2f1, ElementaryForms) {
  for (double t : {0.1, 0.5, 0.9, 0.99}) {
    EXPECT_NEAR(hyp2f1(1, 1, 2, t), -std::log1p(-t) / t, 1e-13 * std::abs(std::log1p(-t) / t));
    EXPECT_NEAR(hyp2f1(0.5, 1, 1.5, t), std::atanh(std::sqrt(t)) / std::sqrt(t),
                1e-12 * std::atanh(std::sqrt(t)) / std::sqrt(t));
  }
}

TEST(Hyp2f1, Errors) {
  EXPECT_THROW(hyp2f1(1, 1, -2, 0.5), DomainError);
  EXPECT_THROW(hyp2f1(1, 1, 2, 1.5), DomainError);
  SeriesTolerance tight;
  tight.max_terms = 16;
  tight.accelerate_tail = false;
  EXPECT_THROW(hyp2f1(1, 1, 2, 0.99, tight), NonConvergence);
}

TEST(SeriesTolerance, Validate) {
  SeriesTolerance t;
  EXPECT_NO_THROW(t.validate());
  t.rel_eps = 0.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.rel_eps = 1e-15;
  t.max_terms = 8;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Hyp3f2, Examples) {
  const HypParams32 p3{1, 1, 0.5, 2, 2.5};
  EXPECT_EQ(hyp3f2(p3, 0.0), 1.0);
  // Terms decay like k^-3; the 1e7-term tail is about 1e-15 of the sum.
  const double ref = brute_3f2(p3, 1.0, 10000000);
  EXPECT_NEAR(hyp3f2(p3, 1.0) / ref, 1.0, 1e-10);
  EXPECT_EQ(hyp3f2({1, 1, 0, 2, 3}, 0.7), 1.0);
}

TEST(Hyp3f2, WeightParametersAgainstBruteForce) {
  for (int n = 3; n <= 8; ++n) {
    const HypParams32 p{1, 1, 2 - n / 2.0, 2, 1 + n / 2.0};
    for (double t : {0.3, 0.8, 0.97}) {
      const double ref = brute_3f2(p, t, 20000);
      EXPECT_NEAR(hyp3f2(p, t), ref, 1e-13 * std::abs(ref)) << n << " " << t;
    }
  }
}

TEST(Hyp3f2, ReducesToGauss) {
  // Equal upper and lower parameters cancel.
  for (double t : {0.2, 0.6, 0.9}) {
    EXPECT_NEAR(hyp3f2({1.5, 3, 2.2, 2.5, 2.2}, t), hyp2f1(1.5, 3, 2.5, t),
                1e-13 * hyp2f1(1.5, 3, 2.5, t));
  }
}

TEST(BesselK, AgreesWithBoost) {
  for (int n = -5; n <= 12; ++n) {
    for (double t : {1e-3, 0.1, 0.5, 1.0, 1.99, 2.01, 5.0, 30.0, 300.0}) {
      const double ref = boost::math::cyl_bessel_k(n / 2.0, t);
      EXPECT_NEAR(bessel_k_half(n, t) / ref, 1.0, 1e-13) << n << " " << t;
    }
  }
  EXPECT_THROW(bessel_k_half(3, 0.0), DomainError);
}

TEST(BesselK, HalfIntegerClosedForm) {
  for (double t : {0.2, 1.0, 4.0}) {
    const double k12 = std::sqrt(std::numbers::pi / (2 * t)) * std::exp(-t);
    EXPECT_NEAR(bessel_k_half(1, t), k12, 1e-15 * k12);
    EXPECT_NEAR(bessel_k_half(3, t), k12 * (1 + 1 / t), 1e-14 * k12 * (1 + 1 / t));
  }
}

TEST(BesselI, AgreesWithBoost) {
  for (int n = -3; n <= 12; ++n) {
    for (double t : {0.0, 1e-3, 0.1, 1.0, 5.0, 30.0, 200.0}) {
      if (t == 0.0 && n < 0) continue;
      const double ref = boost::math::cyl_bessel_i(n / 2.0, t);
      const double got = bessel_i_half(n, t);
      if (ref == 0.0) {
        EXPECT_EQ(got, 0.0);
      } else {
        EXPECT_NEAR(got / ref, 1.0, 1e-12) << n << " " << t;
      }
    }
  }
  EXPECT_THROW(bessel_i_half(2, -1.0), DomainError);
  EXPECT_THROW(bessel_i_half(2, kBesselIOverflowThreshold + 1), OverflowError);
}

TEST(Bessel, WronskianProperty) {
  // I_nu K_(nu+1) + I_(nu+1) K_nu = 1 / t.
  for (int n = 0; n <= 10; ++n) {
    for (double t : {0.05, 0.7, 3.0, 20.0}) {
      const double w = bessel_i_half(n, t) * bessel_k_half(n + 2, t) +
                       bessel_i_half(n + 2, t) * bessel_k_half(n, t);
      EXPECT_NEAR(w * t, 1.0, 1e-12) << n << " " << t;
    }
  }
}
