#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "fkball/errors.hpp"
#include "fkball/geometry.hpp"
#include "fkball/weights.hpp"

using namespace fkball;
using namespace fkball::weights;

TEST(Phi, Examples) {
  for (double r : {0.0, 0.3, 0.5, 0.9, 0.999}) EXPECT_NEAR(phi(2, r), 1 - r * r, 2.3e-16);
  EXPECT_NEAR(phi(3, 0.5), std::exp(2.0) * std::pow(1.0 / 3.0, 2.5), 1e-12);
  EXPECT_NEAR(phi(3, 0.5), 0.474007, 2e-6);
  EXPECT_NEAR(phi(4, 0.5), std::exp(-0.375) * std::pow(0.75, 3), 1e-15);
  EXPECT_NEAR(phi(4, 0.5), 0.289950, 1e-6);
  for (int n = 2; n <= 7; ++n) {
    EXPECT_EQ(phi(n, 0.0), 1.0);
    EXPECT_EQ(phi(n, 1.0), 0.0);
  }
}

TEST(Phi, ClosedFormsOnFineGrid) {
  for (int n = 2; n <= 4; ++n) {
    for (int i = 0; i <= 990; ++i) {
      const double r = i * 1e-3;
      const double c = phi_closed_form(n, r);
      if (n == 2) {
        EXPECT_EQ(phi(n, r), c);
      } else {
        EXPECT_NEAR(phi(n, r), c, 1e-10 * c) << n << " " << r;
      }
    }
  }
  EXPECT_THROW(phi_closed_form(5, 0.5), DomainError);
}

TEST(Phi, SandwichBounds) {
  for (int n = 3; n <= 8; ++n) {
    const double e = sandwich_constant(n);
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, 1.0);
    for (double r : {0.01, 0.3, 0.7, 0.95, 0.999}) {
      const double base = std::pow(1 - r * r, n - 1);
      EXPECT_GT(phi(n, r), e * base);
      EXPECT_LE(phi(n, r), base * (1 + 1e-15));
    }
    EXPECT_NEAR(phi(n, 0.999999) / std::pow(1 - 0.999999 * 0.999999, n - 1), e, 1e-4);
  }
}

TEST(LogPhiDerivatives, TwoDimensionalClosedForm) {
  for (double r : {0.1, 0.5, 0.9}) {
    const LogPhiDerivatives d = log_phi_derivatives(2, r);
    EXPECT_NEAR(d.value, std::log(1 - r * r), 1e-15);
    EXPECT_NEAR(d.d1, -2 * r / (1 - r * r), 1e-14);
    EXPECT_NEAR(d.d2, -2 * (1 + r * r) / std::pow(1 - r * r, 2), 1e-13);
  }
  EXPECT_THROW(log_phi_derivatives(3, 0.0), DomainError);
  EXPECT_THROW(log_phi_derivatives(3, 1.0), DomainError);
}

TEST(LogPhiDerivatives, AgainstFiniteDifferences) {
  for (int n = 3; n <= 6; ++n) {
    auto lp = [n](double r) { return std::log(phi(n, r)); };
    for (double r : {0.1, 0.5, 0.8}) {
      const LogPhiDerivatives d = log_phi_derivatives(n, r);
      EXPECT_NEAR(d.value, lp(r), 1e-13);
      EXPECT_NEAR(d.d1, numerics::derivative(lp, r, 1e-3), 1e-7 * (1 + std::abs(d.d1)));
      EXPECT_NEAR(d.d2, numerics::second_derivative(lp, r, 1e-2), 1e-5 * (1 + std::abs(d.d2)));
    }
  }
  // d/dr log Phi is odd in r, so d1 / r settles to a constant as r -> 0.
  const double slope = log_phi_derivatives(5, 1e-4).d1 / 1e-4;
  EXPECT_NEAR(log_phi_derivatives(5, 1e-7).d1 / 1e-7, slope, 1e-6 * std::abs(slope));
}

TEST(LogPhiExponent, DerivativeMatchesFiniteDifference) {
  for (int n = 3; n <= 6; ++n) {
    for (double t : {0.1, 0.5, 0.9}) {
      const double fd = numerics::derivative([n](double x) { return log_phi_exponent(n, x); }, t, 1e-4);
      EXPECT_NEAR(log_phi_exponent_derivative(n, t), fd, 1e-9);
    }
  }
}

TEST(LogPhiTable, MatchesSeries) {
  for (int n = 2; n <= 6; ++n) {
    const LogPhiTable& table = LogPhiTable::get(n);
    for (double t : {0.0, 0.01, 0.4, 0.9, 0.999, 0.999999}) {
      EXPECT_NEAR(table.exponent(t), log_phi_exponent(n, t), 1e-12) << n << " " << t;
    }
    const double r = 0.7;
    EXPECT_NEAR(table.phi_pow(2.5, r * r, 1 - r * r), std::pow(phi(n, r), 2.5), 1e-12);
  }
}

TEST(WeightOde, CertifiedForDimensionsTwoToSix) {
  std::vector<double> grid;
  for (int i = 0; i <= 85; ++i) grid.push_back(0.05 + 0.01 * i);
  for (int n = 2; n <= 6; ++n) {
    const ResidualReport rep = certify_weight_ode(n, grid, n == 2 ? 1e-10 : 1e-6);
    EXPECT_TRUE(rep.passed) << n << " " << rep.max_residual;
    EXPECT_EQ(rep.rows.size(), grid.size());
  }
}

TEST(WeightOde, DetectsWrongWeight) {
  // The Laplacian of log (1 - r^2)^(n-1) is not constant for n > 2.
  std::vector<double> grid{0.3, 0.6};
  const geometry::RadialFunction u{[](double r) { return 2 * std::log1p(-r * r); }, {}, {}};
  const double lap = geometry::laplacian_h_radial(3, u, 0.6);
  EXPECT_GT(std::abs(lap + 16.0), 1e-3);
}

TEST(Normalization, AgainstIndependentQuadrature) {
  for (int n = 2; n <= 5; ++n) {
    for (double alpha : {1.5, 2.0, 3.0}) {
      // xc is the signed distance to the nearer endpoint; near r = 1 it gives
      // 1 - r^2 = xc (1 + r) without cancellation.
      auto f = [&](double r, double xc) {
        const double q = xc > 0 ? xc * (1 + r) : 1 - r * r;
        const double logw = alpha * log_phi_exponent(n, r * r) + (alpha * (n - 1) - n) * std::log(q);
        return n * std::pow(r, n - 1) * std::exp(logw);
      };
      boost::math::quadrature::tanh_sinh<double> ts;
      const double ref = ts.integrate(f, 0.0, 1.0, 1e-14);
      EXPECT_NEAR(normalization(n, alpha) * ref, 1.0, 1e-9) << n << " " << alpha;
    }
  }
}

TEST(Normalization, TwoDimensionalClosedForm) {
  // c = alpha - 1 for n = 2.
  for (double alpha : {1.2, 2.0, 3.5}) EXPECT_NEAR(normalization(2, alpha), alpha - 1, 1e-12);
}

TEST(WeightParams, DerivedConstants) {
  const WeightParams p(3, 2.0);
  EXPECT_EQ(p.gamma(), 2.0 * 4);
  EXPECT_NEAR(p.c_alpha(), normalization(3, 2.0), 1e-15);
  const double omega3 = 4.0 / 3.0 * std::numbers::pi;
  EXPECT_NEAR(p.total_mass(), 8 * omega3 / p.c_alpha(), 1e-12);
  EXPECT_THROW(WeightParams(1, 2.0), DomainError);
  EXPECT_THROW(WeightParams(3, 1.0), DomainError);
}

TEST(RadialMass, Additive) {
  const double whole = radial_mass(4, 2.5, 0.0, 1.0);
  EXPECT_NEAR(radial_mass(4, 2.5, 0.0, 0.6) + radial_mass(4, 2.5, 0.6, 1.0), whole, 1e-13 * whole);
  EXPECT_NEAR(radial_mass(4, 2.5, 0.0, 0.6, {}, true), radial_mass(4, 2.5, 0.0, 0.6), 1e-12);
}
