#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fkball/bounds.hpp"
#include "fkball/concentration.hpp"
#include "fkball/errors.hpp"

using namespace fkball;
using namespace fkball::concentration;

namespace {

Point unit(int n, int k) { return Point::Unit(n, k); }

Point vec2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

// Brute-force polar grid for int |f|^2 Phi^alpha dtau over |x| < rmax, n = 2.
double polar_mass(const TestFunction& f, const weights::WeightParams& p, double rmax) {
  const int nr = 2000, na = 256;
  double acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    // Midpoint rule in t = r^2 removes the r dr factor.
    const double t = (i + 0.5) / nr * rmax * rmax;
    const double r = std::sqrt(t);
    double ring = 0.0;
    for (int j = 0; j < na; ++j) {
      const double a = 2 * std::numbers::pi * (j + 0.5) / na;
      const double v = f(vec2(r * std::cos(a), r * std::sin(a)));
      ring += v * v;
    }
    ring *= 2 * std::numbers::pi / na;
    acc += ring * 0.5 * std::pow(weights::phi(2, r), p.alpha()) * 4 / ((1 - t) * (1 - t));
  }
  return acc * rmax * rmax / nr;
}

}  // namespace

TEST(TestFunctions, Examples) {
  const weights::WeightParams p(3, 2.0);
  std::mt19937_64 rng(1);
  const Point x = 0.7 * geometry::random_direction(3, rng);
  EXPECT_EQ(TestFunction::one()(x), 1.0);
  EXPECT_NEAR(TestFunction::extremizer(MobiusMap::identity(3), p)(x), 1.0, 1e-14);
  EXPECT_NEAR(TestFunction::exp_harmonic(0.0, unit(3, 0))(x), 1.0, 1e-15);
  EXPECT_THROW(TestFunction::one()(Point::Constant(3, 0.8)), DomainError);
  EXPECT_THROW(TestFunction::power(TestFunction::one(), -1.0), DomainError);
}

TEST(TestFunctions, AlgebraOfVariants) {
  const weights::WeightParams p(2, 2.0);
  std::mt19937_64 rng(2);
  const TestFunction e = TestFunction::exp_harmonic(-1.3, unit(2, 1));
  const TestFunction g = TestFunction::extremizer(MobiusMap::random(2, 0.6, rng), p);
  const TestFunction prod = TestFunction::product({e, g});
  const TestFunction pw = TestFunction::power(e, 2.5);
  const MobiusMap m = MobiusMap::random(2, 0.5, rng);
  const TestFunction comp = TestFunction::composed(e, m);
  for (int k = 0; k < 20; ++k) {
    const Point x = 0.9 * geometry::random_direction(2, rng) * (k / 20.0);
    EXPECT_NEAR(prod(x), e(x) * g(x), 1e-12 * prod(x));
    EXPECT_NEAR(pw(x), std::pow(e(x), 2.5), 1e-12 * pw(x));
    EXPECT_NEAR(comp(x), e(m(x)), 1e-12 * comp(x));
    EXPECT_NEAR(eval_test_function(e, x),
                std::exp(-1.3 * geometry::poisson_kernel(x, unit(2, 1))), 1e-14);
  }
}

TEST(TestFunctions, ExtremizerFormula) {
  const weights::WeightParams p(3, 2.5);
  std::mt19937_64 rng(4);
  const MobiusMap m = MobiusMap::random(3, 0.7, rng);
  const TestFunction g = TestFunction::extremizer(m, p);
  for (int k = 0; k < 10; ++k) {
    const Point x = 0.8 * geometry::random_direction(3, rng) * (k / 10.0);
    const double ref = std::pow(weights::phi(3, m(x).norm()) / weights::phi(3, x.norm()), 1.25);
    EXPECT_NEAR(g(x), ref, 1e-10 * ref);
  }
  // Finite near the sphere.
  EXPECT_TRUE(std::isfinite(g(Point::Unit(3, 1) * (1 - 1e-12))));
}

TEST(TestFunctions, SymmetryClassification) {
  const weights::WeightParams p(3, 2.0);
  EXPECT_TRUE(TestFunction::one().is_radial());
  EXPECT_TRUE(TestFunction::exp_harmonic(-1, unit(3, 2)).is_axial());
  EXPECT_FALSE(TestFunction::exp_harmonic(-1, unit(3, 2)).is_radial());
  const TestFunction two = TestFunction::product(
      {TestFunction::exp_harmonic(-1, unit(3, 0)), TestFunction::exp_harmonic(-1, unit(3, 1))});
  EXPECT_FALSE(two.is_axial());
  EXPECT_TRUE(TestFunction::extremizer(MobiusMap::involution(0.3 * unit(3, 0)), p).focus().has_value());
}

TEST(Domains, MeasuresAndMembership) {
  const DomainSpec b = DomainSpec::centered_ball(2, 4 * std::numbers::pi);
  EXPECT_NEAR(b.measure(), 4 * std::numbers::pi, 1e-15);
  EXPECT_TRUE(b.contains(vec2(0.7, 0.0)));
  EXPECT_FALSE(b.contains(vec2(0.71, 0.0)));
  const MobiusMap m = MobiusMap::involution(vec2(0.5, 0.0));
  const DomainSpec mb = DomainSpec::mobius_ball(m, 2.0);
  EXPECT_TRUE(mb.contains(vec2(0.5, 0.0)));
  EXPECT_FALSE(mb.contains(Point::Zero(2)));
  EXPECT_EQ(mb.measure_error(), 0.0);
}

TEST(Domains, CapMeasureConsistentWithGeometry) {
  // c = 0 cuts B(rho) in half.
  const DomainSpec cap = DomainSpec::cap(3, 0.0, 0.6, 40000, 9);
  const double half = 0.5 * geometry::ball_volume(3, 0.6);
  EXPECT_NEAR(cap.measure(), half, 3 * cap.measure_error());
  EXPECT_GT(cap.measure_error(), 0.0);
}

TEST(BergmanNorm, UnitAndExtremizers) {
  for (int n : {2, 3}) {
    const weights::WeightParams p(n, 2.0);
    EXPECT_NEAR(bergman_norm_sq(TestFunction::one(), p).value, 1.0, 1e-10);
    std::mt19937_64 rng(5);
    const TestFunction g = TestFunction::extremizer(MobiusMap::random(n, 0.6, rng), p);
    const Estimate e = bergman_norm_sq(g, p);
    EXPECT_EQ(e.method, "quadrature");
    EXPECT_NEAR(e.value, 1.0, 1e-8) << n;
  }
}

TEST(BergmanNorm, QuadratureAgainstPolarGrid) {
  const weights::WeightParams p(2, 2.0);
  const TestFunction e = TestFunction::exp_harmonic(-1.0, unit(2, 0));
  const double total = polar_mass(TestFunction::one(), p, 1.0);
  const double fe = polar_mass(e, p, 1.0);
  EXPECT_NEAR(bergman_norm_sq(e, p).value, fe / total, 2e-4);
}

TEST(Quotient, MonteCarloAgreesWithQuadrature) {
  const weights::WeightParams p(3, 2.0);
  const TestFunction e = TestFunction::exp_harmonic(-1.0, unit(3, 0));
  const DomainSpec om = DomainSpec::centered_ball(3, 5.0);
  const Estimate q = concentration_quotient(e, om, p);
  EXPECT_EQ(q.method, "quadrature");
  const Estimate mc = concentration_quotient(e, om, sampling::draw(p, 20000, 11));
  EXPECT_EQ(mc.method, "monte-carlo");
  EXPECT_GT(mc.error, 0.0);
  EXPECT_NEAR(mc.value, q.value, 4 * mc.error);
}

TEST(Quotient, OneOnCenteredBallIsTheta) {
  for (int n : {2, 3}) {
    const weights::WeightParams p(n, 2.0);
    const bounds::ThetaProfile th(p);
    for (double s : {0.1, 4 * std::numbers::pi, 100.0}) {
      const Estimate r = concentration_quotient(TestFunction::one(), DomainSpec::centered_ball(n, s), p);
      EXPECT_NEAR(r.value, th.theta(s), 1e-8);
      EXPECT_EQ(r.error, 0.0);
    }
  }
  const weights::WeightParams p2(2, 2.0);
  EXPECT_NEAR(concentration_quotient(TestFunction::one(),
                                     DomainSpec::centered_ball(2, 4 * std::numbers::pi), p2).value,
              0.5, 1e-12);
  EXPECT_NEAR(concentration_quotient(TestFunction::one(), DomainSpec::centered_ball(2, 1e12), p2).value,
              1.0, 1e-10);
}

TEST(Quotient, SharedSampleProperties) {
  const weights::WeightParams p(2, 2.0);
  const sampling::SampleSet ss = sampling::draw(p, 5000, 13);
  const TestFunction f = TestFunction::product(
      {TestFunction::exp_harmonic(-1.5, unit(2, 0)), TestFunction::exp_harmonic(-0.5, unit(2, 1))});
  // Monotone in Omega.
  double prev = 0.0;
  for (double s : {0.5, 1.0, 3.0, 10.0, 50.0}) {
    const double r = concentration_quotient(f, DomainSpec::centered_ball(2, s), ss).value;
    EXPECT_GE(r, prev);
    prev = r;
  }
  // Invariant under scaling f -> c f (powers of constant factors cancel).
  const DomainSpec om = DomainSpec::cap(2, 0.1, 0.8, 4000, 3);
  const double r1 = concentration_quotient(f, om, ss).value;
  const TestFunction scaled = TestFunction::product({f, TestFunction::exp_harmonic(0.0, unit(2, 0))});
  EXPECT_NEAR(concentration_quotient(scaled, om, ss).value, r1, 1e-14);
  // Values are fractions.
  EXPECT_GE(r1, 0.0);
  EXPECT_LE(r1, 1.0);
}

TEST(Quotient, ExtremizerOnMobiusBallIsTheta) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    const MobiusMap m = MobiusMap::random(2, 0.6, rng);
    const double s = 0.5 + 5.0 * k;
    const Estimate r = concentration_quotient(TestFunction::extremizer(m, p),
                                              DomainSpec::mobius_ball(m, s), p);
    EXPECT_NEAR(r.value, th.theta(s), 3 * r.error + 1e-12);
  }
}

TEST(Quotient, NonExtremalStrictlyBelowTheta) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  const TestFunction e = TestFunction::exp_harmonic(-2.0, unit(2, 0));
  const Estimate r = concentration_quotient(e, DomainSpec::centered_ball(2, 3.0), p);
  EXPECT_LT(r.value, th.theta(3.0) - 1e-4);
}

TEST(Profile, RadialPathForOne) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  std::vector<double> grid;
  for (int i = 1; i <= 50; ++i) grid.push_back(0.2 * i);
  const SuperlevelProfile sp = superlevel_profile(TestFunction::one(), p, grid);
  ASSERT_TRUE(sp.radial_exact);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(sp.I[i], th.theta(grid[i]), 1e-8);
    EXPECT_NEAR(sp.mu(sp.u_star[i]), grid[i], 1e-8 * grid[i]);
    const double d = numerics::derivative(sp.mass, grid[i], 1e-2);
    EXPECT_NEAR(d, sp.u_star[i], 1e-5 * sp.u_star[i]);
    if (i) EXPECT_LT(sp.u_star[i], sp.u_star[i - 1]);
  }
  EXPECT_EQ(sp.mass(0.0), 0.0);
}

TEST(Profile, NonMonotoneRadialRejected) {
  const weights::WeightParams p(2, 2.0);
  // |f|^2 grows faster than Phi^alpha decays near the origin.
  const TestFunction f = TestFunction::power(TestFunction::extremizer(
      MobiusMap::involution(vec2(0.6, 0.0)), p), 1.0);
  std::vector<double> grid{1.0};
  EXPECT_THROW(superlevel_profile(f, p, grid, {}, ProfilePath::radial), NonMonotoneRadial);
}

TEST(Profile, MonteCarloPathBoundedByTheta) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  const TestFunction f = TestFunction::exp_harmonic(-1.0, unit(2, 1));
  std::vector<double> grid{0.5, 2.0, 8.0};
  const SuperlevelProfile sp = superlevel_profile(f, p, grid, {}, ProfilePath::monte_carlo);
  EXPECT_FALSE(sp.radial_exact);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LE(sp.I[i], th.theta(grid[i]) + 3 * sp.I_error[i]);
    if (i) EXPECT_GE(sp.I[i], sp.I[i - 1]);
  }
}

TEST(Fuzz, NoViolationsSmallRun) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  NumericsConfig cfg;
  cfg.samples = 8000;
  const FuzzReport rep = fuzz_main_inequality(40, th, cfg, 77);
  EXPECT_EQ(rep.trials.size(), 40u);
  EXPECT_TRUE(rep.passed()) << rep.violations;
  const FuzzReport eq = equality_trials(10, th, cfg, 78);
  EXPECT_TRUE(eq.passed());
}

TEST(Fuzz, IndependentOfWorkerCount) {
  const weights::WeightParams p(2, 2.0);
  const bounds::ThetaProfile th(p);
  NumericsConfig cfg;
  cfg.samples = 2000;
  const FuzzReport a = fuzz_main_inequality(8, th, cfg, 5);
  cfg.workers = 3;
  const FuzzReport b = fuzz_main_inequality(8, th, cfg, 5);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(a.trials[i].quotient, b.trials[i].quotient);
    EXPECT_EQ(a.trials[i].f, b.trials[i].f);
  }
}

TEST(MobiusAction, NormPreservedAndSubharmonic) {
  const weights::WeightParams p(2, 2.0);
  std::mt19937_64 rng(31);
  for (int k = 0; k < 3; ++k) {
    const MobiusMap m = MobiusMap::random(2, 0.5, rng);
    const TestFunction f = TestFunction::exp_harmonic(-1.0, geometry::random_direction(2, rng));
    const MobiusActionReport rep = certify_mobius_action(f, m, p);
    EXPECT_TRUE(rep.passed()) << rep.z_score << " " << rep.min_log_laplacian;
  }
}

TEST(BoundaryDecay, AdmissibleFunctionsDecay) {
  const weights::WeightParams p(3, 2.0);
  EXPECT_TRUE(boundary_decay_check(TestFunction::one(), p).passed);
  EXPECT_TRUE(boundary_decay_check(TestFunction::exp_harmonic(1.0, unit(3, 0)), p).passed);
  std::mt19937_64 rng(8);
  EXPECT_TRUE(boundary_decay_check(TestFunction::extremizer(MobiusMap::random(3, 0.5, rng), p), p).passed);
}
