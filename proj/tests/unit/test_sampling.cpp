#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fkball/sampling.hpp"

using namespace fkball;
using namespace fkball::sampling;

TEST(Substream, DistinctAndDeterministic) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(substream_seed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(substream_seed(42, 7), substream_seed(42, 7));
  EXPECT_NE(substream_seed(42, 7), substream_seed(43, 7));
}

TEST(Draw, Deterministic) {
  const weights::WeightParams p(3, 2.0);
  const SampleSet a = draw(p, 500, 9);
  const SampleSet b = draw(p, 500, 9);
  const SampleSet c = draw(p, 500, 10);
  ASSERT_EQ(a.size(), 500u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.x[i], b.x[i]);
    EXPECT_EQ(a.weight[i], b.weight[i]);
  }
  EXPECT_NE(a.x[0], c.x[0]);
}

TEST(Draw, PointsInsideAndMassesConsistent) {
  for (int n : {2, 3, 5}) {
    const weights::WeightParams p(n, 2.5);
    const SampleSet s = draw(p, 4000, 1);
    EXPECT_NEAR(s.target_mass, p.total_mass(), 1e-12 * p.total_mass());
    double mean_w = 0.0;
    double tau = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_LT(s.x[i].norm(), 1.0);
      EXPECT_GT(s.weight[i], 0.0);
      mean_w += s.weight[i];
      tau += s.tau_mass[i];
    }
    mean_w /= s.size();
    // ||1||^2 = 1; the stratified estimate is far more accurate than iid.
    EXPECT_NEAR(mean_w * s.norm_scale(), 1.0, 1e-3) << n;
    EXPECT_GT(tau, 0.0);
  }
}

TEST(Draw, StratifiedRadii) {
  // With identity focus the weight ratio is a function of |x| only, and the
  // radial quantiles of the proposal are stratified: each of N equal-mass
  // shells receives exactly one point.
  const weights::WeightParams p(2, 3.0);
  const std::size_t N = 1000;
  const SampleSet s = draw(p, N, 5);
  // For n = 2, alpha = 3: |y|^2 ~ Beta(1, 2), CDF 1 - (1 - t)^2.
  std::vector<int> count(N, 0);
  for (const auto& x : s.x) {
    const double t = x.squaredNorm();
    const double u = 1 - (1 - t) * (1 - t);
    const auto k = std::min<std::size_t>(N - 1, static_cast<std::size_t>(u * N));
    ++count[k];
  }
  for (int c : count) EXPECT_EQ(c, 1);
}

TEST(Draw, FocusMovesMass) {
  const weights::WeightParams p(2, 2.0);
  std::mt19937_64 rng(3);
  geometry::Point a(2);
  a << 0.6, 0.0;
  const geometry::MobiusMap m = geometry::MobiusMap::involution(a);
  const SampleSet s = draw(p, 2000, 4, m);
  double mean_x = 0.0;
  for (const auto& x : s.x) mean_x += x(0);
  EXPECT_GT(mean_x / s.size(), 0.3);
}
