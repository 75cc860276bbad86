#pragma once

#include <cstdint>
#include <vector>

#include "fkball/geometry.hpp"
#include "fkball/weights.hpp"

namespace fkball::sampling {

/// Seed of substream `index` derived from `master` (splitmix64 finalizer).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

/// Importance sample for integrals against Phi_n^alpha dtau.
///
/// Points y are drawn from q = (1 - |y|^2)^(alpha(n-1)) dtau, which is
/// |y|^2 ~ Beta(n/2, alpha(n-1) - n + 1) with a uniform direction. The radial
/// coordinate is stratified: sample i uses the quantile (i + U_i) / N. The
/// returned points are x = focus^-1(y), so the sample concentrates where
/// the extremizer attached to `focus` carries its mass. Nothing is truncated.
struct SampleSet {
  int n = 0;
  double alpha = 0.0;
  std::vector<geometry::Point> x;
  /// Phi_n^alpha(|x|) / (1 - |focus(x)|^2)^(alpha(n-1)).
  std::vector<double> weight;
  /// tau-measure represented by each point: Z_q / (N (1 - |y|^2)^(alpha(n-1))).
  std::vector<double> tau_mass;
  /// Z_q = q(B) = 2^n pi^(n/2) B(n/2, alpha(n-1) - n + 1) / Gamma(n/2).
  double proposal_mass = 0.0;
  /// int_B Phi_n^alpha dtau.
  double target_mass = 0.0;

  std::size_t size() const { return x.size(); }
  /// Factor turning mean(|f|^2 weight) into the normalized norm ||f||^2.
  double norm_scale() const { return proposal_mass / target_mass; }
};

SampleSet draw(const weights::WeightParams& params, std::size_t count,
               std::uint64_t seed, const geometry::MobiusMap& focus);

SampleSet draw(const weights::WeightParams& params, std::size_t count,
               std::uint64_t seed);

}  // namespace fkball::sampling
