#include "fkball/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "fkball/errors.hpp"

namespace fkball::sampling {

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleSet draw(const weights::WeightParams& params, std::size_t count,
               std::uint64_t seed, const geometry::MobiusMap& focus) {
  const int n = params.n();
  const double alpha = params.alpha();
  if (focus.dim() != n) {
    throw DomainError("sampling::draw: focus map has the wrong dimension");
  }
  if (count == 0) {
    throw DomainError("sampling::draw: need at least one sample");
  }
  const double a = 0.5 * n;
  const double b = alpha * (n - 1.0) - n + 1.0;
  const double q_exp = alpha * (n - 1.0);

  SampleSet set;
  set.n = n;
  set.alpha = alpha;
  set.proposal_mass = std::pow(2.0, n) * std::pow(std::numbers::pi, a) *
                      boost::math::beta(a, b) / std::tgamma(a);
  set.target_mass = params.total_mass();
  set.x.reserve(count);
  set.weight.reserve(count);
  set.tau_mass.reserve(count);

  const weights::LogPhiTable& table = weights::LogPhiTable::get(n);
  const geometry::Point& center = focus.center();
  const double one_minus_a2 = 1.0 - center.squaredNorm();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit;
  for (std::size_t i = 0; i < count; ++i) {
    const double p = (static_cast<double>(i) + unit(rng)) / count;
    // Draw 1 - t from the mirrored Beta so that it keeps full precision.
    const double one_minus_t = boost::math::ibeta_inv(b, a, 1.0 - p);
    const double t = 1.0 - one_minus_t;
    const geometry::Point y = geometry::random_direction(n, rng) * std::sqrt(t);
    const geometry::Point yq = focus.rotation().transpose() * y;
    geometry::Point x = geometry::sigma(center, yq);
    // Points within rounding of the sphere are pulled back inside; the weight
    // below uses the exact 1 - |x|^2.
    if (x.squaredNorm() >= 1.0) x *= (1.0 - 1e-15) / x.norm();
    // 1 - |x|^2 = (1 - |a|^2)(1 - |y|^2) / [y, a]^2.
    const double bracket = 1.0 - 2.0 * yq.dot(center) + t * center.squaredNorm();
    const double ratio = one_minus_a2 / bracket;
    const double tx = x.squaredNorm();
    const double log_w = alpha * (table.exponent(std::min(tx, 1.0)) + (n - 1.0) * std::log(ratio));
    set.x.push_back(x);
    set.weight.push_back(std::exp(log_w));
    set.tau_mass.push_back(set.proposal_mass / count * std::exp(-q_exp * std::log(one_minus_t)));
  }
  return set;
}

SampleSet draw(const weights::WeightParams& params, std::size_t count,
               std::uint64_t seed) {
  return draw(params, count, seed, geometry::MobiusMap::identity(params.n()));
}

}  // namespace fkball::sampling
