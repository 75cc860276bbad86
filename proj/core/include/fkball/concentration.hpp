#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fkball/bounds.hpp"
#include "fkball/geometry.hpp"
#include "fkball/numerics.hpp"
#include "fkball/report.hpp"
#include "fkball/sampling.hpp"
#include "fkball/weights.hpp"

namespace fkball::concentration {

using geometry::MobiusMap;
using geometry::Point;

class TestFunction;

struct One {};

/// g(x) = Phi_n^(alpha/2)(|m(x)|) / Phi_n^(alpha/2)(|x|).
struct Extremizer {
  MobiusMap m;
  int n;
  double alpha;
};

/// exp(lambda P(x, zeta)) with the Poisson kernel P.
struct ExpHarmonic {
  double lambda;
  Point zeta;
};

/// |base|^p.
struct Power {
  std::shared_ptr<const TestFunction> base;
  double p;
};

struct Product {
  std::vector<TestFunction> factors;
};

/// base(m(x)).
struct Composed {
  std::shared_ptr<const TestFunction> base;
  MobiusMap m;
};

/// Symbolic admissible function; log|f| is M-subharmonic for every variant.
class TestFunction {
 public:
  using Variant = std::variant<One, Extremizer, ExpHarmonic, Power, Product, Composed>;

  TestFunction() : v_(One{}) {}

  static TestFunction one();
  static TestFunction extremizer(const MobiusMap& m, const weights::WeightParams& params);
  static TestFunction exp_harmonic(double lambda, const Point& zeta);
  /// Throws DomainError for p < 0.
  static TestFunction power(const TestFunction& base, double p);
  static TestFunction product(std::vector<TestFunction> factors);
  static TestFunction composed(const TestFunction& base, const MobiusMap& m);

  const Variant& variant() const { return v_; }

  double operator()(const Point& x) const;
  /// log|f(x)|; -inf where f vanishes.
  double log_abs(const Point& x) const;

  /// When |f| depends only on |x| and <x, e>, the unit axis e. Radial
  /// functions report std::nullopt from axis() and true from is_radial().
  std::optional<Point> axis() const;
  bool is_radial() const;
  bool is_axial() const;

  /// Moebius map of the first extremizer factor, if any.
  std::optional<MobiusMap> focus() const;

  std::string describe() const;

 private:
  explicit TestFunction(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

double eval_test_function(const TestFunction& f, const Point& x);

/// Measurable subset of the ball with its invariant measure.
struct CenteredBall {
  double s;
  double radius;  // v(s), filled in by DomainSpec::centered_ball
};

/// m^-1(B_s) = {x : |m(x)| < v(s)}, a hyperbolic ball of measure s.
struct MobiusBall {
  MobiusMap m;
  double s;
  double radius;  // v(s)
};

struct Predicate {
  std::function<bool(const Point&)> indicator;
  double s_est;
  double s_error;  // one standard error of s_est, 0 when exact
  std::string label;
};

class DomainSpec {
 public:
  using Variant = std::variant<CenteredBall, MobiusBall, Predicate>;

  static DomainSpec centered_ball(int n, double s);
  static DomainSpec mobius_ball(const MobiusMap& m, double s);
  static DomainSpec predicate(std::function<bool(const Point&)> indicator,
                              double s_est, double s_error, std::string label);
  /// Union of hyperbolic balls; exact measure when disjoint, MC otherwise.
  static DomainSpec ball_union(const geometry::BallUnion& u, std::size_t samples,
                               std::uint64_t seed);
  /// {x_1 > c} intersected with the centered ball B(rho), measure by uniform
  /// tau sampling in B(rho).
  static DomainSpec cap(int n, double c, double rho, std::size_t samples,
                        std::uint64_t seed);

  const Variant& variant() const { return v_; }
  bool contains(const Point& x) const;
  double measure() const;
  double measure_error() const;
  std::string describe() const;

 private:
  explicit DomainSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;     // one standard error; 0 on quadrature paths
  std::string method;     // "quadrature" or "monte-carlo"
};

/// ||f||^2 normalized so that ||1|| = 1. Axially symmetric f use a 2-D
/// tanh-sinh rule in (t, angle); everything else uses sampling::draw.
Estimate bergman_norm_sq(const TestFunction& f, const weights::WeightParams& params,
                         const NumericsConfig& cfg = {});

/// R_n(f, Omega). Quadrature for axially symmetric f on centered balls,
/// otherwise a self-normalized ratio estimate with delta-method error.
Estimate concentration_quotient(const TestFunction& f, const DomainSpec& omega,
                                const weights::WeightParams& params,
                                const NumericsConfig& cfg = {});

/// Same ratio on a given sample (shared samples give exact monotonicity and
/// scaling properties).
Estimate concentration_quotient(const TestFunction& f, const DomainSpec& omega,
                                const sampling::SampleSet& samples);

/// Distribution data of u = |f|^2 Phi_n^alpha, normalized to unit tau-mass.
struct SuperlevelProfile {
  bool radial_exact = false;
  std::vector<double> s;
  std::vector<double> u_star;    // decreasing rearrangement at s
  std::vector<double> I;         // mass of u on the superlevel set of measure s
  std::vector<double> I_error;   // batch-means standard error (MC path)
  /// mu(t) = tau({u > t}); empirical on the MC path.
  std::function<double(double)> mu;
  /// I_n(s) at arbitrary s; radial path only.
  std::function<double(double)> mass;
};

enum class ProfilePath { automatic, radial, monte_carlo };

/// The radial path requires u radial and strictly decreasing, otherwise
/// NonMonotoneRadial. The MC path sorts sampled u values.
SuperlevelProfile superlevel_profile(const TestFunction& f,
                                     const weights::WeightParams& params,
                                     std::span<const double> s_grid,
                                     const NumericsConfig& cfg = {},
                                     ProfilePath path = ProfilePath::automatic);

struct FuzzTrial {
  std::size_t index = 0;
  std::string f;
  std::string omega;
  double s = 0.0;
  double s_error = 0.0;
  double quotient = 0.0;
  double quotient_error = 0.0;
  double bound = 0.0;    // theta at s + 3 s_error
  double deficit = 0.0;  // bound - quotient
  bool violation = false;
};

struct FuzzReport {
  std::vector<FuzzTrial> trials;
  std::size_t violations = 0;
  double min_deficit = 0.0;
  bool passed() const { return violations == 0; }
};

/// Random products/powers of ExpHarmonic (lambda in [-2, 0]) and Extremizer
/// (|a| <= 0.7) factors against random Moebius balls, caps, two-ball unions
/// and centered balls. Violation: R > theta(s + 3 s_error) + 3 error.
/// Trial i uses substream_seed(seed, i); results do not depend on workers.
FuzzReport fuzz_main_inequality(std::size_t trials, const bounds::ThetaProfile& profile,
                                const NumericsConfig& cfg, std::uint64_t seed);

/// Extremizer(m) on m^-1(B_s) for random m and s: |R - theta(s)| must stay
/// below 3 standard errors.
FuzzReport equality_trials(std::size_t trials, const bounds::ThetaProfile& profile,
                           const NumericsConfig& cfg, std::uint64_t seed);

struct MobiusActionReport {
  Estimate norm_f;
  Estimate norm_g;
  double z_score = 0.0;             // |difference| / combined error
  double min_log_laplacian = 0.0;   // min of Delta_h log|g| on the probe points
  double laplacian_tolerance = 0.0;
  bool norms_agree = false;
  bool subharmonic = false;
  bool passed() const { return norms_agree && subharmonic; }
};

/// g = f(m(x)) Phi^(alpha/2)(|m(x)|) / Phi^(alpha/2)(|x|). The two norms come
/// from independent estimates (g never reuses the samples of f).
MobiusActionReport certify_mobius_action(const TestFunction& f, const MobiusMap& m,
                                         const weights::WeightParams& params,
                                         const NumericsConfig& cfg = {},
                                         std::size_t probes = 16);

/// |f(r zeta)|^2 (1 - r^2)^alpha on r = 1 - 10^-k. Passes when the tail is
/// decreasing and below `threshold` (default 1e-3 * 2^alpha) at r = 1 - 1e-4.
/// Without an explicit direction the ray is e_1, or -zeta of the first
/// ExpHarmonic factor with lambda > 0.
ResidualReport boundary_decay_check(const TestFunction& f,
                                    const weights::WeightParams& params,
                                    std::optional<Point> direction = std::nullopt,
                                    std::optional<double> threshold = std::nullopt);

}  // namespace fkball::concentration
