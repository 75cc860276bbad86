#include "fkball/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fkball/errors.hpp"
#include "parallel.hpp"

namespace fkball::concentration {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_inside(const Point& x, const char* what) {
  if (!(x.squaredNorm() < 1.0)) {
    throw DomainError(std::string(what) + ": point must lie in the open unit ball");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string fmt_point(const Point& p) {
  std::ostringstream os;
  os.precision(4);
  os << '(';
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? "," : "") << p(i);
  os << ')';
  return os.str();
}

// Points within rounding of the unit sphere are moved back inside.
void clamp_inside(Point& x) {
  if (x.squaredNorm() >= 1.0) x *= (1.0 - 1e-15) / x.norm();
}

// Symmetry class of |f|: radial, axial about `axis`, or none.
struct Symmetry {
  enum Kind { radial, axial, general } kind = radial;
  Point axis;
};

Symmetry axial_about(const Point& a) {
  const double norm = a.norm();
  if (norm == 0.0) return {};
  return {Symmetry::axial, a / norm};
}

Symmetry merge(const Symmetry& x, const Symmetry& y) {
  if (x.kind == Symmetry::general || y.kind == Symmetry::general) return {Symmetry::general, {}};
  if (x.kind == Symmetry::radial) return y;
  if (y.kind == Symmetry::radial) return x;
  if (std::abs(std::abs(x.axis.dot(y.axis)) - 1.0) < 1e-14) return x;
  return {Symmetry::general, {}};
}

Symmetry symmetry(const TestFunction& f) {
  return std::visit(
      overloaded{
          [](const One&) { return Symmetry{}; },
          [](const Extremizer& e) { return axial_about(e.m.center()); },
          [](const ExpHarmonic& e) {
            return e.lambda == 0.0 ? Symmetry{} : axial_about(e.zeta);
          },
          [](const Power& p) {
            return p.p == 0.0 ? Symmetry{} : symmetry(*p.base);
          },
          [](const Product& p) {
            Symmetry s;
            for (const auto& g : p.factors) s = merge(s, symmetry(g));
            return s;
          },
          [](const Composed& c) {
            const Symmetry inner = symmetry(*c.base);
            if (inner.kind == Symmetry::radial) return axial_about(c.m.center());
            return Symmetry{Symmetry::general, {}};
          },
      },
      f.variant());
}

// Unit vector orthogonal to e.
Point orthogonal_to(const Point& e) {
  Eigen::Index k = 0;
  e.cwiseAbs().minCoeff(&k);
  Point w = Point::Zero(e.size());
  w(k) = 1.0;
  w -= w.dot(e) * e;
  return w.normalized();
}

double sphere_ratio(int n) {
  // |S^(n-2)| / |S^(n-1)|
  return std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - 1.0))) /
         std::sqrt(std::numbers::pi);
}

// int_0^T t^(n/2-1) exp(alpha E(t)) (1-t)^(alpha(n-1)-n) A(t) dt where A is
// |f|^2 averaged over the sphere of radius sqrt(t).
double radial_integral(const TestFunction& f, const Symmetry& sym,
                       const weights::WeightParams& params, double T,
                       const NumericsConfig& cfg) {
  const int n = params.n();
  const double alpha = params.alpha();
  const double p = alpha * (n - 1.0) - n;
  const double gap = 1.0 - T;
  const Point e = sym.kind == Symmetry::axial ? sym.axis : Point(Point::Unit(n, 0));
  const Point w = orthogonal_to(e);
  const double ratio = sphere_ratio(n);
  const double tol = std::max(cfg.quad_tol, 1e-13);

  auto sphere_average = [&](double r) {
    if (sym.kind == Symmetry::radial) {
      const double v = f.log_abs(Point(r * e));
      return std::exp(2.0 * v);
    }
    const numerics::QuadResult inner = numerics::tanh_sinh(
        [&](const numerics::Node& node) {
          const double psi = node.x;
          const double s = std::sin(psi);
          Point x = r * (std::cos(psi) * e + s * w);
          clamp_inside(x);
          const double weight = n == 2 ? 1.0 : std::pow(s, n - 2.0);
          return weight * std::exp(2.0 * f.log_abs(x));
        },
        0.0, std::numbers::pi, tol, 8, false);
    return ratio * inner.value;
  };

  const numerics::QuadResult res = numerics::tanh_sinh(
      [&](const numerics::Node& node) {
        const double t = node.x;
        const double one_minus_t = gap + node.to_b;
        if (one_minus_t <= 0.0 || t >= 1.0) return 0.0;
        const double avg = sphere_average(std::min(std::sqrt(t), 1.0 - 0x1p-53));
        if (avg == 0.0) return 0.0;
        return std::pow(t, 0.5 * n - 1.0) *
               std::exp(alpha * weights::log_phi_exponent(n, t) + p * std::log(one_minus_t)) *
               avg;
      },
      0.0, T, tol, cfg.quad_max_level, false);
  return res.value;
}

// Variance of a mean over radially stratified samples from adjacent strata
// pairs; the larger of the two pairings, so that a jump between pairs is seen.
double paired_variance(const std::vector<double>& h) {
  const std::size_t N = h.size();
  if (N < 3) return 0.0;
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= N;
  double best = 0.0;
  for (std::size_t offset = 0; offset < 2; ++offset) {
    double acc = 0.0;
    std::size_t k = offset;
    for (; k + 1 < N; k += 2) {
      const double d = h[k] - h[k + 1];
      acc += d * d;
    }
    for (std::size_t j = 0; j < offset; ++j) acc += (h[j] - mean) * (h[j] - mean);
    if (k < N) acc += (h[k] - mean) * (h[k] - mean);
    best = std::max(best, acc);
  }
  return best / (static_cast<double>(N) * N);
}

sampling::SampleSet draw_for(const TestFunction& f, const weights::WeightParams& params,
                             const NumericsConfig& cfg, std::uint64_t seed) {
  const auto focus = f.focus();
  if (focus) return sampling::draw(params, cfg.samples, seed, *focus);
  return sampling::draw(params, cfg.samples, seed);
}

Estimate mc_norm(const TestFunction& f, const sampling::SampleSet& samples) {
  std::vector<double> h(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    h[i] = std::exp(2.0 * f.log_abs(samples.x[i])) * samples.weight[i];
    sum += h[i];
  }
  const double scale = samples.norm_scale();
  return {scale * sum / samples.size(), scale * std::sqrt(paired_variance(h)),
          "monte-carlo"};
}

using detail::parallel_for;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

TestFunction random_factor(const weights::WeightParams& params, std::mt19937_64& rng) {
  const int n = params.n();
  TestFunction g;
  if (uniform(rng, 0.0, 1.0) < 0.5) {
    g = TestFunction::exp_harmonic(uniform(rng, -2.0, 0.0),
                                   geometry::random_direction(n, rng));
  } else {
    g = TestFunction::extremizer(MobiusMap::random(n, 0.7, rng), params);
  }
  if (uniform(rng, 0.0, 1.0) < 0.4) g = TestFunction::power(g, uniform(rng, 0.25, 2.0));
  return g;
}

TestFunction random_function(const weights::WeightParams& params, std::mt19937_64& rng) {
  const int count = std::uniform_int_distribution<int>(1, 3)(rng);
  if (count == 1) return random_factor(params, rng);
  std::vector<TestFunction> factors;
  for (int k = 0; k < count; ++k) factors.push_back(random_factor(params, rng));
  return TestFunction::product(std::move(factors));
}

DomainSpec random_domain(int n, std::mt19937_64& rng, std::uint64_t seed) {
  const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
  switch (kind) {
    case 0:
      return DomainSpec::mobius_ball(MobiusMap::random(n, 0.8, rng), log_uniform(rng, 0.2, 50.0));
    case 1:
      return DomainSpec::cap(n, uniform(rng, -0.5, 0.5), uniform(rng, 0.5, 0.85), 4000, seed);
    case 2: {
      geometry::BallUnion u;
      for (int k = 0; k < 2; ++k) {
        const double norm = uniform(rng, 0.0, 0.7);
        u.balls.push_back({geometry::random_direction(n, rng) * norm, uniform(rng, 0.2, 0.6)});
      }
      return DomainSpec::ball_union(u, 4000, seed);
    }
    default:
      return DomainSpec::centered_ball(n, log_uniform(rng, 0.2, 50.0));
  }
}

void finish(FuzzReport& report) {
  report.violations = 0;
  report.min_deficit = std::numeric_limits<double>::infinity();
  for (const auto& t : report.trials) {
    if (t.violation) ++report.violations;
    report.min_deficit = std::min(report.min_deficit, t.deficit);
  }
  if (report.trials.empty()) report.min_deficit = 0.0;
}

}  // namespace

// ---------------------------------------------------------------- TestFunction

TestFunction TestFunction::one() { return TestFunction(One{}); }

TestFunction TestFunction::extremizer(const MobiusMap& m, const weights::WeightParams& params) {
  if (m.dim() != params.n()) {
    throw DomainError("TestFunction::extremizer: map dimension differs from n");
  }
  return TestFunction(Extremizer{m, params.n(), params.alpha()});
}

TestFunction TestFunction::exp_harmonic(double lambda, const Point& zeta) {
  if (std::abs(zeta.norm() - 1.0) > 1e-12) {
    throw DomainError("TestFunction::exp_harmonic: zeta must be a unit vector");
  }
  if (!std::isfinite(lambda)) {
    throw DomainError("TestFunction::exp_harmonic: lambda must be finite");
  }
  return TestFunction(ExpHarmonic{lambda, zeta});
}

TestFunction TestFunction::power(const TestFunction& base, double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw DomainError("TestFunction::power: exponent must be finite and >= 0");
  }
  return TestFunction(Power{std::make_shared<const TestFunction>(base), p});
}

TestFunction TestFunction::product(std::vector<TestFunction> factors) {
  return TestFunction(Product{std::move(factors)});
}

TestFunction TestFunction::composed(const TestFunction& base, const MobiusMap& m) {
  return TestFunction(Composed{std::make_shared<const TestFunction>(base), m});
}

double TestFunction::log_abs(const Point& x) const {
  require_inside(x, "TestFunction");
  return std::visit(
      overloaded{
          [](const One&) { return 0.0; },
          [&](const Extremizer& e) {
            const Point& a = e.m.center();
            const double t = x.squaredNorm();
            const double a2 = a.squaredNorm();
            const double bracket = 1.0 - 2.0 * x.dot(a) + t * a2;
            const double tm = std::min(e.m.image_norm_sq(x), 1.0);
            const auto& table = weights::LogPhiTable::get(e.n);
            return 0.5 * e.alpha *
                   (table.exponent(tm) - table.exponent(t) +
                    (e.n - 1.0) * std::log((1.0 - a2) / bracket));
          },
          [&](const ExpHarmonic& e) {
            if (e.lambda == 0.0) return 0.0;
            return e.lambda * geometry::poisson_kernel(x, e.zeta);
          },
          [&](const Power& p) {
            if (p.p == 0.0) return 0.0;
            return p.p * p.base->log_abs(x);
          },
          [&](const Product& p) {
            double acc = 0.0;
            for (const auto& g : p.factors) acc += g.log_abs(x);
            return acc;
          },
          [&](const Composed& c) {
            Point y = c.m(x);
            clamp_inside(y);
            return c.base->log_abs(y);
          },
      },
      v_);
}

double TestFunction::operator()(const Point& x) const { return std::exp(log_abs(x)); }

double eval_test_function(const TestFunction& f, const Point& x) { return f(x); }

std::optional<Point> TestFunction::axis() const {
  const Symmetry s = symmetry(*this);
  if (s.kind == Symmetry::axial) return s.axis;
  return std::nullopt;
}

bool TestFunction::is_radial() const { return symmetry(*this).kind == Symmetry::radial; }

bool TestFunction::is_axial() const { return symmetry(*this).kind != Symmetry::general; }

std::optional<MobiusMap> TestFunction::focus() const {
  return std::visit(
      overloaded{
          [](const Extremizer& e) -> std::optional<MobiusMap> { return e.m; },
          [](const Power& p) -> std::optional<MobiusMap> {
            return p.p == 0.0 ? std::nullopt : p.base->focus();
          },
          [](const Product& p) -> std::optional<MobiusMap> {
            for (const auto& g : p.factors) {
              if (auto m = g.focus()) return m;
            }
            return std::nullopt;
          },
          [](const auto&) -> std::optional<MobiusMap> { return std::nullopt; },
      },
      v_);
}

std::string TestFunction::describe() const {
  return std::visit(
      overloaded{
          [](const One&) { return std::string("one"); },
          [](const Extremizer& e) {
            return "extremizer(a=" + fmt_point(e.m.center()) + ")";
          },
          [](const ExpHarmonic& e) {
            return "exp_harmonic(lambda=" + fmt(e.lambda) + ",zeta=" + fmt_point(e.zeta) + ")";
          },
          [](const Power& p) { return "(" + p.base->describe() + ")^" + fmt(p.p); },
          [](const Product& p) {
            if (p.factors.empty()) return std::string("one");
            std::string s;
            for (std::size_t k = 0; k < p.factors.size(); ++k) {
              s += (k ? "*" : "") + p.factors[k].describe();
            }
            return s;
          },
          [](const Composed& c) {
            return c.base->describe() + " o mobius(a=" + fmt_point(c.m.center()) + ")";
          },
      },
      v_);
}

// ---------------------------------------------------------------- DomainSpec

DomainSpec DomainSpec::centered_ball(int n, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("DomainSpec::centered_ball: measure must be positive and finite");
  }
  return DomainSpec(CenteredBall{s, geometry::radius_from_volume(n, s)});
}

DomainSpec DomainSpec::mobius_ball(const MobiusMap& m, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("DomainSpec::mobius_ball: measure must be positive and finite");
  }
  return DomainSpec(MobiusBall{m, s, geometry::radius_from_volume(m.dim(), s)});
}

DomainSpec DomainSpec::predicate(std::function<bool(const Point&)> indicator, double s_est,
                                 double s_error, std::string label) {
  if (!indicator) throw DomainError("DomainSpec::predicate: empty indicator");
  if (!(s_est >= 0.0) || !(s_error >= 0.0)) {
    throw DomainError("DomainSpec::predicate: measure and error must be non-negative");
  }
  return DomainSpec(Predicate{std::move(indicator), s_est, s_error, std::move(label)});
}

DomainSpec DomainSpec::ball_union(const geometry::BallUnion& u, std::size_t samples,
                                  std::uint64_t seed) {
  if (u.balls.empty()) throw DomainError("DomainSpec::ball_union: no balls");
  double s = 0.0;
  double err = 0.0;
  if (u.pairwise_disjoint()) {
    s = u.measure_if_disjoint();
  } else {
    const geometry::Estimate e = geometry::union_measure(u, samples, seed);
    s = e.value;
    err = e.error;
  }
  std::string label = "union[";
  for (std::size_t k = 0; k < u.balls.size(); ++k) {
    label += (k ? ";" : "") + std::string("a=") + fmt_point(u.balls[k].center) +
             ",rho=" + fmt(u.balls[k].rho);
  }
  label += "]";
  return predicate([u](const Point& x) { return u.contains(x); }, s, err, label);
}

DomainSpec DomainSpec::cap(int n, double c, double rho, std::size_t samples,
                           std::uint64_t seed) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("DomainSpec::cap: rho must lie in (0, 1)");
  if (samples == 0) throw DomainError("DomainSpec::cap: need samples");
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Point x = geometry::random_tau_uniform(n, rho, rng);
    if (x(0) > c) ++hits;
  }
  const double volume = geometry::ball_volume(n, rho);
  const double frac = static_cast<double>(hits) / samples;
  // A zero count still carries the binomial uncertainty of one hit.
  const double var = std::max(frac * (1.0 - frac), 1.0 / samples) / samples;
  return predicate(
      [c, rho](const Point& x) { return x(0) > c && x.norm() < rho; }, volume * frac,
      volume * std::sqrt(var), "cap[x1>" + fmt(c) + ",rho=" + fmt(rho) + "]");
}

bool DomainSpec::contains(const Point& x) const {
  return std::visit(
      overloaded{
          [&](const CenteredBall& b) { return x.squaredNorm() < b.radius * b.radius; },
          [&](const MobiusBall& b) { return b.m.image_norm_sq(x) < b.radius * b.radius; },
          [&](const Predicate& p) { return p.indicator(x); },
      },
      v_);
}

double DomainSpec::measure() const {
  return std::visit(overloaded{[](const CenteredBall& b) { return b.s; },
                               [](const MobiusBall& b) { return b.s; },
                               [](const Predicate& p) { return p.s_est; }},
                    v_);
}

double DomainSpec::measure_error() const {
  if (const auto* p = std::get_if<Predicate>(&v_)) return p->s_error;
  return 0.0;
}

std::string DomainSpec::describe() const {
  return std::visit(
      overloaded{
          [](const CenteredBall& b) { return "ball[s=" + fmt(b.s) + "]"; },
          [](const MobiusBall& b) {
            return "mobius_ball[a=" + fmt_point(b.m.center()) + ",s=" + fmt(b.s) + "]";
          },
          [](const Predicate& p) { return p.label; },
      },
      v_);
}

// ---------------------------------------------------------------- norms

Estimate bergman_norm_sq(const TestFunction& f, const weights::WeightParams& params,
                         const NumericsConfig& cfg) {
  const Symmetry sym = symmetry(f);
  if (sym.kind != Symmetry::general) {
    const double J = radial_integral(f, sym, params, 1.0, cfg);
    return {0.5 * params.n() * params.c_alpha() * J, 0.0, "quadrature"};
  }
  return mc_norm(f, draw_for(f, params, cfg, cfg.seed));
}

Estimate concentration_quotient(const TestFunction& f, const DomainSpec& omega,
                                const sampling::SampleSet& samples) {
  const std::size_t N = samples.size();
  std::vector<double> h(N);
  std::vector<char> inside(N);
  double total = 0.0;
  double in = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    h[i] = std::exp(2.0 * f.log_abs(samples.x[i])) * samples.weight[i];
    inside[i] = omega.contains(samples.x[i]) ? 1 : 0;
    total += h[i];
    if (inside[i]) in += h[i];
  }
  if (!(total > 0.0)) throw NonConvergence("concentration_quotient: zero sampled mass");
  const double R = in / total;
  std::vector<double> e(N);
  for (std::size_t i = 0; i < N; ++i) e[i] = h[i] * ((inside[i] ? 1.0 : 0.0) - R);
  const double mean = total / N;
  return {R, std::sqrt(paired_variance(e)) / mean, "monte-carlo"};
}

Estimate concentration_quotient(const TestFunction& f, const DomainSpec& omega,
                                const weights::WeightParams& params,
                                const NumericsConfig& cfg) {
  const Symmetry sym = symmetry(f);
  if (const auto* ball = std::get_if<CenteredBall>(&omega.variant());
      ball && sym.kind != Symmetry::general) {
    const double v = ball->radius;
    const double num = radial_integral(f, sym, params, v * v, cfg);
    const double den = radial_integral(f, sym, params, 1.0, cfg);
    return {num / den, 0.0, "quadrature"};
  }
  return concentration_quotient(f, omega, draw_for(f, params, cfg, cfg.seed));
}

// ---------------------------------------------------------------- rearrangement

SuperlevelProfile superlevel_profile(const TestFunction& f,
                                     const weights::WeightParams& params,
                                     std::span<const double> s_grid,
                                     const NumericsConfig& cfg, ProfilePath path) {
  const int n = params.n();
  const double alpha = params.alpha();
  const double unit_volume =
      std::pow(2.0, n) * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(1.0 + 0.5 * n);
  for (double s : s_grid) {
    if (!(s >= 0.0)) throw DomainError("superlevel_profile: s must be >= 0");
  }

  const bool radial = f.is_radial();
  bool monotone = radial;
  const Point e1 = Point::Unit(n, 0);
  // log u up to the normalizing constant.
  auto log_u = [f, e1, n, alpha](double r) {
    const double t = r * r;
    return 2.0 * f.log_abs(Point(r * e1)) + alpha * (weights::log_phi_exponent(n, t) +
                                                     (n - 1.0) * std::log1p(-t));
  };
  if (radial) {
    double prev = log_u(0.0);
    for (int k = 1; k < 400 && monotone; ++k) {
      const double cur = log_u(1.0 - std::pow(10.0, -6.0 * k / 400.0));
      if (!(cur < prev)) monotone = false;
      prev = cur;
    }
  }
  if (path == ProfilePath::radial && !monotone) {
    throw NonMonotoneRadial("superlevel_profile: u is not radial and strictly decreasing");
  }
  const bool use_radial = path == ProfilePath::radial || (path == ProfilePath::automatic && monotone);

  SuperlevelProfile out;
  out.s.assign(s_grid.begin(), s_grid.end());
  if (use_radial) {
    out.radial_exact = true;
    const Symmetry sym{};
    const double J1 = radial_integral(f, sym, params, 1.0, cfg);
    const double norm_sq = 0.5 * n * params.c_alpha() * J1;
    const double log_scale = std::log(params.c_alpha() / (unit_volume * norm_sq));
    auto u_at = [=](double r) { return std::exp(log_scale + log_u(r)); };
    auto mass = [=](double s) {
      if (s <= 0.0) return 0.0;
      if (std::isinf(s)) return 1.0;
      const double v = geometry::radius_from_volume(n, s);
      return radial_integral(f, sym, params, v * v, cfg) / J1;
    };
    const double u0 = u_at(0.0);
    auto mu = [=](double t) {
      if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
      if (t >= u0) return 0.0;
      const double target = std::log(t) - log_scale;
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (log_u(mid) > target) lo = mid; else hi = mid;
      }
      return geometry::ball_volume(n, 0.5 * (lo + hi));
    };
    for (double s : out.s) {
      const double v = s > 0.0 ? geometry::radius_from_volume(n, s) : 0.0;
      out.u_star.push_back(u_at(v));
      out.I.push_back(mass(s));
      out.I_error.push_back(0.0);
    }
    out.mu = mu;
    out.mass = mass;
    return out;
  }

  const sampling::SampleSet samples = draw_for(f, params, cfg, cfg.seed);
  const auto& table = weights::LogPhiTable::get(n);
  const std::size_t N = samples.size();
  std::vector<double> u(N), m(N);
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const Point& x = samples.x[i];
    const double t = std::min(x.squaredNorm(), 1.0);
    const double log_phi = table.exponent(t) + (n - 1.0) * std::log1p(-t);
    u[i] = 2.0 * f.log_abs(x) + alpha * log_phi;  // log of unnormalized u
    m[i] = std::exp(2.0 * f.log_abs(x)) * samples.weight[i];
    total += m[i];
  }
  // tau(B) mass of the whole sample is infinite in the limit; per-sample u
  // mass is m_i / total, tau mass is samples.tau_mass[i].
  constexpr std::size_t kBatches = 20;
  auto profile_of = [&](std::size_t batch, std::size_t stride, std::vector<double>& I_out,
                        std::vector<double>* u_out) {
    std::vector<std::size_t> idx;
    double batch_total = 0.0;
    for (std::size_t i = batch; i < N; i += stride) {
      idx.push_back(i);
      batch_total += m[i];
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return u[a] > u[b] || (u[a] == u[b] && a < b);
    });
    const double tau_scale = static_cast<double>(stride);
    I_out.assign(out.s.size(), 0.0);
    if (u_out) u_out->assign(out.s.size(), 0.0);
    for (std::size_t g = 0; g < out.s.size(); ++g) {
      double cum_tau = 0.0;
      double cum_mass = 0.0;
      std::size_t k = 0;
      for (; k < idx.size(); ++k) {
        const double next = cum_tau + samples.tau_mass[idx[k]] * tau_scale;
        if (next > out.s[g]) break;
        cum_tau = next;
        cum_mass += m[idx[k]];
      }
      double I = cum_mass / batch_total;
      if (k < idx.size()) {
        // Fraction of the boundary sample inside the level set of measure s.
        const double frac = (out.s[g] - cum_tau) / (samples.tau_mass[idx[k]] * tau_scale);
        I += frac * m[idx[k]] / batch_total;
        if (u_out) (*u_out)[g] = u[idx[k]];
      } else if (u_out) {
        (*u_out)[g] = -std::numeric_limits<double>::infinity();
      }
      I_out[g] = I;
    }
  };
  std::vector<double> u_log;
  profile_of(0, 1, out.I, &u_log);
  const double log_scale =
      std::log(params.c_alpha() / (unit_volume * samples.norm_scale() * total / N));
  for (double lu : u_log) out.u_star.push_back(std::exp(lu + log_scale));

  std::vector<std::vector<double>> batches(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b) profile_of(b, kBatches, batches[b], nullptr);
  for (std::size_t g = 0; g < out.s.size(); ++g) {
    double mean = 0.0;
    for (const auto& b : batches) mean += b[g];
    mean /= kBatches;
    double var = 0.0;
    for (const auto& b : batches) var += (b[g] - mean) * (b[g] - mean);
    var /= (kBatches - 1.0);
    out.I_error.push_back(std::sqrt(var / kBatches));
  }
  // Empirical distribution function of the normalized u.
  std::vector<std::pair<double, double>> sorted;
  sorted.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    sorted.emplace_back(std::exp(u[i] + log_scale), samples.tau_mass[i]);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  auto shared = std::make_shared<std::vector<std::pair<double, double>>>(std::move(sorted));
  out.mu = [shared](double t) {
    double acc = 0.0;
    for (const auto& [value, tau] : *shared) {
      if (!(value > t)) break;
      acc += tau;
    }
    return acc;
  };
  return out;
}

// ---------------------------------------------------------------- fuzzing

FuzzReport fuzz_main_inequality(std::size_t trials, const bounds::ThetaProfile& profile,
                                const NumericsConfig& cfg, std::uint64_t seed) {
  const weights::WeightParams& params = profile.params();
  FuzzReport report;
  report.trials.resize(trials);
  parallel_for(trials, cfg.workers, [&](std::size_t i) {
    const std::uint64_t trial_seed = sampling::substream_seed(seed, i);
    std::mt19937_64 rng(trial_seed);
    const TestFunction f = random_function(params, rng);
    const DomainSpec omega = random_domain(params.n(), rng, trial_seed ^ 0x5bd1e995ULL);
    NumericsConfig local = cfg;
    local.seed = sampling::substream_seed(trial_seed, 1);
    const sampling::SampleSet samples = draw_for(f, params, local, local.seed);
    const Estimate R = concentration_quotient(f, omega, samples);
    FuzzTrial t;
    t.index = i;
    t.f = f.describe();
    t.omega = omega.describe();
    t.s = omega.measure();
    t.s_error = omega.measure_error();
    t.quotient = R.value;
    t.quotient_error = R.error;
    t.bound = profile.theta_table(t.s + 3.0 * t.s_error);
    t.deficit = t.bound - t.quotient;
    t.violation = t.quotient > t.bound + 3.0 * t.quotient_error;
    report.trials[i] = std::move(t);
  });
  finish(report);
  return report;
}

FuzzReport equality_trials(std::size_t trials, const bounds::ThetaProfile& profile,
                           const NumericsConfig& cfg, std::uint64_t seed) {
  const weights::WeightParams& params = profile.params();
  FuzzReport report;
  report.trials.resize(trials);
  parallel_for(trials, cfg.workers, [&](std::size_t i) {
    const std::uint64_t trial_seed = sampling::substream_seed(seed, i);
    std::mt19937_64 rng(trial_seed);
    const MobiusMap m = MobiusMap::random(params.n(), 0.7, rng);
    const double s = log_uniform(rng, 0.2, 50.0);
    const TestFunction f = TestFunction::extremizer(m, params);
    const DomainSpec omega = DomainSpec::mobius_ball(m, s);
    const sampling::SampleSet samples =
        sampling::draw(params, cfg.samples, sampling::substream_seed(trial_seed, 1), m);
    const Estimate R = concentration_quotient(f, omega, samples);
    FuzzTrial t;
    t.index = i;
    t.f = f.describe();
    t.omega = omega.describe();
    t.s = s;
    t.quotient = R.value;
    t.quotient_error = R.error;
    t.bound = profile.theta(s);
    t.deficit = t.bound - t.quotient;
    t.violation = !(std::abs(t.deficit) <= 3.0 * t.quotient_error + 1e-12);
    report.trials[i] = std::move(t);
  });
  finish(report);
  return report;
}

// ---------------------------------------------------------------- Moebius action

MobiusActionReport certify_mobius_action(const TestFunction& f, const MobiusMap& m,
                                         const weights::WeightParams& params,
                                         const NumericsConfig& cfg, std::size_t probes) {
  const int n = params.n();
  const TestFunction g = TestFunction::product(
      {TestFunction::composed(f, m), TestFunction::extremizer(m, params)});
  MobiusActionReport rep;
  rep.norm_f = bergman_norm_sq(f, params, cfg);
  const std::uint64_t g_seed = sampling::substream_seed(cfg.seed, 0x9e37);
  NumericsConfig g_cfg = cfg;
  g_cfg.samples = cfg.samples * 4;
  rep.norm_g = mc_norm(g, sampling::draw(params, g_cfg.samples, g_seed));
  const double err = std::hypot(rep.norm_f.error, rep.norm_g.error);
  const double diff = std::abs(rep.norm_f.value - rep.norm_g.value);
  rep.z_score = err > 0.0 ? diff / err : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  rep.norms_agree = diff <= 3.0 * err + 1e-12 * rep.norm_f.value;

  rep.laplacian_tolerance = 1e-4;
  rep.min_log_laplacian = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(sampling::substream_seed(cfg.seed, 0x7f4a));
  const geometry::PointFunction log_g = [&](const Point& x) { return g.log_abs(x); };
  for (std::size_t k = 0; k < probes; ++k) {
    const Point x = geometry::random_direction(n, rng) * uniform(rng, 0.0, 0.8);
    const double lap = geometry::laplacian_h_fd(log_g, x, cfg.fd_step);
    rep.min_log_laplacian = std::min(rep.min_log_laplacian, lap);
  }
  if (probes == 0) rep.min_log_laplacian = 0.0;
  rep.subharmonic = rep.min_log_laplacian >= -rep.laplacian_tolerance;
  return rep;
}

// ---------------------------------------------------------------- boundary decay

ResidualReport boundary_decay_check(const TestFunction& f,
                                    const weights::WeightParams& params,
                                    std::optional<Point> direction,
                                    std::optional<double> threshold) {
  const int n = params.n();
  const double alpha = params.alpha();
  Point zeta = Point::Unit(n, 0);
  if (direction) {
    zeta = direction->normalized();
  } else {
    std::function<bool(const TestFunction&)> find = [&](const TestFunction& g) {
      return std::visit(overloaded{
                            [&](const ExpHarmonic& e) {
                              if (e.lambda > 0.0) {
                                zeta = -e.zeta;
                                return true;
                              }
                              return false;
                            },
                            [&](const Power& p) { return find(*p.base); },
                            [&](const Product& p) {
                              for (const auto& h : p.factors) {
                                if (find(h)) return true;
                              }
                              return false;
                            },
                            [](const auto&) { return false; },
                        },
                        g.variant());
    };
    find(f);
  }
  ResidualReport rep;
  rep.name = "boundary-decay " + f.describe();
  rep.tolerance = threshold.value_or(1e-3 * std::pow(2.0, alpha));
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (int k = 1; k <= 6; ++k) {
    const double gap = std::pow(10.0, -k);
    const double r = 1.0 - gap;
    const double one_minus_t = gap * (2.0 - gap);
    const double value =
        std::exp(2.0 * f.log_abs(Point(r * zeta)) + alpha * std::log(one_minus_t));
    if (k >= 2 && !(value < prev)) monotone = false;
    prev = value;
    // Residual: the value itself past r = 1 - 1e-4, zero before.
    rep.add(r, value, 0.0, k >= 4 ? value : 0.0);
  }
  if (!monotone) rep.passed = false;
  return rep;
}

}  // namespace fkball::concentration
