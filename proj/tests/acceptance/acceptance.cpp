// One PASS/FAIL line per acceptance criterion; exit code 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fkball/bounds.hpp"
#include "fkball/concentration.hpp"
#include "fkball/geometry.hpp"
#include "fkball/sampling.hpp"
#include "fkball/wavelet.hpp"
#include "fkball/weights.hpp"

using namespace fkball;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<double> lin(double a, double b, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(a + (b - a) * i / (count - 1.0));
  return g;
}

std::vector<double> logspace(double a, double b, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(a * std::pow(b / a, i / (count - 1.0)));
  g.back() = b;
  return g;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome weight_ode() {
  const auto grid = lin(0.05, 0.9, 171);
  double worst = 0.0;
  double worst2 = 0.0;
  bool ok = true;
  for (int n = 2; n <= 6; ++n) {
    const ResidualReport r = weights::certify_weight_ode(n, grid, n == 2 ? 1e-10 : 1e-6);
    ok = ok && r.passed;
    (n == 2 ? worst2 : worst) = std::max(n == 2 ? worst2 : worst, r.max_residual);
  }
  return {ok, "max residual n=3..6 " + sci(worst) + " (< 1e-6), n=2 " + sci(worst2) + " (< 1e-10)"};
}

Outcome closed_forms() {
  double w34 = 0.0;
  double w2 = 0.0;
  for (int i = 0; i <= 990; ++i) {
    const double r = i * 1e-3;
    for (int n : {3, 4}) {
      const double c = weights::phi_closed_form(n, r);
      w34 = std::max(w34, std::abs(weights::phi(n, r) - c) / c);
    }
    const long double rl = r;
    const long double e = 1.0L - rl * rl;
    w2 = std::max(w2, static_cast<double>(std::abs(weights::phi(2, r) - e) / e));
  }
  // "Exact to rounding": within two units in the last place.
  const double ulp2 = 2.0 * std::numeric_limits<double>::epsilon();
  return {w34 < 1e-10 && w2 <= ulp2,
          "Phi3/Phi4 max rel " + sci(w34) + " (< 1e-10), Phi2 max rel " + sci(w2) + " (<= 2 ulp)"};
}

Outcome n2_profile() {
  double worst = 0.0;
  for (double s : logspace(1e-3, 1e3, 100)) {
    const double ref = 1.0 / (4.0 * std::numbers::pi + s);
    worst = std::max(worst, std::abs(geometry::isoperimetric_profile(2, s) - ref) / ref);
  }
  return {worst < 1e-10, "max rel " + sci(worst) + " over 100 s in [1e-3, 1e3] (< 1e-10)"};
}

Outcome theta_ode() {
  const auto grid = logspace(0.1, 50.0, 50);
  bool ok = true;
  double w = 0.0;
  double w2 = 0.0;
  double closed = 0.0;
  for (int n : {2, 3, 4}) {
    for (double alpha : {1.5, 2.0, 3.0}) {
      const bounds::ThetaProfile profile(weights::WeightParams(n, alpha));
      const ResidualReport r = bounds::certify_theta_ode(profile, grid, n == 2 ? 1e-8 : 1e-5);
      ok = ok && r.passed;
      if (n == 2) {
        w2 = std::max(w2, r.max_residual);
        for (double s : grid) {
          const double c = bounds::theta_closed_n2(alpha, s);
          closed = std::max(closed, std::abs(profile.theta(s) - c) / c);
        }
      } else {
        w = std::max(w, r.max_residual);
      }
    }
  }
  ok = ok && closed < 1e-10;
  return {ok, "residual n=3,4 " + sci(w) + " (< 1e-5), n=2 " + sci(w2) +
                  " (< 1e-8), closed theta_2 vs quadrature " + sci(closed) + " (< 1e-10)"};
}

Outcome identities() {
  const auto s_grid = logspace(0.1, 50.0, 50);
  const auto v_grid = lin(0.05, 0.9, 18);
  double claim = 0.0;
  double merk = 0.0;
  bool ok = true;
  for (int n = 2; n <= 6; ++n) {
    const ResidualReport c = bounds::certify_claim(n, s_grid, 1e-4);
    const ResidualReport m = bounds::certify_merk(n, v_grid, 1e-7);
    ok = ok && c.passed && m.passed;
    claim = std::max(claim, c.max_residual);
    merk = std::max(merk, m.max_residual);
  }
  const ResidualReport euler = bounds::certify_euler(lin(0.0, 0.9, 91), 1e-10);
  const ResidualReport gam = bounds::certify_gamma_identity(1e-10);
  const ResidualReport hyp = bounds::certify_hyp_derivative(lin(0.05, 0.8, 76), 1e-6);
  ok = ok && euler.passed && gam.passed && hyp.passed;
  return {ok, "claim " + sci(claim) + ", merk " + sci(merk) + ", Euler " + sci(euler.max_residual) +
                  ", Gamma " + sci(gam.max_residual) + ", 2F1' " + sci(hyp.max_residual)};
}

Outcome fuzz() {
  bool ok = true;
  std::string detail;
  for (int n : {2, 3}) {
    const weights::WeightParams params(n, 2.0);
    const bounds::ThetaProfile profile(params);
    NumericsConfig cfg;
    cfg.workers = workers();
    const auto main = concentration::fuzz_main_inequality(200, profile, cfg, 1000 + n);
    const auto eq = concentration::equality_trials(20, profile, cfg, 2000 + n);
    double zmax = 0.0;
    for (const auto& t : eq.trials) {
      zmax = std::max(zmax, std::abs(t.deficit) / t.quotient_error);
    }
    ok = ok && main.passed() && eq.passed() && main.trials.size() == 200 && eq.trials.size() == 20;
    detail += (n == 2 ? "" : "; ") + std::string("n=") + std::to_string(n) + ": " +
              std::to_string(main.violations) + "/200 violations, equality " +
              std::to_string(eq.violations) + "/20 beyond 3 se (max z " + sci(zmax) + ")";
  }
  return {ok, detail};
}

Outcome rearrangement() {
  const auto grid = lin(0.2, 10.0, 50);
  double wi = 0.0;
  double wd = 0.0;
  for (int n : {2, 3, 4}) {
    const weights::WeightParams params(n, 2.0);
    const bounds::ThetaProfile profile(params);
    const auto sp = concentration::superlevel_profile(concentration::TestFunction::one(), params,
                                                      grid, {}, concentration::ProfilePath::radial);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      wi = std::max(wi, std::abs(sp.I[i] - profile.theta(grid[i])));
      const double d = numerics::derivative(sp.mass, grid[i], 1e-2);
      wd = std::max(wd, std::abs(d - sp.u_star[i]) / sp.u_star[i]);
    }
  }
  return {wi < 1e-8 && wd < 1e-5,
          "|I - theta| " + sci(wi) + " (< 1e-8), |I' - u*|/u* " + sci(wd) + " (< 1e-5)"};
}

Outcome mobius_invariance() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int agree = 0;
  double zmax = 0.0;
  double jac = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = k < 10 ? 2 : 3;
    const weights::WeightParams params(n, 2.0);
    const auto m = geometry::MobiusMap::random(n, 0.5, rng);
    concentration::TestFunction f;
    const double lambda = -2.0 * unif(rng);
    const auto zeta = geometry::random_direction(n, rng);
    switch (k % 3) {
      case 0:
        f = concentration::TestFunction::exp_harmonic(lambda, zeta);
        break;
      case 1:
        f = concentration::TestFunction::extremizer(geometry::MobiusMap::random(n, 0.5, rng), params);
        break;
      default:
        f = concentration::TestFunction::power(
            concentration::TestFunction::exp_harmonic(lambda, zeta), 0.5 + unif(rng));
    }
    NumericsConfig cfg;
    cfg.seed = sampling::substream_seed(77, k);
    const auto rep = concentration::certify_mobius_action(f, m, params, cfg);
    agree += rep.norms_agree;
    zmax = std::max(zmax, rep.z_score);
    for (int j = 0; j < 5; ++j) {
      const geometry::Point x = geometry::random_direction(n, rng) * 0.8 * unif(rng);
      const double exact = geometry::mobius_jacobian(m, x);
      jac = std::max(jac, std::abs(std::abs(geometry::mobius_jacobian_fd(m, x)) - exact) / exact);
    }
  }
  return {agree == 20 && jac < 1e-6, std::to_string(agree) + "/20 norms within 3 se (max z " +
                                         sci(zmax) + "), Jacobian vs FD max rel " + sci(jac) +
                                         " (< 1e-6)"};
}

Outcome window_ode() {
  const int dims[] = {2, 3, 4, 5};
  const ResidualReport r = wavelet::certify_window_ode(dims, 0.5, lin(0.1, 8.0, 80), 1e-8);
  return {r.passed, "max relative residual " + sci(r.max_residual) + " (< 1e-8), K and I windows"};
}

Outcome witnesses() {
  bool ok = true;
  std::string detail;
  wavelet::WitnessSearch search;
  search.workers = workers();
  for (int n = 2; n <= 5; ++n) {
    try {
      const auto w = wavelet::find_negativity_witness(n, search);
      ok = ok && w.certified;
      detail += "n=" + std::to_string(n) + " " + sci(w.fd_value) + "+-" + sci(w.fd_error) + "; ";
    } catch (const std::exception& e) {
      ok = false;
      detail += "n=" + std::to_string(n) + " none; ";
    }
    const double bound = wavelet::limit_positivity_bound(n);
    for (double y : lin(1e-3, 0.99 * bound, 50)) {
      ok = ok && wavelet::theorem42_limit_expression(n, y) > 0.0;
    }
  }
  const auto control = wavelet::n1_control(search);
  ok = ok && control.witness_free;
  detail += "limit expression > 0 for y1 < " + sci(wavelet::limit_positivity_bound(2)) +
            "; n=1 min " + sci(control.min_value) + " vs FD error " + sci(control.error_at_min);
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"weight ODE certification", 10, weight_ode},
      {"closed-form weight oracles", 5, closed_forms},
      {"n=2 isoperimetric profile", 5, n2_profile},
      {"theta ODE certification", 60, theta_ode},
      {"identity suite", 30, identities},
      {"main-inequality fuzz", 600, fuzz},
      {"rearrangement consistency", 10, rearrangement},
      {"Moebius invariance", 120, mobius_invariance},
      {"wavelet window ODE", 5, window_ode},
      {"negativity witnesses", 60, witnesses},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %2zu %-28s %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", i + 1, c.name,
                out.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
