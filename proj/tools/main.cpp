#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "fkball/bounds.hpp"
#include "fkball/concentration.hpp"
#include "fkball/errors.hpp"
#include "fkball/geometry.hpp"
#include "fkball/wavelet.hpp"
#include "fkball/weights.hpp"

namespace {

using namespace fkball;
using cli::Table;
using cli::UsageError;
using nlohmann::json;

constexpr const char* kOutputDirEnv = "FKBALL_OUTPUT_DIR";

struct RunConfig {
  std::string command;
  std::string target;  // certify target or wavelet mode
  int n = 2;
  double alpha = 2.0;
  std::optional<double> tol;
  std::uint64_t seed = 20240611;
  std::size_t samples = 20000;
  unsigned workers = 1;
  std::string format = "auto";
  std::string output;
  std::string output_dir;
  bool timing = false;
  std::string grid;
  std::string f = "one";
  std::string omega = "ball:s=1";
  std::size_t trials = 200;
  std::size_t equality = 20;
  std::optional<double> beta;
  double t = 1e-3;

  NumericsConfig numerics() const {
    NumericsConfig cfg;
    cfg.seed = seed;
    cfg.samples = samples;
    cfg.workers = workers;
    return cfg;
  }

  json to_json() const {
    json j = {{"command", command}, {"n", n},         {"alpha", alpha},
              {"seed", seed},       {"samples", samples}, {"workers", workers},
              {"format", format}};
    if (!target.empty()) j["target"] = target;
    if (tol) j["tol"] = *tol;
    if (!grid.empty()) j["grid"] = grid;
    if (command == "concentrate") {
      j["f"] = f;
      j["omega"] = omega;
    }
    if (command == "fuzz") {
      j["trials"] = trials;
      j["equality"] = equality;
    }
    if (command == "wavelet") {
      if (beta) j["beta"] = *beta;
      j["t"] = t;
    }
    return j;
  }
};

/// What a command hands back for output.
struct Result {
  Result() = default;
  explicit Result(Table t) : table(std::move(t)) {}

  Table table;
  json summary = json::object();
  std::vector<std::string> failures;
};

std::vector<double> grid_or(const RunConfig& rc, const std::string& fallback) {
  return cli::parse_grid(rc.grid.empty() ? fallback : rc.grid);
}

weights::WeightParams make_params(const RunConfig& rc) {
  if (rc.n < 2) throw UsageError("--n must be >= 2 for this command");
  if (!(rc.alpha > 1.0)) throw UsageError("--alpha must be > 1");
  return weights::WeightParams(rc.n, rc.alpha, rc.numerics());
}

void record(Result& res, const ResidualReport& rep) {
  cli::append_report(res.table, rep);
  res.summary["checks"].push_back(cli::report_summary(rep));
  if (!rep.passed) {
    res.failures.push_back(rep.name + ": max residual " + cli::format_double(rep.max_residual) +
                           " at x = " + cli::format_double(rep.worst_x) + " exceeds " +
                           cli::format_double(rep.tolerance));
  }
}

Result cmd_phi(const RunConfig& rc) {
  if (rc.n < 2) throw UsageError("--n must be >= 2");
  const std::vector<double> grid = grid_or(rc, "0:0.99:0.01");
  for (double r : grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("phi: grid values must lie in [0, 1]");
  }
  const bool closed = rc.n <= 4;
  const double tol = rc.tol.value_or(1e-10);
  Result res{Table{{"r", "phi", "closed", "diff", "tolerance", "pass"}, {}}};
  double worst = 0.0;
  for (double r : grid) {
    const double v = weights::phi(rc.n, r);
    const double c = closed ? weights::phi_closed_form(rc.n, r) : std::nan("");
    double diff = std::nan("");
    if (closed) diff = c == 0.0 ? std::abs(v) : std::abs(v - c) / std::abs(c);
    const bool pass = !closed || diff <= tol;
    if (closed) worst = std::max(worst, diff);
    res.table.add({r, v, c, diff, tol, pass});
    if (!pass) res.failures.push_back("phi r = " + cli::format_double(r) + ": relative diff " +
                                      cli::format_double(diff));
  }
  res.summary = {{"points", grid.size()}, {"closed_form", closed}};
  if (closed) res.summary["max_diff"] = worst;
  return res;
}

Result cmd_theta(const RunConfig& rc) {
  const weights::WeightParams params = make_params(rc);
  const bounds::ThetaProfile profile(params, rc.numerics());
  const std::vector<double> grid = grid_or(rc, "log:0.01:100:41");
  for (double s : grid) {
    if (!(s >= 0.0)) throw UsageError("theta: grid values must be >= 0");
  }
  // n = 2 is compared with the closed form, other n with the inverse round trip.
  const bool closed = rc.n == 2;
  const double tol = rc.tol.value_or(closed ? 1e-10 : 1e-8);
  Result res{Table{{"s", "v", "theta", "oracle", "diff", "tolerance", "pass"}, {}}};
  double worst = 0.0;
  for (double s : grid) {
    const double v = geometry::radius_from_volume(rc.n, s);
    const double th = profile.theta(s);
    double oracle = 0.0;
    double diff = 0.0;
    if (closed) {
      oracle = bounds::theta_closed_n2(rc.alpha, s);
      diff = oracle == 0.0 ? std::abs(th) : std::abs(th - oracle) / oracle;
    } else {
      oracle = th < 1.0 ? profile.inverse(th) : s;
      diff = s == 0.0 ? std::abs(oracle) : std::abs(oracle - s) / s;
    }
    worst = std::max(worst, diff);
    const bool pass = diff <= tol;
    res.table.add({s, v, th, oracle, diff, tol, pass});
    if (!pass) res.failures.push_back("theta s = " + cli::format_double(s) + ": diff " +
                                      cli::format_double(diff));
  }
  res.summary = {{"points", grid.size()},
                 {"oracle", closed ? "closed form" : "inverse round trip"},
                 {"max_diff", worst},
                 {"s_max_table", profile.s_max()}};
  return res;
}

Result cmd_certify(const RunConfig& rc) {
  static const std::vector<std::string> targets = {
      "weight-ode", "theta-ode",       "merk",           "claim",
      "euler",      "gamma-identity",  "hyp-derivative", "radius-derivative"};
  std::vector<std::string> run;
  if (rc.target == "all") {
    run = targets;
    if (!rc.grid.empty()) throw UsageError("certify all does not take --grid");
  } else if (std::find(targets.begin(), targets.end(), rc.target) != targets.end()) {
    run = {rc.target};
  } else {
    throw UsageError("unknown certify target '" + rc.target + "'");
  }
  const weights::WeightParams params = make_params(rc);
  const int n = rc.n;
  Result res{cli::residual_table()};
  res.summary["checks"] = json::array();
  std::optional<bounds::ThetaProfile> profile;
  for (const std::string& which : run) {
    if (which == "weight-ode") {
      const auto grid = grid_or(rc, "0.05:0.9:0.01");
      record(res, weights::certify_weight_ode(n, grid, rc.tol.value_or(n == 2 ? 1e-10 : 1e-6)));
    } else if (which == "theta-ode") {
      if (!profile) profile.emplace(params, rc.numerics());
      const auto grid = grid_or(rc, "log:0.1:50:50");
      record(res, bounds::certify_theta_ode(*profile, grid, rc.tol.value_or(n == 2 ? 1e-8 : 1e-5)));
      if (n == 2) {
        ResidualReport closed;
        closed.name = "theta-closed-n2";
        closed.tolerance = 1e-10;
        for (double s : grid) {
          const double ref = bounds::theta_closed_n2(rc.alpha, s);
          const double th = profile->theta(s);
          closed.add(s, th, ref, std::abs(th - ref) / ref);
        }
        record(res, closed);
      }
    } else if (which == "merk") {
      record(res, bounds::certify_merk(n, grid_or(rc, "0.05:0.9:0.05"), rc.tol.value_or(1e-7)));
    } else if (which == "claim") {
      record(res, bounds::certify_claim(n, grid_or(rc, "log:0.1:50:50"), rc.tol.value_or(1e-4)));
    } else if (which == "euler") {
      record(res, bounds::certify_euler(grid_or(rc, "0:0.9:0.01"), rc.tol.value_or(1e-10)));
    } else if (which == "gamma-identity") {
      record(res, bounds::certify_gamma_identity(rc.tol.value_or(1e-10)));
    } else if (which == "hyp-derivative") {
      record(res, bounds::certify_hyp_derivative(grid_or(rc, "0.05:0.8:0.01"), rc.tol.value_or(1e-6)));
    } else if (which == "radius-derivative") {
      record(res, bounds::certify_radius_derivative(n, grid_or(rc, "log:0.1:50:50"),
                                                    rc.tol.value_or(1e-6)));
    }
  }
  return res;
}

Result cmd_concentrate(const RunConfig& rc) {
  const weights::WeightParams params = make_params(rc);
  const NumericsConfig cfg = rc.numerics();
  const concentration::TestFunction f = cli::parse_function(rc.f, params);
  const concentration::DomainSpec omega =
      cli::parse_domain(rc.omega, rc.n, rc.samples, sampling::substream_seed(rc.seed, 1));
  const bounds::ThetaProfile profile(params, cfg);
  const concentration::Estimate est = concentration::concentration_quotient(f, omega, params, cfg);
  const double s = omega.measure();
  const double s_err = omega.measure_error();
  const double bound = profile.theta(s + 3.0 * s_err);
  const double slack = rc.tol.value_or(1e-12);
  const bool pass = est.value <= bound + 3.0 * est.error + slack;
  Result res{Table{{"f", "omega", "s", "s_error", "quotient", "error", "method", "theta",
                    "deficit", "pass"},
                   {}}};
  res.table.add({f.describe(), omega.describe(), s, s_err, est.value, est.error, est.method,
                 bound, bound - est.value, pass});
  res.summary = {{"quotient", est.value}, {"error", est.error}, {"method", est.method},
                 {"s", s},                {"theta", bound},     {"passed", pass}};
  if (!pass) {
    res.failures.push_back("quotient " + cli::format_double(est.value) + " exceeds theta(s) " +
                           cli::format_double(bound) + " by more than 3 standard errors");
  }
  return res;
}

void add_trials(Result& res, const std::string& kind, const concentration::FuzzReport& rep) {
  for (const auto& t : rep.trials) {
    res.table.add({kind, static_cast<long long>(t.index), t.f, t.omega, t.s, t.s_error,
                   t.quotient, t.quotient_error, t.bound, t.deficit, !t.violation});
    if (t.violation) {
      res.failures.push_back(kind + " trial " + std::to_string(t.index) + ": " + t.f + " on " +
                             t.omega + ", quotient " + cli::format_double(t.quotient) +
                             ", bound " + cli::format_double(t.bound));
    }
  }
  res.summary[kind] = {{"trials", rep.trials.size()},
                       {"violations", rep.violations},
                       {"min_deficit", rep.min_deficit},
                       {"passed", rep.passed()}};
}

Result cmd_fuzz(const RunConfig& rc) {
  const weights::WeightParams params = make_params(rc);
  const NumericsConfig cfg = rc.numerics();
  const bounds::ThetaProfile profile(params, cfg);
  Result res{Table{{"kind", "trial", "f", "omega", "s", "s_error", "quotient", "error",
                    "bound", "deficit", "pass"},
                   {}}};
  add_trials(res, "inequality",
             concentration::fuzz_main_inequality(rc.trials, profile, cfg, rc.seed));
  if (rc.equality > 0) {
    add_trials(res, "equality",
               concentration::equality_trials(rc.equality, profile, cfg,
                                              sampling::substream_seed(rc.seed, 0xe9)));
  }
  return res;
}

Result cmd_wavelet(const RunConfig& rc) {
  Result res;
  if (rc.target == "witness" || rc.target == "control") {
    wavelet::WitnessSearch search;
    search.workers = rc.workers;
    res.table = Table{{"n", "y1", "t", "value", "error", "closed", "equivalence", "pass"}, {}};
    if (rc.target == "control" || rc.n == 1) {
      const wavelet::ControlReport c = wavelet::n1_control(search);
      res.table.add({1LL, c.y1, c.t, c.min_value, c.error_at_min, std::nan(""), std::nan(""),
                     c.witness_free});
      res.summary = {{"n", 1},          {"min_value", c.min_value},
                     {"y1", c.y1},      {"t", c.t},
                     {"error", c.error_at_min}, {"max_abs_closed", c.max_abs_closed},
                     {"witness_free", c.witness_free}};
      if (!c.witness_free) res.failures.push_back("n = 1 control shows a witness");
      return res;
    }
    if (rc.n < 2) throw UsageError("--n must be >= 1");
    try {
      const wavelet::WitnessReport w = wavelet::find_negativity_witness(rc.n, search);
      res.table.add({static_cast<long long>(w.n), w.y1, w.t, w.fd_value, w.fd_error,
                     w.closed_value, w.equivalence, w.certified});
      res.summary = {{"n", w.n},
                     {"y1", w.y1},
                     {"t", w.t},
                     {"laplacian_log_u", w.fd_value},
                     {"fd_error", w.fd_error},
                     {"closed_form", w.closed_value},
                     {"equivalence", w.equivalence},
                     {"certified", w.certified},
                     {"evaluated_points", w.evaluated_points}};
      if (!w.certified) res.failures.push_back("witness not certified");
    } catch (const NoWitnessFound& e) {
      res.failures.push_back(e.what());
    }
    return res;
  }
  if (rc.n < 1) throw UsageError("--n must be >= 1");
  if (rc.target == "ode") {
    const double offset = rc.beta ? *rc.beta - 0.5 * rc.n : 0.5;
    if (!(offset > 0.0)) throw UsageError("--beta must exceed n/2");
    const std::vector<int> dims = {rc.n};
    res.table = cli::residual_table();
    res.summary["checks"] = json::array();
    record(res, wavelet::certify_window_ode(dims, offset, grid_or(rc, "0.1:8:0.1"),
                                            rc.tol.value_or(1e-8)));
    ResidualReport power;
    power.name = "power-window";
    power.tolerance = 1e-12;
    const wavelet::WindowSpec spec = wavelet::WindowSpec::make(rc.n, 0.5 * rc.n + offset);
    for (double r : grid_or(rc, "0.1:8:0.1")) {
      const double e = wavelet::power_first_order_residual(spec, r);
      power.add(r, e, 0.0, e);
    }
    record(res, power);
    return res;
  }
  if (rc.target == "limits") {
    if (rc.n < 2) throw UsageError("limits need --n >= 2");
    if (!(rc.t > 0.0)) throw UsageError("--t must be positive");
    const auto grid = grid_or(rc, "0.1:0.6:0.05");
    res.table = cli::residual_table();
    res.summary["checks"] = json::array();
    record(res, wavelet::check_limits(rc.n, grid, rc.t, rc.tol.value_or(5e-2)));
    const double bound = wavelet::limit_positivity_bound(rc.n);
    ResidualReport pos;
    pos.name = "limit-positivity";
    pos.tolerance = 0.0;
    for (double y1 : grid) {
      if (y1 >= bound) continue;
      const double v = wavelet::theorem42_limit_expression(rc.n, y1);
      pos.add(y1, v, 0.0, v > 0.0 ? 0.0 : 1.0);
    }
    record(res, pos);
    res.summary["y1_max"] = bound;
    return res;
  }
  throw UsageError("unknown wavelet mode '" + rc.target + "' (witness, control, ode, limits)");
}

std::string resolve_format(const RunConfig& rc) {
  if (rc.format != "auto") return rc.format;
  return rc.command == "phi" || rc.command == "theta" ? "csv" : "json";
}

std::string resolve_output(const RunConfig& rc, const std::string& format) {
  namespace fs = std::filesystem;
  std::string dir = rc.output_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(kOutputDirEnv)) dir = env;
  }
  if (!rc.output.empty()) {
    const fs::path p(rc.output);
    if (p.is_absolute() || dir.empty()) return rc.output;
    return (fs::path(dir) / p).string();
  }
  if (dir.empty()) return {};
  std::string name = rc.command;
  if (!rc.target.empty()) name += "-" + rc.target;
  return (fs::path(dir) / (name + "." + format)).string();
}

int emit(const RunConfig& rc, const Result& res, std::optional<double> seconds) {
  const std::string format = resolve_format(rc);
  const std::string path = resolve_output(rc, format);
  std::FILE* out = stdout;
  if (!path.empty()) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    out = std::fopen(path.c_str(), "w");
    if (!out) throw UsageError("cannot open output file '" + path + "'");
  }
  if (format == "csv") {
    cli::write_csv(out, res.table);
    for (const auto& f : res.failures) std::fprintf(stderr, "FAIL: %s\n", f.c_str());
  } else {
    json results = res.summary;
    results["rows"] = cli::table_to_json(res.table);
    json doc = {{"config", rc.to_json()},
                {"results", results},
                {"failures", res.failures},
                {"timing", seconds ? json{{"seconds", *seconds}} : json(nullptr)}};
    std::fprintf(out, "%s\n", doc.dump(2).c_str());
  }
  if (out != stdout) std::fclose(out);
  return res.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp concentration bounds for hyperbolic Bergman spaces on the unit ball"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; keys are long flag names", false);
  app.get_config_ptr()->configurable(false);

  RunConfig rc;
  app.add_option("--n", rc.n, "Dimension")->capture_default_str();
  app.add_option("--alpha", rc.alpha, "Weight exponent (> 1)")->capture_default_str();
  app.add_option("--tol", rc.tol, "Override the tolerance of the check");
  app.add_option("--seed", rc.seed, "Master seed")->capture_default_str();
  app.add_option("--samples", rc.samples, "Monte Carlo samples per estimate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--workers", rc.workers, "Worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--format", rc.format, "csv, json or auto (csv for phi/theta)")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "csv", "json"}));
  app.add_option("--output", rc.output, "Output file (default: stdout)");
  app.add_option("--output-dir", rc.output_dir,
                 std::string("Directory for output files (default: $") + kOutputDirEnv + ")");
  app.add_flag("--timing", rc.timing, "Report wall time in the JSON output");
  app.add_option("--grid", rc.grid, "Grid: x | x1,x2,... | a:b:step | log:a:b:count");
  app.add_option("--f", rc.f, "Test function, e.g. one, extremizer:a=0.3, exp:lambda=-1:zeta=1")
      ->capture_default_str();
  app.add_option("--omega", rc.omega, "Domain, e.g. ball:s=2, mobius:s=2:a=0.3, cap:c=0:rho=0.7")
      ->capture_default_str();
  app.add_option("--trials", rc.trials, "Fuzz trials")->capture_default_str();
  app.add_option("--equality", rc.equality, "Equality-family trials")->capture_default_str();
  app.add_option("--beta", rc.beta, "Window exponent (default n/2 + 1/2)");
  app.add_option("--t", rc.t, "Height for the limit checks")->capture_default_str();

  app.add_subcommand("phi", "Tabulate Phi_n against its closed forms");
  app.add_subcommand("theta", "Tabulate theta(s)");
  auto* certify = app.add_subcommand("certify", "Certify identities on default grids");
  certify
      ->add_option("target", rc.target,
                   "weight-ode | theta-ode | merk | claim | euler | gamma-identity | "
                   "hyp-derivative | radius-derivative | all")
      ->required();
  app.add_subcommand("concentrate", "Concentration quotient of f on omega");
  app.add_subcommand("fuzz", "Randomized checks of the main inequality and equality family");
  auto* wave = app.add_subcommand("wavelet", "Wavelet window checks");
  wave->add_option("mode", rc.target, "witness | control | ode | limits")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : 2;
  }
  rc.command = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  Result res;
  try {
    if (rc.command == "phi") res = cmd_phi(rc);
    else if (rc.command == "theta") res = cmd_theta(rc);
    else if (rc.command == "certify") res = cmd_certify(rc);
    else if (rc.command == "concentrate") res = cmd_concentrate(rc);
    else if (rc.command == "fuzz") res = cmd_fuzz(rc);
    else res = cmd_wavelet(rc);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    res = Result{};
    res.failures.push_back(std::string("error: ") + e.what());
  }
  std::optional<double> seconds;
  if (rc.timing) {
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  try {
    return emit(rc, res, seconds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }
}
