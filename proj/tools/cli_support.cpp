#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "fkball/geometry.hpp"

namespace fkball::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw, const std::string& context) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("not a number in " + context + ": '" + raw + "'");
  }
  return v;
}

geometry::Point to_point(const std::string& raw, int n, const std::string& context) {
  const auto parts = split(raw, ',');
  if (parts.empty() || static_cast<int>(parts.size()) > n) {
    throw UsageError(context + ": need 1.." + std::to_string(n) + " coordinates");
  }
  geometry::Point p = geometry::Point::Zero(n);
  for (std::size_t k = 0; k < parts.size(); ++k) p(k) = to_double(parts[k], context);
  return p;
}

/// "name:k=v:k=v" -> name and ordered key/value pairs (keys may repeat).
struct Spec {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : args) {
      if (k == key) return &v;
    }
    return nullptr;
  }
  const std::string& need(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw UsageError("'" + name + "' needs " + key + "=...");
    return *v;
  }
  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : args) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) throw UsageError("'" + name + "' does not take " + k + "=");
    }
  }
};

Spec parse_spec(const std::string& text) {
  const auto parts = split(trim(text), ':');
  if (parts.empty() || trim(parts[0]).empty()) throw UsageError("empty specification");
  Spec spec{trim(parts[0]), {}};
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto eq = parts[k].find('=');
    if (eq == std::string::npos) {
      throw UsageError("expected key=value in '" + text + "', got '" + parts[k] + "'");
    }
    spec.args.emplace_back(trim(parts[k].substr(0, eq)), parts[k].substr(eq + 1));
  }
  return spec;
}

concentration::TestFunction parse_factor(const std::string& text,
                                         const weights::WeightParams& params) {
  using concentration::TestFunction;
  std::string body = text;
  std::optional<double> power;
  if (const auto caret = text.find('^'); caret != std::string::npos) {
    body = text.substr(0, caret);
    power = to_double(text.substr(caret + 1), "power of '" + text + "'");
    if (*power < 0.0) throw UsageError("negative power in '" + text + "'");
  }
  const Spec spec = parse_spec(body);
  const int n = params.n();
  TestFunction f;
  if (spec.name == "one") {
    spec.allow({});
    f = TestFunction::one();
  } else if (spec.name == "extremizer") {
    spec.allow({"a"});
    geometry::Point a = geometry::Point::Zero(n);
    if (const std::string* v = spec.find("a")) a = to_point(*v, n, "extremizer a");
    if (!(a.norm() < 1.0 - 1e-12)) throw UsageError("extremizer: need |a| < 1");
    f = TestFunction::extremizer(geometry::MobiusMap::involution(a), params);
  } else if (spec.name == "exp") {
    spec.allow({"lambda", "zeta"});
    const double lambda = to_double(spec.need("lambda"), "exp lambda");
    geometry::Point zeta = to_point(spec.need("zeta"), n, "exp zeta");
    if (zeta.norm() == 0.0) throw UsageError("exp: zeta must be nonzero");
    zeta.normalize();
    f = TestFunction::exp_harmonic(lambda, zeta);
  } else {
    throw UsageError("unknown function '" + spec.name + "' (one, extremizer, exp)");
  }
  return power ? TestFunction::power(f, *power) : f;
}

}  // namespace

std::vector<double> parse_grid(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw UsageError("empty grid");
  std::vector<double> grid;
  if (text.rfind("log:", 0) == 0) {
    const auto parts = split(text.substr(4), ':');
    if (parts.size() != 3) throw UsageError("log grid is log:a:b:count");
    const double a = to_double(parts[0], "grid");
    const double b = to_double(parts[1], "grid");
    const double c = to_double(parts[2], "grid");
    if (!(a > 0.0 && b > a) || c < 2 || c != std::floor(c) || c > 1e7) {
      throw UsageError("log grid needs 0 < a < b and an integer count >= 2");
    }
    const auto count = static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < count; ++i) {
      grid.push_back(a * std::pow(b / a, static_cast<double>(i) / (count - 1)));
    }
    grid.back() = b;
    return grid;
  }
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("range grid is a:b:step");
    const double a = to_double(parts[0], "grid");
    const double b = to_double(parts[1], "grid");
    const double step = to_double(parts[2], "grid");
    if (!(step > 0.0) || b < a) throw UsageError("range grid needs a <= b and step > 0");
    const double span = (b - a) / step;
    if (span > 1e7) throw UsageError("range grid has too many points");
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(a + i * step);
    return grid;
  }
  for (const auto& part : split(text, ',')) grid.push_back(to_double(part, "grid"));
  return grid;
}

concentration::TestFunction parse_function(const std::string& text,
                                           const weights::WeightParams& params) {
  const auto parts = split(trim(text), '*');
  if (parts.empty()) throw UsageError("empty function");
  if (parts.size() == 1) return parse_factor(parts[0], params);
  std::vector<concentration::TestFunction> factors;
  for (const auto& p : parts) factors.push_back(parse_factor(p, params));
  return concentration::TestFunction::product(std::move(factors));
}

concentration::DomainSpec parse_domain(const std::string& text, int n,
                                       std::size_t samples, std::uint64_t seed) {
  using concentration::DomainSpec;
  const Spec spec = parse_spec(text);
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw UsageError(std::string(what) + " must be positive");
    return v;
  };
  auto radius = [](double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(what) + " must lie in (0, 1)");
    return v;
  };
  if (spec.name == "ball") {
    spec.allow({"s"});
    return DomainSpec::centered_ball(n, positive(to_double(spec.need("s"), "ball s"), "s"));
  }
  if (spec.name == "mobius") {
    spec.allow({"s", "a"});
    const double s = positive(to_double(spec.need("s"), "mobius s"), "s");
    const geometry::Point a = to_point(spec.need("a"), n, "mobius a");
    if (!(a.norm() < 1.0 - 1e-12)) throw UsageError("mobius: need |a| < 1");
    return DomainSpec::mobius_ball(geometry::MobiusMap::involution(a), s);
  }
  if (spec.name == "cap") {
    spec.allow({"c", "rho"});
    const double c = to_double(spec.need("c"), "cap c");
    const double rho = radius(to_double(spec.need("rho"), "cap rho"), "rho");
    return DomainSpec::cap(n, c, rho, samples, seed);
  }
  if (spec.name == "union") {
    spec.allow({"rho", "a"});
    const double rho = radius(to_double(spec.need("rho"), "union rho"), "rho");
    geometry::BallUnion u;
    for (const auto& [k, v] : spec.args) {
      if (k != "a") continue;
      const geometry::Point a = to_point(v, n, "union a");
      if (!(a.norm() < 1.0 - 1e-12)) throw UsageError("union: need |a| < 1");
      u.balls.push_back({a, rho});
    }
    if (u.balls.empty()) throw UsageError("union needs at least one a=...");
    return DomainSpec::ball_union(u, samples, seed);
  }
  throw UsageError("unknown domain '" + spec.name + "' (ball, mobius, cap, union)");
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add: row width");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) {
            if (ch == '"') q += '"';
            q += ch;
          }
          return q + "\"";
        }
      },
      c);
}

}  // namespace

void write_csv(std::FILE* out, const Table& table) {
  std::string line;
  for (std::size_t k = 0; k < table.columns.size(); ++k) {
    line += (k ? "," : "") + table.columns[k];
  }
  std::fprintf(out, "%s\n", line.c_str());
  for (const auto& row : table.rows) {
    line.clear();
    for (std::size_t k = 0; k < row.size(); ++k) line += (k ? "," : "") + csv_cell(row[k]);
    std::fprintf(out, "%s\n", line.c_str());
  }
}

nlohmann::json table_to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit([&](const auto& v) { obj[table.columns[k]] = v; }, row[k]);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

Table residual_table() {
  return Table{{"check", "x", "value", "reference", "diff", "tolerance", "pass"}, {}};
}

void append_report(Table& table, const ResidualReport& report) {
  for (const auto& r : report.rows) {
    table.add({report.name, r.x, r.value, r.reference, r.residual, report.tolerance,
               r.residual <= report.tolerance});
  }
}

nlohmann::json report_summary(const ResidualReport& report) {
  return {{"check", report.name},
          {"points", report.rows.size()},
          {"max_residual", report.max_residual},
          {"worst_x", report.worst_x},
          {"tolerance", report.tolerance},
          {"passed", report.passed}};
}

}  // namespace fkball::cli
