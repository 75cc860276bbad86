#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fkball/concentration.hpp"
#include "fkball/report.hpp"

namespace fkball::cli {

/// Malformed argument or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid syntax:
///   "x"                 single value
///   "x1,x2,..."         explicit list
///   "a:b:step"          a, a + step, ..., up to b inclusive
///   "log:a:b:count"     count log-spaced values from a to b
std::vector<double> parse_grid(const std::string& text);

/// Test-function syntax, factors joined by '*', each optionally raised by
/// '^p':
///   one
///   extremizer[:a=x1,x2,...]     Moebius involution about a (default 0)
///   exp:lambda=L:zeta=z1,z2,...  zeta is normalized
/// Vectors shorter than n are padded with zeros.
concentration::TestFunction parse_function(const std::string& text,
                                           const weights::WeightParams& params);

/// Domain syntax:
///   ball:s=S
///   mobius:s=S:a=x1,...            {x : |sigma_a(x)| < v(S)}
///   cap:c=C:rho=R                  {x_1 > C} within B(R)
///   union:rho=R:a=...:a=...        hyperbolic balls sigma_a(B(R))
concentration::DomainSpec parse_domain(const std::string& text, int n,
                                       std::size_t samples, std::uint64_t seed);

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Fixed-width scientific form with 17 significant digits.
std::string format_double(double v);

void write_csv(std::FILE* out, const Table& table);
nlohmann::json table_to_json(const Table& table);

/// Columns check, x, value, reference, diff, tolerance, pass.
Table residual_table();
void append_report(Table& table, const ResidualReport& report);
nlohmann::json report_summary(const ResidualReport& report);

}  // namespace fkball::cli
