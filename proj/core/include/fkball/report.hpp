#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace fkball {

/// One evaluated point of a certification run.
struct ResidualRow {
  double x = 0.0;         // grid coordinate (r, s, v, ...)
  double value = 0.0;     // quantity computed by the code under test
  double reference = 0.0; // what it should equal
  double residual = 0.0;  // |value - reference|, relative where documented
};

/// Outcome of checking an identity on a grid.
struct ResidualReport {
  std::string name;
  double tolerance = 0.0;
  std::vector<ResidualRow> rows;
  double max_residual = 0.0;
  double worst_x = 0.0;
  bool passed = true;

  void add(double x, double value, double reference, double residual) {
    rows.push_back({x, value, reference, residual});
    // A NaN residual is sticky and fails the report.
    const bool worse = rows.size() == 1 || std::isnan(residual) ||
                       (!std::isnan(max_residual) && residual > max_residual);
    if (worse) {
      max_residual = residual;
      worst_x = x;
    }
    if (!(residual <= tolerance)) passed = false;
  }
};

}  // namespace fkball
