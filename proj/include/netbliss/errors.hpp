#pragma once

#include <stdexcept>
#include <string>

namespace netbliss {

/// Malformed input file (network, shock vector, records, correlation grid).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(location_prefix(line, column) + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string location_prefix(int line, int column) {
    if (line <= 0) return "";
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", col " + std::to_string(column);
    return s + ": ";
  }
  int line_ = 0;
  int column_ = 0;
};

/// Numerical failure: a solver missed its tolerance within its iteration cap,
/// or an estimator produced a non-finite weight.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace netbliss
