#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netbliss/inverse_demand.hpp"

namespace netbliss {

/// Full balance-sheet state of the banking system. Immutable after
/// construction; safe to share across concurrent trial workers.
struct Network {
  int n = 0;
  Eigen::MatrixXd nominal_liabilities;   // inter-bank obligations, zero diagonal
  Eigen::VectorXd external_liabilities;  // obligations to entities outside the system
  Eigen::VectorXd total_liabilities;     // cached row sums + external
  Eigen::MatrixXd relative_liabilities;  // pro-rata payment shares, cached
  Eigen::VectorXd initial_liquid_assets;
  Eigen::VectorXd illiquid_units;
  double total_illiquid = 0.0;
  InverseDemand inverse_demand;
};

/// Validates sign/shape constraints, caches the derived quantities, and
/// returns the assembled system. Throws std::invalid_argument on bad input.
Network build_network(const Eigen::MatrixXd& nominal_liabilities,
                      const Eigen::VectorXd& external_liabilities,
                      const Eigen::VectorXd& initial_liquid_assets,
                      const Eigen::VectorXd& illiquid_units,
                      InverseDemand demand);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;  // offending bank / x-value on failure
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  /// Standing assumptions on the demand curve plus the balance-sheet margin
  /// condition. These are what the solvency-threshold reformulation needs.
  bool assumptions_ok = true;
  /// Whether every bank pays in full when cleared at the initial assets.
  /// Reported separately: calibrated real-world systems can violate it while
  /// every estimator here remains valid.
  bool initially_solvent = true;
};

ValidationReport validate_assumptions(const Network& net);

std::string format_report(const ValidationReport& report);

}  // namespace netbliss
