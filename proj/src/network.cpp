#include "netbliss/network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "netbliss/clearing.hpp"

namespace netbliss {

Network build_network(const Eigen::MatrixXd& nominal_liabilities,
                      const Eigen::VectorXd& external_liabilities,
                      const Eigen::VectorXd& initial_liquid_assets,
                      const Eigen::VectorXd& illiquid_units,
                      InverseDemand demand) {
  const auto n = nominal_liabilities.rows();
  if (n < 1 || nominal_liabilities.cols() != n) {
    throw std::invalid_argument("network: liabilities matrix must be square and nonempty");
  }
  if (external_liabilities.size() != n || initial_liquid_assets.size() != n ||
      illiquid_units.size() != n) {
    throw std::invalid_argument("network: vector lengths must match the matrix dimension");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (nominal_liabilities(i, i) != 0.0) {
      throw std::invalid_argument("network: nonzero self-liability at bank " +
                                  std::to_string(i + 1));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (nominal_liabilities(i, j) < 0.0) {
        throw std::invalid_argument("network: negative liability entry at bank " +
                                    std::to_string(i + 1));
      }
    }
    if (!(external_liabilities(i) > 0.0)) {
      throw std::invalid_argument("network: external liability of bank " + std::to_string(i + 1) +
                                  " must be positive");
    }
    if (!(initial_liquid_assets(i) > 0.0)) {
      throw std::invalid_argument("network: initial liquid assets of bank " +
                                  std::to_string(i + 1) + " must be positive");
    }
    if (illiquid_units(i) < 0.0) {
      throw std::invalid_argument("network: negative illiquid units at bank " +
                                  std::to_string(i + 1));
    }
  }

  Network net;
  net.n = static_cast<int>(n);
  net.nominal_liabilities = nominal_liabilities;
  net.external_liabilities = external_liabilities;
  net.initial_liquid_assets = initial_liquid_assets;
  net.illiquid_units = illiquid_units;
  net.total_illiquid = illiquid_units.sum();
  net.total_liabilities = external_liabilities + nominal_liabilities.rowwise().sum();
  net.relative_liabilities = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (net.total_liabilities(i) > 0.0) {
      net.relative_liabilities.row(i) = nominal_liabilities.row(i) / net.total_liabilities(i);
    }
  }

  if (std::abs(demand.ebar() - net.total_illiquid) > 1e-9 * std::max(1.0, net.total_illiquid)) {
    throw std::invalid_argument(
        "network: inverse demand domain bound does not match total illiquid units");
  }
  net.inverse_demand = std::move(demand);
  return net;
}

namespace {

ValidationCheck check_pass(std::string name) { return {std::move(name), true, ""}; }

ValidationCheck check_fail(std::string name, std::string detail) {
  return {std::move(name), false, std::move(detail)};
}

}  // namespace

ValidationReport validate_assumptions(const Network& net) {
  ValidationReport report;
  const auto& d = net.inverse_demand;

  if (d.degenerate()) {
    // No illiquid units anywhere: the demand curve never acts.
    report.checks.push_back(check_pass("demand: Q(0) > Q(ebar) > 0 (vacuous, ebar = 0)"));
    report.checks.push_back(check_pass("demand: strictly decreasing (vacuous)"));
    report.checks.push_back(check_pass("demand: x*Q(x) strictly increasing (vacuous)"));
  } else {
    if (d.qbar() > d.floor_price() && d.floor_price() > 0.0) {
      report.checks.push_back(check_pass("demand: Q(0) > Q(ebar) > 0"));
    } else {
      report.checks.push_back(check_fail("demand: Q(0) > Q(ebar) > 0",
                                         "Q(0)=" + std::to_string(d.qbar()) +
                                             " Q(ebar)=" + std::to_string(d.floor_price())));
    }
    // Probe monotonicity on a dense grid; construction already enforces the
    // family-specific conditions, this re-checks the curve as evaluated.
    const int grid = 1000;
    bool decreasing = true, proceeds_increasing = true;
    double bad_x = 0.0, bad_px = 0.0;
    double prev_q = d(0.0), prev_xq = 0.0;
    for (int k = 1; k <= grid; ++k) {
      const double x = net.total_illiquid * static_cast<double>(k) / grid;
      const double q = d(x);
      if (!(q < prev_q)) {
        decreasing = false;
        bad_x = x;
      }
      if (!(x * q > prev_xq)) {
        proceeds_increasing = false;
        bad_px = x;
      }
      prev_q = q;
      prev_xq = x * q;
    }
    report.checks.push_back(decreasing
                                ? check_pass("demand: strictly decreasing")
                                : check_fail("demand: strictly decreasing",
                                             "violated near x=" + std::to_string(bad_x)));
    report.checks.push_back(proceeds_increasing
                                ? check_pass("demand: x*Q(x) strictly increasing")
                                : check_fail("demand: x*Q(x) strictly increasing",
                                             "violated near x=" + std::to_string(bad_px)));
  }

  // Balance-sheet margin: every bank owes at least one monetary unit more
  // than its illiquid plus inter-bank assets are nominally worth.
  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < net.n; ++i) {
      const double in_assets = net.relative_liabilities.col(i).dot(net.total_liabilities);
      const double bound = 1.0 + net.inverse_demand.qbar() * net.illiquid_units(i) + in_assets;
      if (net.total_liabilities(i) < bound) {
        ok = false;
        detail = "bank " + std::to_string(i + 1) + ": total liabilities " +
                 std::to_string(net.total_liabilities(i)) + " < " + std::to_string(bound);
        break;
      }
    }
    report.checks.push_back(ok ? check_pass("balance margin: liabilities exceed illiquid + "
                                            "inter-bank assets by one unit")
                               : check_fail("balance margin: liabilities exceed illiquid + "
                                            "inter-bank assets by one unit",
                                            detail));
  }

  report.assumptions_ok = true;
  for (const auto& c : report.checks) report.assumptions_ok = report.assumptions_ok && c.pass;

  // Initial solvency, via the clearing solver at the initial liquid assets.
  {
    const ClearingOutcome at_start = clear(net, net.initial_liquid_assets);
    if (at_start.defaults.empty()) {
      report.initially_solvent = true;
      report.checks.push_back(check_pass("initial solvency: all banks pay in full at S0"));
    } else {
      report.initially_solvent = false;
      std::ostringstream os;
      os << at_start.defaults.size() << " bank(s) short at S0, first: bank "
         << (at_start.defaults.front() + 1) << " (price " << at_start.price << ")";
      report.checks.push_back(check_fail("initial solvency: all banks pay in full at S0",
                                         os.str()));
    }
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) {
    os << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
    if (!c.pass && !c.detail.empty()) os << " -- " << c.detail;
    os << "\n";
  }
  os << (report.assumptions_ok ? "assumptions: ok" : "assumptions: VIOLATED") << "\n";
  if (!report.initially_solvent) {
    os << "note: system is not initially solvent; estimates remain valid but the "
          "no-default baseline does not hold\n";
  }
  return os.str();
}

}  // namespace netbliss
