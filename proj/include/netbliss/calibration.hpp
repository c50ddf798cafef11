#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "netbliss/network.hpp"
#include "netbliss/shocks.hpp"

namespace netbliss {

struct RawBankRecord {
  std::string name;
  double total_assets = 0.0;
  double net_worth = 0.0;
  double interbank_assets = 0.0;
  double equity_vol = 0.0;  // annualized fraction
  bool listed = true;       // unlisted banks carry an index-vol proxy
};

/// CSV with header: name,total_assets,net_worth,interbank_assets,
/// equity_vol_pct,listed. Values in millions, volatility in percent.
std::vector<RawBankRecord> load_bank_records(const std::string& path);

/// Dense numeric grid, one row per line; either triangular (row i holds i+1
/// entries) or full square.
Eigen::MatrixXd load_correlation(const std::string& path);

Eigen::VectorXd load_vector(const std::string& path);

struct TopologySpec {
  enum class Kind { complete, ring, core_periphery, custom };
  Kind kind = Kind::complete;
  int core_size = 10;            // largest banks by total assets
  Eigen::MatrixXi adjacency;     // custom only; zero diagonal

  static TopologySpec complete() { return {}; }
  static TopologySpec ring();
  static TopologySpec core_periphery(int core = 10);
  static TopologySpec custom(Eigen::MatrixXi adjacency);
};

struct LiabilitySplit {
  Eigen::VectorXd total;     // assets minus net worth
  Eigen::VectorXd external;  // common fraction alpha of the total
  double alpha = 0.0;
};

LiabilitySplit split_liabilities(const std::vector<RawBankRecord>& records);

struct AssetSplit {
  Eigen::VectorXd liquid;    // beta share of non-interbank assets
  Eigen::VectorXd illiquid;  // remainder, at unit nominal price
};

AssetSplit split_assets(const std::vector<RawBankRecord>& records, double beta);

/// Asset-return volatility from the structural credit model: solves
/// sigma * delta(sigma) = (net_worth / assets) * equity_vol, where delta is
/// the call delta on the assets struck at total liabilities, unit maturity,
/// zero rate. Damped fixed-point iteration with a bisection fallback, to
/// 1e-10 residual.
double merton_asset_vol(double net_worth, double total_assets, double equity_vol);

/// Bilateral liabilities on the topology's support, matching the interbank
/// row/column totals by iterative proportional fitting from a uniform seed.
/// Marginals agree to 1e-9 relative at return.
Eigen::MatrixXd reconstruct_interbank(const Eigen::VectorXd& row_sums,
                                      const Eigen::VectorXd& col_sums, const TopologySpec& topo);

/// Support pattern by index order; core-periphery treats the first
/// core_size banks as the core.
Eigen::MatrixXi topology_support(const TopologySpec& topo, int n);

/// Support pattern with the core chosen as the largest banks by total assets.
Eigen::MatrixXi topology_support(const TopologySpec& topo,
                                 const std::vector<RawBankRecord>& records);

struct Calibrated {
  Network network;
  ShockModel shocks;
  Eigen::VectorXd asset_vols;
  double alpha = 0.0;
};

/// Full pipeline: liability/asset splits, structural volatilities, interbank
/// reconstruction, exponential demand with the given impact rate, and the
/// return factor from the correlation source (identity when absent).
Calibrated calibrate(const std::vector<RawBankRecord>& records, double beta, double nu,
                     const TopologySpec& topo,
                     const std::optional<Eigen::MatrixXd>& correlation);

}  // namespace netbliss
