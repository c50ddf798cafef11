#pragma once

#include <Eigen/Dense>
#include <vector>

#include "netbliss/network.hpp"

namespace netbliss {

struct ClearingOutcome {
  double price = 0.0;          // equilibrium illiquid-asset price
  Eigen::VectorXd payments;    // cleared payment of each bank
  std::vector<int> defaults;   // banks paying strictly less than owed
  int iterations = 0;
  double residual = 0.0;       // final sup-norm payment change
};

struct FictitiousOutcome {
  double price = 0.0;          // price when the target dumps all its units
  Eigen::VectorXd payments;    // payments of the n-1 remaining banks
  double threshold = 0.0;      // minimum external liquid assets keeping the target whole
  int iterations = 0;
  double residual = 0.0;
};

/// Joint price/payment equilibrium given realized external liquid assets s.
ClearingOutcome clear(const Network& net, const Eigen::VectorXd& s);

/// Unique price solving the liquidation equation for fixed payments p,
/// by bisection to 1e-12 relative on [Q(ebar), Q(0)].
double solve_price_given_payments(const Network& net, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& p);

/// Equilibrium of the system with `target` detached: the target liquidates
/// everything and pays its obligations in full regardless of its own assets.
/// `s_others` holds the other banks' assets in their original order.
FictitiousOutcome fictitious_clear(const Network& net, const Eigen::VectorXd& s_others,
                                   int target);

/// Whether `target` defaults at s, decided purely by comparing its external
/// assets against the detached-system threshold.
bool default_indicator_via_threshold(const Network& net, const Eigen::VectorXd& s, int target);

/// Default classification used everywhere: payments within round-off of the
/// obligation count as paid in full.
inline bool pays_in_full(double payment, double obligation) {
  return payment >= obligation - 1e-9 * (obligation > 1.0 ? obligation : 1.0);
}

namespace detail {

/// Reusable solver state for one (network) or (network, target) pair. Keeps
/// transposed share matrices and the full-payment income vector so the
/// per-draw cost of the common no-stress path is linear in n.
class ClearingSolver {
 public:
  explicit ClearingSolver(const Network& net);

  ClearingOutcome solve(const Eigen::VectorXd& s) const;
  double price_given_payments(const Eigen::VectorXd& s, const Eigen::VectorXd& p) const;

 private:
  const Network& net_;
  Eigen::MatrixXd shares_t_;       // transposed relative liabilities
  Eigen::VectorXd in_at_full_;     // income when everyone pays in full
  double payment_tol_;
  mutable Eigen::VectorXd income_, p_, p_next_, deficit_;
};

class ThresholdSolver {
 public:
  ThresholdSolver(const Network& net, int target);

  /// Threshold (and optionally price/payments) at the others' assets.
  double threshold(const Eigen::VectorXd& s_others) const;
  FictitiousOutcome solve(const Eigen::VectorXd& s_others) const;

  int target() const { return target_; }

 private:
  const Network& net_;
  int target_;
  std::vector<int> others_;        // original indices, order preserved
  Eigen::MatrixXd shares_t_;       // reduced, transposed
  Eigen::VectorXd pbar_, units_;   // reduced obligations / illiquid units
  Eigen::VectorXd from_target_;    // target's full payment to each remaining bank
  Eigen::VectorXd to_target_;      // share of each remaining bank owed to the target
  Eigen::VectorXd in_at_full_;
  double target_units_, target_obligation_;
  double price_ceiling_;           // Q(e_target): price before any other bank sells
  double threshold_at_full_;       // threshold when no remaining bank is stressed
  double payment_tol_;
  mutable Eigen::VectorXd income_, p_, p_next_, deficit_, interbank_;
};

}  // namespace detail

}  // namespace netbliss
