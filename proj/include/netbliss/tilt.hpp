#pragma once

#include <Eigen/Dense>
#include <functional>

#include "netbliss/network.hpp"
#include "netbliss/shocks.hpp"

namespace netbliss {

/// Mean shift for the outer sampling layer, one of three regime-specific
/// constructions. Uncorrelated targets (zero off-row loadings) always get a
/// zero shift.
struct TiltVector {
  Eigen::VectorXd mu;          // length n-1
  Regime regime;
  double kappa = 0.0;          // large-asset constant: half-variance + log threshold-at-zero
  double objective = 0.0;      // small-volatility surrogate value at the optimum
  bool converged = true;       // false when the direct search hit its budget
};

/// Closed-form shift for the growing-assets regime. Requires the target to be
/// the last bank in both the network and the shock model ordering; use
/// make_target_view to arrange that.
TiltVector mu_large_asset(const ShockModel& model, const Network& net, double multiplier);

/// Volatility-free limit of the rescaled default boundary, as a function of
/// the direction x in which the other banks' log-assets are pushed.
double ell_B_limit(const ShockModel& model, const Network& net, const Eigen::VectorXd& x);

/// Shift for the vanishing-volatility regime: multiplier times the minimizer
/// of ell_B(x)^2 + |x|^2, found by multi-start Nelder-Mead simplex search
/// (the objective has kinks where the threshold changes regime, so no
/// derivatives are assumed).
TiltVector mu_small_volatility(const ShockModel& model, const Network& net, double multiplier);

/// Closed-form shift for the growing-volatility regime.
TiltVector mu_large_volatility(const ShockModel& model, const Network& net, double multiplier);

/// Network + shock model with `target` relabeled to the last slot, which is
/// what the tilt and estimator layers operate on.
struct TargetView {
  Network net;
  ShockModel model;
  int original_target = 0;
};

TargetView make_target_view(const Network& net, const ShockModel& model, int target);

namespace detail {

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Plain Nelder-Mead with standard coefficients. Stops when both the value
/// spread and the simplex diameter are below tolerance, or at max_evals.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, double value_tol,
                          double diameter_tol, int max_evals);

}  // namespace detail

}  // namespace netbliss
