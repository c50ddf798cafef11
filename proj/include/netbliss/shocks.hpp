#pragma once

#include <Eigen/Dense>

namespace netbliss {

/// Asymptotic stress regime. The multiplier rescales either the initial
/// liquid assets or the volatility factor:
///   large_asset:      S0 -> m * S0,  volatility unchanged
///   small_volatility: volatility -> volatility / m
///   large_volatility: volatility -> m * volatility
/// m = 1 reproduces the unscaled model in every regime.
struct Regime {
  enum class Tag { large_asset, small_volatility, large_volatility };

  Tag tag = Tag::large_asset;
  double multiplier = 1.0;

  Regime() = default;
  Regime(Tag t, double m);

  static Regime base() { return Regime(Tag::large_asset, 1.0); }

  double asset_scale() const { return tag == Tag::large_asset ? multiplier : 1.0; }
  double vol_scale() const {
    switch (tag) {
      case Tag::small_volatility: return 1.0 / multiplier;
      case Tag::large_volatility: return multiplier;
      default: return 1.0;
    }
  }
};

/// Lognormal return driver: a lower-triangular factor mapping iid standard
/// normals to correlated log returns, with per-bank variances cached.
class ShockModel {
 public:
  ShockModel() = default;  // empty; assign before use

  static ShockModel from_cholesky(const Eigen::MatrixXd& factor);

  /// factor = diag(vols) * rows. `rows` is either an already lower-triangular
  /// factor with unit-norm rows (checked to 1e-6) or a full correlation
  /// matrix, which gets factorized here.
  static ShockModel from_correlation(const Eigen::VectorXd& vols, const Eigen::MatrixXd& rows);

  int size() const { return static_cast<int>(factor_.rows()); }
  const Eigen::MatrixXd& cholesky() const { return factor_; }
  const Eigen::VectorXd& variances() const { return sigma2_; }

  /// Loadings of the last bank on the first n-1 factors, and its own-factor
  /// weight. The sampling split below conditions on exactly this row.
  Eigen::VectorXd last_row_head() const { return factor_.row(size() - 1).head(size() - 1); }
  double last_diag() const { return factor_(size() - 1, size() - 1); }

  /// Same joint distribution with `target` moved to the last position
  /// (covariance permuted and re-factorized). No-op if already last.
  ShockModel with_target_last(int target) const;

  /// True when the factor has no off-diagonal loadings, enabling the O(n)
  /// sampling path.
  bool diagonal() const { return diagonal_; }

 private:
  explicit ShockModel(Eigen::MatrixXd factor);

  Eigen::MatrixXd factor_;
  Eigen::VectorXd sigma2_;
  bool diagonal_ = false;
};

/// Maturity asset values from standard normals: z of length n gives the full
/// vector, length n-1 gives the first n-1 banks only.
Eigen::VectorXd assets_from_normals(const ShockModel& model, const Regime& regime,
                                    const Eigen::VectorXd& initial, const Eigen::VectorXd& z);

/// Distance, in units of the target's own factor, between the median of the
/// target's asset and the solvency threshold: the target defaults exactly
/// when its own factor draw falls below the negative of this value.
double ell_n(const ShockModel& model, const Regime& regime, const Eigen::VectorXd& initial,
             double threshold, const Eigen::VectorXd& z_others);

}  // namespace netbliss
