#include "netbliss/shocks.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>

namespace netbliss {

Regime::Regime(Tag t, double m) : tag(t), multiplier(m) {
  if (!(m > 0.0)) throw std::invalid_argument("regime: multiplier must be positive");
}

ShockModel::ShockModel(Eigen::MatrixXd factor) : factor_(std::move(factor)) {
  const auto n = factor_.rows();
  sigma2_.resize(n);
  diagonal_ = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma2_(i) = factor_.row(i).head(i + 1).squaredNorm();
    if (factor_.row(i).head(i).any()) diagonal_ = false;
  }
}

ShockModel ShockModel::from_cholesky(const Eigen::MatrixXd& factor) {
  const auto n = factor.rows();
  if (n < 1 || factor.cols() != n) {
    throw std::invalid_argument("shock model: factor must be square");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(factor(i, i) > 0.0)) {
      throw std::invalid_argument("shock model: factor diagonal must be positive");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (factor(i, j) != 0.0) {
        throw std::invalid_argument("shock model: factor must be lower triangular");
      }
    }
  }
  return ShockModel(factor);
}

ShockModel ShockModel::from_correlation(const Eigen::VectorXd& vols,
                                        const Eigen::MatrixXd& rows) {
  const auto n = vols.size();
  if (rows.rows() != n || rows.cols() != n) {
    throw std::invalid_argument("shock model: correlation shape mismatch");
  }
  if ((vols.array() <= 0.0).any()) {
    throw std::invalid_argument("shock model: volatilities must be positive");
  }
  const bool lower_triangular = rows.isLowerTriangular();
  Eigen::MatrixXd root;
  if (lower_triangular) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = rows.row(i).head(i + 1).norm();
      if (std::abs(norm - 1.0) > 1e-6) {
        throw std::invalid_argument("shock model: pre-factored row " + std::to_string(i + 1) +
                                    " has norm " + std::to_string(norm) + ", expected 1");
      }
    }
    root = rows;
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(rows);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("shock model: correlation matrix is not positive definite");
    }
    root = llt.matrixL();
  }
  return from_cholesky(vols.asDiagonal() * root);
}

ShockModel ShockModel::with_target_last(int target) const {
  const int n = size();
  if (target < 0 || target >= n) throw std::invalid_argument("shock model: target out of range");
  if (target == n - 1) return *this;
  Eigen::VectorXi perm(n);
  int a = 0;
  for (int i = 0; i < n; ++i) {
    if (i != target) perm(a++) = i;
  }
  perm(n - 1) = target;
  const Eigen::MatrixXd cov = factor_ * factor_.transpose();
  Eigen::MatrixXd cov_p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cov_p(i, j) = cov(perm(i), perm(j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov_p);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("shock model: permuted covariance failed to factorize");
  }
  return ShockModel(Eigen::MatrixXd(llt.matrixL()));
}

Eigen::VectorXd assets_from_normals(const ShockModel& model, const Regime& regime,
                                    const Eigen::VectorXd& initial, const Eigen::VectorXd& z) {
  const int n = model.size();
  const auto k = z.size();
  if (initial.size() != n) {
    throw std::invalid_argument("assets: initial vector length mismatch");
  }
  if (k != n && k != n - 1) {
    throw std::invalid_argument("assets: normals must cover all banks or all but the last");
  }
  const double vs = regime.vol_scale();
  const double as = regime.asset_scale();
  Eigen::VectorXd out(k);
  if (model.diagonal()) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double drift = -0.5 * vs * vs * model.variances()(i);
      out(i) = as * initial(i) * std::exp(drift + vs * model.cholesky()(i, i) * z(i));
    }
    return out;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const double drift = -0.5 * vs * vs * model.variances()(i);
    const double diffusion = vs * model.cholesky().row(i).head(i + 1).dot(z.head(i + 1));
    out(i) = as * initial(i) * std::exp(drift + diffusion);
  }
  return out;
}

double ell_n(const ShockModel& model, const Regime& regime, const Eigen::VectorXd& initial,
             double threshold, const Eigen::VectorXd& z_others) {
  const int n = model.size();
  if (z_others.size() != n - 1) {
    throw std::invalid_argument("ell_n: expected normals for all banks but the last");
  }
  if (!(threshold > 0.0)) {
    throw std::domain_error("ell_n: nonpositive solvency threshold");
  }
  const double vs = regime.vol_scale();
  const double scaled_initial = regime.asset_scale() * initial(n - 1);
  const double diag = vs * model.last_diag();
  const double cross =
      model.diagonal() ? 0.0 : vs * model.cholesky().row(n - 1).head(n - 1).dot(z_others);
  const double half_var = 0.5 * vs * vs * model.variances()(n - 1);
  return (std::log(scaled_initial) - std::log(threshold) - half_var + cross) / diag;
}

}  // namespace netbliss
