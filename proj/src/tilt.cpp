#include "netbliss/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "netbliss/clearing.hpp"

namespace netbliss {

namespace detail {

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, double value_tol,
                          double diameter_tol, int max_evals) {
  const int d = static_cast<int>(start.size());
  SimplexResult res;
  if (d == 0) {
    res.x = start;
    res.value = f(start);
    res.converged = true;
    res.evaluations = 1;
    return res;
  }

  std::vector<Eigen::VectorXd> xs(d + 1, start);
  std::vector<double> fs(d + 1);
  int evals = 0;
  for (int i = 1; i <= d; ++i) xs[i](i - 1) += step;
  for (int i = 0; i <= d; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }
  std::vector<int> order(d + 1);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[d], second_worst = order[d - 1];

    double diameter = 0.0;
    for (int i = 1; i <= d; ++i) diameter = std::max(diameter, (xs[order[i]] - xs[best]).norm());
    if (fs[worst] - fs[best] < value_tol && diameter < diameter_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i <= d; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= d;

    const Eigen::VectorXd reflected = centroid + alpha * (centroid - xs[worst]);
    const double fr = f(reflected);
    ++evals;
    if (fr < fs[best]) {
      const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second_worst]) {
      xs[worst] = reflected;
      fs[worst] = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + rho * (xs[worst] - centroid);
    const double fc = f(contracted);
    ++evals;
    if (fc < fs[worst]) {
      xs[worst] = contracted;
      fs[worst] = fc;
      continue;
    }
    for (int i = 0; i <= d; ++i) {
      if (i == best) continue;
      xs[i] = xs[best] + shrink * (xs[i] - xs[best]);
      fs[i] = f(xs[i]);
      ++evals;
    }
  }

  const int best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  res.x = xs[best];
  res.value = fs[best];
  res.evaluations = evals;
  return res;
}

}  // namespace detail

namespace {

void require_target_last_shapes(const ShockModel& model, const Network& net) {
  if (model.size() != net.n) {
    throw std::invalid_argument("tilt: shock model and network sizes differ");
  }
}

double threshold_at_zero(const Network& net) {
  const detail::ThresholdSolver solver(net, net.n - 1);
  const double v0 = solver.threshold(Eigen::VectorXd::Zero(net.n - 1));
  if (!(v0 > 0.0)) {
    throw std::domain_error("tilt: threshold at zero assets is nonpositive; the balance "
                            "margin condition must be violated");
  }
  return v0;
}

}  // namespace

TiltVector mu_large_asset(const ShockModel& model, const Network& net, double multiplier) {
  require_target_last_shapes(model, net);
  const int n = net.n;
  TiltVector tilt;
  tilt.regime = Regime(Regime::Tag::large_asset, multiplier);
  const double sigma2 = model.variances()(n - 1);
  const double v0 = threshold_at_zero(net);
  tilt.kappa = 0.5 * sigma2 + std::log(v0);
  const Eigen::VectorXd loadings = model.last_row_head();
  if (loadings.isZero(0.0)) {
    tilt.mu = Eigen::VectorXd::Zero(n - 1);
    return tilt;
  }
  const double scaled_log_initial =
      std::log(multiplier * net.initial_liquid_assets(n - 1));
  // Rank-one inverse: (ll^T + Lnn^2 I)^{-1} l = l / sigma^2.
  tilt.mu = -(scaled_log_initial - tilt.kappa) / sigma2 * loadings;
  return tilt;
}

namespace {

double ell_B_value(const ShockModel& model, const Network& net,
                   const detail::ThresholdSolver& solver, const Eigen::VectorXd& x) {
  const int n = net.n;
  if (x.size() != n - 1) throw std::invalid_argument("ell_B: direction must have length n-1");
  Eigen::VectorXd pushed(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    const double shift = model.cholesky().row(i).head(i + 1).dot(x.head(i + 1));
    pushed(i) = net.initial_liquid_assets(i) * std::exp(shift);
  }
  const double v = solver.threshold(pushed);
  if (!(v > 0.0)) throw std::domain_error("ell_B: nonpositive threshold");
  const double cross = model.cholesky().row(n - 1).head(n - 1).dot(x);
  return (std::log(net.initial_liquid_assets(n - 1)) - std::log(v) + cross) /
         model.last_diag();
}

}  // namespace

double ell_B_limit(const ShockModel& model, const Network& net, const Eigen::VectorXd& x) {
  require_target_last_shapes(model, net);
  const detail::ThresholdSolver solver(net, net.n - 1);
  return ell_B_value(model, net, solver, x);
}

TiltVector mu_small_volatility(const ShockModel& model, const Network& net, double multiplier) {
  require_target_last_shapes(model, net);
  const int n = net.n;
  TiltVector tilt;
  tilt.regime = Regime(Regime::Tag::small_volatility, multiplier);
  const Eigen::VectorXd loadings = model.last_row_head();
  if (loadings.isZero(0.0)) {
    // Uncorrelated target: the shift degenerates to zero.
    tilt.mu = Eigen::VectorXd::Zero(n - 1);
    const double l0 = ell_B_limit(model, net, tilt.mu);
    tilt.objective = l0 * l0;
    return tilt;
  }

  const detail::ThresholdSolver solver(net, n - 1);
  const auto objective = [&](const Eigen::VectorXd& x) {
    const double l = ell_B_value(model, net, solver, x);
    return l * l + x.squaredNorm();
  };

  const Eigen::VectorXd direction = loadings / loadings.norm();
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(n - 1));
  for (double c : {0.5, 1.0, 2.0}) starts.push_back(Eigen::VectorXd(-c * direction));

  detail::SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& s : starts) {
    const auto r = detail::nelder_mead(objective, s, 0.25, 1e-10, 1e-8, 10000);
    any_converged = any_converged || r.converged;
    if (r.value < best.value) best = r;
  }
  // A shift should never do worse than no shift.
  const double at_zero = objective(Eigen::VectorXd::Zero(n - 1));
  if (at_zero < best.value) {
    best.x = Eigen::VectorXd::Zero(n - 1);
    best.value = at_zero;
  }
  tilt.mu = multiplier * best.x;
  tilt.objective = best.value;
  tilt.converged = any_converged;
  return tilt;
}

TiltVector mu_large_volatility(const ShockModel& model, const Network& net, double multiplier) {
  require_target_last_shapes(model, net);
  TiltVector tilt;
  tilt.regime = Regime(Regime::Tag::large_volatility, multiplier);
  // -(m sigma^2 / 2) (ll^T + Lnn^2 I)^{-1} l collapses to -(m/2) l.
  tilt.mu = -0.5 * multiplier * model.last_row_head();
  return tilt;
}

TargetView make_target_view(const Network& net, const ShockModel& model, int target) {
  if (model.size() != net.n) {
    throw std::invalid_argument("target view: shock model and network sizes differ");
  }
  if (target < 0 || target >= net.n) {
    throw std::invalid_argument("target view: target out of range");
  }
  TargetView view;
  view.original_target = target;
  view.model = model.with_target_last(target);
  if (target == net.n - 1) {
    view.net = net;
    return view;
  }
  const int n = net.n;
  Eigen::VectorXi perm(n);
  int a = 0;
  for (int i = 0; i < n; ++i) {
    if (i != target) perm(a++) = i;
  }
  perm(n - 1) = target;
  Eigen::MatrixXd liab(n, n);
  Eigen::VectorXd external(n), liquid(n), units(n);
  for (int i = 0; i < n; ++i) {
    external(i) = net.external_liabilities(perm(i));
    liquid(i) = net.initial_liquid_assets(perm(i));
    units(i) = net.illiquid_units(perm(i));
    for (int j = 0; j < n; ++j) liab(i, j) = net.nominal_liabilities(perm(i), perm(j));
  }
  view.net = build_network(liab, external, liquid, units, net.inverse_demand);
  return view;
}

}  // namespace netbliss
