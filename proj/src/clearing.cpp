#include "netbliss/clearing.hpp"

#include <cmath>
#include <string>

#include "netbliss/errors.hpp"

namespace netbliss {

namespace {

// Bisection for q = Q(offset + sum_i min(deficit_i^+ / q, e_i)) on
// [Q(offset + sellable), Q(offset)]. The right-hand side is increasing in q,
// so the crossing is unique.
double bisect_price(const InverseDemand& Q, double offset, double sellable,
                    const Eigen::VectorXd& deficit, const Eigen::VectorXd& units) {
  if (Q.degenerate()) return Q.qbar();
  double hi = Q(offset);
  if (sellable <= 0.0) return hi;
  const auto liquidated = [&](double q) {
    double x = offset;
    for (Eigen::Index i = 0; i < deficit.size(); ++i) {
      if (deficit(i) > 0.0) {
        const double want = deficit(i) / q;
        x += (want < units(i)) ? want : units(i);
      }
    }
    return x;
  };
  if ((deficit.array() <= 0.0).all()) return hi;
  double lo = Q(offset + sellable);
  if (Q(liquidated(hi)) >= hi) return hi;  // nobody sells enough to move the price
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (Q(liquidated(mid)) >= mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double payment_scale(const Eigen::VectorXd& pbar) {
  const double m = pbar.maxCoeff();
  return (m > 1.0) ? m : 1.0;
}

}  // namespace

namespace detail {

ClearingSolver::ClearingSolver(const Network& net)
    : net_(net),
      shares_t_(net.relative_liabilities.transpose()),
      in_at_full_(net.relative_liabilities.transpose() * net.total_liabilities),
      payment_tol_(1e-12 * payment_scale(net.total_liabilities)) {}

double ClearingSolver::price_given_payments(const Eigen::VectorXd& s,
                                            const Eigen::VectorXd& p) const {
  deficit_ = net_.total_liabilities - s - shares_t_ * p;
  return bisect_price(net_.inverse_demand, 0.0, net_.total_illiquid, deficit_,
                      net_.illiquid_units);
}

ClearingOutcome ClearingSolver::solve(const Eigen::VectorXd& s) const {
  const auto n = net_.total_liabilities.size();
  if (s.size() != n) throw std::invalid_argument("clear: shock vector has wrong length");
  if ((s.array() < 0.0).any()) throw std::invalid_argument("clear: negative external assets");

  ClearingOutcome out;
  // Fast path: with full mutual payments nobody needs to sell, so the price
  // stays at Q(0) and payments stay at the obligations.
  deficit_ = net_.total_liabilities - s - in_at_full_;
  if ((deficit_.array() <= 0.0).all()) {
    out.price = net_.inverse_demand.qbar();
    out.payments = net_.total_liabilities;
    out.iterations = 0;
    out.residual = 0.0;
    return out;
  }

  p_ = net_.total_liabilities;
  income_ = in_at_full_;  // inter-bank income at the current payments
  const int cap = 50 * static_cast<int>(n);
  int iter = 0;
  double resid = 0.0;
  double q = net_.inverse_demand.qbar();
  for (iter = 1; iter <= cap; ++iter) {
    deficit_ = net_.total_liabilities - s - income_;
    q = bisect_price(net_.inverse_demand, 0.0, net_.total_illiquid, deficit_,
                     net_.illiquid_units);
    p_next_ = (s + q * net_.illiquid_units + income_).cwiseMin(net_.total_liabilities);
    resid = (p_next_ - p_).cwiseAbs().maxCoeff();
    p_.swap(p_next_);
    if (resid <= payment_tol_) break;
    income_.noalias() = shares_t_ * p_;
  }
  if (resid > payment_tol_) {
    throw SolverError("clearing did not converge within " + std::to_string(cap) +
                          " iterations (residual " + std::to_string(resid) + ")",
                      resid);
  }
  out.price = q;
  out.payments = p_;
  out.iterations = iter;
  out.residual = resid;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!pays_in_full(p_(i), net_.total_liabilities(i))) out.defaults.push_back((int)i);
  }
  return out;
}

ThresholdSolver::ThresholdSolver(const Network& net, int target) : net_(net), target_(target) {
  const int n = net.n;
  if (target < 0 || target >= n) throw std::invalid_argument("threshold: target out of range");
  others_.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i != target) others_.push_back(i);
  }
  const int k = n - 1;
  shares_t_.resize(k, k);
  pbar_.resize(k);
  units_.resize(k);
  from_target_.resize(k);
  to_target_.resize(k);
  for (int a = 0; a < k; ++a) {
    pbar_(a) = net.total_liabilities(others_[a]);
    units_(a) = net.illiquid_units(others_[a]);
    from_target_(a) = net.relative_liabilities(target, others_[a]) * net.total_liabilities(target);
    to_target_(a) = net.relative_liabilities(others_[a], target);
    for (int b = 0; b < k; ++b) {
      shares_t_(a, b) = net.relative_liabilities(others_[b], others_[a]);
    }
  }
  in_at_full_ = shares_t_ * pbar_;
  target_units_ = net.illiquid_units(target);
  target_obligation_ = net.total_liabilities(target);
  price_ceiling_ = net.inverse_demand.degenerate() ? net.inverse_demand.qbar()
                                                   : net.inverse_demand(target_units_);
  threshold_at_full_ =
      target_obligation_ - price_ceiling_ * target_units_ - to_target_.dot(pbar_);
  payment_tol_ = 1e-12 * payment_scale(net.total_liabilities);
}

FictitiousOutcome ThresholdSolver::solve(const Eigen::VectorXd& s_others) const {
  const int k = static_cast<int>(others_.size());
  if (s_others.size() != k) {
    throw std::invalid_argument("threshold: expected assets for the other banks only");
  }
  if ((s_others.array() < 0.0).any()) {
    throw std::invalid_argument("threshold: negative external assets");
  }

  FictitiousOutcome out;
  income_ = s_others + from_target_;
  deficit_ = pbar_ - income_ - in_at_full_;
  if ((deficit_.array() <= 0.0).all()) {
    out.price = price_ceiling_;
    out.payments = pbar_;
    out.threshold = threshold_at_full_;
    out.iterations = 0;
    out.residual = 0.0;
    return out;
  }

  const double sellable = net_.total_illiquid - target_units_;
  p_ = pbar_;
  interbank_ = in_at_full_;
  const int cap = 50 * (k > 0 ? k : 1);
  int iter = 0;
  double resid = 0.0;
  double q = price_ceiling_;
  for (iter = 1; iter <= cap; ++iter) {
    deficit_ = pbar_ - income_ - interbank_;
    q = bisect_price(net_.inverse_demand, target_units_, sellable, deficit_, units_);
    p_next_ = (income_ + q * units_ + interbank_).cwiseMin(pbar_);
    resid = (p_next_ - p_).cwiseAbs().maxCoeff();
    p_.swap(p_next_);
    if (resid <= payment_tol_) break;
    interbank_.noalias() = shares_t_ * p_;
  }
  if (resid > payment_tol_) {
    throw SolverError("threshold clearing did not converge (residual " + std::to_string(resid) +
                          ")",
                      resid);
  }
  out.price = q;
  out.payments = p_;
  out.threshold = target_obligation_ - q * target_units_ - to_target_.dot(p_);
  out.iterations = iter;
  out.residual = resid;
  return out;
}

double ThresholdSolver::threshold(const Eigen::VectorXd& s_others) const {
  income_ = s_others + from_target_;
  deficit_ = pbar_ - income_ - in_at_full_;
  if ((deficit_.array() <= 0.0).all()) return threshold_at_full_;
  return solve(s_others).threshold;
}

}  // namespace detail

ClearingOutcome clear(const Network& net, const Eigen::VectorXd& s) {
  return detail::ClearingSolver(net).solve(s);
}

double solve_price_given_payments(const Network& net, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& p) {
  if (s.size() != net.n || p.size() != net.n) {
    throw std::invalid_argument("price: vector lengths must match the system size");
  }
  if ((s.array() < 0.0).any()) throw std::invalid_argument("price: negative external assets");
  if ((p.array() > net.total_liabilities.array() + 1e-12).any() || (p.array() < 0.0).any()) {
    throw std::invalid_argument("price: payments must lie in [0, obligations]");
  }
  return detail::ClearingSolver(net).price_given_payments(s, p);
}

FictitiousOutcome fictitious_clear(const Network& net, const Eigen::VectorXd& s_others,
                                   int target) {
  return detail::ThresholdSolver(net, target).solve(s_others);
}

bool default_indicator_via_threshold(const Network& net, const Eigen::VectorXd& s, int target) {
  if (s.size() != net.n) throw std::invalid_argument("threshold: shock vector has wrong length");
  Eigen::VectorXd s_others(net.n - 1);
  int a = 0;
  for (int i = 0; i < net.n; ++i) {
    if (i != target) s_others(a++) = s(i);
  }
  const double v = detail::ThresholdSolver(net, target).threshold(s_others);
  return s(target) < v;
}

}  // namespace netbliss
