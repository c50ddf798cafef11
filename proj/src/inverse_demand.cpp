#include "netbliss/inverse_demand.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace netbliss {

InverseDemand InverseDemand::exponential(double qbar, double nu, double ebar) {
  if (!(qbar > 0.0)) throw std::invalid_argument("inverse demand: qbar must be positive");
  if (nu < 0.0) throw std::invalid_argument("inverse demand: nu must be nonnegative");
  if (ebar < 0.0) throw std::invalid_argument("inverse demand: ebar must be nonnegative");
  if (ebar > 0.0 && nu * ebar >= 1.0) {
    throw std::invalid_argument(
        "inverse demand: nu * ebar = " + std::to_string(nu * ebar) +
        " >= 1, so x*Q(x) is not strictly increasing on [0, ebar]");
  }
  InverseDemand d;
  d.family_ = Family::exponential;
  d.qbar_ = qbar;
  d.nu_ = nu;
  d.ebar_ = ebar;
  d.q_min_ = qbar * std::exp(-nu * ebar);
  return d;
}

InverseDemand InverseDemand::tabulated(std::vector<double> x, std::vector<double> q) {
  if (x.size() != q.size() || x.size() < 2) {
    throw std::invalid_argument("inverse demand: tabulated curve needs >= 2 matching knots");
  }
  if (x.front() != 0.0) throw std::invalid_argument("inverse demand: first knot must be x=0");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(q[k] > 0.0)) throw std::invalid_argument("inverse demand: prices must be positive");
    if (k > 0) {
      if (!(x[k] > x[k - 1])) {
        throw std::invalid_argument("inverse demand: knot abscissae must be increasing");
      }
      if (!(q[k] < q[k - 1])) {
        throw std::invalid_argument("inverse demand: tabulated prices must be strictly decreasing");
      }
      if (!(x[k] * q[k] > x[k - 1] * q[k - 1])) {
        throw std::invalid_argument(
            "inverse demand: x*Q(x) must be strictly increasing between knots");
      }
      // On a linear segment x*Q(x) is concave, so positivity of its slope at
      // the right knot makes it increasing across the whole segment.
      const double slope = (q[k] - q[k - 1]) / (x[k] - x[k - 1]);
      if (!(q[k] + x[k] * slope > 0.0)) {
        throw std::invalid_argument(
            "inverse demand: x*Q(x) loses monotonicity inside a tabulated segment");
      }
    }
  }
  InverseDemand d;
  d.family_ = Family::tabulated;
  d.qbar_ = q.front();
  d.ebar_ = x.back();
  d.q_min_ = q.back();
  d.knots_x_ = std::move(x);
  d.knots_q_ = std::move(q);
  return d;
}

double InverseDemand::operator()(double x) const {
  if (degenerate()) {
    if (x != 0.0) throw std::domain_error("inverse demand: no illiquid units exist");
    return qbar_;
  }
  if (x < 0.0 || x > ebar_ * (1.0 + 1e-12)) {
    throw std::domain_error("inverse demand: argument outside [0, ebar]");
  }
  if (family_ == Family::exponential) return qbar_ * std::exp(-nu_ * x);
  // piecewise linear between bracketing knots
  std::size_t hi = 1;
  while (hi + 1 < knots_x_.size() && knots_x_[hi] < x) ++hi;
  const double x0 = knots_x_[hi - 1], x1 = knots_x_[hi];
  const double t = (x - x0) / (x1 - x0);
  return knots_q_[hi - 1] * (1.0 - t) + knots_q_[hi] * t;
}

}  // namespace netbliss
