#pragma once

#include <vector>

namespace netbliss {

/// Market price of the illiquid asset as a function of the total quantity
/// liquidated. Strictly decreasing on [0, ebar], with x*Q(x) strictly
/// increasing so the proceeds of a larger sale are still larger.
class InverseDemand {
 public:
  enum class Family { exponential, tabulated };

  /// Degenerate curve pinned at price 1 over an empty domain; placeholder
  /// until a real curve is assigned.
  InverseDemand() = default;

  /// Q(x) = qbar * exp(-nu * x). Requires nu * ebar < 1 (monotone proceeds).
  static InverseDemand exponential(double qbar, double nu, double ebar);

  /// Monotone piecewise-linear curve through (x_k, q_k) knots. The knots must
  /// start at x=0, end at x=ebar, and be strictly decreasing in price with
  /// x*Q(x) strictly increasing; all checked at construction.
  static InverseDemand tabulated(std::vector<double> x, std::vector<double> q);

  double operator()(double x) const;

  Family family() const { return family_; }
  double qbar() const { return qbar_; }
  double nu() const { return nu_; }
  double ebar() const { return ebar_; }
  double floor_price() const { return q_min_; }  // Q(ebar)

  /// A demand curve over an empty domain (ebar == 0); price is pinned at qbar
  /// and the monotonicity conditions are vacuous.
  bool degenerate() const { return ebar_ <= 0.0; }

  const std::vector<double>& knots_x() const { return knots_x_; }
  const std::vector<double>& knots_q() const { return knots_q_; }

 private:
  Family family_ = Family::exponential;
  double qbar_ = 1.0;
  double nu_ = 0.0;
  double ebar_ = 0.0;
  double q_min_ = 1.0;
  std::vector<double> knots_x_;
  std::vector<double> knots_q_;
};

}  // namespace netbliss
