#include "netbliss/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace netbliss {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_normal_cdf(double x) {
  if (x >= 0.0) {
    // 1 - Phi(-x) without cancellation near log(1).
    return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  }
  if (x > -37.0) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // Deep tail: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - ...). At |x| >= 37
  // the truncated series is exact to double precision.
  const double inv = 1.0 / (x * x);
  const double series =
      1.0 +
      inv * (-1.0 +
             inv * (3.0 +
                    inv * (-15.0 +
                           inv * (105.0 +
                                  inv * (-945.0 + inv * (10395.0 - inv * 135135.0))))));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie strictly in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) *
                    r +
                45921.953931549871457) *
                   r +
               13731.693765509461125) *
                  r +
              1971.5909503065514427) *
                 r +
             133.14166789178437745) *
                r +
            3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                 39307.89580009271061) *
                    r +
                21213.794301586595867) *
                   r +
               5394.1960214247511077) *
                  r +
              687.1870074920579083) *
                 r +
             42.313330701600911252) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
              0.24178072517745061177) *
                 r +
             1.27045825245236838258) *
                r +
            3.64784832476320460504) *
               r +
           5.7694972214606914055) *
              r +
          4.6303378461565452959) *
             r +
         1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
              0.0151986665636164571966) *
                 r +
             0.14810397642748007459) *
                r +
            0.68976733498510000455) *
               r +
           1.6763848301838038494) *
              r +
          2.05319162663775882187) *
             r +
         1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              0.0012426609473880784386) *
                 r +
             0.026532189526576123093) *
                r +
            0.29656057182850489123) *
               r +
           1.7848265399172913358) *
              r +
          5.4637849111641143699) *
             r +
         6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
              1.8463183175100546818e-5) *
                 r +
             7.868691311456132591e-4) *
                r +
            0.0148753612908506148525) *
               r +
           0.13692988092273580531) *
              r +
          0.59983220655588793769) *
             r +
         1.0);
  }
  return (q < 0.0) ? -x : x;
}

double pairwise_sum(const double* v, std::size_t len) {
  if (len <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += v[i];
    return s;
  }
  const std::size_t half = len / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, len - half);
}

double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

MeanVar sample_mean_var(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("sample_mean_var: empty sample");
  MeanVar out;
  out.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() == 1) return out;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - out.mean;
    sq[i] = d * d;
  }
  out.var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return out;
}

}  // namespace netbliss
