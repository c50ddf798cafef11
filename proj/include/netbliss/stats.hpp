#pragma once

#include <cstddef>
#include <vector>

namespace netbliss {

double normal_pdf(double x);

/// Standard normal CDF, erfc-based so both tails keep full relative accuracy.
double normal_cdf(double x);

/// log Phi(x). Uses erfc down to x = -37 and an asymptotic tail expansion
/// below that, where erfc itself underflows.
double log_normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS241 rational approximations).
/// Accepts any p in (0,1), including subnormal tail probabilities.
double normal_quantile(double p);

/// Deterministic cascade summation; independent of how the work that
/// produced `v` was scheduled, as long as the element order is fixed.
double pairwise_sum(const double* v, std::size_t len);
double pairwise_sum(const std::vector<double>& v);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // sample variance, n-1 denominator
};

MeanVar sample_mean_var(const std::vector<double>& v);

}  // namespace netbliss
