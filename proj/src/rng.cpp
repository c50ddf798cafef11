#include "netbliss/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace netbliss {

double sample_truncated_normal(double upper, TrialRng& rng) {
  if (!std::isfinite(upper)) {
    throw std::domain_error("sample_truncated_normal: upper bound must be finite");
  }
  if (upper < -8.0) {
    // Sample Y = -Z > a from the upper tail with an Exp(lambda) proposal
    // shifted to a; lambda is the tail-optimal rate (Robert's choice).
    const double a = -upper;
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double y = a + rng.next_exponential() / lambda;
      const double d = y - lambda;
      if (rng.next_uniform() <= std::exp(-0.5 * d * d)) return -y;
    }
  }
  const double mass = normal_cdf(upper);
  return normal_quantile(rng.next_uniform() * mass);
}

}  // namespace netbliss
