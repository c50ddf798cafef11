#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netbliss/network.hpp"
#include "netbliss/shocks.hpp"
#include "netbliss/tilt.hpp"

namespace netbliss {

/// What each trial records about the target bank:
///   indicator      -> 1 on its default
///   payout_ratio   -> paid fraction of the obligation, on its default
///   combined_price -> the bond price sample 1 - (1 - paid fraction) * weight,
///                     pairing both pieces of the price on common randomness
enum class PayoffKind { indicator, payout_ratio, combined_price };

struct TrialBatch {
  std::vector<double> values;       // weighted payoff per trial, trial order
  std::string method;
  PayoffKind payoff = PayoffKind::indicator;
  std::uint64_t seed = 0;
  double duration_seconds = 0.0;    // sampling loop only
  std::size_t support_violations = 0;  // conditioned draws outside the default region
};

struct EstimatorResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double rel_error = 0.0;  // NaN when the estimate is not positive
  double runtime_seconds = 0.0;
  std::size_t trials = 0;
  std::string method;
  std::string scenario;
};

struct BondQuote {
  double price = 0.0;
  double std_error = 0.0;
  double yield_bps = 0.0;  // continuously compounded, unit face and maturity
};

/// Plain Monte Carlo: full normal vector, full clearing, payoff on default.
TrialBatch run_mc(const Network& net, const ShockModel& model, const Regime& regime,
                  PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed);

/// Conditioned sampling of the target's shock only; no outer mean shift.
/// Bitwise identical to run_bliss with a zero shift on the same seed.
TrialBatch run_ilis(const Network& net, const ShockModel& model, const Regime& regime,
                    PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed);

/// Two-layer sampler: mean-shifted outer normals for the other banks, exact
/// conditioned draw of the target's shock inside its default region. Weights
/// accumulate in the log domain so deep-tail trials stay finite.
TrialBatch run_bliss(const Network& net, const ShockModel& model, const Regime& regime,
                     PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed,
                     const TiltVector& tilt);

/// Solvency-probability estimator for the growing-volatility regime: outer
/// sampling only, with the conditional solvency probability as the payoff.
TrialBatch run_gamma_c(const Network& net, const ShockModel& model, double multiplier,
                       int target, std::size_t trials, std::uint64_t seed,
                       const TiltVector& tilt);

/// Regime-appropriate outer shift for (net, model, target).
TiltVector compute_tilt(const Network& net, const ShockModel& model, const Regime& regime,
                        int target);

EstimatorResult aggregate(const TrialBatch& batch);

/// Price/yield from a combined_price batch.
BondQuote price_bond(const TrialBatch& combined);

/// Pairs an indicator batch with a payout_ratio batch run on the same seed
/// and trial count into per-trial price samples.
TrialBatch combine_price_batches(const TrialBatch& indicator_part,
                                 const TrialBatch& ratio_part);

/// Worker cap: NETBLISS_THREADS when set, hardware concurrency otherwise.
int worker_count();

/// Monotonic wall clock in seconds. Tests may substitute a deterministic
/// source; pass nullptr to restore the real clock.
double now_seconds();
void set_time_source(double (*fn)());

}  // namespace netbliss
