#include "netbliss/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "netbliss/clearing.hpp"
#include "netbliss/errors.hpp"
#include "netbliss/rng.hpp"
#include "netbliss/stats.hpp"

namespace netbliss {

namespace {

double (*g_time_source)() = nullptr;

double steady_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

double now_seconds() { return g_time_source ? g_time_source() : steady_seconds(); }

void set_time_source(double (*fn)()) { g_time_source = fn; }

int worker_count() {
  if (const char* env = std::getenv("NETBLISS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

// Runs `trials` independent trials, each with its own counter-derived random
// stream, writing results by trial index so the outcome does not depend on
// the worker split. WorkerFn: (std::size_t trial, TrialRng&) -> double.
template <class MakeContext>
void parallel_trials(std::size_t trials, std::uint64_t seed, TrialBatch& batch,
                     MakeContext make_context) {
  batch.values.assign(trials, 0.0);
  std::atomic<std::size_t> violations{0};
  std::atomic<std::size_t> failed_trial{trials};
  std::exception_ptr failure;
  std::mutex failure_guard;
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()),
                                             trials > 0 ? trials : 1));
  const auto run_range = [&](std::size_t lo, std::size_t hi) {
    auto ctx = make_context();
    std::size_t local_violations = 0;
    std::size_t i = lo;
    try {
      for (; i < hi; ++i) {
        TrialRng rng(seed, i);
        batch.values[i] = ctx(i, rng, local_violations);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_guard);
      // Keep the earliest failing trial for a deterministic report.
      if (i < failed_trial.load()) {
        failed_trial.store(i);
        failure = std::current_exception();
      }
    }
    violations += local_violations;
  };
  const double t0 = now_seconds();
  if (workers <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      const std::size_t hi = std::min(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw SolverError("trial " + std::to_string(failed_trial.load()) + ": " + e.what());
    }
  }
  batch.duration_seconds = now_seconds() - t0;
  batch.support_violations = violations.load();
}

const char* payoff_name(PayoffKind p) {
  switch (p) {
    case PayoffKind::indicator: return "indicator";
    case PayoffKind::payout_ratio: return "ratio";
    case PayoffKind::combined_price: return "price";
  }
  return "?";
}

void check_finite(double value, const char* method, std::size_t trial) {
  if (!std::isfinite(value)) {
    throw SolverError(std::string(method) + ": non-finite weighted payoff at trial " +
                      std::to_string(trial));
  }
}

}  // namespace

TrialBatch run_mc(const Network& net, const ShockModel& model, const Regime& regime,
                  PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("run_mc: need at least one trial");
  const TargetView view = make_target_view(net, model, target);
  const int n = view.net.n;

  TrialBatch batch;
  batch.method = "mc";
  batch.payoff = payoff;
  batch.seed = seed;

  parallel_trials(trials, seed, batch, [&]() {
    return [&, solver = detail::ClearingSolver(view.net), z = Eigen::VectorXd(n)](
               std::size_t trial, TrialRng& rng, std::size_t&) mutable {
      for (int k = 0; k < n; ++k) z(k) = rng.next_normal();
      const Eigen::VectorXd s =
          assets_from_normals(view.model, regime, view.net.initial_liquid_assets, z);
      const ClearingOutcome outcome = solver.solve(s);
      const bool defaulted =
          !pays_in_full(outcome.payments(n - 1), view.net.total_liabilities(n - 1));
      double value = 0.0;
      switch (payoff) {
        case PayoffKind::indicator:
          value = defaulted ? 1.0 : 0.0;
          break;
        case PayoffKind::payout_ratio:
          value = defaulted ? outcome.payments(n - 1) / view.net.total_liabilities(n - 1) : 0.0;
          break;
        case PayoffKind::combined_price:
          value = defaulted ? outcome.payments(n - 1) / view.net.total_liabilities(n - 1) : 1.0;
          break;
      }
      check_finite(value, "mc", trial);
      return value;
    };
  });
  return batch;
}

namespace {

TrialBatch run_two_layer(const Network& net, const ShockModel& model, const Regime& regime,
                         PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed,
                         const TiltVector& tilt, const char* method) {
  if (trials < 1) throw std::invalid_argument("two-layer sampler: need at least one trial");
  const TargetView view = make_target_view(net, model, target);
  const int n = view.net.n;
  if (tilt.mu.size() != n - 1) {
    throw std::invalid_argument("two-layer sampler: shift vector must have length n-1");
  }
  const bool shifted = !tilt.mu.isZero(0.0);
  const double half_norm2 = 0.5 * tilt.mu.squaredNorm();
  const double vol_scale = regime.vol_scale();
  const double own_weight = vol_scale * view.model.last_diag();
  const double own_half_var = 0.5 * vol_scale * vol_scale * view.model.variances()(n - 1);
  const double scaled_initial_n = regime.asset_scale() * view.net.initial_liquid_assets(n - 1);
  const bool needs_payments = payoff != PayoffKind::indicator;

  TrialBatch batch;
  batch.method = method;
  batch.payoff = payoff;
  batch.seed = seed;

  parallel_trials(trials, seed, batch, [&]() {
    struct Context {
      detail::ThresholdSolver thresholds;
      detail::ClearingSolver clearing;
      Eigen::VectorXd z;
      Eigen::VectorXd s_full;
    };
    return [&, ctx = Context{detail::ThresholdSolver(view.net, n - 1),
                             detail::ClearingSolver(view.net), Eigen::VectorXd(n - 1),
                             Eigen::VectorXd(n)}](std::size_t trial, TrialRng& rng,
                                                  std::size_t& violations) mutable {
      for (int k = 0; k < n - 1; ++k) ctx.z(k) = tilt.mu(k) + rng.next_normal();
      const Eigen::VectorXd s_others =
          assets_from_normals(view.model, regime, view.net.initial_liquid_assets, ctx.z);
      const double v = ctx.thresholds.threshold(s_others);
      const double ell =
          ell_n(view.model, regime, view.net.initial_liquid_assets, v, ctx.z);
      const double log_inner = log_normal_cdf(-ell);
      const double log_outer = shifted ? half_norm2 - tilt.mu.dot(ctx.z) : 0.0;
      const double weight = std::exp(log_inner + log_outer);
      const double z_own = sample_truncated_normal(-ell, rng);
      if (!(z_own < -ell)) ++violations;

      double value = 0.0;
      if (!needs_payments) {
        value = weight;
      } else {
        const double cross =
            view.model.diagonal()
                ? 0.0
                : vol_scale * view.model.cholesky().row(n - 1).head(n - 1).dot(ctx.z);
        const double s_own =
            scaled_initial_n * std::exp(-own_half_var + cross + own_weight * z_own);
        ctx.s_full.head(n - 1) = s_others;
        ctx.s_full(n - 1) = s_own;
        const ClearingOutcome outcome = ctx.clearing.solve(ctx.s_full);
        const double ratio = outcome.payments(n - 1) / view.net.total_liabilities(n - 1);
        value = (payoff == PayoffKind::payout_ratio) ? ratio * weight
                                                     : 1.0 - (1.0 - ratio) * weight;
      }
      check_finite(value, method, trial);
      return value;
    };
  });
  return batch;
}

}  // namespace

TrialBatch run_ilis(const Network& net, const ShockModel& model, const Regime& regime,
                    PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed) {
  TiltVector zero;
  zero.regime = regime;
  zero.mu = Eigen::VectorXd::Zero(net.n - 1);
  return run_two_layer(net, model, regime, payoff, target, trials, seed, zero, "ilis");
}

TrialBatch run_bliss(const Network& net, const ShockModel& model, const Regime& regime,
                     PayoffKind payoff, int target, std::size_t trials, std::uint64_t seed,
                     const TiltVector& tilt) {
  return run_two_layer(net, model, regime, payoff, target, trials, seed, tilt, "bliss");
}

TrialBatch run_gamma_c(const Network& net, const ShockModel& model, double multiplier,
                       int target, std::size_t trials, std::uint64_t seed,
                       const TiltVector& tilt) {
  if (trials < 1) throw std::invalid_argument("run_gamma_c: need at least one trial");
  const Regime regime(Regime::Tag::large_volatility, multiplier);
  const TargetView view = make_target_view(net, model, target);
  const int n = view.net.n;
  if (tilt.mu.size() != n - 1) {
    throw std::invalid_argument("run_gamma_c: shift vector must have length n-1");
  }
  const bool shifted = !tilt.mu.isZero(0.0);
  const double half_norm2 = 0.5 * tilt.mu.squaredNorm();

  TrialBatch batch;
  batch.method = "gamma-c";
  batch.payoff = PayoffKind::indicator;
  batch.seed = seed;

  parallel_trials(trials, seed, batch, [&]() {
    return [&, thresholds = detail::ThresholdSolver(view.net, n - 1),
            z = Eigen::VectorXd(n - 1)](std::size_t trial, TrialRng& rng,
                                        std::size_t&) mutable {
      for (int k = 0; k < n - 1; ++k) z(k) = tilt.mu(k) + rng.next_normal();
      const Eigen::VectorXd s_others =
          assets_from_normals(view.model, regime, view.net.initial_liquid_assets, z);
      const double v = thresholds.threshold(s_others);
      const double ell = ell_n(view.model, regime, view.net.initial_liquid_assets, v, z);
      const double log_outer = shifted ? half_norm2 - tilt.mu.dot(z) : 0.0;
      const double value = std::exp(log_normal_cdf(ell) + log_outer);
      check_finite(value, "gamma-c", trial);
      return value;
    };
  });
  return batch;
}

TiltVector compute_tilt(const Network& net, const ShockModel& model, const Regime& regime,
                        int target) {
  const TargetView view = make_target_view(net, model, target);
  switch (regime.tag) {
    case Regime::Tag::large_asset:
      return mu_large_asset(view.model, view.net, regime.multiplier);
    case Regime::Tag::small_volatility:
      return mu_small_volatility(view.model, view.net, regime.multiplier);
    case Regime::Tag::large_volatility:
      return mu_large_volatility(view.model, view.net, regime.multiplier);
  }
  throw std::logic_error("compute_tilt: unknown regime");
}

EstimatorResult aggregate(const TrialBatch& batch) {
  if (batch.values.empty()) throw std::invalid_argument("aggregate: empty batch");
  const MeanVar mv = sample_mean_var(batch.values);
  EstimatorResult r;
  r.estimate = mv.mean;
  r.std_error = std::sqrt(mv.var / static_cast<double>(batch.values.size()));
  r.rel_error = r.estimate > 0.0 ? r.std_error / r.estimate
                                 : std::numeric_limits<double>::quiet_NaN();
  r.runtime_seconds = batch.duration_seconds;
  r.trials = batch.values.size();
  r.method = batch.method;
  r.scenario = payoff_name(batch.payoff);
  return r;
}

BondQuote price_bond(const TrialBatch& combined) {
  if (combined.payoff != PayoffKind::combined_price) {
    throw std::invalid_argument("price_bond: batch must carry per-trial price samples");
  }
  const EstimatorResult r = aggregate(combined);
  BondQuote quote;
  quote.price = r.estimate;
  quote.std_error = r.std_error;
  quote.yield_bps = r.estimate > 0.0 ? -std::log(r.estimate) * 1e4
                                     : std::numeric_limits<double>::quiet_NaN();
  return quote;
}

TrialBatch combine_price_batches(const TrialBatch& indicator_part,
                                 const TrialBatch& ratio_part) {
  if (indicator_part.payoff != PayoffKind::indicator ||
      ratio_part.payoff != PayoffKind::payout_ratio) {
    throw std::invalid_argument("combine_price_batches: need an indicator and a ratio batch");
  }
  if (indicator_part.values.size() != ratio_part.values.size()) {
    throw std::invalid_argument("combine_price_batches: trial counts differ");
  }
  TrialBatch out;
  out.method = indicator_part.method;
  out.payoff = PayoffKind::combined_price;
  out.seed = indicator_part.seed;
  out.duration_seconds = indicator_part.duration_seconds + ratio_part.duration_seconds;
  out.values.resize(indicator_part.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = 1.0 - indicator_part.values[i] + ratio_part.values[i];
  }
  return out;
}

}  // namespace netbliss
