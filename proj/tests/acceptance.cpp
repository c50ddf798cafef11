// Acceptance suite: every release criterion in one binary, one verdict line
// each. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "netbliss/calibration.hpp"
#include "netbliss/clearing.hpp"
#include "netbliss/estimators.hpp"
#include "netbliss/experiment.hpp"
#include "netbliss/rng.hpp"
#include "netbliss/stats.hpp"
#include "oracle_helpers.hpp"

using namespace netbliss;

namespace {

int g_failures = 0;

void verdict(int id, bool pass, const std::string& text) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
  if (!pass) ++g_failures;
}

double wall_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double combined_se(const EstimatorResult& a, const EstimatorResult& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

// Correlated complete toy variant: exchangeable correlation rho on top of the
// homogeneous balance sheets.
ShockModel exchangeable_model(int n, double sigma, double rho) {
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, rho);
  corr.diagonal().setOnes();
  return ShockModel::from_correlation(Eigen::VectorXd::Constant(n, sigma), corr);
}

// Four banks with illiquid holdings and a live price channel; initially
// solvent with default probability near 9%.
struct FireSaleCase {
  Network net;
  ShockModel model;
};

FireSaleCase fire_sale_case() {
  const int n = 4;
  Eigen::MatrixXd liab = Eigen::MatrixXd::Constant(n, n, 0.4);
  liab.diagonal().setZero();
  const Eigen::VectorXd external = Eigen::VectorXd::Constant(n, 4.8);
  const Eigen::VectorXd liquid = Eigen::VectorXd::Constant(n, 5.0);
  const Eigen::VectorXd units = Eigen::VectorXd::Constant(n, 0.5);
  return {build_network(liab, external, liquid, units,
                        InverseDemand::exponential(1.0, 0.2, 2.0)),
          exchangeable_model(n, 0.1, 0.3)};
}

// --------------------------------------------------------------------------

void criterion_1_threshold_equivalence() {
  const double t0 = wall_seconds();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long total = 0, mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + int(gen() % 5);
    const Network net = oracle::random_network(gen, n, rep % 2 == 0);
    const int target = int(gen() % n);
    const detail::ThresholdSolver solver(net, target);
    for (int draw = 0; draw < 10; ++draw) {
      Eigen::VectorXd s(n);
      for (int i = 0; i < n; ++i) s(i) = 1.5 * u(gen) * net.initial_liquid_assets(i);
      Eigen::VectorXd others(n - 1);
      int a = 0;
      for (int i = 0; i < n; ++i) {
        if (i != target) others(a++) = s(i);
      }
      const double v = solver.threshold(others);
      if (std::fabs(s(target) - v) <= 1e-6) continue;
      const bool via_threshold = s(target) < v;
      const ClearingOutcome out = clear(net, s);
      const bool via_clearing =
          !pays_in_full(out.payments(target), net.total_liabilities(target));
      ++total;
      if (via_threshold != via_clearing) ++mismatches;
    }
  }
  const double dt = wall_seconds() - t0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "threshold vs clearing default sets: %ld/%ld agree (%.1fs)",
                total - mismatches, total, dt);
  verdict(1, mismatches == 0 && dt < 60.0, buf);
}

void criterion_2_monotonicity() {
  const double t0 = wall_seconds();
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + int(gen() % 5);
    const Network net = oracle::random_network(gen, n, true);
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo(i) = 1.3 * u(gen) * net.initial_liquid_assets(i);
      hi(i) = lo(i) + u(gen);
    }
    const ClearingOutcome a = clear(net, lo), b = clear(net, hi);
    worst = std::max(worst, a.price - b.price);
    worst = std::max(worst, (a.payments - b.payments).maxCoeff());
  }
  const double dt = wall_seconds() - t0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "price/payment monotonicity: worst violation %.3g (tol 1e-10, %.1fs)", worst,
                dt);
  verdict(2, worst <= 1e-10 && dt < 30.0, buf);
}

void criterion_3_toy_magnitudes() {
  const double t0 = wall_seconds();
  struct Stress {
    double s0, sigma, order;
  };
  const Stress stresses[] = {{5.0, 0.1, 1e-2}, {5.0, 0.08, 1e-3}, {5.5, 0.1, 1e-4}};
  bool all_ok = true;
  std::string detail;
  for (const auto& st : stresses) {
    for (const int n : {4, 12}) {
      for (const bool ring : {false, true}) {
        const Network net = toy_network(n, ring, st.s0);
        const ShockModel model = toy_shock_model(n, st.sigma);
        const Regime regime = Regime::base();
        const TiltVector tilt = compute_tilt(net, model, regime, n - 1);
        const EstimatorResult r = aggregate(run_bliss(
            net, model, regime, PayoffKind::indicator, n - 1, 100000, 3003, tilt));
        const bool ok = r.estimate >= 0.3 * st.order && r.estimate <= 3.0 * st.order;
        all_ok = all_ok && ok;
        if (!ok && detail.size() < 160) {
          char buf[96];
          std::snprintf(buf, sizeof buf, " [S0=%.1f sig=%.2f n=%d %s: %.3g vs %.0e]", st.s0,
                        st.sigma, n, ring ? "ring" : "complete", r.estimate, st.order);
          detail += buf;
        }
      }
    }
  }
  const double dt = wall_seconds() - t0;
  if (!all_ok) {
    // The S0=5.5 default probability cannot sit below 3e-4: the threshold
    // never drops under 4, so it is bounded below by Phi(-3.1345) = 8.6e-4.
    detail += " [analytic lower bound 8.61e-4]";
  }
  char buf[448];
  std::snprintf(buf, sizeof buf,
                "toy estimates inside [0.3x,3x] of the stated orders%s (%.1fs)",
                all_ok ? "" : detail.c_str(), dt);
  verdict(3, all_ok && dt < 300.0, buf);
}

void criterion_4_variance_reduction() {
  const Network net = toy_network(4, false, 5.5);
  const ShockModel model = toy_shock_model(4, 0.1);
  const std::size_t n_trials = 100000;
  const EstimatorResult mc = aggregate(
      run_mc(net, model, Regime::base(), PayoffKind::indicator, 3, n_trials, 4004));
  const TiltVector tilt = compute_tilt(net, model, Regime::base(), 3);
  const EstimatorResult bliss = aggregate(run_bliss(
      net, model, Regime::base(), PayoffKind::indicator, 3, n_trials, 4004, tilt));
  const double mc_defaults = mc.estimate * double(n_trials);
  char buf[256];
  bool pass;
  if (mc_defaults >= 10.0) {
    pass = bliss.rel_error <= 0.2 * mc.rel_error;
    std::snprintf(buf, sizeof buf,
                  "rare-scenario rel errors: sampler %.4g vs plain MC %.4g (factor %.2f)",
                  bliss.rel_error, mc.rel_error, bliss.rel_error / mc.rel_error);
  } else {
    pass = bliss.rel_error < 0.05;
    std::snprintf(buf, sizeof buf, "plain MC degenerate (%g hits); sampler rel error %.4g",
                  mc_defaults, bliss.rel_error);
  }
  verdict(4, pass, buf);
}

void criterion_5_scalability() {
  const double t0 = wall_seconds();
  const std::size_t n_trials = 100000;
  const auto per_trial_time = [&](int n) {
    const Network net = toy_network(n, false, 5.5);
    const ShockModel model = toy_shock_model(n, 0.1);
    const TiltVector tilt = compute_tilt(net, model, Regime::base(), n - 1);
    double best = 1e100;
    for (int rep = 0; rep < 3; ++rep) {
      const TrialBatch b = run_bliss(net, model, Regime::base(), PayoffKind::indicator,
                                     n - 1, n_trials, 5005 + rep, tilt);
      best = std::min(best, b.duration_seconds / double(n_trials));
    }
    return best;
  };
  const double small = per_trial_time(8);
  const double large = per_trial_time(64);
  const double dt = wall_seconds() - t0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "per-trial cost n=8 -> n=64: %.0f ns -> %.0f ns (x%.2f, cap 8, %.1fs)",
                small * 1e9, large * 1e9, large / small, dt);
  verdict(5, large / small < 8.0 && dt < 300.0, buf);
}

struct TriangleScenario {
  std::string label;
  Network net;
  ShockModel model;
};

std::vector<TriangleScenario> triangle_scenarios() {
  std::vector<TriangleScenario> out;
  for (const double s0 : {4.5, 4.75, 5.0, 5.25}) {
    char lbl[32];
    std::snprintf(lbl, sizeof lbl, "toy S0=%.2f", s0);
    out.push_back({lbl, toy_network(5, false, s0), toy_shock_model(5, 0.1)});
  }
  const FireSaleCase fs = fire_sale_case();
  out.push_back({"fire-sale rho=0.3", fs.net, fs.model});
  return out;
}

void criteria_6_7_triangle_and_dominance() {
  bool triangle_ok = true, dominance_ok = true;
  std::string t_detail, d_detail;
  int idx = 0;
  for (const auto& sc : triangle_scenarios()) {
    const int target = sc.net.n - 1;
    const std::uint64_t seed = 6006 + 131 * idx++;
    const std::size_t n_trials = 100000;
    const EstimatorResult mc = aggregate(run_mc(
        sc.net, sc.model, Regime::base(), PayoffKind::indicator, target, n_trials, seed));
    const EstimatorResult ilis = aggregate(run_ilis(
        sc.net, sc.model, Regime::base(), PayoffKind::indicator, target, n_trials, seed + 1));
    const TiltVector tilt = compute_tilt(sc.net, sc.model, Regime::base(), target);
    const EstimatorResult bliss =
        aggregate(run_bliss(sc.net, sc.model, Regime::base(), PayoffKind::indicator, target,
                            n_trials, seed + 2, tilt));
    const bool pair_ok =
        std::fabs(mc.estimate - ilis.estimate) <= 3.0 * combined_se(mc, ilis) &&
        std::fabs(mc.estimate - bliss.estimate) <= 3.0 * combined_se(mc, bliss) &&
        std::fabs(ilis.estimate - bliss.estimate) <= 3.0 * combined_se(ilis, bliss);
    triangle_ok = triangle_ok && pair_ok;
    if (!pair_ok) t_detail += " [" + sc.label + "]";

    const double mc_var = mc.std_error * mc.std_error;
    const double ilis_var = ilis.std_error * ilis.std_error;
    if (!(ilis_var < mc_var)) {
      dominance_ok = false;
      d_detail += " [" + sc.label + "]";
    }
  }
  verdict(6, triangle_ok,
          "MC/ILIS/BLISS pairwise within 3 combined SE on all five scenarios" + t_detail);
  verdict(7, dominance_ok,
          "conditioned-sampler variance below plain MC on every scenario" + d_detail);
}

void criterion_8_tilting_effectiveness() {
  const double t0 = wall_seconds();
  const auto records = load_bank_records(default_eba_paths().records);
  const Eigen::MatrixXd corr = load_correlation(default_eba_paths().correlation);
  const Calibrated correlated =
      calibrate(records, 0.4, 2.5e-8, TopologySpec::complete(), corr);
  const int target = correlated.network.n - 1;

  // Pilot: bisect the displayed volatility multiplier until the default
  // probability is near 1e-4. The inner-only sampler is cheap and unbiased.
  double lo = 1.0, hi = 1.6;
  for (int it = 0; it < 9; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Regime regime = regime_from_display_multiplier(Regime::Tag::small_volatility, mid);
    const EstimatorResult probe =
        aggregate(run_ilis(correlated.network, correlated.shocks, regime,
                           PayoffKind::indicator, target, 4000, 8008 + it));
    if (probe.estimate < 1e-4) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mult = 0.5 * (lo + hi);
  const Regime regime = regime_from_display_multiplier(Regime::Tag::small_volatility, mult);
  const std::size_t n_trials = 100000;

  const EstimatorResult ilis_c =
      aggregate(run_ilis(correlated.network, correlated.shocks, regime,
                         PayoffKind::indicator, target, n_trials, 8108));
  const TiltVector tilt_c =
      compute_tilt(correlated.network, correlated.shocks, regime, target);
  const EstimatorResult bliss_c =
      aggregate(run_bliss(correlated.network, correlated.shocks, regime,
                          PayoffKind::indicator, target, n_trials, 8108, tilt_c));

  const Calibrated uncorrelated =
      calibrate(records, 0.4, 2.5e-8, TopologySpec::complete(), std::nullopt);
  const EstimatorResult ilis_u =
      aggregate(run_ilis(uncorrelated.network, uncorrelated.shocks, regime,
                         PayoffKind::indicator, target, n_trials, 8208));
  const TiltVector tilt_u =
      compute_tilt(uncorrelated.network, uncorrelated.shocks, regime, target);
  const EstimatorResult bliss_u =
      aggregate(run_bliss(uncorrelated.network, uncorrelated.shocks, regime,
                          PayoffKind::indicator, target, n_trials, 8208, tilt_u));

  const bool corr_gain = bliss_c.rel_error < 0.5 * ilis_c.rel_error;
  const double rel_gap = std::fabs(bliss_u.rel_error - ilis_u.rel_error) /
                         std::max(bliss_u.rel_error, ilis_u.rel_error);
  const bool uncor_match = rel_gap <= 0.2;
  const double dt = wall_seconds() - t0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "vol mult %.3f (p~%.2e): correlated rel errors %0.4g (shifted) vs %0.4g "
                "(unshifted); uncorrelated gap %.1f%% (%.1fs)",
                mult, bliss_c.estimate, bliss_c.rel_error, ilis_c.rel_error, 100.0 * rel_gap,
                dt);
  verdict(8, corr_gain && uncor_match, buf);
}

void criterion_9_numerical_kernels() {
  const struct {
    double x, expected;
  } table[] = {
      {-40.0, -804.60844201375378817}, {-20.0, -203.91715537109726394},
      {-10.0, -53.231285150512470578}, {-5.0, -15.064998393988725736},
      {0.0, -0.69314718055994530942},  {5.0, -2.8665161296376359338e-7},
  };
  bool cdf_ok = true;
  for (const auto& c : table) {
    if (std::fabs(log_normal_cdf(c.x) - c.expected) > 1e-10 * std::fabs(c.expected)) {
      cdf_ok = false;
    }
  }

  const struct {
    double upper, mean, var, mu4;
  } moments[] = {
      {0.0, -0.79788456080286536, 0.36338022763241866, 0.51090625155678406},
      {-5.0, -5.1865039671258421, 0.032696434617112225, 0.0082950074839007305},
      {-12.0, -12.082214175254284, 0.0066707263358458643, 0.00038701033044009263},
  };
  bool sampler_ok = true;
  const std::size_t n_draws = 1000000;
  for (const auto& m : moments) {
    std::vector<double> z(n_draws);
    for (std::size_t i = 0; i < n_draws; ++i) {
      TrialRng rng(9009, i);
      z[i] = sample_truncated_normal(m.upper, rng);
    }
    const MeanVar mv = sample_mean_var(z);
    const double se_mean = std::sqrt(m.var / double(n_draws));
    const double se_var = std::sqrt((m.mu4 - m.var * m.var) / double(n_draws));
    if (std::fabs(mv.mean - m.mean) > 3.0 * se_mean) sampler_ok = false;
    if (std::fabs(mv.var - m.var) > 3.0 * se_var) sampler_ok = false;
  }
  verdict(9, cdf_ok && sampler_ok,
          std::string("log-cdf table to 1e-10 relative") + (cdf_ok ? " ok" : " FAILED") +
              "; truncated-sampler moments within 3 SE" + (sampler_ok ? " ok" : " FAILED"));
}

void criterion_10_calibration_closure() {
  const auto records = load_bank_records(default_eba_paths().records);
  bool worth_ok = true, merton_ok = true, ras_ok = true;

  for (const auto& r : records) {
    const double sigma = merton_asset_vol(r.net_worth, r.total_assets, r.equity_vol);
    const double lev = (r.net_worth / r.total_assets) * r.equity_vol;
    const double lm = std::log(r.total_assets / (r.total_assets - r.net_worth));
    const double resid = sigma * normal_cdf((lm + 0.5 * sigma * sigma) / sigma) - lev;
    if (std::fabs(resid) > 1e-10 * lev) merton_ok = false;
  }

  const LiabilitySplit liab = split_liabilities(records);
  Eigen::VectorXd rows = liab.total - liab.external;
  Eigen::VectorXd cols(36);
  for (int i = 0; i < 36; ++i) cols(i) = records[i].interbank_assets;
  for (const auto topo : {TopologySpec::complete(), TopologySpec::core_periphery()}) {
    const TopologySpec resolved = TopologySpec::custom(topology_support(topo, records));
    const Eigen::MatrixXd x = reconstruct_interbank(rows, cols, resolved);
    for (int i = 0; i < 36; ++i) {
      if (std::fabs(x.row(i).sum() - rows(i)) > 1e-9 * rows(i)) ras_ok = false;
      if (std::fabs(x.col(i).sum() - cols(i)) > 1e-9 * cols(i)) ras_ok = false;
    }

    const Calibrated cal = calibrate(records, 0.4, 2.5e-8, topo, std::nullopt);
    for (int i = 0; i < 36; ++i) {
      const double worth = cal.network.initial_liquid_assets(i) +
                           cal.network.nominal_liabilities.col(i).sum() +
                           cal.network.illiquid_units(i) - cal.network.total_liabilities(i);
      if (std::fabs(worth - records[i].net_worth) > 1e-6 * records[i].net_worth) {
        worth_ok = false;
      }
    }
  }
  verdict(10, worth_ok && merton_ok && ras_ok,
          std::string("net worth reproduced (") + (worth_ok ? "ok" : "FAILED") +
              "), vol residuals < 1e-10 (" + (merton_ok ? "ok" : "FAILED") +
              "), marginals < 1e-9 (" + (ras_ok ? "ok" : "FAILED") + ")");
}

void criterion_11_solvency_estimator() {
  const int n = 4;
  const Network net = toy_network(n, false, 5.0);
  const ShockModel model = exchangeable_model(n, 0.1, 0.3);
  const int target = n - 1;
  const std::size_t n_trials = 100000;

  const TiltVector tilt1 = compute_tilt(net, model, Regime(Regime::Tag::large_volatility, 1.0),
                                        target);
  const EstimatorResult solvency =
      aggregate(run_gamma_c(net, model, 1.0, target, n_trials, 1101, tilt1));
  const EstimatorResult defaults = aggregate(
      run_ilis(net, model, Regime(Regime::Tag::large_volatility, 1.0), PayoffKind::indicator,
               target, n_trials, 1103));
  const bool complement_ok = std::fabs(solvency.estimate + defaults.estimate - 1.0) <=
                             3.0 * combined_se(solvency, defaults);

  double prev = solvency.estimate;
  bool decreasing = true;
  for (const double mult : {2.0, 3.0}) {
    const TiltVector tilt =
        compute_tilt(net, model, Regime(Regime::Tag::large_volatility, mult), target);
    const EstimatorResult r =
        aggregate(run_gamma_c(net, model, mult, target, n_trials, 1105, tilt));
    decreasing = decreasing && (r.estimate < prev);
    prev = r.estimate;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "solvency+default sum to one within 3 SE (%s); solvency falls across "
                "multipliers 1,2,3 (%s)",
                complement_ok ? "ok" : "FAILED", decreasing ? "ok" : "FAILED");
  verdict(11, complement_ok && decreasing, buf);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n----------------\n");
  criterion_1_threshold_equivalence();
  criterion_2_monotonicity();
  criterion_3_toy_magnitudes();
  criterion_4_variance_reduction();
  criterion_5_scalability();
  criteria_6_7_triangle_and_dominance();
  criterion_8_tilting_effectiveness();
  criterion_9_numerical_kernels();
  criterion_10_calibration_closure();
  criterion_11_solvency_estimator();
  std::printf("----------------\n%d criterion(s) failed\n", g_failures);
  return g_failures;
}
