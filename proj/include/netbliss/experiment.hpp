#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netbliss/calibration.hpp"
#include "netbliss/estimators.hpp"
#include "netbliss/network.hpp"
#include "netbliss/shocks.hpp"

namespace netbliss {

/// One table row of an experiment sweep. `sweep` is the x variable: the
/// regime multiplier for price sweeps and the network size for the synthetic
/// scaling study.
struct ResultRow {
  std::string scenario;
  std::string method;
  double sweep = 0.0;
  std::string regime;
  std::string correlation;
  double estimate = 0.0;
  double std_error = 0.0;
  double rel_error = 0.0;
  double runtime_sec = 0.0;
  double efficiency = 1.0;  // NaN when no matching plain-MC row exists
  double price = 0.0;       // NaN for non-price payoffs
  double yield_bps = 0.0;   // NaN for non-price payoffs
};

struct ExperimentConfig {
  std::vector<std::string> methods{"mc", "ilis", "bliss"};
  Regime::Tag regime_tag = Regime::Tag::large_asset;
  std::vector<double> multipliers{1.0};
  PayoffKind payoff = PayoffKind::indicator;
  std::size_t trials = 10000;
  std::uint64_t seed = 20170401;
  int target = -1;  // -1: last bank
  bool correlated = false;
  std::string scenario_label;
};

/// Synthetic homogeneous system: every bank owes 4 outside and 1 inside,
/// spread per the topology, with no illiquid holdings.
Network toy_network(int n, bool ring, double initial_liquid);
ShockModel toy_shock_model(int n, double sigma);

/// Display multiplier -> regime parameter. Asset multipliers act directly;
/// volatility multipliers scale the factor, so the vanishing-volatility
/// regime uses their reciprocal.
Regime regime_from_display_multiplier(Regime::Tag tag, double display);

/// Runs every (multiplier, method) cell of the sweep on one system.
std::vector<ResultRow> run_price_grid(const ExperimentConfig& config, const Network& net,
                                      const ShockModel& model, int target);

/// Synthetic sweep over network size and topology at the three canonical
/// stress levels; `sweep` holds the network size.
std::vector<ResultRow> run_toy_experiment(std::size_t trials, std::uint64_t seed,
                                          const std::vector<std::string>& methods,
                                          const std::vector<int>& sizes);

struct EbaPaths {
  std::string records;
  std::string correlation;
};

EbaPaths default_eba_paths();

std::vector<ResultRow> run_eba_experiment(const ExperimentConfig& config, const EbaPaths& paths,
                                          double beta, double nu, const TopologySpec& topo);

/// Comma-separated table with a fixed header; deterministic ordering and
/// formatting, so identical configs and seeds produce identical bytes
/// (runtime columns aside, unless a fake clock is injected).
void write_rows(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_rows(const std::string& path);
std::string format_rows(const std::vector<ResultRow>& rows);

/// Per-scenario pivot: one line per sweep value, method columns side by side
/// (estimate, std error, rel error, runtime, efficiency per method). Returns
/// the written file names.
std::vector<std::string> write_plotdata(const std::string& prefix,
                                        const std::vector<ResultRow>& rows);

}  // namespace netbliss
