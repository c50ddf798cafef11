#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "netbliss/calibration.hpp"
#include "netbliss/clearing.hpp"
#include "netbliss/errors.hpp"
#include "netbliss/estimators.hpp"
#include "netbliss/experiment.hpp"
#include "netbliss/network_io.hpp"

namespace {

using namespace netbliss;

struct NetworkArgs {
  std::string network = "toy";  // toy | eba | <path>
  int toy_n = 4;
  double toy_s0 = 5.0;
  double toy_sigma = 0.1;
  std::string topology = "complete";  // complete | ring | core-periphery | <path>
  std::string correlation = "identity";
  std::string vols_file;
  double beta = 0.4;
  double nu = 2.5e-8;
  std::string records_file;
  std::string correlation_file;
};

void add_network_flags(CLI::App* cmd, NetworkArgs& args) {
  cmd->add_option("--network", args.network, "'toy', 'eba', or a network file path");
  cmd->add_option("--toy-n", args.toy_n, "bank count for the builtin toy system");
  cmd->add_option("--toy-s0", args.toy_s0, "initial liquid assets for the toy system");
  cmd->add_option("--toy-sigma", args.toy_sigma, "per-bank volatility for the toy system");
  cmd->add_option("--topology", args.topology,
                  "complete | ring | core-periphery | adjacency file");
  cmd->add_option("--correlation", args.correlation, "'identity' or a correlation grid file");
  cmd->add_option("--vols", args.vols_file, "volatility vector file (file networks)");
  cmd->add_option("--beta", args.beta, "liquid share of non-interbank assets (eba)");
  cmd->add_option("--nu", args.nu, "price impact rate of the exponential demand curve (eba)");
  cmd->add_option("--records", args.records_file, "override the bundled balance-sheet table");
  cmd->add_option("--correlation-file", args.correlation_file,
                  "override the bundled correlation grid");
}

TopologySpec topology_from_string(const std::string& s) {
  if (s == "complete") return TopologySpec::complete();
  if (s == "ring") return TopologySpec::ring();
  if (s == "core-periphery") return TopologySpec::core_periphery();
  const Eigen::MatrixXd grid = load_correlation(s);  // dense numeric grid
  return TopologySpec::custom(grid.cast<int>());
}

bool use_correlation(const NetworkArgs& args) { return args.correlation != "identity"; }

struct BuiltSystem {
  Network net;
  ShockModel model;
};

BuiltSystem build_system(const NetworkArgs& args) {
  BuiltSystem sys;
  if (args.network == "toy") {
    sys.net = toy_network(args.toy_n, args.topology == "ring", args.toy_s0);
    sys.model = toy_shock_model(args.toy_n, args.toy_sigma);
    return sys;
  }
  if (args.network == "eba") {
    EbaPaths paths = default_eba_paths();
    if (!args.records_file.empty()) paths.records = args.records_file;
    if (!args.correlation_file.empty()) paths.correlation = args.correlation_file;
    const auto records = load_bank_records(paths.records);
    std::optional<Eigen::MatrixXd> corr;
    if (use_correlation(args)) {
      corr = load_correlation(args.correlation == "file" ? paths.correlation
                                                         : args.correlation);
    }
    const Calibrated cal =
        calibrate(records, args.beta, args.nu, topology_from_string(args.topology), corr);
    sys.net = cal.network;
    sys.model = cal.shocks;
    return sys;
  }
  sys.net = read_network_file(args.network);
  if (!args.vols_file.empty()) {
    const Eigen::VectorXd vols = load_vector(args.vols_file);
    if (use_correlation(args)) {
      sys.model = ShockModel::from_correlation(vols, load_correlation(args.correlation));
    } else {
      sys.model = ShockModel::from_cholesky(Eigen::MatrixXd(vols.asDiagonal()));
    }
  }
  return sys;
}

Regime::Tag regime_from_string(const std::string& s) {
  if (s == "large-asset") return Regime::Tag::large_asset;
  if (s == "small-vol") return Regime::Tag::small_volatility;
  if (s == "large-vol") return Regime::Tag::large_volatility;
  throw CLI::ValidationError("--regime", "expected large-asset | small-vol | large-vol");
}

PayoffKind payoff_from_string(const std::string& s) {
  if (s == "indicator") return PayoffKind::indicator;
  if (s == "ratio") return PayoffKind::payout_ratio;
  if (s == "price") return PayoffKind::combined_price;
  throw CLI::ValidationError("--payoff", "expected indicator | ratio | price");
}

void emit_rows(const std::vector<ResultRow>& rows, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << format_rows(rows);
  } else {
    write_rows(out_path, rows);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bond valuation in banking networks with fire-sale contagion"};
  app.require_subcommand(1);

  NetworkArgs net_args;
  std::string shocks_file, out_path, results_file, plot_prefix = "plot";
  std::vector<std::string> methods{"mc", "ilis", "bliss"};
  std::string regime_str = "large-asset", payoff_str = "indicator";
  std::vector<double> multipliers{1.0};
  std::size_t trials = 10000;
  std::uint64_t seed = 20170401;
  int target = 0;  // 1-based; 0 means the last bank
  std::vector<int> toy_sizes;

  auto* validate_cmd = app.add_subcommand("validate", "check the standing model conditions");
  add_network_flags(validate_cmd, net_args);

  auto* clear_cmd = app.add_subcommand("clear", "solve one clearing equilibrium");
  add_network_flags(clear_cmd, net_args);
  clear_cmd->add_option("--shocks", shocks_file, "external asset vector file")->required();

  auto* price_cmd = app.add_subcommand("price", "estimate default measures or bond prices");
  add_network_flags(price_cmd, net_args);
  price_cmd->add_option("--method", methods, "mc | ilis | bliss | gamma-c (repeatable)");
  price_cmd->add_option("--regime", regime_str, "large-asset | small-vol | large-vol");
  price_cmd->add_option("--multipliers", multipliers, "sweep values")->delimiter(',');
  price_cmd->add_option("--trials", trials, "simulation trials per cell");
  price_cmd->add_option("--seed", seed, "base random seed");
  price_cmd->add_option("--target", target, "target bank, 1-based (default: last)");
  price_cmd->add_option("--payoff", payoff_str, "indicator | ratio | price");
  price_cmd->add_option("--out", out_path, "write the result table here");

  auto* toy_cmd = app.add_subcommand("toy", "synthetic size sweep over both topologies");
  toy_cmd->add_option("--method", methods, "methods to run (repeatable)");
  toy_cmd->add_option("--trials", trials, "simulation trials per cell");
  toy_cmd->add_option("--seed", seed, "base random seed");
  toy_cmd->add_option("--sizes", toy_sizes, "network sizes (default 4..12)")->delimiter(',');
  toy_cmd->add_option("--out", out_path, "write the result table here");

  std::string export_path;
  auto* eba_cmd = app.add_subcommand("eba", "calibrated European system sweep");
  add_network_flags(eba_cmd, net_args);
  eba_cmd->add_option("--method", methods, "methods to run (repeatable)");
  eba_cmd->add_option("--regime", regime_str, "large-asset | small-vol | large-vol");
  eba_cmd->add_option("--multipliers", multipliers, "sweep values")->delimiter(',');
  auto* eba_trials_opt = eba_cmd->add_option("--trials", trials,
                                             "simulation trials per cell (default 1000000)");
  eba_cmd->add_option("--seed", seed, "base random seed");
  eba_cmd->add_option("--target", target, "target bank, 1-based (default: last)");
  eba_cmd->add_option("--payoff", payoff_str, "indicator | ratio | price");
  eba_cmd->add_option("--out", out_path, "write the result table here");
  eba_cmd->add_option("--export-network", export_path,
                      "write the calibrated system in the dense network format and exit");

  auto* plot_cmd = app.add_subcommand("plotdata", "reshape a result table per figure");
  plot_cmd->add_option("--in", results_file, "result table produced by price/toy/eba")
      ->required();
  plot_cmd->add_option("--prefix", plot_prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) {
      const BuiltSystem sys = build_system(net_args);
      const ValidationReport report = validate_assumptions(sys.net);
      std::cout << format_report(report);
      return report.assumptions_ok ? 0 : 1;
    }

    if (clear_cmd->parsed()) {
      const BuiltSystem sys = build_system(net_args);
      const Eigen::VectorXd s = load_vector(shocks_file);
      const ClearingOutcome outcome = clear(sys.net, s);
      std::cout.precision(12);
      std::cout << "price " << outcome.price << "\n";
      std::cout << "payments";
      for (int i = 0; i < sys.net.n; ++i) std::cout << ' ' << outcome.payments(i);
      std::cout << "\ndefaults";
      for (int i : outcome.defaults) std::cout << ' ' << (i + 1);
      std::cout << "\niterations " << outcome.iterations << "\n";
      std::cout << "residual " << outcome.residual << "\n";
      return 0;
    }

    if (price_cmd->parsed() || eba_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.methods = methods;
      cfg.regime_tag = regime_from_string(regime_str);
      cfg.multipliers = multipliers;
      cfg.payoff = payoff_from_string(payoff_str);
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.target = target - 1;  // may become -1: last bank
      cfg.correlated = use_correlation(net_args);

      std::vector<ResultRow> rows;
      if (eba_cmd->parsed()) {
        if (eba_trials_opt->count() == 0) cfg.trials = 1000000;
        EbaPaths paths = default_eba_paths();
        if (!net_args.records_file.empty()) paths.records = net_args.records_file;
        if (!net_args.correlation_file.empty()) paths.correlation = net_args.correlation_file;
        if (cfg.correlated && net_args.correlation != "file") {
          paths.correlation = net_args.correlation;
        }
        if (!export_path.empty()) {
          const auto records = load_bank_records(paths.records);
          std::optional<Eigen::MatrixXd> corr;
          if (cfg.correlated) corr = load_correlation(paths.correlation);
          const Calibrated cal = calibrate(records, net_args.beta, net_args.nu,
                                           topology_from_string(net_args.topology), corr);
          write_network_file(export_path, cal.network);
          std::cout << "wrote calibrated network to " << export_path << "\n";
          return 0;
        }
        rows = run_eba_experiment(cfg, paths, net_args.beta, net_args.nu,
                                  topology_from_string(net_args.topology));
      } else {
        const BuiltSystem sys = build_system(net_args);
        if (sys.model.size() != sys.net.n) {
          throw std::invalid_argument("price: supply --vols (and optionally --correlation) "
                                      "for file networks");
        }
        cfg.scenario_label = "price-" + regime_str + (cfg.correlated ? "-cor" : "-uncor");
        rows = run_price_grid(cfg, sys.net, sys.model, cfg.target);
      }
      emit_rows(rows, out_path);
      return 0;
    }

    if (toy_cmd->parsed()) {
      if (toy_sizes.empty()) {
        for (int n = 4; n <= 12; ++n) toy_sizes.push_back(n);
      }
      const auto rows = run_toy_experiment(trials, seed, methods, toy_sizes);
      emit_rows(rows, out_path);
      return 0;
    }

    if (plot_cmd->parsed()) {
      const auto rows = read_rows(results_file);
      const auto files = write_plotdata(plot_prefix, rows);
      for (const auto& f : files) std::cout << "wrote " << f << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
