#include "netbliss/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "netbliss/errors.hpp"

namespace netbliss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string regime_name(Regime::Tag tag) {
  switch (tag) {
    case Regime::Tag::large_asset: return "large-asset";
    case Regime::Tag::small_volatility: return "small-vol";
    case Regime::Tag::large_volatility: return "large-vol";
  }
  return "?";
}

}  // namespace

Network toy_network(int n, bool ring, double initial_liquid) {
  if (n < 2) throw std::invalid_argument("toy network: need at least two banks");
  Eigen::MatrixXd liab = Eigen::MatrixXd::Zero(n, n);
  if (ring) {
    for (int i = 0; i < n; ++i) liab(i, (i + 1) % n) = 1.0;
  } else {
    liab.setConstant(1.0 / (n - 1));
    liab.diagonal().setZero();
  }
  const Eigen::VectorXd external = Eigen::VectorXd::Constant(n, 4.0);
  const Eigen::VectorXd liquid = Eigen::VectorXd::Constant(n, initial_liquid);
  const Eigen::VectorXd units = Eigen::VectorXd::Zero(n);
  return build_network(liab, external, liquid, units, InverseDemand::exponential(1.0, 0.0, 0.0));
}

ShockModel toy_shock_model(int n, double sigma) {
  return ShockModel::from_cholesky(
      Eigen::MatrixXd(Eigen::VectorXd::Constant(n, sigma).asDiagonal()));
}

Regime regime_from_display_multiplier(Regime::Tag tag, double display) {
  if (!(display > 0.0)) throw std::invalid_argument("multiplier must be positive");
  if (tag == Regime::Tag::small_volatility) return Regime(tag, 1.0 / display);
  return Regime(tag, display);
}

std::vector<ResultRow> run_price_grid(const ExperimentConfig& config, const Network& net,
                                      const ShockModel& model, int target) {
  if (target < 0) target = net.n - 1;
  std::vector<ResultRow> rows;
  std::uint64_t cell = 0;
  for (double display : config.multipliers) {
    const Regime regime = regime_from_display_multiplier(config.regime_tag, display);
    const std::uint64_t cell_seed = config.seed + 1000003ull * cell++;
    std::vector<ResultRow> cell_rows;
    for (const auto& method : config.methods) {
      TrialBatch batch;
      if (method == "mc") {
        batch = run_mc(net, model, regime, config.payoff, target, config.trials, cell_seed);
      } else if (method == "ilis") {
        batch = run_ilis(net, model, regime, config.payoff, target, config.trials, cell_seed);
      } else if (method == "bliss") {
        const TiltVector tilt = compute_tilt(net, model, regime, target);
        batch = run_bliss(net, model, regime, config.payoff, target, config.trials, cell_seed,
                          tilt);
      } else if (method == "gamma-c") {
        if (config.regime_tag != Regime::Tag::large_volatility) {
          throw std::invalid_argument("gamma-c runs in the large-vol regime only");
        }
        const TiltVector tilt = compute_tilt(net, model, regime, target);
        batch = run_gamma_c(net, model, regime.multiplier, target, config.trials, cell_seed,
                            tilt);
      } else {
        throw std::invalid_argument("unknown method '" + method + "'");
      }
      const EstimatorResult agg = aggregate(batch);
      ResultRow row;
      row.scenario = config.scenario_label;
      row.method = method;
      row.sweep = display;
      row.regime = regime_name(config.regime_tag);
      row.correlation = config.correlated ? "correlated" : "uncorrelated";
      row.estimate = agg.estimate;
      row.std_error = agg.std_error;
      row.rel_error = agg.rel_error;
      row.runtime_sec = agg.runtime_seconds;
      row.price = kNaN;
      row.yield_bps = kNaN;
      if (config.payoff == PayoffKind::combined_price && method != "gamma-c") {
        const BondQuote quote = price_bond(batch);
        row.price = quote.price;
        row.yield_bps = quote.yield_bps;
      }
      cell_rows.push_back(std::move(row));
    }
    const auto mc_row = std::find_if(cell_rows.begin(), cell_rows.end(),
                                     [](const ResultRow& r) { return r.method == "mc"; });
    for (auto& r : cell_rows) {
      if (mc_row == cell_rows.end()) {
        r.efficiency = kNaN;
      } else if (r.method == "mc") {
        r.efficiency = 1.0;
      } else {
        const double num = mc_row->std_error * mc_row->std_error * mc_row->runtime_sec;
        const double den = r.std_error * r.std_error * r.runtime_sec;
        r.efficiency = den > 0.0 ? num / den : kNaN;
      }
    }
    if (mc_row == cell_rows.end() && !config.methods.empty()) {
      std::cerr << "warning: no plain-MC baseline in this sweep; efficiency left empty\n";
    }
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  }
  return rows;
}

std::vector<ResultRow> run_toy_experiment(std::size_t trials, std::uint64_t seed,
                                          const std::vector<std::string>& methods,
                                          const std::vector<int>& sizes) {
  struct Stress {
    double initial;
    double sigma;
    const char* label;
  };
  const Stress stresses[] = {{5.0, 0.1, "S5-sig0.10"},
                             {5.0, 0.08, "S5-sig0.08"},
                             {5.5, 0.1, "S5.5-sig0.10"}};
  std::vector<ResultRow> rows;
  std::uint64_t cell = 0;
  for (const bool ring : {false, true}) {
    for (const auto& stress : stresses) {
      for (int n : sizes) {
        const Network net = toy_network(n, ring, stress.initial);
        const ShockModel model = toy_shock_model(n, stress.sigma);
        ExperimentConfig cfg;
        cfg.methods = methods;
        cfg.regime_tag = Regime::Tag::large_asset;
        cfg.multipliers = {1.0};
        cfg.payoff = PayoffKind::indicator;
        cfg.trials = trials;
        cfg.seed = seed + 7919ull * cell++;
        cfg.scenario_label =
            std::string("toy-") + (ring ? "ring" : "complete") + "-" + stress.label;
        auto cell_rows = run_price_grid(cfg, net, model, n - 1);
        for (auto& r : cell_rows) r.sweep = n;
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
      }
    }
  }
  return rows;
}

EbaPaths default_eba_paths() {
#ifdef NETBLISS_DATA_DIR
  const std::string base = NETBLISS_DATA_DIR;
#else
  const std::string base = "data";
#endif
  return {base + "/eba_2018.csv", base + "/eba_correlation_R.txt"};
}

std::vector<ResultRow> run_eba_experiment(const ExperimentConfig& config, const EbaPaths& paths,
                                          double beta, double nu, const TopologySpec& topo) {
  const auto records = load_bank_records(paths.records);
  std::optional<Eigen::MatrixXd> correlation;
  if (config.correlated) correlation = load_correlation(paths.correlation);
  const Calibrated cal = calibrate(records, beta, nu, topo, correlation);
  ExperimentConfig cfg = config;
  if (cfg.scenario_label.empty()) {
    cfg.scenario_label = std::string("eba-") + regime_name(cfg.regime_tag) + "-" +
                         (cfg.correlated ? "cor" : "uncor");
  }
  const int target = config.target >= 0 ? config.target : cal.network.n - 1;
  return run_price_grid(cfg, cal.network, cal.shocks, target);
}

namespace {

std::string field(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const char* kHeader =
    "scenario,method,multiplier,regime,correlation,estimate,std_error,rel_error,"
    "runtime_sec,efficiency,price,yield_bps";

}  // namespace

std::string format_rows(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kHeader << "\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.method << ',' << field(r.sweep) << ',' << r.regime << ','
       << r.correlation << ',' << field(r.estimate) << ',' << field(r.std_error) << ','
       << field(r.rel_error) << ',' << field(r.runtime_sec) << ',' << field(r.efficiency) << ','
       << field(r.price) << ',' << field(r.yield_bps) << "\n";
  }
  return os.str();
}

void write_rows(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << format_rows(rows);
}

std::vector<ResultRow> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open results file: " + path);
  std::string line;
  int line_no = 0;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kHeader) throw ParseError("unexpected results header", 1);
      continue;
    }
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (cells.size() != 12) throw ParseError("expected 12 fields", line_no);
    const auto num = [&](const std::string& s) {
      return s.empty() ? kNaN : std::stod(s);
    };
    ResultRow r;
    r.scenario = cells[0];
    r.method = cells[1];
    r.sweep = num(cells[2]);
    r.regime = cells[3];
    r.correlation = cells[4];
    r.estimate = num(cells[5]);
    r.std_error = num(cells[6]);
    r.rel_error = num(cells[7]);
    r.runtime_sec = num(cells[8]);
    r.efficiency = num(cells[9]);
    r.price = num(cells[10]);
    r.yield_bps = num(cells[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::string> write_plotdata(const std::string& prefix,
                                        const std::vector<ResultRow>& rows) {
  // Group rows per scenario; one output file each, methods pivoted into
  // column blocks against the sweep variable.
  std::vector<std::string> scenario_order;
  std::map<std::string, std::vector<const ResultRow*>> by_scenario;
  for (const auto& r : rows) {
    auto& bucket = by_scenario[r.scenario];
    if (bucket.empty()) scenario_order.push_back(r.scenario);
    bucket.push_back(&r);
  }

  std::vector<std::string> written;
  for (const auto& scenario : scenario_order) {
    const auto& bucket = by_scenario[scenario];
    std::vector<std::string> methods;
    std::vector<double> sweeps;
    for (const auto* r : bucket) {
      if (std::find(methods.begin(), methods.end(), r->method) == methods.end()) {
        methods.push_back(r->method);
      }
      if (std::find(sweeps.begin(), sweeps.end(), r->sweep) == sweeps.end()) {
        sweeps.push_back(r->sweep);
      }
    }
    std::sort(sweeps.begin(), sweeps.end());

    std::string fname = scenario;
    for (auto& c : fname) {
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    fname = prefix + "_" + fname + ".csv";
    std::ofstream out(fname);
    if (!out) throw ParseError("cannot open plot data file: " + fname);

    out << "multiplier";
    for (const auto& m : methods) {
      out << ',' << m << "_estimate," << m << "_std_error," << m << "_rel_error," << m
          << "_runtime_sec," << m << "_efficiency";
    }
    out << "\n";
    for (double sw : sweeps) {
      out << field(sw);
      for (const auto& m : methods) {
        const ResultRow* found = nullptr;
        for (const auto* r : bucket) {
          if (r->method == m && r->sweep == sw) {
            found = r;
            break;
          }
        }
        if (found) {
          out << ',' << field(found->estimate) << ',' << field(found->std_error) << ','
              << field(found->rel_error) << ',' << field(found->runtime_sec) << ','
              << field(found->efficiency);
        } else {
          std::cerr << "warning: no '" << m << "' row at multiplier " << sw << " in scenario '"
                    << scenario << "'\n";
          out << ",,,,,";
        }
      }
      out << "\n";
    }
    written.push_back(fname);
  }
  return written;
}

}  // namespace netbliss
