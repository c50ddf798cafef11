#include "netbliss/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "netbliss/errors.hpp"
#include "netbliss/stats.hpp"

namespace netbliss {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line_no);
  }
}

}  // namespace

std::vector<RawBankRecord> load_bank_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open records file: " + path);
  std::string line;
  int line_no = 0;
  std::vector<RawBankRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("name,", 0) == 0) continue;  // header
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) {
      throw ParseError("expected 6 comma-separated fields, got " + std::to_string(cells.size()),
                       line_no);
    }
    RawBankRecord r;
    r.name = cells[0];
    r.total_assets = parse_number(cells[1], line_no);
    r.net_worth = parse_number(cells[2], line_no);
    r.interbank_assets = parse_number(cells[3], line_no);
    r.equity_vol = parse_number(cells[4], line_no) / 100.0;
    r.listed = parse_number(cells[5], line_no) != 0.0;
    if (!(r.total_assets > r.net_worth) || !(r.net_worth > 0.0)) {
      throw ParseError("record '" + r.name + "': need assets > net worth > 0", line_no);
    }
    if (!(r.interbank_assets >= 0.0) || !(r.interbank_assets < r.total_assets)) {
      throw ParseError("record '" + r.name + "': interbank assets out of range", line_no);
    }
    if (!(r.equity_vol > 0.0)) {
      throw ParseError("record '" + r.name + "': equity volatility must be positive", line_no);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError("no records in " + path);
  return records;
}

Eigen::MatrixXd load_correlation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open correlation file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::vector<double> row;
    std::string tok;
    while (is >> tok) row.push_back(parse_number(tok, line_no));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ParseError("empty correlation grid in " + path);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto len = static_cast<int>(rows[i].size());
    if (len != i + 1 && len != n) {
      throw ParseError("correlation row " + std::to_string(i + 1) + " has " +
                       std::to_string(len) + " entries; expected " + std::to_string(i + 1) +
                       " (triangular) or " + std::to_string(n) + " (square)");
    }
    for (int j = 0; j < len; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::VectorXd load_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file: " + path);
  std::vector<double> vals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) vals.push_back(parse_number(tok, line_no));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

TopologySpec TopologySpec::ring() {
  TopologySpec t;
  t.kind = Kind::ring;
  return t;
}

TopologySpec TopologySpec::core_periphery(int core) {
  TopologySpec t;
  t.kind = Kind::core_periphery;
  t.core_size = core;
  return t;
}

TopologySpec TopologySpec::custom(Eigen::MatrixXi adjacency) {
  TopologySpec t;
  t.kind = Kind::custom;
  t.adjacency = std::move(adjacency);
  return t;
}

LiabilitySplit split_liabilities(const std::vector<RawBankRecord>& records) {
  const int n = static_cast<int>(records.size());
  LiabilitySplit out;
  out.total.resize(n);
  double interbank_total = 0.0;
  for (int i = 0; i < n; ++i) {
    out.total(i) = records[i].total_assets - records[i].net_worth;
    interbank_total += records[i].interbank_assets;
  }
  out.alpha = 1.0 - interbank_total / out.total.sum();
  // alpha = 1 is the interbank-free corner; a nonpositive share means the
  // recorded interbank assets exceed all liabilities.
  if (!(out.alpha > 0.0) || !(out.alpha <= 1.0)) {
    throw std::invalid_argument("liability split: external share alpha = " +
                                std::to_string(out.alpha) + " outside (0,1]");
  }
  out.external = out.alpha * out.total;
  return out;
}

AssetSplit split_assets(const std::vector<RawBankRecord>& records, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("asset split: beta must lie in (0,1]");
  }
  const int n = static_cast<int>(records.size());
  AssetSplit out;
  out.liquid.resize(n);
  out.illiquid.resize(n);
  for (int i = 0; i < n; ++i) {
    const double non_interbank = records[i].total_assets - records[i].interbank_assets;
    if (!(non_interbank > 0.0)) {
      throw std::invalid_argument("asset split: bank '" + records[i].name +
                                  "' has no non-interbank assets");
    }
    out.liquid(i) = beta * non_interbank;
    out.illiquid(i) = (1.0 - beta) * non_interbank;
  }
  return out;
}

double merton_asset_vol(double net_worth, double total_assets, double equity_vol) {
  if (!(net_worth > 0.0) || !(total_assets > net_worth)) {
    throw std::invalid_argument("asset vol: need 0 < net worth < total assets");
  }
  if (!(equity_vol > 0.0)) throw std::invalid_argument("asset vol: equity vol must be positive");
  const double leverage_vol = (net_worth / total_assets) * equity_vol;
  const double log_moneyness = std::log(total_assets / (total_assets - net_worth));
  const auto delta = [&](double sigma) {
    return normal_cdf((log_moneyness + 0.5 * sigma * sigma) / sigma);
  };
  // sigma * delta(sigma) is increasing and delta is in (0.5, 1), so the root
  // sits inside [leverage_vol, 2 * leverage_vol].
  double sigma = leverage_vol / delta(leverage_vol);
  for (int it = 0; it < 200; ++it) {
    const double next = leverage_vol / delta(sigma);
    const double step = next - sigma;
    sigma += 0.5 * step;
    if (std::abs(sigma * delta(sigma) - leverage_vol) < 1e-12 * leverage_vol) {
      return sigma;
    }
  }
  // Damped iteration stalled; fall back to bisection on the residual.
  double lo = leverage_vol, hi = 2.0 * leverage_vol;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * delta(mid) < leverage_vol) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double sigma_b = 0.5 * (lo + hi);
  if (std::abs(sigma_b * delta(sigma_b) - leverage_vol) > 1e-10 * leverage_vol) {
    throw SolverError("asset vol: fixed point not reached, bracket [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  }
  return sigma_b;
}

Eigen::MatrixXi topology_support(const TopologySpec& topo, int n) {
  Eigen::MatrixXi support = Eigen::MatrixXi::Zero(n, n);
  switch (topo.kind) {
    case TopologySpec::Kind::complete:
      support.setOnes();
      break;
    case TopologySpec::Kind::ring:
      for (int i = 0; i < n; ++i) support(i, (i + 1) % n) = 1;
      break;
    case TopologySpec::Kind::core_periphery: {
      // Without balance sheets the first core_size banks are the core.
      std::vector<bool> core(n, false);
      for (int k = 0; k < std::min(topo.core_size, n); ++k) core[k] = true;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && (core[i] || core[j])) support(i, j) = 1;
        }
      }
      break;
    }
    case TopologySpec::Kind::custom:
      if (topo.adjacency.rows() != n || topo.adjacency.cols() != n) {
        throw std::invalid_argument("topology: adjacency shape mismatch");
      }
      support = (topo.adjacency.array() != 0).cast<int>();
      break;
  }
  support.diagonal().setZero();
  return support;
}

Eigen::MatrixXi topology_support(const TopologySpec& topo,
                                 const std::vector<RawBankRecord>& records) {
  const int n = static_cast<int>(records.size());
  if (topo.kind != TopologySpec::Kind::core_periphery) return topology_support(topo, n);
  // Core banks borrow from and lend to everyone; periphery banks deal with
  // the core only. The core is the largest banks by total assets.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return records[a].total_assets > records[b].total_assets;
  });
  std::vector<bool> core(n, false);
  for (int k = 0; k < std::min(topo.core_size, n); ++k) core[order[k]] = true;
  Eigen::MatrixXi support = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (core[i] || core[j])) support(i, j) = 1;
    }
  }
  return support;
}

Eigen::MatrixXd reconstruct_interbank(const Eigen::VectorXd& row_sums,
                                      const Eigen::VectorXd& col_sums,
                                      const TopologySpec& topo) {
  const auto n = row_sums.size();
  if (col_sums.size() != n) throw std::invalid_argument("reconstruct: marginal length mismatch");
  if ((row_sums.array() < 0.0).any() || (col_sums.array() < 0.0).any()) {
    throw std::invalid_argument("reconstruct: negative marginal");
  }
  const double tot_r = row_sums.sum(), tot_c = col_sums.sum();
  if (std::abs(tot_r - tot_c) > 1e-6 * std::max(1.0, std::max(tot_r, tot_c))) {
    throw std::invalid_argument("reconstruct: row and column totals disagree beyond 1e-6");
  }

  Eigen::MatrixXi support = topology_support(topo, static_cast<int>(n));

  // Banks with positive totals need at least one feasible partner.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_sums(i) > 0.0 && support.row(i).sum() == 0) {
      throw std::invalid_argument("reconstruct: bank " + std::to_string(i + 1) +
                                  " owes a positive amount but has no out-edge");
    }
    if (col_sums(i) > 0.0 && support.col(i).sum() == 0) {
      throw std::invalid_argument("reconstruct: bank " + std::to_string(i + 1) +
                                  " is owed a positive amount but has no in-edge");
    }
  }

  Eigen::MatrixXd x = support.cast<double>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_sums(i) == 0.0) x.row(i).setZero();
    if (col_sums(i) == 0.0) x.col(i).setZero();
  }

  const double scale = std::max(1.0, std::max(tot_r, tot_c));
  const int max_sweeps = 100000;
  double stall_reference = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rs = x.row(i).sum();
      if (rs > 0.0) x.row(i) *= row_sums(i) / rs;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double cs = x.col(j).sum();
      if (cs > 0.0) x.col(j) *= col_sums(j) / cs;
    }
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom_r = row_sums(i) > 0.0 ? row_sums(i) : scale;
      const double denom_c = col_sums(i) > 0.0 ? col_sums(i) : scale;
      err = std::max(err, std::abs(x.row(i).sum() - row_sums(i)) / denom_r);
      err = std::max(err, std::abs(x.col(i).sum() - col_sums(i)) / denom_c);
    }
    if (err < 1e-9) return x;
    // Infeasible supports oscillate without improving; bail out once the
    // error stops moving instead of burning the whole sweep budget.
    if (sweep % 2000 == 1999) {
      if (err > 0.999999 * stall_reference) {
        throw SolverError("reconstruct: marginal error stalled at " + std::to_string(err) +
                          "; the support cannot carry these totals");
      }
      stall_reference = err;
    }
  }
  throw SolverError("reconstruct: proportional fitting did not reach 1e-9 marginals; "
                    "the support is likely infeasible for these totals");
}

Calibrated calibrate(const std::vector<RawBankRecord>& records, double beta, double nu,
                     const TopologySpec& topo,
                     const std::optional<Eigen::MatrixXd>& correlation) {
  const int n = static_cast<int>(records.size());
  const LiabilitySplit liabilities = split_liabilities(records);
  const AssetSplit assets = split_assets(records, beta);

  Eigen::VectorXd interbank_assets(n);
  for (int i = 0; i < n; ++i) interbank_assets(i) = records[i].interbank_assets;
  const Eigen::VectorXd interbank_liabilities = liabilities.total - liabilities.external;
  TopologySpec resolved = topo;
  if (topo.kind != TopologySpec::Kind::custom) {
    resolved = TopologySpec::custom(topology_support(topo, records));
  }
  const Eigen::MatrixXd bilateral =
      reconstruct_interbank(interbank_liabilities, interbank_assets, resolved);

  Calibrated out;
  out.alpha = liabilities.alpha;
  out.asset_vols.resize(n);
  for (int i = 0; i < n; ++i) {
    out.asset_vols(i) =
        merton_asset_vol(records[i].net_worth, records[i].total_assets, records[i].equity_vol);
  }
  const double ebar = assets.illiquid.sum();
  out.network = build_network(bilateral, liabilities.external, assets.liquid, assets.illiquid,
                              InverseDemand::exponential(1.0, nu, ebar));
  if (correlation) {
    out.shocks = ShockModel::from_correlation(out.asset_vols, *correlation);
  } else {
    out.shocks = ShockModel::from_cholesky(Eigen::MatrixXd(out.asset_vols.asDiagonal()));
  }
  return out;
}

}  // namespace netbliss
