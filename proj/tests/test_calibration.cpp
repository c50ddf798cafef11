#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "netbliss/calibration.hpp"
#include "netbliss/clearing.hpp"
#include "netbliss/errors.hpp"
#include "netbliss/experiment.hpp"
#include "netbliss/stats.hpp"
#include "oracle_helpers.hpp"

using namespace netbliss;

namespace {

std::vector<RawBankRecord> bundled() { return load_bank_records(default_eba_paths().records); }

}  // namespace

TEST_CASE("bundled table parses with the documented totals") {
  const auto records = bundled();
  REQUIRE(records.size() == 36);
  CHECK(records[0].name == "HSBC Holdings Plc");
  CHECK(records[0].total_assets == 1322909);
  CHECK(records[35].net_worth == 11028);
  CHECK(records[35].equity_vol == doctest::Approx(0.5628));
  CHECK(records[5].listed == false);  // index-vol proxy rows are marked unlisted
  double a = 0, w = 0, ib = 0;
  for (const auto& r : records) {
    a += r.total_assets;
    w += r.net_worth;
    ib += r.interbank_assets;
  }
  CHECK(a == doctest::Approx(14133591));
  CHECK(w == doctest::Approx(1240973));
  CHECK(ib == doctest::Approx(1209536));
}

TEST_CASE("liability split matches the aggregate-consistency rule") {
  const auto records = bundled();
  const LiabilitySplit split = split_liabilities(records);
  // Column-sum reference computed from the same table.
  const double expected_alpha = 1.0 - 1209536.0 / (14133591.0 - 1240973.0);
  CHECK(split.alpha == doctest::Approx(expected_alpha).epsilon(1e-12));
  for (int i = 0; i < 36; ++i) {
    CHECK(split.external(i) == doctest::Approx(split.alpha * split.total(i)));
  }

  // Interbank-free corner.
  std::vector<RawBankRecord> lone{{"solo", 10.0, 4.0, 0.0, 0.3, true}};
  const LiabilitySplit solo = split_liabilities(lone);
  CHECK(solo.alpha == doctest::Approx(1.0));
  CHECK(solo.external(0) == doctest::Approx(solo.total(0)));

  // Everything interbank: the external share collapses to zero and is
  // rejected.
  std::vector<RawBankRecord> degenerate{{"a", 3.0, 1.0, 2.0, 0.3, true},
                                        {"b", 3.0, 1.0, 2.0, 0.3, true}};
  CHECK_THROWS_AS(split_liabilities(degenerate), std::invalid_argument);
}

TEST_CASE("asset split and the accounting identity") {
  const auto records = bundled();
  const AssetSplit split = split_assets(records, 0.4);
  CHECK(split.liquid(0) == doctest::Approx(0.4 * (1322909.0 - 117004.0)).epsilon(1e-12));
  double total = 0.0;
  for (int i = 0; i < 36; ++i) {
    total += split.liquid(i) + split.illiquid(i) + records[i].interbank_assets;
  }
  CHECK(total == doctest::Approx(14133591.0).epsilon(1e-12));

  const AssetSplit all_liquid = split_assets(records, 1.0);
  CHECK(all_liquid.illiquid.isZero(0.0));
  CHECK_THROWS_AS(split_assets(records, 0.0), std::invalid_argument);
}

TEST_CASE("asset volatility fixed point") {
  // Near-total equity: the delta saturates at one and sigma collapses to the
  // leverage-scaled equity volatility.
  CHECK(merton_asset_vol(99.0, 100.0, 0.3) == doctest::Approx(0.99 * 0.3).epsilon(1e-6));

  // Highest-volatility bundled row against a standalone bisection.
  const double w = 11028, a = 48157, ve = 0.5628;
  const double lv = (w / a) * ve;
  const double lm = std::log(a / (a - w));
  const double ref = oracle::bisect_root(
      [&](double s) { return s * normal_cdf((lm + 0.5 * s * s) / s) - lv; }, lv, 2.0 * lv,
      1e-14);
  CHECK(merton_asset_vol(w, a, ve) == doctest::Approx(ref).epsilon(1e-10));

  // Residual below 1e-10 on every bundled row, and the map is increasing.
  for (const auto& r : bundled()) {
    const double sigma = merton_asset_vol(r.net_worth, r.total_assets, r.equity_vol);
    const double lev = (r.net_worth / r.total_assets) * r.equity_vol;
    const double moneyness = std::log(r.total_assets / (r.total_assets - r.net_worth));
    const auto value = [&](double s) { return s * normal_cdf((moneyness + 0.5 * s * s) / s); };
    CHECK(std::fabs(value(sigma) - lev) < 1e-10 * lev);
    CHECK(sigma > lev);
    CHECK(sigma < 2.0 * lev);
    double prev = value(0.5 * lev);
    for (double s = 0.6 * lev; s <= 3.0 * lev; s += 0.1 * lev) {
      const double cur = value(s);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("two-bank reconstruction is forced by the totals") {
  const Eigen::Vector2d rows(1, 1), cols(1, 1);
  const Eigen::MatrixXd x = reconstruct_interbank(rows, cols, TopologySpec::complete());
  CHECK(x(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(x(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(x(0, 0) == 0.0);
  CHECK(x(1, 1) == 0.0);
}

TEST_CASE("directed cycle support either matches or reports infeasibility") {
  // Feasible: each bank's obligation equals the next bank's claim.
  Eigen::Vector3d rows(2, 3, 4);
  Eigen::Vector3d cols(4, 2, 3);  // claims of bank j come from bank j-1
  const Eigen::MatrixXd x = reconstruct_interbank(rows, cols, TopologySpec::ring());
  CHECK(x(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(x(1, 2) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(x(2, 0) == doctest::Approx(4.0).epsilon(1e-9));

  // Infeasible: marginals disagree cell by cell.
  CHECK_THROWS(reconstruct_interbank(Eigen::Vector3d(2, 3, 4), Eigen::Vector3d(3, 3, 3),
                                     TopologySpec::ring()));
}

TEST_CASE("bundled reconstruction hits its marginals and the balanced form") {
  const auto records = bundled();
  const LiabilitySplit liab = split_liabilities(records);
  Eigen::VectorXd rows = liab.total - liab.external;
  Eigen::VectorXd cols(36);
  for (int i = 0; i < 36; ++i) cols(i) = records[i].interbank_assets;

  for (const auto topo : {TopologySpec::complete(), TopologySpec::core_periphery()}) {
    const TopologySpec resolved = TopologySpec::custom(topology_support(topo, records));
    const Eigen::MatrixXd x = reconstruct_interbank(rows, cols, resolved);
    for (int i = 0; i < 36; ++i) {
      CHECK(std::fabs(x.row(i).sum() - rows(i)) < 1e-9 * rows(i));
      CHECK(std::fabs(x.col(i).sum() - cols(i)) < 1e-9 * cols(i));
    }
    // Independent column-first balancer, looser tolerance.
    const Eigen::MatrixXi support = topology_support(topo, records);
    const Eigen::MatrixXd y = oracle::balance_cols_first(support, rows, cols, 300);
    CHECK((x - y).cwiseAbs().maxCoeff() < 1e-6 * x.maxCoeff());
    // The balanced solution factors as r_i * c_j on the support: cross
    // ratios over support rectangles are one.
    std::mt19937_64 gen(1);
    for (int probe = 0; probe < 200; ++probe) {
      const int i = int(gen() % 36), k = int(gen() % 36);
      const int j = int(gen() % 36), l = int(gen() % 36);
      if (!support(i, j) || !support(i, l) || !support(k, j) || !support(k, l)) continue;
      const double cross = (x(i, j) * x(k, l)) / (x(i, l) * x(k, j));
      CHECK(cross == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("reconstruction is permutation-equivariant") {
  const Eigen::Vector4d rows(1, 2, 3, 4), cols(4, 3, 2, 1);
  const Eigen::MatrixXd base = reconstruct_interbank(rows, cols, TopologySpec::complete());
  const int perm[4] = {2, 0, 3, 1};
  Eigen::Vector4d prows, pcols;
  for (int i = 0; i < 4; ++i) {
    prows(i) = rows(perm[i]);
    pcols(i) = cols(perm[i]);
  }
  const Eigen::MatrixXd permuted = reconstruct_interbank(prows, pcols, TopologySpec::complete());
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(permuted(i, j) == doctest::Approx(base(perm[i], perm[j])).epsilon(1e-9));
    }
  }
}

TEST_CASE("full calibration closes the books") {
  const auto records = bundled();
  const Eigen::MatrixXd corr = load_correlation(default_eba_paths().correlation);
  for (const auto topo : {TopologySpec::complete(), TopologySpec::core_periphery()}) {
    const Calibrated cal = calibrate(records, 0.4, 2.5e-8, topo, corr);
    CHECK(validate_assumptions(cal.network).assumptions_ok);
    for (int i = 0; i < 36; ++i) {
      const double in_assets =
          cal.network.nominal_liabilities.col(i).sum();
      const double worth = cal.network.initial_liquid_assets(i) + in_assets +
                           cal.network.illiquid_units(i) * 1.0 -
                           cal.network.total_liabilities(i);
      CHECK(worth == doctest::Approx(records[i].net_worth).epsilon(1e-6));
    }
  }
}

TEST_CASE("all-liquid calibration strips the price channel") {
  const auto records = bundled();
  const Calibrated cal = calibrate(records, 1.0, 2.5e-8, TopologySpec::complete(), std::nullopt);
  CHECK(cal.network.illiquid_units.isZero(0.0));
  const ClearingOutcome out = clear(cal.network, cal.network.initial_liquid_assets);
  CHECK(out.price == doctest::Approx(1.0));
  CHECK(out.defaults.empty());
}

TEST_CASE("record parsing rejects corrupt rows") {
  CHECK_THROWS_AS(load_bank_records("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("bundled totals cannot ride a simple directed cycle") {
  const auto records = bundled();
  const LiabilitySplit liab = split_liabilities(records);
  Eigen::VectorXd rows = liab.total - liab.external;
  Eigen::VectorXd cols(36);
  for (int i = 0; i < 36; ++i) cols(i) = records[i].interbank_assets;
  CHECK_THROWS_AS(reconstruct_interbank(rows, cols, TopologySpec::ring()), SolverError);
}
