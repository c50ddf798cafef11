#include "netbliss/network_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "netbliss/errors.hpp"

namespace netbliss {

namespace {

struct Tokenizer {
  explicit Tokenizer(std::istream& in) : in_(in) {}

  // Next whitespace-delimited token, skipping '#' comments.
  bool next(std::string& tok) {
    for (;;) {
      if (pos_ >= line_.size()) {
        if (!std::getline(in_, line_)) return false;
        ++line_no_;
        pos_ = 0;
        continue;
      }
      while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      if (pos_ >= line_.size()) continue;
      if (line_[pos_] == '#') {
        pos_ = line_.size();
        continue;
      }
      const std::size_t start = pos_;
      while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])) &&
             line_[pos_] != '#') {
        ++pos_;
      }
      tok = line_.substr(start, pos_ - start);
      col_ = static_cast<int>(start) + 1;
      return true;
    }
  }

  std::string require(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what,
                                     line_no_, col_);
    return tok;
  }

  double require_number(const char* what) {
    const std::string tok = require(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected " + std::string(what) + ", got '" + tok + "'", line_no_, col_);
    }
  }

  int line_no() const { return line_no_; }
  int col() const { return col_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
  int col_ = 0;
};

}  // namespace

Network read_network(std::istream& in) {
  Tokenizer tz(in);
  std::string tok = tz.require("'n'");
  if (tok != "n") throw ParseError("expected keyword 'n', got '" + tok + "'", tz.line_no(),
                                   tz.col());
  const double n_raw = tz.require_number("bank count");
  const int n = static_cast<int>(n_raw);
  if (n < 1 || n_raw != n) throw ParseError("bank count must be a positive integer",
                                            tz.line_no(), tz.col());

  const auto read_keyword = [&](const char* kw) {
    const std::string t = tz.require(kw);
    if (t != kw) {
      throw ParseError("expected section '" + std::string(kw) + "', got '" + t + "'",
                       tz.line_no(), tz.col());
    }
  };
  const auto read_vector = [&](const char* what) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = tz.require_number(what);
    return v;
  };

  read_keyword("liabilities");
  Eigen::MatrixXd liab(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) liab(i, j) = tz.require_number("liability entry");
  }
  read_keyword("external_liabilities");
  const Eigen::VectorXd external = read_vector("external liability");
  read_keyword("liquid_assets");
  const Eigen::VectorXd liquid = read_vector("liquid asset value");
  read_keyword("illiquid_units");
  const Eigen::VectorXd units = read_vector("illiquid unit count");

  read_keyword("demand");
  const std::string family = tz.require("demand family");
  InverseDemand demand;
  if (family == "exponential") {
    const double qbar = tz.require_number("qbar");
    const double nu = tz.require_number("nu");
    demand = InverseDemand::exponential(qbar, nu, units.sum());
  } else if (family == "tabulated") {
    const int k = static_cast<int>(tz.require_number("knot count"));
    if (k < 2) throw ParseError("tabulated demand needs at least 2 knots", tz.line_no(), tz.col());
    std::vector<double> xs(k), qs(k);
    for (int i = 0; i < k; ++i) {
      xs[i] = tz.require_number("knot x");
      qs[i] = tz.require_number("knot price");
    }
    demand = InverseDemand::tabulated(std::move(xs), std::move(qs));
  } else {
    throw ParseError("unknown demand family '" + family + "'", tz.line_no(), tz.col());
  }

  try {
    return build_network(liab, external, liquid, units, std::move(demand));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), tz.line_no(), 0);
  }
}

Network read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path);
  return read_network(in);
}

void write_network(std::ostream& out, const Network& net) {
  out << std::setprecision(17);
  out << "n " << net.n << "\n";
  out << "liabilities\n";
  for (int i = 0; i < net.n; ++i) {
    for (int j = 0; j < net.n; ++j) out << net.nominal_liabilities(i, j) << (j + 1 < net.n ? " " : "\n");
  }
  const auto put_vec = [&](const char* kw, const Eigen::VectorXd& v) {
    out << kw << "\n";
    for (int i = 0; i < net.n; ++i) out << v(i) << (i + 1 < net.n ? " " : "\n");
  };
  put_vec("external_liabilities", net.external_liabilities);
  put_vec("liquid_assets", net.initial_liquid_assets);
  put_vec("illiquid_units", net.illiquid_units);
  const auto& d = net.inverse_demand;
  if (d.family() == InverseDemand::Family::exponential) {
    out << "demand exponential " << d.qbar() << " " << d.nu() << "\n";
  } else {
    out << "demand tabulated " << d.knots_x().size() << "\n";
    for (std::size_t i = 0; i < d.knots_x().size(); ++i) {
      out << d.knots_x()[i] << " " << d.knots_q()[i] << "\n";
    }
  }
}

void write_network_file(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  write_network(out, net);
}

}  // namespace netbliss
