#include "pcf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace pcf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trimmed(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// counts a run of columns named <prefix>0, <prefix>1, ... starting at `at`
int count_prefixed(const std::vector<std::string>& names, size_t at, const std::string& prefix) {
  int k = 0;
  while (at + static_cast<size_t>(k) < names.size() &&
         names[at + static_cast<size_t>(k)] == prefix + std::to_string(k))
    ++k;
  return k;
}

}  // namespace

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  out.Theta.resize(static_cast<Eigen::Index>(idx.size()), Theta.cols());
  out.Y.resize(static_cast<Eigen::Index>(idx.size()), Y.cols());
  for (size_t k = 0; k < idx.size(); ++k) {
    out.X.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
    out.Theta.row(static_cast<Eigen::Index>(k)) = Theta.row(idx[k]);
    out.Y.row(static_cast<Eigen::Index>(k)) = Y.row(idx[k]);
  }
  return out;
}

void Dataset::validate_finite() const {
  if (!X.allFinite() || !Theta.allFinite() || !Y.allFinite())
    throw InvalidInput("dataset contains non-finite values");
}

Dataset parse_csv(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw InvalidInput(origin + ": empty file");
  std::vector<std::string> names = split_line(line);
  for (std::string& nm : names) nm = trimmed(nm);

  const int n = count_prefixed(names, 0, "x");
  const int p = count_prefixed(names, static_cast<size_t>(n), "th");
  const int d = count_prefixed(names, static_cast<size_t>(n + p), "y");
  const size_t recognized = static_cast<size_t>(n + p + d);
  if (d == 0 || recognized != names.size()) {
    const std::string& bad = recognized < names.size() ? names[recognized] : names.back();
    throw InvalidInput(origin + ": malformed header at column '" + bad +
                       "' (expected x0.., th0.., y0.. with at least one y column)");
  }

  std::vector<double> values;
  Eigen::Index rows = 0;
  int lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != names.size()) {
      throw InvalidInput(origin + ": row " + std::to_string(lineno) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(names.size()));
    }
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trimmed(cells[c]);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw InvalidInput(origin + ": row " + std::to_string(lineno) + ", column '" + names[c] +
                           "': cell '" + cell + "' is not a finite decimal");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InvalidInput(origin + ": no data rows");

  Dataset data;
  data.X.resize(rows, n);
  data.Theta.resize(rows, p);
  data.Y.resize(rows, d);
  const int stride = n + p + d;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double* row = values.data() + r * stride;
    for (int c = 0; c < n; ++c) data.X(r, c) = row[c];
    for (int c = 0; c < p; ++c) data.Theta(r, c) = row[n + c];
    for (int c = 0; c < d; ++c) data.Y(r, c) = row[n + p + c];
  }
  return data;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open data file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  bool first = true;
  auto col = [&](const std::string& name) {
    if (!first) out << ',';
    out << name;
    first = false;
  };
  for (int c = 0; c < data.n(); ++c) col("x" + std::to_string(c));
  for (int c = 0; c < data.p(); ++c) col("th" + std::to_string(c));
  for (int c = 0; c < data.d(); ++c) col("y" + std::to_string(c));
  out << '\n';
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    first = true;
    auto cell = [&](double v) {
      if (!first) out << ',';
      out << fmt17(v);
      first = false;
    };
    for (int c = 0; c < data.n(); ++c) cell(data.X(r, c));
    for (int c = 0; c < data.p(); ++c) cell(data.Theta(r, c));
    for (int c = 0; c < data.d(); ++c) cell(data.Y(r, c));
    out << '\n';
  }
  return out.str();
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write data file: " + path);
  out << to_csv(data);
}

std::string predictions_to_csv(const Matrix& Y) {
  std::ostringstream out;
  for (Eigen::Index c = 0; c < Y.cols(); ++c) out << (c ? "," : "") << 'y' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < Y.rows(); ++r) {
    for (Eigen::Index c = 0; c < Y.cols(); ++c) out << (c ? "," : "") << fmt17(Y(r, c));
    out << '\n';
  }
  return out.str();
}

void split_indices(Eigen::Index count, double train_fraction, std::uint64_t seed,
                   std::vector<Eigen::Index>& train, std::vector<Eigen::Index>& test) {
  std::vector<Eigen::Index> order(static_cast<size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(count)));
  train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, order.size())));
  test.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, order.size())), order.end());
}

}  // namespace pcf
