#pragma once

#include <string>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

/// N samples of (x, theta, y). Dimensions may be zero (no variable or no
/// parameter); the corresponding matrix then has zero columns.
struct Dataset {
  Matrix X;      // N x n
  Matrix Theta;  // N x p
  Matrix Y;      // N x d

  Eigen::Index size() const { return Y.rows(); }
  int n() const { return static_cast<int>(X.cols()); }
  int p() const { return static_cast<int>(Theta.cols()); }
  int d() const { return static_cast<int>(Y.cols()); }

  Dataset rows(const std::vector<Eigen::Index>& idx) const;
  void validate_finite() const;
};

/// Reads the canonical delimited format: a comma-separated header naming
/// columns x0..x{n-1}, th0..th{p-1}, y0..y{d-1} (in that order), one sample
/// per row, all cells finite decimals. Dimensions are inferred from the
/// header. Throws InvalidInput naming the offending column or row.
Dataset read_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& origin);

/// Writes a dataset back in the canonical format (17 significant digits).
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::string& path);

/// Predictions-only CSV with header y0..y{d-1}.
std::string predictions_to_csv(const Matrix& Y);

/// A deterministic shuffled index split: first `train_fraction` of the
/// shuffled order is the train set, the remainder the test set.
void split_indices(Eigen::Index count, double train_fraction, std::uint64_t seed,
                   std::vector<Eigen::Index>& train, std::vector<Eigen::Index>& test);

}  // namespace pcf
