#pragma once

#include <cstdint>
#include <vector>

#include "pcf/train.hpp"

namespace pcf {

/// K-fold cross-validation over the regularization weight lambda.
struct CvConfig {
  int folds = 5;
  std::vector<double> lambda_grid;  // empty -> logspace 1e-8 .. 1e-1, 8 points
  bool enabled = false;
  std::uint64_t shuffle_seed = 0;

  std::vector<double> grid() const;
  void validate() const;
};

/// 1 - SS_res / SS_tot per output, averaged uniformly over outputs. When an
/// output is constant (SS_tot = 0): 1 if it is predicted exactly, else 0.
double r2_score(const Matrix& y_pred, const Matrix& y_true);

/// Root mean squared error over all (sample, output) entries.
double rmse(const Matrix& y_pred, const Matrix& y_true);

/// Shuffled contiguous fold assignment: every index lands in exactly one
/// validation fold, fold sizes differ by at most one.
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index count, int k, std::uint64_t seed);

/// For each lambda in the grid: K fits on K-1 folds each, R^2 on the held-out
/// fold, averaged; picks the lambda maximizing mean R^2 (ties -> smaller
/// lambda), then refits on all data with it. The RegSpec acts as a template;
/// its lambda field is overridden by the grid.
std::pair<PcfModel, FitReport> cross_validate(const PcfArchitecture& arch, const Dataset& data,
                                              const LossSpec& loss, const RegSpec& reg_template,
                                              const CvConfig& cv, const TrainConfig& cfg);

}  // namespace pcf
