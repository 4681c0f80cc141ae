#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcf/autodiff.hpp"
#include "pcf/dataset.hpp"
#include "pcf/loss.hpp"
#include "pcf/model.hpp"

namespace pcf {

/// Optimizer pipeline settings: Adam warm-up followed by L-BFGS refinement,
/// repeated from n_starts random initializations.
struct TrainConfig {
  int adam_iters = 200;
  double adam_lr = 1e-3;
  int lbfgs_iters = 2000;
  int lbfgs_memory = 10;
  int lbfgs_max_fevals = 0;  // 0 = unlimited; caps line-search evaluations too
  int n_starts = 0;          // 0 -> max(10, n_workers)
  int n_workers = 4;
  std::uint64_t seed = 0;
  bool full_batch = true;  // when false, Adam uses minibatches of adam_batch
  int adam_batch = 256;
  int block_budget = 1024;  // autodiff evaluation block size

  int effective_starts() const { return n_starts > 0 ? n_starts : std::max(10, n_workers); }
};

struct StartOutcome {
  int start = 0;
  double objective = 0.0;  // final full-data training objective
  bool failed = false;
  std::string failure;
  int adam_iters = 0;
  int lbfgs_iters = 0;
  bool lbfgs_converged = false;
};

struct LambdaOutcome {
  double lambda = 0.0;
  std::vector<double> fold_r2;  // validation metric per fold (NaN when dropped)
  double mean_r2 = 0.0;
  bool dropped = false;
};

struct TestMetrics {
  double r2 = 0.0;
  double rmse = 0.0;
  std::optional<double> error_rate;  // logistic models only
};

/// Per-fold losses, R^2 scores, chosen lambda, per-initialization outcomes.
struct FitReport {
  double chosen_lambda = 0.0;
  std::vector<StartOutcome> starts;
  int best_start = -1;
  double train_objective = 0.0;
  double train_r2 = 0.0;
  double train_rmse = 0.0;
  std::vector<LambdaOutcome> lambda_grid;  // cross-validation only
  std::vector<double> fold_r2;             // folds of the chosen lambda
  std::optional<TestMetrics> test;
};

/// Fits the architecture to data: for each start, initialize w, run Adam,
/// then L-BFGS with a strong-Wolfe line search on the full objective; the
/// returned model is the non-failed start with the lowest final training
/// objective. Throws FitFailed when every start diverges.
std::pair<PcfModel, FitReport> fit(const PcfArchitecture& arch, const Dataset& data,
                                   const LossSpec& loss, const RegSpec& reg,
                                   const TrainConfig& cfg);

}  // namespace pcf
