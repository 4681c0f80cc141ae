#include "pcf/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pcf/thread_pool.hpp"

namespace pcf {

std::vector<double> CvConfig::grid() const {
  if (!lambda_grid.empty()) return lambda_grid;
  std::vector<double> g;
  for (int e = -8; e <= -1; ++e) g.push_back(std::pow(10.0, e));
  return g;
}

void CvConfig::validate() const {
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  for (double l : lambda_grid)
    if (l < 0.0) throw InvalidInput("lambda grid entries must be >= 0");
}

double r2_score(const Matrix& y_pred, const Matrix& y_true) {
  if (y_pred.rows() != y_true.rows() || y_pred.cols() != y_true.cols())
    throw InvalidInput("r2_score: shapes differ");
  if (y_true.rows() < 2) throw InvalidInput("r2_score: need at least 2 samples");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < y_true.cols(); ++c) {
    const double mean = y_true.col(c).mean();
    const double ss_res = (y_pred.col(c) - y_true.col(c)).squaredNorm();
    const double ss_tot = (y_true.col(c).array() - mean).square().sum();
    if (ss_tot == 0.0)
      acc += ss_res > 0.0 ? 0.0 : 1.0;
    else
      acc += 1.0 - ss_res / ss_tot;
  }
  return acc / static_cast<double>(y_true.cols());
}

double rmse(const Matrix& y_pred, const Matrix& y_true) {
  if (y_pred.rows() != y_true.rows() || y_pred.cols() != y_true.cols())
    throw InvalidInput("rmse: shapes differ");
  return std::sqrt((y_pred - y_true).squaredNorm() / static_cast<double>(y_true.size()));
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index count, int k, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<size_t>(k));
  const Eigen::Index base = count / k;
  const Eigen::Index extra = count % k;  // first `extra` folds get one more
  Eigen::Index at = 0;
  for (int f = 0; f < k; ++f) {
    const Eigen::Index len = base + (f < extra ? 1 : 0);
    folds[static_cast<size_t>(f)].assign(order.begin() + at, order.begin() + at + len);
    at += len;
  }
  return folds;
}

std::pair<PcfModel, FitReport> cross_validate(const PcfArchitecture& arch_in, const Dataset& data,
                                              const LossSpec& loss, const RegSpec& reg_template,
                                              const CvConfig& cv, const TrainConfig& cfg) {
  const PcfArchitecture arch = arch_in.finalized();
  cv.validate();
  if (data.size() < cv.folds)
    throw InvalidInput("cross-validation needs at least K = " + std::to_string(cv.folds) +
                       " samples, got " + std::to_string(data.size()));
  const std::vector<double> grid = cv.grid();
  if (grid.empty()) throw InvalidInput("empty lambda grid");

  const auto folds = make_folds(data.size(), cv.folds, cv.shuffle_seed);
  std::vector<Dataset> train_sets, val_sets;
  for (int f = 0; f < cv.folds; ++f) {
    std::vector<Eigen::Index> train_idx;
    for (int g = 0; g < cv.folds; ++g)
      if (g != f)
        train_idx.insert(train_idx.end(), folds[static_cast<size_t>(g)].begin(),
                         folds[static_cast<size_t>(g)].end());
    train_sets.push_back(data.rows(train_idx));
    val_sets.push_back(data.rows(folds[static_cast<size_t>(f)]));
  }

  // (lambda, fold) jobs are independent; inner fits run single-threaded so the
  // pool is used at this level only
  const int n_jobs = static_cast<int>(grid.size()) * cv.folds;
  std::vector<double> job_r2(static_cast<size_t>(n_jobs),
                             std::numeric_limits<double>::quiet_NaN());
  TrainConfig inner = cfg;
  inner.n_workers = 1;
  parallel_for(n_jobs, cfg.n_workers, [&](int j) {
    const int li = j / cv.folds;
    const int f = j % cv.folds;
    RegSpec reg = reg_template;
    reg.lambda = grid[static_cast<size_t>(li)];
    try {
      auto [model, rep] = fit(arch, train_sets[static_cast<size_t>(f)], loss, reg, inner);
      const Dataset& val = val_sets[static_cast<size_t>(f)];
      job_r2[static_cast<size_t>(j)] = r2_score(evaluate_batch(model, val.X, val.Theta), val.Y);
    } catch (const FitFailed&) {
      // leave NaN: the fold failed entirely, the lambda candidate is dropped
    }
  });

  FitReport cv_report;
  int best_li = -1;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (size_t li = 0; li < grid.size(); ++li) {
    LambdaOutcome lo;
    lo.lambda = grid[li];
    double sum = 0.0;
    bool ok = true;
    for (int f = 0; f < cv.folds; ++f) {
      const double r2 = job_r2[li * static_cast<size_t>(cv.folds) + static_cast<size_t>(f)];
      lo.fold_r2.push_back(r2);
      if (std::isnan(r2)) ok = false;
      else sum += r2;
    }
    lo.dropped = !ok;
    lo.mean_r2 = ok ? sum / cv.folds : std::numeric_limits<double>::quiet_NaN();
    if (ok && (best_li < 0 || lo.mean_r2 > best_mean ||
               (lo.mean_r2 == best_mean && grid[li] < grid[static_cast<size_t>(best_li)]))) {
      best_li = static_cast<int>(li);
      best_mean = lo.mean_r2;
    }
    cv_report.lambda_grid.push_back(std::move(lo));
  }
  if (best_li < 0)
    throw SelectionFailed("cross-validation: every lambda candidate was dropped (all folds failed)");

  RegSpec reg = reg_template;
  reg.lambda = grid[static_cast<size_t>(best_li)];
  auto [model, refit_report] = fit(arch, data, loss, reg, cfg);
  refit_report.chosen_lambda = reg.lambda;
  refit_report.lambda_grid = std::move(cv_report.lambda_grid);
  refit_report.fold_r2 = refit_report.lambda_grid[static_cast<size_t>(best_li)].fold_r2;
  return {std::move(model), std::move(refit_report)};
}

}  // namespace pcf
