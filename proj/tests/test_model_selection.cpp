#include <doctest.h>

#include <set>

#include "pcf/cross_validation.hpp"
#include "test_helpers.hpp"

using namespace pcf;
using pcf::testing::dataset_from_model;
using pcf::testing::random_model;

namespace {

TrainConfig cv_config() {
  TrainConfig cfg;
  cfg.adam_iters = 30;
  cfg.lbfgs_iters = 80;
  cfg.n_starts = 1;
  cfg.n_workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("r2 score: perfect, mean predictor, and the hand-computed case") {
  std::mt19937_64 rng(3);
  Matrix y = pcf::testing::random_matrix(rng, 10, 2);
  CHECK(r2_score(y, y) == 1.0);

  Matrix mean_pred(10, 2);
  for (int c = 0; c < 2; ++c) mean_pred.col(c).setConstant(y.col(c).mean());
  CHECK(r2_score(mean_pred, y) == doctest::Approx(0.0).epsilon(1e-12));

  Matrix truth(3, 1), pred(3, 1);
  truth << 0, 1, 2;
  pred << 0, 1, 1;
  CHECK(r2_score(pred, truth) == doctest::Approx(0.5).epsilon(1e-15));

  // constant target: 1 when matched exactly, else 0
  Matrix const_y = Matrix::Constant(5, 1, 3.0);
  CHECK(r2_score(const_y, const_y) == 1.0);
  Matrix off = const_y;
  off(0, 0) = 3.5;
  CHECK(r2_score(off, const_y) == 0.0);
}

TEST_CASE("rmse is the square root of the mean squared error") {
  std::mt19937_64 rng(5);
  const Matrix a = pcf::testing::random_matrix(rng, 20, 2);
  const Matrix b = pcf::testing::random_matrix(rng, 20, 2);
  const double mse = (a - b).squaredNorm() / 40.0;
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(mse)).epsilon(1e-15));
}

TEST_CASE("fold partition covers every index exactly once, sizes within one") {
  for (Eigen::Index n : {10, 23, 100}) {
    for (int k : {2, 5, 7}) {
      const auto folds = make_folds(n, k, 42);
      REQUIRE(static_cast<int>(folds.size()) == k);
      std::set<Eigen::Index> seen;
      size_t min_size = SIZE_MAX, max_size = 0;
      for (const auto& fold : folds) {
        min_size = std::min(min_size, fold.size());
        max_size = std::max(max_size, fold.size());
        for (Eigen::Index i : fold) {
          CHECK(seen.insert(i).second);  // no duplicates
          CHECK(i >= 0);
          CHECK(i < n);
        }
      }
      CHECK(seen.size() == static_cast<size_t>(n));
      CHECK(max_size - min_size <= 1);
    }
  }
}

TEST_CASE("singleton grid reduces to a plain k-fold report plus a full refit") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 7);
  const Dataset data = dataset_from_model(truth, 60, 11);
  CvConfig cv;
  cv.folds = 3;
  cv.lambda_grid = {1e-4};
  RegSpec reg;
  reg.kind = RegSpec::Kind::L2;
  auto [model, report] = cross_validate(arch, data, LossSpec{}, reg, cv, cv_config());
  CHECK(report.chosen_lambda == 1e-4);
  REQUIRE(report.lambda_grid.size() == 1);
  CHECK(report.lambda_grid[0].fold_r2.size() == 3);
  CHECK(report.fold_r2.size() == 3);
  CHECK(model.weights.allFinite());
}

TEST_CASE("noiseless in-architecture data prefers the smallest lambda") {
  PcfArchitecture spec;
  spec.n = 1;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel truth = random_model(arch, 13);
  const Dataset data = dataset_from_model(truth, 150, 17);
  CvConfig cv;
  cv.folds = 3;
  cv.lambda_grid = {1e-7, 10.0};
  RegSpec reg;
  reg.kind = RegSpec::Kind::L2;
  TrainConfig cfg = cv_config();
  cfg.adam_iters = 80;
  cfg.lbfgs_iters = 200;
  auto [model, report] = cross_validate(arch, data, LossSpec{}, reg, cv, cfg);
  CHECK(report.chosen_lambda == 1e-7);
}

TEST_CASE("scaling y by c with the grid scaled by c^2 picks the same grid index") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 19);
  Dataset data = dataset_from_model(truth, 90, 23);
  RegSpec reg;
  reg.kind = RegSpec::Kind::L2;
  CvConfig cv;
  cv.folds = 3;
  cv.lambda_grid = {1e-8, 1.0};

  auto [m1, r1] = cross_validate(arch, data, LossSpec{}, reg, cv, cv_config());
  const size_t idx1 = r1.chosen_lambda == cv.lambda_grid[0] ? 0 : 1;

  const double c = 10.0;
  Dataset scaled = data;
  scaled.Y *= c;
  CvConfig cv2 = cv;
  cv2.lambda_grid = {1e-8 * c * c, 1.0 * c * c};
  auto [m2, r2] = cross_validate(arch, scaled, LossSpec{}, reg, cv2, cv_config());
  const size_t idx2 = r2.chosen_lambda == cv2.lambda_grid[0] ? 0 : 1;
  CHECK(idx1 == idx2);
}

TEST_CASE("ties break toward the smaller lambda") {
  // duplicated lambda value forces an exact tie; the earlier (== smaller or
  // equal) entry must win
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 29);
  const Dataset data = dataset_from_model(truth, 45, 31);
  CvConfig cv;
  cv.folds = 3;
  cv.lambda_grid = {5e-3, 5e-3};
  RegSpec reg;
  reg.kind = RegSpec::Kind::L2;
  auto [model, report] = cross_validate(arch, data, LossSpec{}, reg, cv, cv_config());
  CHECK(report.chosen_lambda == 5e-3);
}

TEST_CASE("cross-validation rejects undersized data and bad configs") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 37);
  const Dataset tiny = dataset_from_model(truth, 3, 41);
  CvConfig cv;
  cv.folds = 5;
  CHECK_THROWS_AS(cross_validate(arch, tiny, LossSpec{}, RegSpec{}, cv, cv_config()),
                  InvalidInput);
  CvConfig bad;
  bad.folds = 1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("every candidate dropped raises SelectionFailed") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 43);
  const Dataset data = dataset_from_model(truth, 30, 47);
  CvConfig cv;
  cv.folds = 2;
  cv.lambda_grid = {1e-3};
  TrainConfig cfg = cv_config();
  cfg.adam_iters = 20;
  cfg.adam_lr = 1e18;  // every fold fit diverges
  cfg.lbfgs_iters = 0;
  CHECK_THROWS_AS(cross_validate(arch, data, LossSpec{}, RegSpec{}, cv, cfg), SelectionFailed);
}

TEST_CASE("default lambda grid is logspace 1e-8..1e-1") {
  CvConfig cv;
  const auto grid = cv.grid();
  REQUIRE(grid.size() == 8);
  CHECK(grid.front() == doctest::Approx(1e-8));
  CHECK(grid.back() == doctest::Approx(1e-1));
}
