#include <doctest.h>

#include <cmath>

#include "pcf/train.hpp"
#include "test_helpers.hpp"

using namespace pcf;
using pcf::testing::dataset_from_model;
using pcf::testing::random_model;

namespace {

TrainConfig quick_config(int starts = 1) {
  TrainConfig cfg;
  cfg.adam_iters = 40;
  cfg.lbfgs_iters = 60;
  cfg.n_starts = starts;
  cfg.n_workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("loss values: quadratic, logistic at zero, huber") {
  Matrix y = Matrix::Constant(3, 1, 2.0);
  CHECK(loss_value(LossSpec{}, y, y) == 0.0);

  LossSpec logistic;
  logistic.kind = LossSpec::Kind::Logistic;
  Matrix zero = Matrix::Zero(4, 1);
  Matrix labels(4, 1);
  labels << 1, -1, 1, -1;
  CHECK(loss_value(logistic, zero, labels) == std::log(2.0));

  LossSpec huber;
  huber.kind = LossSpec::Kind::Huber;
  huber.huber_delta = 1.0;
  Matrix pred = Matrix::Constant(1, 1, 2.0);
  Matrix truth = Matrix::Zero(1, 1);
  CHECK(loss_value(huber, pred, truth) == doctest::Approx(1.5).epsilon(1e-15));
  // inside the quadratic region: 0.5 r^2
  Matrix pred2 = Matrix::Constant(1, 1, 0.5);
  CHECK(loss_value(huber, pred2, truth) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("error rate counts the boundary as correct") {
  Matrix labels(4, 1);
  labels << 1, -1, 1, -1;
  Matrix right(4, 1);
  right << 2.0, -0.5, 0.1, -3.0;
  CHECK(error_rate(right, labels) == 0.0);

  CHECK(error_rate(Matrix::Zero(4, 1), labels) == 0.0);  // f = 0 counts as correct

  Matrix one_wrong = right;
  one_wrong(2, 0) = -0.1;
  CHECK(error_rate(one_wrong, labels) == 0.25);

  Matrix bad_labels = labels;
  bad_labels(0, 0) = 0.5;
  CHECK_THROWS_AS(error_rate(right, bad_labels), InvalidInput);
}

TEST_CASE("fit recovers in-architecture data to small training error") {
  PcfArchitecture spec;
  spec.n = 1;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel truth = random_model(arch, 7);
  const Dataset data = dataset_from_model(truth, 300, 11);

  TrainConfig cfg;
  cfg.adam_iters = 150;
  cfg.lbfgs_iters = 500;
  cfg.n_starts = 1;
  cfg.seed = 3;
  auto [model, report] = fit(arch, data, LossSpec{}, RegSpec{}, cfg);
  // lambda = 0, so the training objective is exactly the training MSE
  CHECK(report.train_objective <= 1e-4);
  CHECK(report.train_r2 >= 0.99);
  CHECK(report.best_start == 0);
}

TEST_CASE("strong l2 regularization shrinks the weights") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 13);
  const Dataset data = dataset_from_model(truth, 100, 17);

  RegSpec none;
  RegSpec heavy;
  heavy.kind = RegSpec::Kind::L2;
  heavy.lambda = 1e3;
  auto [m0, r0] = fit(arch, data, LossSpec{}, none, quick_config());
  auto [m1, r1] = fit(arch, data, LossSpec{}, heavy, quick_config());
  CHECK(m1.weights.norm() < m0.weights.norm());
}

TEST_CASE("identical seed and config give bitwise-identical weights") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 2, 1);
  const PcfModel truth = random_model(arch, 19);
  const Dataset data = dataset_from_model(truth, 80, 23);
  TrainConfig cfg = quick_config(3);
  cfg.seed = 99;
  cfg.n_workers = 3;
  auto [m1, r1] = fit(arch, data, LossSpec{}, RegSpec{}, cfg);
  auto [m2, r2] = fit(arch, data, LossSpec{}, RegSpec{}, cfg);
  REQUIRE(m1.weights.size() == m2.weights.size());
  CHECK(std::memcmp(m1.weights.data(), m2.weights.data(),
                    sizeof(double) * static_cast<size_t>(m1.weights.size())) == 0);
  CHECK(r1.train_objective == r2.train_objective);
}

TEST_CASE("the reported model is the lowest-objective non-failed start") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 29);
  const Dataset data = dataset_from_model(truth, 60, 31);
  TrainConfig cfg = quick_config(4);
  auto [model, report] = fit(arch, data, LossSpec{}, RegSpec{}, cfg);
  REQUIRE(report.starts.size() == 4);
  double best = std::numeric_limits<double>::infinity();
  for (const StartOutcome& s : report.starts)
    if (!s.failed) best = std::min(best, s.objective);
  CHECK(report.train_objective == best);
  CHECK(!report.starts[static_cast<size_t>(report.best_start)].failed);
}

TEST_CASE("a diverging configuration fails every start and raises FitFailed") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  const PcfModel truth = random_model(arch, 37);
  Dataset data = dataset_from_model(truth, 20, 41);
  data.Y.array() += 1.0;
  TrainConfig cfg = quick_config(2);
  cfg.adam_iters = 30;
  cfg.adam_lr = 1e18;  // blows the weights up immediately
  cfg.lbfgs_iters = 0;
  CHECK_THROWS_AS(fit(arch, data, LossSpec{}, RegSpec{}, cfg), FitFailed);
}

TEST_CASE("empty or mismatched data is rejected up front") {
  const PcfArchitecture arch = PcfArchitecture::defaults(1, 1, 1);
  Dataset empty;
  empty.X.resize(0, 1);
  empty.Theta.resize(0, 1);
  empty.Y.resize(0, 1);
  CHECK_THROWS_AS(fit(arch, empty, LossSpec{}, RegSpec{}, quick_config()), InvalidInput);

  const PcfModel truth = random_model(arch, 43);
  Dataset data = dataset_from_model(truth, 10, 47);
  Dataset wrong = data;
  wrong.X.conservativeResize(10, 2);
  CHECK_THROWS_WITH_AS(fit(arch, wrong, LossSpec{}, RegSpec{}, quick_config()),
                       doctest::Contains("x-columns"), InvalidInput);

  Dataset nonfinite = data;
  nonfinite.Y(3, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit(arch, nonfinite, LossSpec{}, RegSpec{}, quick_config()), InvalidInput);
}

TEST_CASE("scaling mode standardizes internally and reports in original units") {
  PcfArchitecture spec;
  spec.n = 1;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  spec.scaling = true;
  const PcfArchitecture arch = spec.finalized();

  // ill-scaled data: y = 1000 (x - 5)^2, x around 5, theta around 40
  std::mt19937_64 rng(53);
  Dataset data;
  const Eigen::Index N = 256;
  data.X = pcf::testing::random_matrix(rng, N, 1, 4.0, 6.0);
  data.Theta = pcf::testing::random_matrix(rng, N, 1, 39.0, 41.0);
  data.Y.resize(N, 1);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double e = data.X(k, 0) - 5.0;
    data.Y(k, 0) = 1000.0 * e * e;
  }
  TrainConfig cfg;
  cfg.adam_iters = 120;
  cfg.lbfgs_iters = 400;
  cfg.n_starts = 2;
  auto [model, report] = fit(arch, data, LossSpec{}, RegSpec{}, cfg);
  REQUIRE(model.scaling.has_value());
  CHECK(report.train_r2 >= 0.98);
  // the model consumes original-unit inputs
  Vector x(1), th(1);
  x << 5.0;
  th << 40.0;
  CHECK(std::abs(evaluate(model, x, th)[0]) <= 120.0);  // true value is 0, range is ~300
}

TEST_CASE("gradient-matching term drives the minimizer toward g(theta)") {
  PcfArchitecture spec;
  spec.n = 1;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();

  // y = (x - 0.5)^2 has its minimum at 0.5 for every theta
  std::mt19937_64 rng(59);
  Dataset data;
  const Eigen::Index N = 200;
  data.X = pcf::testing::random_matrix(rng, N, 1, -1.0, 2.0);
  data.Theta = pcf::testing::random_matrix(rng, N, 1, -1.0, 1.0);
  data.Y.resize(N, 1);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double e = data.X(k, 0) - 0.5;
    data.Y(k, 0) = e * e;
  }
  RegSpec reg;
  reg.rho_min = 5.0;
  reg.argmin_g = [](const Vector&) { return Vector::Constant(1, 0.5); };
  TrainConfig cfg;
  cfg.adam_iters = 120;
  cfg.lbfgs_iters = 400;
  cfg.n_starts = 2;
  auto [model, report] = fit(arch, data, LossSpec{}, reg, cfg);
  Vector x(1), th(1);
  x << 0.5;
  th << 0.0;
  CHECK(std::abs(grad_x(model, x, th)(0, 0)) <= 1e-2);

  // the same pairing is rejected for relu up front
  PcfArchitecture relu = arch;
  relu.activation = Activation::Relu;
  CHECK_THROWS_AS(fit(relu, data, LossSpec{}, reg, cfg), UnsupportedCombination);
}
