#include <doctest.h>

#include <cmath>

#include "pcf/optim.hpp"

using namespace pcf;

namespace {

// f(x) = ||x - c||^2
ObjectiveFn bowl(const Vector& c) {
  return [c](const Vector& x, Vector& g) {
    g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
}

ObjectiveFn rosenbrock() {
  return [](const Vector& x, Vector& g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
}

}  // namespace

TEST_CASE("lbfgs solves a quadratic bowl to the gradient tolerance") {
  Vector c(3);
  c << 1.0, -2.0, 0.5;
  LbfgsOptions opts;
  opts.max_iters = 100;
  const LbfgsResult res = lbfgs_minimize(bowl(c), Vector::Zero(3), opts);
  CHECK(res.converged);
  CHECK((res.w - c).norm() <= 1e-7);
  CHECK(res.objective <= 1e-14);
}

TEST_CASE("lbfgs handles rosenbrock") {
  LbfgsOptions opts;
  opts.max_iters = 500;
  Vector x0(2);
  x0 << -1.2, 1.0;
  const LbfgsResult res = lbfgs_minimize(rosenbrock(), x0, opts);
  CHECK(res.converged);
  CHECK(std::abs(res.w[0] - 1.0) <= 1e-6);
  CHECK(std::abs(res.w[1] - 1.0) <= 1e-6);
}

TEST_CASE("accepted lbfgs steps never increase the objective") {
  // truncate at increasing iteration caps: the objective after k iterations
  // must be nonincreasing in k
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 12; ++k) {
    LbfgsOptions opts;
    opts.max_iters = k;
    Vector x0(2);
    x0 << -1.2, 1.0;
    const LbfgsResult res = lbfgs_minimize(rosenbrock(), x0, opts);
    CHECK(res.objective <= prev + 1e-15);
    prev = res.objective;
  }
}

TEST_CASE("lbfgs respects the function evaluation budget") {
  LbfgsOptions opts;
  opts.max_iters = 1000;
  opts.max_fevals = 7;
  Vector c(2);
  c << 1, 1;
  const LbfgsResult res = lbfgs_minimize(rosenbrock(), Vector::Zero(2), opts);
  CHECK(res.fevals <= 7 + opts.max_line_search);
}

TEST_CASE("lbfgs on a nonsmooth objective terminates gracefully") {
  ObjectiveFn abs1 = [](const Vector& x, Vector& g) {
    g.resize(1);
    g[0] = x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0);
    return std::abs(x[0]);
  };
  LbfgsOptions opts;
  opts.max_iters = 50;
  const LbfgsResult res = lbfgs_minimize(abs1, Vector::Constant(1, 1.0), opts);
  CHECK(res.objective <= 1.0);
  CHECK(std::isfinite(res.objective));
}

TEST_CASE("lbfgs reports divergence at a non-finite start") {
  ObjectiveFn nan_fn = [](const Vector& x, Vector& g) {
    g = x;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const LbfgsResult res = lbfgs_minimize(nan_fn, Vector::Zero(2), {});
  CHECK(!res.converged);
  CHECK(res.stop_reason == "non-finite objective at the initial point");
}

TEST_CASE("adam reduces the objective on a smooth problem") {
  Vector c(3);
  c << 0.2, -0.4, 0.6;
  AdamOptions opts;
  opts.iters = 400;
  opts.lr = 0.05;
  Vector g(3);
  const double f0 = bowl(c)(Vector::Zero(3), g);
  const AdamResult res = adam_minimize(bowl(c), Vector::Zero(3), opts);
  CHECK(res.objective < f0);
  CHECK((res.w - c).norm() <= 0.05);
}
