#include <doctest.h>

#include <cmath>

#include "pcf/experiments/generators.hpp"
#include "pcf/experiments/pendulum.hpp"
#include "test_helpers.hpp"

using namespace pcf;
using namespace pcf::experiments;
using pcf::testing::random_model;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("pwa ground truth: formula values and the convexity mask") {
  Vector theta(4);
  theta << 1, 1, 0, 0;
  CHECK(pwa_true(0.5, theta) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pwa_true(0.0, theta) == 0.0);  // at the kink only v remains

  Vector mixed(4);
  mixed << 0.5, -0.2, 0.1, 0.3;
  const double x = -0.4;
  CHECK(pwa_true(x, mixed) ==
        doctest::Approx(0.5 * std::max(0.0, x - 0.1) - 0.2 * std::max(0.0, 0.1 - x) + 0.3));

  const PwaData data = gen_pwa(50, 20, 7);
  CHECK(data.data.size() == 1000);
  for (int t = 0; t < 50; ++t) {
    const bool expect = data.thetas(t, 0) >= -data.thetas(t, 1);
    CHECK(data.convex[static_cast<size_t>(t)] == expect);
  }
  // theta = (1, -2, ...) is flagged nonconvex
  Vector ncvx(4);
  ncvx << 1, -2, 0, 0;
  CHECK_FALSE(ncvx[0] >= -ncvx[1]);

  // determinism and value consistency with the formula
  const PwaData again = gen_pwa(50, 20, 7);
  CHECK(again.data.Y == data.data.Y);
  for (Eigen::Index k = 0; k < data.data.size(); ++k)
    CHECK(data.data.Y(k, 0) ==
          pwa_true(data.data.X(k, 0), data.data.Theta.row(k).transpose()));
}

TEST_CASE("pwa best-affine fit is exact on an affine slice") {
  // s+ = -s- makes the slice affine with slope s+ and offset v - s+ m
  const PwaData data = gen_pwa(200, 50, 11);
  for (int t = 0; t < 200; ++t) {
    const double sp = data.thetas(t, 0), sm = data.thetas(t, 1);
    if (std::abs(sp + sm) > 1e-12) continue;
    const double m = data.thetas(t, 2), v = data.thetas(t, 3);
    CHECK(data.affine_coef(t, 1) == doctest::Approx(sp).epsilon(1e-9));
    CHECK(data.affine_coef(t, 0) == doctest::Approx(v - sp * m).epsilon(1e-9));
  }
  // and it is the least-squares minimizer: perturbing the coefficients never
  // lowers the squared error on one sampled slice
  const int t = 3;
  Vector theta = data.thetas.row(t).transpose();
  auto sse = [&](double a, double b) {
    double acc = 0;
    for (int i = 0; i < 50; ++i) {
      const double x = data.data.X(static_cast<Eigen::Index>(t) * 50 + i, 0);
      const double r = a + b * x - data.data.Y(static_cast<Eigen::Index>(t) * 50 + i, 0);
      acc += r * r;
    }
    return acc;
  };
  const double base = sse(data.affine_coef(t, 0), data.affine_coef(t, 1));
  for (double da : {-0.05, 0.05})
    for (double db : {-0.05, 0.05})
      CHECK(base <= sse(data.affine_coef(t, 0) + da, data.affine_coef(t, 1) + db) + 1e-12);
}

TEST_CASE("quadratic generator: psd parameters, unit-ball inputs, exact targets") {
  const Dataset data = gen_quadratic(40, 25, 3, 13);
  CHECK(data.size() == 1000);
  CHECK(data.p() == 9);
  for (Eigen::Index k = 0; k < data.size(); k += 37) {
    const Matrix Th = Eigen::Map<const Matrix>(data.Theta.row(k).data(), 3, 3);
    CHECK((Th - Th.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(Th);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    const Vector x = data.X.row(k).transpose();
    CHECK(x.norm() <= 1.0 + 1e-12);
    CHECK(data.Y(k, 0) == doctest::Approx(x.dot(Th * x)).epsilon(1e-14));
  }
  // theta = I and theta = 0 sanity points for the formula itself
  Vector e1(3);
  e1 << 1, 0, 0;
  CHECK(e1.dot(Matrix::Identity(3, 3) * e1) == 1.0);
  CHECK(e1.dot(Matrix::Zero(3, 3) * e1) == 0.0);
}

TEST_CASE("battery model: zero rate, frozen oracle value, taylor coefficients") {
  Vector theta(3);
  theta << 25.0, 1.0, 25.0;
  Vector x0(2);
  x0 << 0.5, 0.0;
  CHECK(battery_true(x0, theta) == 0.0);
  CHECK(battery_short(x0, theta) == 0.0);

  // value computed independently with 40-digit arithmetic before this module
  // was written
  Vector x(2);
  x << 0.5, 10.0;
  CHECK(pcf::testing::rel_err(battery_true(x, theta), 8.2227156137753216e-04) <= 1e-12);
  CHECK(pcf::testing::rel_err(battery_short(x, theta), 4.4447570804962228e-04) <= 1e-12);

  // slope of the short model equals the independently derived taylor
  // coefficient z A^(z-1) (alpha/2 + beta) exp(-E_a / (R_g (T0 + T)))
  const BatteryConstants c;
  const double slope = c.z * std::pow(25.0, c.z - 1.0) * (c.alpha / 2.0 + c.beta) *
                       std::exp(-c.E_a / (c.R_g * (c.T0 + 25.0)));
  CHECK(pcf::testing::rel_err(battery_short(x, theta) / 10.0, slope) <= 1e-12);

  // first-order agreement at the expansion point: (f_true - f_short)/b -> 0
  Vector xb(2);
  xb << 0.5, 1e-6;
  const double gap = (battery_true(xb, theta) - battery_short(xb, theta)) / 1e-6;
  CHECK(std::abs(gap) <= 1e-9);

  CHECK_THROWS_AS(battery_true(x0, Vector::Zero(3)), InvalidInput);  // A = 0

  const Dataset data = gen_battery(20, 30, 17);
  CHECK(data.size() == 600);
  CHECK(data.Y.minCoeff() >= 0.0);
  for (Eigen::Index k = 0; k < data.size(); k += 41)
    CHECK(data.Y(k, 0) ==
          battery_true(data.X.row(k).transpose(), data.Theta.row(k).transpose()));
}

TEST_CASE("ellipse classification labels match the level set") {
  const Dataset data = gen_ellipse_classification(500, 19);
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const double r1 = data.Theta(k, 0), r2 = data.Theta(k, 1);
    const double lvl = std::pow(data.X(k, 0) / r1, 2) + std::pow(data.X(k, 1) / r2, 2);
    CHECK(data.Y(k, 0) == (lvl <= 1.0 ? 1.0 : -1.0));
  }
}

TEST_CASE("pendulum dynamics are the forward-euler map") {
  PendulumSystem sys;
  sys.mass = 1.3;
  Eigen::Vector2d z(0.4, -0.2);
  const double u = 2.0;
  const Eigen::Vector2d next = sys.step(z, u);
  const double ml2 = 1.3;
  CHECK(next[0] == doctest::Approx(0.4 + 0.02 * (-0.2)).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(-0.2 + 0.02 * (u - 0.05 * (-0.2) -
                                                  1.3 * 9.81 * std::sin(0.4)) / ml2)
                       .epsilon(1e-12));

  // jacobian vs finite differences
  const Eigen::Matrix2d A = sys.drift_jacobian(z);
  const double h = 1e-7;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    const Eigen::Vector2d fd = (sys.drift(zp) - sys.drift(zm)) / (2 * h);
    CHECK(std::abs(A(0, j) - fd[0]) <= 1e-6);
    CHECK(std::abs(A(1, j) - fd[1]) <= 1e-6);
  }
}

TEST_CASE("ocp at the target equilibrium keeps zero input and zero cost") {
  PendulumSystem sys;
  OcpOptions opts;
  opts.init_scale = 0.5;
  const OcpResult res = solve_ocp(sys, {kPi, 0.0}, 40, opts);
  REQUIRE(!res.failed);
  CHECK(res.cost <= 1e-6);
  CHECK(res.inputs.cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("tail costs telescope exactly and the solve beats the zero rollout") {
  PendulumSystem sys;
  const Eigen::Vector2d z0(0.0, 0.0);
  const int T = 50;
  const OcpResult res = solve_ocp(sys, z0, T, {});
  REQUIRE(!res.failed);
  for (int t = 0; t < T; ++t)
    CHECK(res.tail_costs[t] ==
          stage_cost(res.states[static_cast<size_t>(t)], res.inputs[t]) + res.tail_costs[t + 1]);
  CHECK(res.tail_costs[T] == 0.0);

  double zero_cost = 0.0;
  Eigen::Vector2d z = z0;
  for (int t = 0; t < T; ++t) {
    zero_cost += stage_cost(z, 0.0);
    z = sys.step(z, 0.0);
  }
  CHECK(res.cost < zero_cost);
}

TEST_CASE("adp step with a zero value model minimizes the stage cost alone") {
  PcfArchitecture spec;
  spec.n = 2;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel zero{arch, Vector::Zero(weight_count(arch)), std::nullopt};
  PendulumSystem sys;
  const double u = adp_step(zero, sys, {0.7, -0.3});
  CHECK(std::abs(u) <= 1e-6);  // only the 0.001 u^2 term depends on u
}

TEST_CASE("adp objective is convex in u and the step is bracket-invariant") {
  PcfArchitecture spec;
  spec.n = 2;
  spec.p = 1;
  spec.d = 1;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel model = random_model(arch, 23);
  PendulumSystem sys;
  const Eigen::Vector2d z(0.5, 0.2);
  Vector th(1);
  th << 1.0;

  auto J = [&](double u) {
    const Eigen::Vector2d znext = sys.step(z, u);
    return stage_cost(z, u) + evaluate(model, znext, th)[0];
  };
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const double a = dist(rng), b = dist(rng);
    CHECK(J(0.5 * (a + b)) <= 0.5 * J(a) + 0.5 * J(b) + 1e-9);
  }

  AdpOptions o1;
  AdpOptions o2;
  o2.u_max = 30.0;
  CHECK(std::abs(adp_step(model, sys, z, o1) - adp_step(model, sys, z, o2)) <= 1e-6);
}
