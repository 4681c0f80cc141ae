#include <doctest.h>

#include <random>

#include "pcf/model.hpp"
#include "test_helpers.hpp"

using namespace pcf;
using pcf::testing::random_model;
using pcf::testing::random_vector;

namespace {

// emitted vector with a single region populated; everything else zero
Vector emitted_with(const PcfArchitecture& arch, const BlockInfo& blk, const Vector& vals) {
  Vector e = Vector::Zero(emitted_layout(arch).total);
  for (int i = 0; i < vals.size(); ++i) e[blk.offset + i] = vals[i];
  return e;
}

}  // namespace

TEST_CASE("zero weights emit all-zero blocks for any theta") {
  const PcfArchitecture arch = PcfArchitecture::defaults(2, 3, 1);
  const Vector w = Vector::Zero(weight_count(arch));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const MaterializedLayers layers = materialize_layers(arch, w, random_vector(rng, 3, -5, 5));
    for (const Matrix& m : layers.W) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
    for (const Matrix& m : layers.V) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
    for (const Vector& v : layers.omega) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("W blocks are elementwise nonnegative for any theta") {
  PcfArchitecture spec;
  spec.n = 2;
  spec.p = 2;
  spec.d = 1;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel model = random_model(arch, 5);
  std::mt19937_64 rng(13);
  double min_w = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const MaterializedLayers layers =
        materialize_layers(arch, model.weights, random_vector(rng, 2, -3, 3));
    for (const Matrix& m : layers.W) min_w = std::min(min_w, m.minCoeff());
  }
  CHECK(min_w >= 0.0);
}

TEST_CASE("monotone-increasing mode clamps every V block nonnegative") {
  PcfArchitecture spec;
  spec.n = 2;
  spec.p = 2;
  spec.d = 1;
  spec.monotonicity = {Monotonicity::Increasing, Monotonicity::Increasing};
  const PcfArchitecture arch = spec.finalized();
  const PcfModel model = random_model(arch, 17);
  std::mt19937_64 rng(19);
  double min_v = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const MaterializedLayers layers =
        materialize_layers(arch, model.weights, random_vector(rng, 2, -3, 3));
    for (const Matrix& m : layers.V) min_v = std::min(min_v, m.minCoeff());
  }
  CHECK(min_v >= 0.0);
}

TEST_CASE("all-zero layers give the zero function; a lone last offset gives a constant") {
  const PcfArchitecture arch = PcfArchitecture::defaults(2, 1, 1);
  const EmittedLayout lay = emitted_layout(arch);
  std::mt19937_64 rng(23);

  const MaterializedLayers zero = blocks_from_emitted(arch, Vector::Zero(lay.total));
  for (int k = 0; k < 10; ++k)
    CHECK(icnn_forward(zero, arch, random_vector(rng, 2))[0] == 0.0);

  Vector c(1);
  c << 2.5;
  const MaterializedLayers constant =
      blocks_from_emitted(arch, emitted_with(arch, lay.omega.back(), c));
  for (int k = 0; k < 10; ++k)
    CHECK(icnn_forward(constant, arch, random_vector(rng, 2))[0] == 2.5);
}

TEST_CASE("quadratic term with U = I adds x'x") {
  PcfArchitecture spec;
  spec.n = 3;
  spec.p = 1;
  spec.d = 1;
  spec.quadratic.kind = QuadraticSpec::Kind::Full;
  const PcfArchitecture arch = spec.finalized();
  const EmittedLayout lay = emitted_layout(arch);
  // packed upper triangle of I3: rows (1,0,0), (1,0), (1)
  Vector packed(6);
  packed << 1, 0, 0, 1, 0, 1;
  const MaterializedLayers layers = blocks_from_emitted(arch, emitted_with(arch, lay.U, packed));
  Vector x(3);
  x << 1, 2, 3;
  CHECK(icnn_forward(layers, arch, x)[0] == doctest::Approx(14.0).epsilon(1e-15));
  CHECK(quad_value(layers, arch, x) == doctest::Approx(14.0).epsilon(1e-15));
}

TEST_CASE("evaluate without scaling equals the materialize + forward composition") {
  const PcfArchitecture arch = PcfArchitecture::defaults(2, 2, 2);
  const PcfModel model = random_model(arch, 31);
  std::mt19937_64 rng(37);
  for (int k = 0; k < 50; ++k) {
    const Vector x = random_vector(rng, 2), th = random_vector(rng, 2);
    const Vector direct = icnn_forward(materialize_layers(arch, model.weights, th), arch, x);
    CHECK(evaluate(model, x, th) == direct);
  }
}

TEST_CASE("evaluate is deterministic and rejects bad input") {
  const PcfArchitecture arch = PcfArchitecture::defaults(2, 1, 1);
  const PcfModel model = random_model(arch, 41);
  Vector x(2), th(1);
  x << 0.3, -0.7;
  th << 0.5;
  const Vector y1 = evaluate(model, x, th);
  const Vector y2 = evaluate(model, x, th);
  CHECK(y1 == y2);

  Vector bad = x;
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(evaluate(model, bad, th), NonFiniteError);
  CHECK_THROWS_WITH_AS(evaluate(model, Vector::Zero(3), th), doctest::Contains("length"),
                       InvalidInput);
}

TEST_CASE("midpoint convexity holds for random models of every flavor") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto check_model = [&](PcfArchitecture spec, std::uint64_t seed) {
    const PcfArchitecture arch = spec.finalized();
    const PcfModel model = random_model(arch, seed);
    for (int k = 0; k < 10000 / 4; ++k) {
      const Vector x1 = random_vector(rng, arch.n, -2, 2);
      const Vector x2 = random_vector(rng, arch.n, -2, 2);
      const Vector th = random_vector(rng, arch.p, -2, 2);
      const double lam = unif(rng);
      const Vector mid = evaluate(model, lam * x1 + (1 - lam) * x2, th);
      const Vector rhs =
          lam * evaluate(model, x1, th) + (1 - lam) * evaluate(model, x2, th);
      for (int i = 0; i < arch.d; ++i)
        CHECK(mid[i] <= rhs[i] + 1e-8 * (1.0 + std::abs(rhs[i])));
    }
  };
  PcfArchitecture relu_arch;
  relu_arch.n = 2;
  relu_arch.p = 2;
  relu_arch.d = 1;
  check_model(relu_arch, 101);

  PcfArchitecture soft = relu_arch;
  soft.activation = Activation::Softplus;
  check_model(soft, 102);

  PcfArchitecture quad = soft;
  quad.quadratic.kind = QuadraticSpec::Kind::Full;
  check_model(quad, 103);

  PcfArchitecture lr = relu_arch;
  lr.d = 2;
  lr.quadratic.kind = QuadraticSpec::Kind::LowRank;
  check_model(lr, 104);
}

TEST_CASE("monotone modes give monotone functions") {
  PcfArchitecture spec;
  spec.n = 2;
  spec.p = 1;
  spec.d = 1;
  spec.monotonicity = {Monotonicity::Increasing, Monotonicity::Decreasing};
  const PcfArchitecture arch = spec.finalized();
  const PcfModel model = random_model(arch, 53);
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> step(0.01, 2.0);
  for (int k = 0; k < 500; ++k) {
    const Vector x = random_vector(rng, 2, -2, 2);
    const Vector th = random_vector(rng, 1, -2, 2);
    const double t = step(rng);
    const double base = evaluate(model, x, th)[0];
    Vector up = x;
    up[0] += t;
    CHECK(evaluate(model, up, th)[0] >= base - 1e-9);  // increasing coordinate
    Vector dn = x;
    dn[1] += t;
    CHECK(evaluate(model, dn, th)[0] <= base + 1e-9);  // decreasing coordinate
  }
}

TEST_CASE("grad_x: constant model is zero, quadratic-only model is 2x") {
  PcfArchitecture spec;
  spec.n = 3;
  spec.p = 1;
  spec.d = 1;
  spec.quadratic.kind = QuadraticSpec::Kind::Full;
  spec.activation = Activation::Softplus;
  const PcfArchitecture arch = spec.finalized();

  const PcfModel constant{arch, Vector::Zero(weight_count(arch)), std::nullopt};
  Vector x(3), th(1);
  x << 1, -2, 0.5;
  th << 0.3;
  CHECK(grad_x(constant, x, th).cwiseAbs().maxCoeff() == 0.0);

  // bias the final psi offsets so U = I for every theta; other blocks zero
  const PsiLayout psi = psi_layout(arch);
  const EmittedLayout lay = emitted_layout(arch);
  Vector w = Vector::Zero(weight_count(arch));
  Vector packed(6);
  packed << 1, 0, 0, 1, 0, 1;
  for (int i = 0; i < 6; ++i) w[psi.b.back().offset + lay.U.offset + i] = packed[i];
  const PcfModel quad{arch, w, std::nullopt};
  const Matrix g = grad_x(quad, x, th);
  for (int j = 0; j < 3; ++j) CHECK(g(0, j) == doctest::Approx(2.0 * x[j]).epsilon(1e-14));
}

TEST_CASE("grad_x matches central finite differences for softplus models") {
  PcfArchitecture spec;
  spec.n = 3;
  spec.p = 2;
  spec.d = 2;
  spec.activation = Activation::Softplus;
  spec.quadratic.kind = QuadraticSpec::Kind::LowRank;
  const PcfArchitecture arch = spec.finalized();
  const PcfModel model = random_model(arch, 61);
  std::mt19937_64 rng(67);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const Vector x = random_vector(rng, 3), th = random_vector(rng, 2);
    const Matrix g = grad_x(model, x, th);
    for (int i = 0; i < arch.d; ++i) {
      for (int j = 0; j < arch.n; ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (evaluate(model, xp, th)[i] - evaluate(model, xm, th)[i]) / (2 * h);
        CHECK(pcf::testing::rel_err(g(i, j), fd) <= 1e-5);
      }
    }
  }
}

TEST_CASE("degenerate dimensions: n = 0 and p = 0") {
  PcfArchitecture no_x;
  no_x.n = 0;
  no_x.p = 2;
  no_x.d = 1;
  const PcfArchitecture a0 = no_x.finalized();
  const PcfModel m0 = random_model(a0, 71);
  std::mt19937_64 rng(73);
  const Vector th = random_vector(rng, 2);
  const Vector y = evaluate(m0, Vector(0), th);
  CHECK(y.size() == 1);
  CHECK(std::isfinite(y[0]));
  CHECK(grad_x(m0, Vector(0), th).cols() == 0);

  PcfArchitecture no_theta;
  no_theta.n = 2;
  no_theta.p = 0;
  no_theta.d = 1;
  const PcfArchitecture a1 = no_theta.finalized();
  const PcfModel m1 = random_model(a1, 79);
  const Vector x = random_vector(rng, 2);
  // with p = 0 the parameter network degenerates to a learned constant
  CHECK(evaluate(m1, x, Vector(0)) == evaluate(m1, x, Vector(0)));
  const MaterializedLayers l1 = materialize_layers(a1, m1.weights, Vector(0));
  CHECK(l1.W.size() == 2);
}

TEST_CASE("scaling standardizes inputs and de-standardizes outputs") {
  PcfArchitecture spec;
  spec.n = 1;
  spec.p = 1;
  spec.d = 1;
  spec.scaling = true;
  const PcfArchitecture arch = spec.finalized();
  PcfModel model = random_model(arch, 83);
  ScalingParams s;
  s.x_shift = Vector::Constant(1, 10.0);
  s.x_scale = Vector::Constant(1, 2.0);
  s.theta_shift = Vector::Constant(1, -3.0);
  s.theta_scale = Vector::Constant(1, 0.5);
  s.y_shift = Vector::Constant(1, 100.0);
  s.y_scale = Vector::Constant(1, 7.0);
  model.scaling = s;

  PcfModel bare = model;
  bare.scaling.reset();

  Vector x(1), th(1);
  x << 12.0;
  th << -2.5;
  const Vector inner_x = Vector::Constant(1, (12.0 - 10.0) / 2.0);
  const Vector inner_th = Vector::Constant(1, (-2.5 + 3.0) / 0.5);
  const double want = 7.0 * evaluate(bare, inner_x, inner_th)[0] + 100.0;
  CHECK(evaluate(model, x, th)[0] == doctest::Approx(want).epsilon(1e-15));

  // chain rule through the affine maps
  const double g_inner = grad_x(bare, inner_x, inner_th)(0, 0);
  CHECK(grad_x(model, x, th)(0, 0) == doctest::Approx(7.0 * g_inner / 2.0).epsilon(1e-12));
}
