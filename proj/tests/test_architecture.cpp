#include <doctest.h>

#include <random>

#include "pcf/architecture.hpp"
#include "test_helpers.hpp"

using namespace pcf;

TEST_CASE("defaults: L = 3, hidden widths 2*floor((n+d)/2) with minimum 2") {
  const PcfArchitecture a = PcfArchitecture::defaults(1, 4, 1);
  CHECK(a.layers == 3);
  REQUIRE(a.hidden_widths.size() == 2);
  CHECK(a.hidden_widths[0] == 2);
  CHECK(a.hidden_widths[1] == 2);
  CHECK(a.layer_width(0) == 1);
  CHECK(a.layer_width(3) == 1);

  const PcfArchitecture b = PcfArchitecture::defaults(3, 2, 1);
  CHECK(b.hidden_widths[0] == 4);  // 2*floor(4/2)

  const PcfArchitecture c = PcfArchitecture::defaults(0, 2, 1);
  CHECK(c.hidden_widths[0] == 2);  // clamped to the minimum
}

TEST_CASE("emitted width matches the closed-form count") {
  // n = 1, d = 1, L = 3 defaults: n1 = n2 = 2, n3 = 1
  // m = n2 n1 + n3 n2 + (n1+n2+n3) n + (n1+n2+n3) = 4 + 2 + 5 + 5 = 16
  const PcfArchitecture a = PcfArchitecture::defaults(1, 4, 1);
  CHECK(a.emitted_width() == 16);

  // cross-check against the block-by-block layout count
  const EmittedLayout lay = emitted_layout(a);
  int counted = 0;
  for (const BlockInfo& b : lay.W) counted += b.size();
  for (const BlockInfo& b : lay.V) counted += b.size();
  for (const BlockInfo& b : lay.omega) counted += b.size();
  CHECK(counted == 16);
  CHECK(lay.total == 16);

  // default parameter network: two hidden layers of width floor((p+m)/2)
  REQUIRE(a.psi_hidden.size() == 2);
  CHECK(a.psi_hidden[0] == (4 + 16) / 2);
}

TEST_CASE("emitted width includes quadratic entries") {
  PcfArchitecture a;
  a.n = 3;
  a.p = 2;
  a.d = 1;
  a.quadratic.kind = QuadraticSpec::Kind::Full;
  const PcfArchitecture f = a.finalized();
  const PcfArchitecture base = PcfArchitecture::defaults(3, 2, 1);
  CHECK(f.emitted_width() == base.emitted_width() + 6);  // 3*4/2 packed entries

  PcfArchitecture lr;
  lr.n = 3;
  lr.p = 2;
  lr.d = 1;
  lr.quadratic.kind = QuadraticSpec::Kind::LowRank;
  const PcfArchitecture g = lr.finalized();
  CHECK(g.quadratic.rank == 3);  // min(n, 4)
  CHECK(g.emitted_width() == base.emitted_width() + 3 * 3 + 3);
}

TEST_CASE("invalid structures are rejected with the offending value named") {
  PcfArchitecture a;
  a.n = 1;
  a.p = 1;
  a.d = 1;
  a.layers = 1;
  a.hidden_widths = {};
  a.psi_hidden = {4};
  CHECK_THROWS_AS(a.validate(), InvalidInput);

  PcfArchitecture b = PcfArchitecture::defaults(2, 1, 1);
  b.hidden_widths[0] = 0;
  CHECK_THROWS_WITH_AS(b.validate(), doctest::Contains("width"), InvalidInput);

  PcfArchitecture c = PcfArchitecture::defaults(2, 1, 1);
  c.monotonicity = {Monotonicity::Increasing};  // wrong length (n = 2)
  CHECK_THROWS_AS(c.validate(), InvalidInput);

  PcfArchitecture d;
  d.n = 1;
  d.p = 1;
  d.d = 0;
  CHECK_THROWS_AS(d.finalized(), InvalidInput);
}

TEST_CASE("flat block layout round-trips bitwise") {
  std::mt19937_64 rng(7);
  PcfArchitecture a;
  a.n = 2;
  a.p = 3;
  a.d = 2;
  a.quadratic.kind = QuadraticSpec::Kind::LowRank;
  const PcfArchitecture arch = a.finalized();
  const EmittedLayout lay = emitted_layout(arch);
  const Vector v = pcf::testing::random_vector(rng, lay.total);

  Vector rebuilt = Vector::Zero(lay.total);
  auto copy_block = [&](const BlockInfo& b) {
    if (b.offset < 0) return;
    Eigen::Map<const RowMajorMatrix> src(v.data() + b.offset, b.rows, b.cols);
    Eigen::Map<RowMajorMatrix> dst(rebuilt.data() + b.offset, b.rows, b.cols);
    dst = src;  // unflatten -> flatten
  };
  for (const BlockInfo& b : lay.W) copy_block(b);
  for (const BlockInfo& b : lay.V) copy_block(b);
  for (const BlockInfo& b : lay.omega) copy_block(b);
  copy_block(lay.F);
  copy_block(lay.diag);
  CHECK(std::memcmp(v.data(), rebuilt.data(), sizeof(double) * static_cast<size_t>(lay.total)) == 0);

  const PsiLayout psi = psi_layout(arch);
  int counted = 0;
  for (const BlockInfo& b : psi.A) counted += b.size();
  for (const BlockInfo& b : psi.C) counted += b.size();
  for (const BlockInfo& b : psi.b) counted += b.size();
  CHECK(counted == psi.total);
  CHECK(weight_count(arch) == psi.total);
}

TEST_CASE("initial weights: zero offsets except clamped-head biases at +0.1") {
  const PcfArchitecture arch = PcfArchitecture::defaults(2, 2, 1);
  const Vector w = init_weights(arch, 42);
  const PsiLayout psi = psi_layout(arch);
  const EmittedLayout lay = emitted_layout(arch);

  for (size_t j = 0; j + 1 < psi.b.size(); ++j) {
    const BlockInfo& b = psi.b[j];
    for (int i = 0; i < b.size(); ++i) CHECK(w[b.offset + i] == 0.0);
  }
  const BlockInfo& blast = psi.b.back();
  std::vector<bool> is_w_head(static_cast<size_t>(lay.total), false);
  for (const BlockInfo& b : lay.W)
    for (int i = 0; i < b.size(); ++i) is_w_head[static_cast<size_t>(b.offset + i)] = true;
  for (int i = 0; i < lay.total; ++i) {
    const double expect = is_w_head[static_cast<size_t>(i)] ? 0.1 : 0.0;
    CHECK(w[blast.offset + i] == expect);
  }

  // dense entries bounded by the glorot radius
  for (const BlockInfo& b : psi.A) {
    const double rad = std::sqrt(6.0 / (b.rows + b.cols));
    for (int i = 0; i < b.size(); ++i) CHECK(std::abs(w[b.offset + i]) <= rad);
  }

  CHECK(init_weights(arch, 42) == w);          // deterministic
  CHECK(init_weights(arch, 43) != w);          // seed-sensitive
  CHECK(start_seed(0, 0) != start_seed(0, 1));
}
