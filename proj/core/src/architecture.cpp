#include "pcf/architecture.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pcf {

namespace {

int default_hidden_width(int n, int d) { return std::max(2, 2 * ((n + d) / 2)); }

}  // namespace

PcfArchitecture PcfArchitecture::defaults(int n, int p, int d) {
  PcfArchitecture arch;
  arch.n = n;
  arch.p = p;
  arch.d = d;
  return arch.finalized();
}

PcfArchitecture PcfArchitecture::finalized() const {
  PcfArchitecture a = *this;
  if (a.layers == 0) a.layers = 3;
  if (a.hidden_widths.empty() && a.layers >= 2) {
    a.hidden_widths.assign(static_cast<size_t>(a.layers - 1), default_hidden_width(a.n, a.d));
  }
  if (a.quadratic.kind == QuadraticSpec::Kind::LowRank && a.quadratic.rank == 0) {
    a.quadratic.rank = std::max(1, std::min(a.n, 4));
  }
  if (a.monotonicity.empty()) {
    a.monotonicity.assign(static_cast<size_t>(std::max(a.n, 0)), Monotonicity::None);
  }
  if (a.psi_hidden.empty()) {
    // width floor((p + m) / 2) for the two inner layers, m from the now-fixed
    // convex-net widths
    const int m = a.emitted_width();
    const int h = std::max(1, (a.p + m) / 2);
    a.psi_hidden = {h, h};
  }
  a.validate();
  return a;
}

void PcfArchitecture::validate() const {
  std::ostringstream err;
  if (n < 0) err << "variable dimension n must be >= 0, got " << n;
  else if (p < 0) err << "parameter dimension p must be >= 0, got " << p;
  else if (d < 1) err << "output dimension d must be >= 1, got " << d;
  else if (layers < 2) err << "layer count L must be >= 2, got " << layers;
  else if (static_cast<int>(hidden_widths.size()) != layers - 1)
    err << "expected " << layers - 1 << " hidden widths, got " << hidden_widths.size();
  else if (psi_hidden.empty()) err << "parameter network needs at least one hidden layer";
  else if (!monotonicity.empty() && static_cast<int>(monotonicity.size()) != n)
    err << "monotonicity has " << monotonicity.size() << " entries, expected n = " << n;
  else if (quadratic.kind == QuadraticSpec::Kind::LowRank && quadratic.rank < 1)
    err << "low-rank quadratic rank must be >= 1, got " << quadratic.rank;
  if (err.tellp() > 0) throw InvalidInput("architecture: " + err.str());
  for (int w : hidden_widths)
    if (w < 1) throw InvalidInput("architecture: hidden width must be >= 1, got " + std::to_string(w));
  for (int w : psi_hidden)
    if (w < 1)
      throw InvalidInput("architecture: parameter-net width must be >= 1, got " + std::to_string(w));
}

int PcfArchitecture::layer_width(int l) const {
  if (l == 0) return n;
  if (l == layers) return d;
  return hidden_widths[static_cast<size_t>(l - 1)];
}

bool PcfArchitecture::monotone() const {
  return std::any_of(monotonicity.begin(), monotonicity.end(),
                     [](Monotonicity m) { return m != Monotonicity::None; });
}

int PcfArchitecture::quad_param_count() const {
  switch (quadratic.kind) {
    case QuadraticSpec::Kind::None:
      return 0;
    case QuadraticSpec::Kind::Full:
      return n * (n + 1) / 2;
    case QuadraticSpec::Kind::LowRank:
      return quadratic.rank * n + n;
  }
  return 0;
}

int PcfArchitecture::emitted_width() const {
  const int L = layers;
  int m = 0;
  for (int l = 2; l <= L; ++l) m += layer_width(l) * layer_width(l - 1);  // W^2..W^L
  int width_sum = 0;
  for (int l = 1; l <= L; ++l) width_sum += layer_width(l);
  m += width_sum * n;  // V^1..V^L
  m += width_sum;      // omega^1..omega^L
  m += quad_param_count();
  return m;
}

EmittedLayout emitted_layout(const PcfArchitecture& arch) {
  EmittedLayout lay;
  const int L = arch.layers;
  int off = 0;
  auto push = [&off](std::vector<BlockInfo>& dst, int rows, int cols) {
    dst.push_back({off, rows, cols});
    off += rows * cols;
  };
  for (int l = 2; l <= L; ++l) push(lay.W, arch.layer_width(l), arch.layer_width(l - 1));
  for (int l = 1; l <= L; ++l) push(lay.V, arch.layer_width(l), arch.n);
  for (int l = 1; l <= L; ++l) push(lay.omega, arch.layer_width(l), 1);
  switch (arch.quadratic.kind) {
    case QuadraticSpec::Kind::None:
      break;
    case QuadraticSpec::Kind::Full:
      lay.U = {off, arch.n * (arch.n + 1) / 2, 1};
      off += lay.U.size();
      break;
    case QuadraticSpec::Kind::LowRank:
      lay.F = {off, arch.quadratic.rank, arch.n};
      off += lay.F.size();
      lay.diag = {off, arch.n, 1};
      off += lay.diag.size();
      break;
  }
  lay.total = off;
  return lay;
}

PsiLayout psi_layout(const PcfArchitecture& arch) {
  PsiLayout lay;
  lay.widths.push_back(arch.p);
  for (int h : arch.psi_hidden) lay.widths.push_back(h);
  lay.widths.push_back(arch.emitted_width());
  const int M = lay.depth();
  int off = 0;
  auto push = [&off](std::vector<BlockInfo>& dst, int rows, int cols) {
    dst.push_back({off, rows, cols});
    off += rows * cols;
  };
  for (int j = 2; j <= M; ++j) push(lay.A, lay.widths[static_cast<size_t>(j)], lay.widths[static_cast<size_t>(j - 1)]);
  for (int j = 1; j <= M; ++j) push(lay.C, lay.widths[static_cast<size_t>(j)], arch.p);
  for (int j = 1; j <= M; ++j) push(lay.b, lay.widths[static_cast<size_t>(j)], 1);
  lay.total = off;
  return lay;
}

int weight_count(const PcfArchitecture& arch) { return psi_layout(arch).total; }

std::uint64_t start_seed(std::uint64_t base_seed, int start_index) {
  // splitmix64 on (base + index)
  std::uint64_t x = base_seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(start_index + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

Vector init_weights(const PcfArchitecture& arch, std::uint64_t seed) {
  const PsiLayout psi = psi_layout(arch);
  const EmittedLayout emit = emitted_layout(arch);
  Vector w = Vector::Zero(psi.total);
  std::mt19937_64 rng(seed);
  auto fill_uniform = [&rng, &w](const BlockInfo& blk) {
    if (blk.size() == 0) return;
    const double a = std::sqrt(6.0 / static_cast<double>(blk.rows + blk.cols));
    std::uniform_real_distribution<double> dist(-a, a);
    for (int i = 0; i < blk.size(); ++i) w[blk.offset + i] = dist(rng);
  };
  for (const BlockInfo& blk : psi.A) fill_uniform(blk);
  for (const BlockInfo& blk : psi.C) fill_uniform(blk);

  // Final-layer offsets for clamped heads start at +0.1: W heads always pass
  // through relu, V heads do too in monotone modes.
  const BlockInfo& b_last = psi.b.back();
  auto head_bias = [&w, &b_last](int emitted_index) { w[b_last.offset + emitted_index] = 0.1; };
  for (const BlockInfo& blk : emit.W)
    for (int i = 0; i < blk.size(); ++i) head_bias(blk.offset + i);
  if (arch.monotone()) {
    for (const BlockInfo& blk : emit.V)
      for (int r = 0; r < blk.rows; ++r)
        for (int c = 0; c < blk.cols; ++c)
          if (arch.coord_mode(c) != Monotonicity::None) head_bias(blk.offset + r * blk.cols + c);
  }
  return w;
}

const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "softplus"; }

const char* to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::None:
      return "none";
    case Monotonicity::Increasing:
      return "increasing";
    case Monotonicity::Decreasing:
      return "decreasing";
  }
  return "none";
}

const char* to_string(QuadraticSpec::Kind k) {
  switch (k) {
    case QuadraticSpec::Kind::None:
      return "none";
    case QuadraticSpec::Kind::Full:
      return "full";
    case QuadraticSpec::Kind::LowRank:
      return "low_rank";
  }
  return "none";
}

}  // namespace pcf
