#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcf/types.hpp"

namespace pcf {

enum class Activation { Relu, Softplus };

enum class Monotonicity { None, Increasing, Decreasing };

/// Optional convex quadratic head x'Qx added to the network output.
/// Full: Q = U'U with U upper triangular (n(n+1)/2 emitted entries).
/// LowRank: Q = F'F + diag(c_1^2..c_n^2) with F of shape rank x n.
struct QuadraticSpec {
  enum class Kind { None, Full, LowRank };
  Kind kind = Kind::None;
  int rank = 0;  // LowRank only; 0 selects the default min(n, 4)

  bool enabled() const { return kind != Kind::None; }
};

/// Structural hyper-parameters of the input-convex network and of the
/// parameter network that emits its per-theta weights.
///
/// Empty/zero fields are placeholders for defaults; call finalized() to get a
/// fully populated, validated copy. Defaults: L = 3 layers, hidden widths
/// 2*floor((n+d)/2) (at least 2), parameter network with two hidden layers of
/// width floor((p+m)/2) where m is the emitted-weight count.
struct PcfArchitecture {
  int n = 0;  // variable dimension (>= 0)
  int p = 0;  // parameter dimension (>= 0)
  int d = 1;  // output dimension (>= 1)

  int layers = 0;                       // L; 0 -> default 3
  std::vector<int> hidden_widths;       // n_1..n_{L-1}; empty -> defaults
  Activation activation = Activation::Relu;
  std::vector<int> psi_hidden;          // parameter-net hidden widths; empty -> defaults
  std::vector<Monotonicity> monotonicity;  // per coordinate of x; empty -> all None
  QuadraticSpec quadratic;
  bool scaling = false;  // standardize x, theta, y from training data

  static PcfArchitecture defaults(int n, int p, int d);

  /// Returns a copy with every defaulted field filled in. Throws InvalidInput
  /// if the result violates a structural invariant.
  PcfArchitecture finalized() const;

  void validate() const;

  /// Width of layer l of the input-convex net, l = 0..L (n_0 = n, n_L = d).
  int layer_width(int l) const;

  /// Number of emitted quadratic-term entries (0 when disabled).
  int quad_param_count() const;

  /// m: total emitted-weight count of the parameter network, i.e.
  /// n_2 n_1 + ... + n_L n_{L-1} + (n_1 + ... + n_L) n + (n_1 + ... + n_L)
  /// plus quadratic entries when enabled.
  int emitted_width() const;

  Monotonicity coord_mode(int i) const {
    return monotonicity.empty() ? Monotonicity::None : monotonicity[static_cast<size_t>(i)];
  }
  bool monotone() const;
};

/// Offset and shape of one row-major block inside a flat vector.
struct BlockInfo {
  int offset = -1;
  int rows = 0;
  int cols = 0;
  int size() const { return rows * cols; }
};

/// Layout of the flat vector emitted by the parameter network, in the fixed
/// canonical order [W^2..W^L, V^1..V^L, omega^1..omega^L, U | (F, diag)],
/// each block row-major. W^1 is identically zero and never emitted.
struct EmittedLayout {
  std::vector<BlockInfo> W;      // W[k] is W^{k+2}, k = 0..L-2
  std::vector<BlockInfo> V;      // V[k] is V^{k+1}, k = 0..L-1
  std::vector<BlockInfo> omega;  // omega[k] is omega^{k+1}
  BlockInfo U;                   // packed upper triangle, n(n+1)/2 entries
  BlockInfo F;
  BlockInfo diag;
  int total = 0;  // == emitted_width()
};

EmittedLayout emitted_layout(const PcfArchitecture& arch);

/// Layout of the trainable weight vector w of the parameter network, in the
/// canonical order [A^2..A^M, C^1..C^M, b^1..b^M], each block row-major.
/// A^j are the dense layer matrices, C^j the feedforward matrices from theta
/// into layer j, b^j the offsets. A^1 is dropped (the first layer already
/// sees theta through C^1).
struct PsiLayout {
  std::vector<int> widths;  // h_0 = p, h_1..h_{M-1} hidden, h_M = m
  std::vector<BlockInfo> A;  // A[k] is A^{k+2}
  std::vector<BlockInfo> C;  // C[k] is C^{k+1}
  std::vector<BlockInfo> b;
  int total = 0;  // trainable weight count

  int depth() const { return static_cast<int>(widths.size()) - 1; }  // M
};

PsiLayout psi_layout(const PcfArchitecture& arch);

/// Trainable weight count of the architecture (length of w).
int weight_count(const PcfArchitecture& arch);

/// Draws initial weights: dense/feedforward matrices uniform on (-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)); offsets zero except the final-layer
/// offsets feeding nonnegativity-clamped heads, which start at +0.1 so those
/// heads are not dead under the relu clamp.
Vector init_weights(const PcfArchitecture& arch, std::uint64_t seed);

/// Seed for start index k of a multi-start run (splitmix64 of the base seed).
std::uint64_t start_seed(std::uint64_t base_seed, int start_index);

const char* to_string(Activation a);
const char* to_string(Monotonicity m);
const char* to_string(QuadraticSpec::Kind k);

}  // namespace pcf
