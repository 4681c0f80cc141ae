#pragma once

#include <optional>
#include <vector>

#include "pcf/architecture.hpp"
#include "pcf/types.hpp"

namespace pcf {

/// Per-theta weight blocks of the input-convex network. Immutable once built;
/// every W block is elementwise nonnegative by construction (relu head on the
/// emitting outputs), V blocks are sign-clamped per coordinate in monotone
/// modes, and W^1 is identically zero and never materialized.
struct MaterializedLayers {
  std::vector<Matrix> W;      // W[k] is W^{k+2}
  std::vector<Matrix> V;      // V[k] is V^{k+1}
  std::vector<Vector> omega;  // omega[k] is omega^{k+1}
  std::optional<Matrix> U;    // n x n upper triangular (quadratic = full)
  std::optional<Matrix> F;    // rank x n (quadratic = low_rank)
  std::optional<Vector> diag; // length n, entries squared before use
};

/// Affine standardization maps fitted from training data. Stored so that
/// evaluation standardizes inputs and de-standardizes outputs transparently.
struct ScalingParams {
  Vector x_shift, x_scale;
  Vector theta_shift, theta_scale;
  Vector y_shift, y_scale;
};

/// A fitted (or randomly initialized) parametrized convex function:
/// convex in x for every theta.
struct PcfModel {
  PcfArchitecture arch;
  Vector weights;
  std::optional<ScalingParams> scaling;
};

/// Applies the flat emitted vector's head activations and reshapes it into
/// weight blocks. `emitted` is the raw (pre-head) parameter-network output.
MaterializedLayers blocks_from_emitted(const PcfArchitecture& arch, const Vector& emitted);

/// Runs the parameter network on theta and materializes the per-theta weight
/// blocks of the input-convex network.
MaterializedLayers materialize_layers(const PcfArchitecture& arch, const Vector& w,
                                      const Vector& theta);

/// Raw (pre-head) parameter-network output for theta.
Vector emitted_raw(const PcfArchitecture& arch, const Vector& w, const Vector& theta);

/// Forward pass of the input-convex network:
///   z^0 = x,  z^l = phi(W^l z^{l-1} + V^l x + omega^l),  l = 1..L-1,
///   y = W^L z^{L-1} + V^L x + omega^L  (+ x'Qx broadcast when enabled).
Vector icnn_forward(const MaterializedLayers& layers, const PcfArchitecture& arch,
                    const Vector& x);

/// x'Qx for the materialized quadratic term (0 when disabled).
double quad_value(const MaterializedLayers& layers, const PcfArchitecture& arch, const Vector& x);

/// Jacobian d icnn_forward / dx (d x n) from materialized blocks. Exact for
/// softplus; a subgradient row-wise for relu.
Matrix icnn_grad_x(const MaterializedLayers& layers, const PcfArchitecture& arch, const Vector& x);

/// Full model evaluation: standardize x/theta if scaling is stored, run the
/// network, de-standardize the output. Convex in x for every theta.
Vector evaluate(const PcfModel& model, const Vector& x, const Vector& theta);

/// Row i is a (sub)gradient of f_i(., theta) at x; exact gradient for
/// softplus. Shape d x n.
Matrix grad_x(const PcfModel& model, const Vector& x, const Vector& theta);

/// Row-wise batched evaluation: X is N x n, Theta is N x p; returns N x d.
Matrix evaluate_batch(const PcfModel& model, const Matrix& X, const Matrix& Theta);

ScalingParams fit_scaling(const Matrix& X, const Matrix& Theta, const Matrix& Y);

}  // namespace pcf
