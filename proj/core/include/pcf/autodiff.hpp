#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "pcf/architecture.hpp"
#include "pcf/dataset.hpp"
#include "pcf/loss.hpp"
#include "pcf/types.hpp"

namespace pcf {

/// Flat gradient with the same length and layout as the weight vector.
using GradientBuffer = Vector;

/// Per-sample targets for the gradient-matching regularizer, already in the
/// same units as the training inputs.
struct ArgminData {
  Matrix g;  // N x n: target minimizer g(theta_k) per sample
  Matrix q;  // N x n tilt q(theta_k), or 0 x 0 for the plain variant
};

/// Mean data loss over the batch plus lambda * r(w), with its exact gradient
/// with respect to w (subgradient at relu kinks, 0-at-kink convention).
std::pair<double, GradientBuffer> loss_and_grad(const PcfArchitecture& arch, const Vector& w,
                                                const Dataset& batch, const LossSpec& loss,
                                                const RegSpec& reg, int block_budget = 1024);

/// (rho_min / N) * sum_k || grad_x f(g(theta_k), theta_k) - q(theta_k) ||_F^2
/// and its gradient with respect to w. Requires the softplus activation when
/// rho_min > 0 (the second derivative of relu is unusable).
std::pair<double, GradientBuffer> argmin_reg_and_grad(const PcfArchitecture& arch, const Vector& w,
                                                      const Matrix& thetas, const Matrix& g_targets,
                                                      const Matrix& tilt_targets, double rho_min,
                                                      int block_budget = 1024);

/// Batched forward pass on raw (unstandardized-by-caller) inputs; returns
/// N x d predictions.
Matrix predict_core(const PcfArchitecture& arch, const Vector& w, const Matrix& X,
                    const Matrix& Theta, int block_budget = 1024);

/// The full training objective
///   (1/N) sum_k loss + lambda r(w) + gradient-matching penalty,
/// wrapped with a reusable workspace so optimizers can call it repeatedly
/// without reallocation. Data is held by reference and must outlive the
/// object.
class ObjectiveFunction {
 public:
  ObjectiveFunction(const PcfArchitecture& arch, const Dataset& data, LossSpec loss, RegSpec reg,
                    std::optional<ArgminData> argmin, int block_budget = 1024);
  ~ObjectiveFunction();
  ObjectiveFunction(ObjectiveFunction&&) noexcept;

  /// Objective value and gradient at w.
  double operator()(const Vector& w, Vector& grad);

  /// Objective value only.
  double value(const Vector& w);

  long evals() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pcf
