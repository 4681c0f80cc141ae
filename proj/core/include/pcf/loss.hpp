#pragma once

#include <functional>

#include "pcf/dataset.hpp"
#include "pcf/types.hpp"

namespace pcf {

struct PcfModel;

/// Pointwise training loss, reduced by the mean over samples and outputs.
struct LossSpec {
  enum class Kind { Quadratic, L1, Huber, Logistic };
  Kind kind = Kind::Quadratic;
  double huber_delta = 1.0;

  void validate() const;
};

/// Weight regularizer lambda * r(w) plus the optional gradient-matching term
/// (rho_min / N) * sum_k || grad_x f(g(theta_k), theta_k) - q(theta_k) ||^2,
/// which encourages f(., theta) (minus the tilt q(theta)' x) to be minimized
/// at g(theta).
struct RegSpec {
  enum class Kind { None, L2, L1, ElasticNet };
  Kind kind = Kind::None;
  double lambda = 0.0;
  double alpha_l2 = 1.0;  // elastic net: lambda * (alpha_l2 ||w||_2^2 + alpha_l1 ||w||_1)
  double alpha_l1 = 1.0;

  double rho_min = 0.0;
  std::function<Vector(const Vector&)> argmin_g;  // theta -> target minimizer (length n)
  std::function<Vector(const Vector&)> argmin_q;  // theta -> tilt (length n); empty = 0

  void validate() const;
  double value(const Vector& w) const;          // r(w), without lambda
  void add_grad(const Vector& w, double scale, Vector& g) const;  // g += scale * lambda * r'(w)
};

/// Mean pointwise loss over all (sample, output) entries.
double loss_value(const LossSpec& spec, const Matrix& y_pred, const Matrix& y_true);

/// d loss / d y_pred entry-wise, including the 1/(N d) mean normalization.
void loss_grad(const LossSpec& spec, const Matrix& y_pred, const Matrix& y_true, Matrix& grad);

/// Pointwise loss and derivative for one (prediction, target) entry, without
/// any normalization.
double loss_point(const LossSpec& spec, double pred, double truth);
double loss_point_deriv(const LossSpec& spec, double pred, double truth);

/// Fraction of entries classified wrong: y * f < 0 (the boundary f = 0 counts
/// as correct). Labels must be exactly -1 or +1.
double error_rate(const Matrix& y_pred, const Matrix& y_true);
double error_rate(const PcfModel& model, const Dataset& data);

void require_labels(const Matrix& y_true);

}  // namespace pcf
