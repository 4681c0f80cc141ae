#include "pcf/loss.hpp"

#include <cmath>

#include "pcf/model.hpp"

namespace pcf {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// log(1 + exp(-t)), stable for large |t|
double log1pexp_neg(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

}  // namespace

void LossSpec::validate() const {
  if (kind == Kind::Huber && !(huber_delta > 0.0))
    throw InvalidInput("huber delta must be > 0");
}

void RegSpec::validate() const {
  if (lambda < 0.0) throw InvalidInput("regularization lambda must be >= 0");
  if (rho_min < 0.0) throw InvalidInput("rho_min must be >= 0");
  if (kind == Kind::ElasticNet && (alpha_l2 < 0.0 || alpha_l1 < 0.0))
    throw InvalidInput("elastic net weights must be >= 0");
  if (rho_min > 0.0 && !argmin_g)
    throw InvalidInput("rho_min > 0 requires an argmin target g(theta)");
}

double RegSpec::value(const Vector& w) const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::L2:
      return w.squaredNorm();
    case Kind::L1:
      return w.lpNorm<1>();
    case Kind::ElasticNet:
      return alpha_l2 * w.squaredNorm() + alpha_l1 * w.lpNorm<1>();
  }
  return 0.0;
}

void RegSpec::add_grad(const Vector& w, double scale, Vector& g) const {
  const double s = scale * lambda;
  switch (kind) {
    case Kind::None:
      return;
    case Kind::L2:
      g.noalias() += (2.0 * s) * w;
      return;
    case Kind::L1:
      g += s * w.unaryExpr(&sgn);
      return;
    case Kind::ElasticNet:
      g.noalias() += (2.0 * s * alpha_l2) * w;
      g += (s * alpha_l1) * w.unaryExpr(&sgn);
      return;
  }
}

double loss_point(const LossSpec& spec, double pred, double truth) {
  switch (spec.kind) {
    case LossSpec::Kind::Quadratic: {
      const double r = pred - truth;
      return r * r;
    }
    case LossSpec::Kind::L1:
      return std::abs(pred - truth);
    case LossSpec::Kind::Huber: {
      const double r = std::abs(pred - truth);
      const double del = spec.huber_delta;
      return r <= del ? 0.5 * r * r : del * (r - 0.5 * del);
    }
    case LossSpec::Kind::Logistic:
      return log1pexp_neg(truth * pred);
  }
  return 0.0;
}

double loss_point_deriv(const LossSpec& spec, double pred, double truth) {
  switch (spec.kind) {
    case LossSpec::Kind::Quadratic:
      return 2.0 * (pred - truth);
    case LossSpec::Kind::L1:
      return sgn(pred - truth);
    case LossSpec::Kind::Huber: {
      const double r = pred - truth;
      const double del = spec.huber_delta;
      return std::abs(r) <= del ? r : del * sgn(r);
    }
    case LossSpec::Kind::Logistic:
      // d/df log(1 + exp(-y f)) = -y * sigmoid(-y f)
      return -truth / (1.0 + std::exp(truth * pred));
  }
  return 0.0;
}

void require_labels(const Matrix& y_true) {
  for (Eigen::Index r = 0; r < y_true.rows(); ++r)
    for (Eigen::Index c = 0; c < y_true.cols(); ++c)
      if (y_true(r, c) != 1.0 && y_true(r, c) != -1.0)
        throw InvalidInput("classification labels must be -1 or +1, found " +
                           std::to_string(y_true(r, c)) + " at row " + std::to_string(r));
}

double loss_value(const LossSpec& spec, const Matrix& y_pred, const Matrix& y_true) {
  if (y_pred.rows() != y_true.rows() || y_pred.cols() != y_true.cols())
    throw InvalidInput("loss: prediction and target shapes differ");
  if (y_pred.size() == 0) throw InvalidInput("loss: empty batch");
  if (spec.kind == LossSpec::Kind::Logistic) require_labels(y_true);
  double total = 0.0;
  for (Eigen::Index r = 0; r < y_pred.rows(); ++r)
    for (Eigen::Index c = 0; c < y_pred.cols(); ++c)
      total += loss_point(spec, y_pred(r, c), y_true(r, c));
  return total / static_cast<double>(y_pred.size());
}

void loss_grad(const LossSpec& spec, const Matrix& y_pred, const Matrix& y_true, Matrix& grad) {
  grad.resize(y_pred.rows(), y_pred.cols());
  const double inv = 1.0 / static_cast<double>(y_pred.size());
  for (Eigen::Index r = 0; r < y_pred.rows(); ++r)
    for (Eigen::Index c = 0; c < y_pred.cols(); ++c)
      grad(r, c) = inv * loss_point_deriv(spec, y_pred(r, c), y_true(r, c));
}

double error_rate(const Matrix& y_pred, const Matrix& y_true) {
  require_labels(y_true);
  if (y_pred.rows() != y_true.rows() || y_pred.cols() != y_true.cols())
    throw InvalidInput("error_rate: prediction and target shapes differ");
  Eigen::Index wrong = 0;
  for (Eigen::Index r = 0; r < y_pred.rows(); ++r)
    for (Eigen::Index c = 0; c < y_pred.cols(); ++c)
      if (y_true(r, c) * y_pred(r, c) < 0.0) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(y_pred.size());
}

double error_rate(const PcfModel& model, const Dataset& data) {
  return error_rate(evaluate_batch(model, data.X, data.Theta), data.Y);
}

}  // namespace pcf
