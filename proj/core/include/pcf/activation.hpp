#pragma once

#include <algorithm>
#include <cmath>

#include "pcf/architecture.hpp"

namespace pcf {

// softplus evaluated as log1p(exp(-|a|)) + max(a, 0); relu as max(a, 0)
inline double softplus(double a) { return std::log1p(std::exp(-std::abs(a))) + std::max(a, 0.0); }

inline double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

inline double relu(double a) { return std::max(a, 0.0); }

// subgradient at the kink is 0
inline double relu_deriv(double a) { return a > 0.0 ? 1.0 : 0.0; }

inline double activate(Activation act, double a) {
  return act == Activation::Relu ? relu(a) : softplus(a);
}

inline double activate_deriv(Activation act, double a) {
  return act == Activation::Relu ? relu_deriv(a) : sigmoid(a);
}

// second derivative; only meaningful for softplus
inline double activate_second(Activation act, double a) {
  if (act == Activation::Relu) return 0.0;
  const double s = sigmoid(a);
  return s * (1.0 - s);
}

}  // namespace pcf
