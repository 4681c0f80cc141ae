#pragma once

#include <functional>
#include <string>

#include "pcf/types.hpp"

namespace pcf {

/// Objective callback: returns the value at w and writes the gradient.
using ObjectiveFn = std::function<double(const Vector& w, Vector& grad)>;

struct AdamOptions {
  int iters = 200;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamResult {
  Vector w;
  double objective = 0.0;  // value at the returned point
  int iters = 0;
};

AdamResult adam_minimize(const ObjectiveFn& fn, Vector w0, const AdamOptions& opts);

struct LbfgsOptions {
  int max_iters = 2000;
  int memory = 10;
  double c1 = 1e-4;  // sufficient-decrease constant
  double c2 = 0.9;   // curvature constant
  int max_line_search = 20;
  double grad_tol = 1e-8;  // stop when ||g||_inf <= grad_tol
  int max_fevals = 0;      // 0 = unlimited
};

struct LbfgsResult {
  Vector w;
  double objective = 0.0;
  Vector grad;
  int iters = 0;
  int fevals = 0;
  bool converged = false;  // gradient tolerance reached
  std::string stop_reason;
};

/// Limited-memory BFGS with a strong-Wolfe line search (two-loop recursion,
/// cubic/bisection zoom). Accepted steps always satisfy sufficient decrease;
/// the curvature pair is skipped when s'y is not safely positive.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, Vector w0, const LbfgsOptions& opts);

}  // namespace pcf
