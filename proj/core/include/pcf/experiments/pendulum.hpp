#pragma once

#include <cstdint>
#include <vector>

#include "pcf/model.hpp"

namespace pcf::experiments {

/// Torque-controlled pendulum m l^2 dd + b d + m g l sin(delta) = u,
/// discretized by forward Euler with sampling time dt. State z = (delta,
/// delta_dot); the discrete dynamics are input-affine:
/// z+ = drift(z) + input_gain() * u.
struct PendulumSystem {
  double mass = 1.0;  // the parameter theta, in [0.5, 2]
  double length = 1.0;
  double damping = 0.05;
  double gravity = 9.81;
  double dt = 0.02;

  Eigen::Vector2d drift(const Eigen::Vector2d& z) const;
  Eigen::Vector2d input_gain() const;  // d z+ / d u
  Eigen::Matrix2d drift_jacobian(const Eigen::Vector2d& z) const;
  Eigen::Vector2d step(const Eigen::Vector2d& z, double u) const;
};

/// Nonnegative stage cost (delta - pi)^2 + 0.01 delta_dot^2 + 0.001 u^2.
double stage_cost(const Eigen::Vector2d& z, double u);

struct OcpResult {
  std::vector<Eigen::Vector2d> states;  // z_0 .. z_T
  Vector inputs;                        // u_0 .. u_{T-1}
  Vector tail_costs;                    // tail(t) = sum_{s >= t} H(z_s, u_s); tail(T) = 0
  double cost = 0.0;                    // tail(0)
  double grad_norm = 0.0;
  bool converged = false;               // gradient norm <= tolerance
  bool failed = false;                  // diverged even after the zero-input retry
};

struct OcpOptions {
  int max_iters = 400;
  int max_fevals = 1000;
  double grad_tol = 1e-4;
  double init_scale = 1.0;  // magnitude of the random initial input sequence
  std::uint64_t seed = 0;
};

/// Open-loop optimal control over `horizon` steps: minimizes the summed stage
/// cost over the input sequence with L-BFGS on the unrolled dynamics
/// (gradients by the adjoint recursion). Diverged solves retry once from the
/// zero-input sequence; a persistently failing sample is flagged.
OcpResult solve_ocp(const PendulumSystem& sys, const Eigen::Vector2d& z0, int horizon,
                    const OcpOptions& opts = {});

struct AdpOptions {
  double u_max = 50.0;
  double grad_tol = 1e-8;
  int max_iters = 200;
};

/// One step of the approximate-dynamic-programming controller:
///   u = argmin_u H(z, u) + f(drift(z) + input_gain() u, theta),
/// a 1-D convex problem solved by guarded Newton/bisection on dJ/du over
/// [-u_max, u_max] (the bracket is widened once before giving up).
double adp_step(const PcfModel& value_model, const PendulumSystem& sys, const Eigen::Vector2d& z,
                const AdpOptions& opts = {});

struct ClosedLoopResult {
  std::vector<Eigen::Vector2d> states;
  Vector inputs;
  Vector stage_costs;
  double cost = 0.0;
  int first_reach = -1;  // first step with |delta - pi| <= 0.3 and |delta_dot| <= 1
};

ClosedLoopResult simulate_adp(const PcfModel& value_model, const PendulumSystem& sys,
                              const Eigen::Vector2d& z0, int steps, const AdpOptions& opts = {});

}  // namespace pcf::experiments
