#include "pcf/experiments/pendulum.hpp"

#include <cmath>
#include <random>

#include "pcf/optim.hpp"

namespace pcf::experiments {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Eigen::Vector2d PendulumSystem::drift(const Eigen::Vector2d& z) const {
  const double ml2 = mass * length * length;
  Eigen::Vector2d out;
  out[0] = z[0] + dt * z[1];
  out[1] = z[1] + dt * (-damping * z[1] - mass * gravity * length * std::sin(z[0])) / ml2;
  return out;
}

Eigen::Vector2d PendulumSystem::input_gain() const {
  return {0.0, dt / (mass * length * length)};
}

Eigen::Matrix2d PendulumSystem::drift_jacobian(const Eigen::Vector2d& z) const {
  const double ml2 = mass * length * length;
  Eigen::Matrix2d A;
  A(0, 0) = 1.0;
  A(0, 1) = dt;
  A(1, 0) = -dt * gravity * std::cos(z[0]) / length;
  A(1, 1) = 1.0 - dt * damping / ml2;
  return A;
}

Eigen::Vector2d PendulumSystem::step(const Eigen::Vector2d& z, double u) const {
  return drift(z) + input_gain() * u;
}

double stage_cost(const Eigen::Vector2d& z, double u) {
  const double e = z[0] - kPi;
  return e * e + 0.01 * z[1] * z[1] + 0.001 * u * u;
}

namespace {

// J(u) = sum_t H(z_t, u_t) on the unrolled dynamics; gradient by the adjoint
// recursion lambda_t = Hz(z_t, u_t) + A_t' lambda_{t+1}, lambda_T = 0.
double ocp_objective(const PendulumSystem& sys, const Eigen::Vector2d& z0, const Vector& u,
                     Vector& grad, std::vector<Eigen::Vector2d>& states) {
  const int T = static_cast<int>(u.size());
  states.resize(static_cast<size_t>(T + 1));
  states[0] = z0;
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    cost += stage_cost(states[static_cast<size_t>(t)], u[t]);
    states[static_cast<size_t>(t + 1)] = sys.step(states[static_cast<size_t>(t)], u[t]);
  }
  const Eigen::Vector2d G = sys.input_gain();
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  for (int t = T - 1; t >= 0; --t) {
    grad[t] = 0.002 * u[t] + G.dot(lambda);
    const Eigen::Vector2d& z = states[static_cast<size_t>(t)];
    Eigen::Vector2d hz;
    hz[0] = 2.0 * (z[0] - kPi);
    hz[1] = 0.02 * z[1];
    lambda = hz + sys.drift_jacobian(z).transpose() * lambda;
  }
  return cost;
}

OcpResult run_ocp_from(const PendulumSystem& sys, const Eigen::Vector2d& z0, Vector u0,
                       const OcpOptions& opts) {
  std::vector<Eigen::Vector2d> states;
  ObjectiveFn fn = [&](const Vector& u, Vector& grad) {
    return ocp_objective(sys, z0, u, grad, states);
  };
  LbfgsOptions lopt;
  lopt.max_iters = opts.max_iters;
  lopt.max_fevals = opts.max_fevals;
  lopt.grad_tol = opts.grad_tol;
  LbfgsResult lr = lbfgs_minimize(fn, std::move(u0), lopt);

  OcpResult out;
  out.inputs = std::move(lr.w);
  out.converged = lr.converged;
  out.grad_norm = lr.grad.size() ? lr.grad.lpNorm<Eigen::Infinity>() : 0.0;
  out.failed = !std::isfinite(lr.objective);
  if (out.failed) return out;

  const int T = static_cast<int>(out.inputs.size());
  out.states.resize(static_cast<size_t>(T + 1));
  out.states[0] = z0;
  out.tail_costs = Vector::Zero(T + 1);
  for (int t = 0; t < T; ++t)
    out.states[static_cast<size_t>(t + 1)] = sys.step(out.states[static_cast<size_t>(t)], out.inputs[t]);
  for (int t = T - 1; t >= 0; --t)
    out.tail_costs[t] =
        stage_cost(out.states[static_cast<size_t>(t)], out.inputs[t]) + out.tail_costs[t + 1];
  out.cost = out.tail_costs[0];
  return out;
}

}  // namespace

OcpResult solve_ocp(const PendulumSystem& sys, const Eigen::Vector2d& z0, int horizon,
                    const OcpOptions& opts) {
  if (horizon < 1) throw InvalidInput("solve_ocp: horizon must be >= 1");
  Vector u0(horizon);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-opts.init_scale, opts.init_scale);
  for (int t = 0; t < horizon; ++t) u0[t] = dist(rng);
  OcpResult res = run_ocp_from(sys, z0, std::move(u0), opts);
  if (res.failed) res = run_ocp_from(sys, z0, Vector::Zero(horizon), opts);
  return res;
}

double adp_step(const PcfModel& value_model, const PendulumSystem& sys, const Eigen::Vector2d& z,
                const AdpOptions& opts) {
  const PcfArchitecture& arch = value_model.arch;
  if (arch.n != 2 || arch.p != 1 || arch.d != 1)
    throw InvalidInput("adp_step expects a value model with n = 2, p = 1, d = 1");
  Vector theta(1);
  theta[0] = sys.mass;
  Vector theta_core = theta;
  if (value_model.scaling)
    theta_core = (theta - value_model.scaling->theta_shift)
                     .cwiseQuotient(value_model.scaling->theta_scale);
  const MaterializedLayers layers = materialize_layers(arch, value_model.weights, theta_core);
  const Eigen::Vector2d zdrift = sys.drift(z);
  const Eigen::Vector2d G = sys.input_gain();

  // dJ/du = 0.002 u + grad_z f(z+)' G; monotone nondecreasing since J is
  // convex in u
  auto slope = [&](double u) {
    Vector znext = zdrift + G * u;
    Vector zc = znext;
    if (value_model.scaling)
      zc = (znext - value_model.scaling->x_shift).cwiseQuotient(value_model.scaling->x_scale);
    Matrix Jx = icnn_grad_x(layers, arch, zc);  // 1 x 2, in core units
    double dot = 0.0;
    for (int j = 0; j < 2; ++j) {
      double gj = Jx(0, j);
      if (value_model.scaling)
        gj *= value_model.scaling->y_scale[0] / value_model.scaling->x_scale[j];
      dot += gj * G[j];
    }
    return 0.002 * u + dot;
  };

  double a = -opts.u_max, b = opts.u_max;
  double ga = slope(a), gb = slope(b);
  if (ga > 0.0 || gb < 0.0) {  // widen once
    a *= 2.0;
    b *= 2.0;
    ga = slope(a);
    gb = slope(b);
    if (ga > 0.0 || gb < 0.0)
      throw PcfError("adp_step: minimizer not bracketed by [-2 u_max, 2 u_max]");
  }
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;

  double u = 0.5 * (a + b);
  for (int it = 0; it < opts.max_iters; ++it) {
    // secant guess, guarded by the bracket
    double cand = (gb - ga) != 0.0 ? a - ga * (b - a) / (gb - ga) : u;
    if (!(cand > a && cand < b)) cand = 0.5 * (a + b);
    u = cand;
    const double gu = slope(u);
    if (std::abs(gu) <= opts.grad_tol || (b - a) < 1e-14 * std::max(1.0, std::abs(u))) return u;
    if (gu > 0.0) {
      b = u;
      gb = gu;
    } else {
      a = u;
      ga = gu;
    }
  }
  return u;
}

ClosedLoopResult simulate_adp(const PcfModel& value_model, const PendulumSystem& sys,
                              const Eigen::Vector2d& z0, int steps, const AdpOptions& opts) {
  ClosedLoopResult out;
  out.states.resize(static_cast<size_t>(steps + 1));
  out.inputs = Vector::Zero(steps);
  out.stage_costs = Vector::Zero(steps);
  out.states[0] = z0;
  for (int t = 0; t < steps; ++t) {
    const Eigen::Vector2d& z = out.states[static_cast<size_t>(t)];
    const double u = adp_step(value_model, sys, z, opts);
    out.inputs[t] = u;
    out.stage_costs[t] = stage_cost(z, u);
    out.cost += out.stage_costs[t];
    out.states[static_cast<size_t>(t + 1)] = sys.step(z, u);
    if (out.first_reach < 0 && std::abs(z[0] - kPi) <= 0.3 && std::abs(z[1]) <= 1.0)
      out.first_reach = t;
  }
  const Eigen::Vector2d& zT = out.states[static_cast<size_t>(steps)];
  if (out.first_reach < 0 && std::abs(zT[0] - kPi) <= 0.3 && std::abs(zT[1]) <= 1.0)
    out.first_reach = steps;
  return out;
}

}  // namespace pcf::experiments
