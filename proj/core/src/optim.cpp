#include "pcf/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace pcf {

namespace {

bool finite(double v) { return std::isfinite(v); }

// Cubic interpolation minimizer for the interval between a and b given values
// and derivatives at both ends; falls back to bisection when ill-conditioned.
double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (disc < 0.0 || !finite(disc)) return 0.5 * (a + b);
  const double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0 || !finite(denom)) return 0.5 * (a + b);
  double t = b - (b - a) * (gb + d2 - d1) / denom;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  if (!finite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

struct LineSearchResult {
  bool accepted = false;  // a sufficient-decrease point was taken
  bool wolfe = false;     // the curvature condition also holds there
  double t = 0.0;
  double f = 0.0;
  Vector g;
  int fevals = 0;
};

// Strong-Wolfe search on phi(t) = f(w + t dir), dg0 = phi'(0) < 0.
// Bracketing + zoom; non-finite trial values are treated as "too far".
LineSearchResult wolfe_line_search(const ObjectiveFn& fn, const Vector& w, const Vector& dir,
                                   double f0, double dg0, double c1, double c2, int max_trials,
                                   int fevals_left) {
  LineSearchResult out;
  const double curv_rhs = c2 * std::abs(dg0);
  Vector w_trial(w.size()), g_trial(w.size());

  double t_prev = 0.0, f_prev = f0, g_prev = dg0;
  double t = 1.0;
  double lo = 0.0, f_lo = f0, g_lo = dg0, hi = 0.0, f_hi = 0.0, g_hi = 0.0;
  bool zooming = false;

  // best sufficient-decrease point seen, fallback when curvature never holds
  double t_best = -1.0, f_best = f0;
  Vector g_best;

  auto take = [&](double tt, double ff, const Vector& gg, bool wolfe) {
    out.accepted = true;
    out.wolfe = wolfe;
    out.t = tt;
    out.f = ff;
    out.g = gg;
  };

  int trials = 0;
  while (trials < max_trials && (fevals_left <= 0 || trials < fevals_left)) {
    ++trials;
    w_trial = w + t * dir;
    double ft;
    try {
      ft = fn(w_trial, g_trial);
    } catch (const PcfError&) {
      ft = std::numeric_limits<double>::infinity();
    }
    const double gt = finite(ft) ? g_trial.dot(dir) : 0.0;
    const bool sufficient = finite(ft) && ft <= f0 + c1 * t * dg0;
    if (sufficient && ft < f_best) {
      t_best = t;
      f_best = ft;
      g_best = g_trial;
    }

    if (!zooming) {
      if (!sufficient || (t_prev > 0.0 && ft >= f_prev)) {
        zooming = true;
        lo = t_prev; f_lo = f_prev; g_lo = g_prev;
        hi = t; f_hi = ft; g_hi = gt;
      } else if (std::abs(gt) <= curv_rhs) {
        out.fevals = trials;
        take(t, ft, g_trial, true);
        return out;
      } else if (gt >= 0.0) {
        zooming = true;
        lo = t; f_lo = ft; g_lo = gt;
        hi = t_prev; f_hi = f_prev; g_hi = g_prev;
      } else {
        t_prev = t; f_prev = ft; g_prev = gt;
        t *= 2.0;
        continue;
      }
    } else {
      if (!sufficient || ft >= f_lo) {
        hi = t; f_hi = ft; g_hi = gt;
      } else {
        if (std::abs(gt) <= curv_rhs) {
          out.fevals = trials;
          take(t, ft, g_trial, true);
          return out;
        }
        if (gt * (hi - lo) >= 0.0) {
          hi = lo; f_hi = f_lo; g_hi = g_lo;
        }
        lo = t; f_lo = ft; g_lo = gt;
      }
    }
    if (zooming && std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    t = finite(f_hi) ? cubic_step(lo, f_lo, g_lo, hi, f_hi, g_hi) : 0.5 * (lo + hi);
    if (!(t > 0.0) || !finite(t)) break;
  }

  out.fevals = trials;
  if (t_best > 0.0) take(t_best, f_best, g_best, false);
  return out;
}

}  // namespace

AdamResult adam_minimize(const ObjectiveFn& fn, Vector w0, const AdamOptions& opts) {
  Vector w = std::move(w0);
  Vector g(w.size());
  Vector m = Vector::Zero(w.size());
  Vector v = Vector::Zero(w.size());
  double obj = fn(w, g);
  double b1t = 1.0, b2t = 1.0;
  int it = 0;
  for (; it < opts.iters; ++it) {
    if (!finite(obj)) break;  // caller decides what divergence means
    b1t *= opts.beta1;
    b2t *= opts.beta2;
    m = opts.beta1 * m + (1.0 - opts.beta1) * g;
    v = opts.beta2 * v + (1.0 - opts.beta2) * g.cwiseProduct(g);
    const double corr = opts.lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    w.array() -= corr * m.array() / (v.array().sqrt() + opts.eps);
    obj = fn(w, g);
  }
  return {std::move(w), obj, it};
}

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, Vector w0, const LbfgsOptions& opts) {
  LbfgsResult res;
  res.w = std::move(w0);
  res.grad.resize(res.w.size());
  res.objective = fn(res.w, res.grad);
  res.fevals = 1;
  if (!finite(res.objective)) {
    res.stop_reason = "non-finite objective at the initial point";
    return res;
  }

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector q(res.w.size()), dir(res.w.size());
  std::vector<double> alpha_buf;

  for (res.iters = 0; res.iters < opts.max_iters; ++res.iters) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      res.stop_reason = "gradient tolerance reached";
      return res;
    }
    if (opts.max_fevals > 0 && res.fevals >= opts.max_fevals) {
      res.stop_reason = "function evaluation budget exhausted";
      return res;
    }

    // two-loop recursion
    q = res.grad;
    const int hist = static_cast<int>(s_hist.size());
    alpha_buf.assign(static_cast<size_t>(hist), 0.0);
    for (int i = hist - 1; i >= 0; --i) {
      alpha_buf[static_cast<size_t>(i)] =
          rho_hist[static_cast<size_t>(i)] * s_hist[static_cast<size_t>(i)].dot(q);
      q.noalias() -= alpha_buf[static_cast<size_t>(i)] * y_hist[static_cast<size_t>(i)];
    }
    if (hist > 0) {
      const Vector& s = s_hist.back();
      const Vector& y = y_hist.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (int i = 0; i < hist; ++i) {
      const double beta = rho_hist[static_cast<size_t>(i)] * y_hist[static_cast<size_t>(i)].dot(q);
      q.noalias() += (alpha_buf[static_cast<size_t>(i)] - beta) * s_hist[static_cast<size_t>(i)];
    }
    dir = -q;

    double dg0 = dir.dot(res.grad);
    if (!(dg0 < 0.0) || !finite(dg0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -res.grad;
      dg0 = dir.dot(res.grad);
      if (!(dg0 < 0.0)) {
        res.stop_reason = "no descent direction";
        return res;
      }
    }

    const int fevals_left = opts.max_fevals > 0 ? opts.max_fevals - res.fevals : 0;
    const Vector g_old = res.grad;
    LineSearchResult ls = wolfe_line_search(fn, res.w, dir, res.objective, dg0, opts.c1, opts.c2,
                                            opts.max_line_search, fevals_left);
    res.fevals += ls.fevals;
    if (!ls.accepted) {
      res.stop_reason = "line search found no acceptable step";
      return res;
    }

    Vector s = ls.t * dir;
    Vector y = ls.g - g_old;
    res.w += s;
    res.objective = ls.f;
    res.grad = ls.g;

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  res.stop_reason = "iteration limit reached";
  return res;
}

}  // namespace pcf
