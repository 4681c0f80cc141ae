#include "pcf/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pcf/cross_validation.hpp"
#include "pcf/optim.hpp"
#include "pcf/thread_pool.hpp"

namespace pcf {

namespace {

Matrix standardize_cols(const Matrix& M, const Vector& shift, const Vector& scale) {
  Matrix out = M.rowwise() - shift.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

std::optional<ArgminData> build_argmin_targets(const PcfArchitecture& arch, const Dataset& data,
                                               const RegSpec& reg,
                                               const std::optional<ScalingParams>& scaling) {
  if (reg.rho_min <= 0.0) return std::nullopt;
  if (!reg.argmin_g) throw InvalidInput("rho_min > 0 requires an argmin target g(theta)");
  if (scaling && reg.argmin_q && arch.d != 1)
    throw InvalidInput("tilt targets with scaling enabled require d == 1");
  const Eigen::Index N = data.size();
  ArgminData ad;
  ad.g.resize(N, arch.n);
  if (reg.argmin_q) ad.q.resize(N, arch.n);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vector theta = data.Theta.row(k).transpose();
    Vector g = reg.argmin_g(theta);
    if (g.size() != arch.n)
      throw InvalidInput("argmin target g(theta) must have length n = " + std::to_string(arch.n));
    if (scaling) g = (g - scaling->x_shift).cwiseQuotient(scaling->x_scale);
    ad.g.row(k) = g.transpose();
    if (reg.argmin_q) {
      Vector q = reg.argmin_q(theta);
      if (q.size() != arch.n)
        throw InvalidInput("tilt q(theta) must have length n = " + std::to_string(arch.n));
      if (scaling) q = q.cwiseProduct(scaling->x_scale) / scaling->y_scale[0];
      ad.q.row(k) = q.transpose();
    }
  }
  return ad;
}

// Minibatch Adam pass: deterministic shuffled order, contiguous chunks taken
// cyclically. Used only when full_batch is off.
Vector adam_minibatch(const PcfArchitecture& arch, const Dataset& core, const LossSpec& loss,
                      const RegSpec& reg, const std::optional<ArgminData>& argmin,
                      const TrainConfig& cfg, std::uint64_t seed, Vector w) {
  const Eigen::Index N = core.size();
  const Eigen::Index bs = std::min<Eigen::Index>(std::max(1, cfg.adam_batch), N);
  std::vector<Eigen::Index> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Vector m = Vector::Zero(w.size()), v = Vector::Zero(w.size());
  double b1t = 1.0, b2t = 1.0;
  Eigen::Index cursor = 0;
  for (int it = 0; it < cfg.adam_iters; ++it) {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<size_t>(bs));
    for (Eigen::Index j = 0; j < bs; ++j) {
      idx.push_back(order[static_cast<size_t>(cursor)]);
      cursor = (cursor + 1) % N;
    }
    const Dataset batch = core.rows(idx);
    auto [val, grad] = loss_and_grad(arch, w, batch, loss, reg, cfg.block_budget);
    if (argmin) {
      Matrix gsub(bs, arch.n), qsub;
      Matrix thsub(bs, arch.p);
      if (argmin->q.size() > 0) qsub.resize(bs, arch.n);
      for (Eigen::Index j = 0; j < bs; ++j) {
        gsub.row(j) = argmin->g.row(idx[static_cast<size_t>(j)]);
        thsub.row(j) = core.Theta.row(idx[static_cast<size_t>(j)]);
        if (qsub.size() > 0) qsub.row(j) = argmin->q.row(idx[static_cast<size_t>(j)]);
      }
      auto [pv, pg] = argmin_reg_and_grad(arch, w, thsub, gsub, qsub, reg.rho_min, cfg.block_budget);
      val += pv;
      grad += pg;
    }
    if (!std::isfinite(val)) break;
    b1t *= 0.9;
    b2t *= 0.999;
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad.cwiseProduct(grad);
    const double corr = cfg.adam_lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    w.array() -= corr * m.array() / (v.array().sqrt() + 1e-8);
  }
  return w;
}

}  // namespace

std::pair<PcfModel, FitReport> fit(const PcfArchitecture& arch_in, const Dataset& data,
                                   const LossSpec& loss, const RegSpec& reg,
                                   const TrainConfig& cfg) {
  const PcfArchitecture arch = arch_in.finalized();
  loss.validate();
  reg.validate();
  if (data.size() == 0) throw InvalidInput("fit: empty dataset");
  if (data.n() != arch.n)
    throw InvalidInput("fit: data has " + std::to_string(data.n()) +
                       " x-columns, architecture expects n = " + std::to_string(arch.n));
  if (data.p() != arch.p)
    throw InvalidInput("fit: data has " + std::to_string(data.p()) +
                       " theta-columns, architecture expects p = " + std::to_string(arch.p));
  if (data.d() != arch.d)
    throw InvalidInput("fit: data has " + std::to_string(data.d()) +
                       " y-columns, architecture expects d = " + std::to_string(arch.d));
  data.validate_finite();
  if (loss.kind == LossSpec::Kind::Logistic) require_labels(data.Y);

  std::optional<ScalingParams> scaling;
  Dataset core = data;
  if (arch.scaling) {
    scaling = fit_scaling(data.X, data.Theta, data.Y);
    core.X = standardize_cols(data.X, scaling->x_shift, scaling->x_scale);
    core.Theta = standardize_cols(data.Theta, scaling->theta_shift, scaling->theta_scale);
    core.Y = standardize_cols(data.Y, scaling->y_shift, scaling->y_scale);
  }
  // targets are supplied in original units; transform alongside the data
  std::optional<ArgminData> argmin = build_argmin_targets(arch, data, reg, scaling);

  const int n_starts = cfg.effective_starts();
  std::vector<StartOutcome> outcomes(static_cast<size_t>(n_starts));
  std::vector<Vector> weights(static_cast<size_t>(n_starts));

  parallel_for(n_starts, cfg.n_workers, [&](int s) {
    StartOutcome& out = outcomes[static_cast<size_t>(s)];
    out.start = s;
    try {
      ObjectiveFunction obj(arch, core, loss, reg, argmin, cfg.block_budget);
      ObjectiveFn fn = [&obj](const Vector& w, Vector& g) { return obj(w, g); };
      Vector w = init_weights(arch, start_seed(cfg.seed, s));
      if (cfg.adam_iters > 0) {
        if (cfg.full_batch) {
          AdamOptions aopt;
          aopt.iters = cfg.adam_iters;
          aopt.lr = cfg.adam_lr;
          AdamResult ar = adam_minimize(fn, std::move(w), aopt);
          w = std::move(ar.w);
          out.adam_iters = ar.iters;
        } else {
          w = adam_minibatch(arch, core, loss, reg, argmin, cfg,
                             start_seed(cfg.seed ^ 0x5bf03635u, s), std::move(w));
          out.adam_iters = cfg.adam_iters;
        }
      }
      if (!w.allFinite()) {
        out.failed = true;
        out.failure = "diverged during Adam";
        return;
      }
      if (cfg.lbfgs_iters > 0) {
        LbfgsOptions lopt;
        lopt.max_iters = cfg.lbfgs_iters;
        lopt.memory = cfg.lbfgs_memory;
        lopt.max_fevals = cfg.lbfgs_max_fevals;
        LbfgsResult lr = lbfgs_minimize(fn, std::move(w), lopt);
        w = std::move(lr.w);
        out.lbfgs_iters = lr.iters;
        out.lbfgs_converged = lr.converged;
      }
      const double final_obj = obj.value(w);
      if (!std::isfinite(final_obj) || !w.allFinite()) {
        out.failed = true;
        out.failure = "non-finite objective after refinement";
        return;
      }
      out.objective = final_obj;
      weights[static_cast<size_t>(s)] = std::move(w);
    } catch (const PcfError& e) {
      out.failed = true;
      out.failure = e.what();
    }
  });

  int best = -1;
  for (int s = 0; s < n_starts; ++s) {
    if (outcomes[static_cast<size_t>(s)].failed) continue;
    if (best < 0 || outcomes[static_cast<size_t>(s)].objective < outcomes[static_cast<size_t>(best)].objective)
      best = s;
  }
  if (best < 0) {
    std::string msg = "fit failed: all " + std::to_string(n_starts) + " starts diverged";
    if (!outcomes.empty() && !outcomes[0].failure.empty()) msg += " (first: " + outcomes[0].failure + ")";
    throw FitFailed(msg);
  }

  PcfModel model{arch, weights[static_cast<size_t>(best)], scaling};
  FitReport report;
  report.chosen_lambda = reg.lambda;
  report.starts = std::move(outcomes);
  report.best_start = best;
  report.train_objective = report.starts[static_cast<size_t>(best)].objective;
  Matrix pred_core = predict_core(arch, model.weights, core.X, core.Theta, cfg.block_budget);
  Matrix pred = pred_core;
  if (scaling) {
    pred.array().rowwise() *= scaling->y_scale.transpose().array();
    pred.rowwise() += scaling->y_shift.transpose();
  }
  report.train_r2 = r2_score(pred, data.Y);
  report.train_rmse = rmse(pred, data.Y);
  return {std::move(model), std::move(report)};
}

}  // namespace pcf
