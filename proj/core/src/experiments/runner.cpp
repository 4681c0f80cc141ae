#include "pcf/experiments/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pcf/cross_validation.hpp"
#include "pcf/experiments/generators.hpp"
#include "pcf/experiments/pendulum.hpp"
#include "pcf/thread_pool.hpp"
#include "pcf/train.hpp"

namespace pcf::experiments {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + dir + "/" + name);
  out << text;
}

int scaled(int base, double scale) { return std::max(1, static_cast<int>(std::lround(base * scale))); }

struct JsonWriter {
  std::ostringstream out;
  bool first = true;
  JsonWriter() { out << "{"; }
  void sep() {
    if (!first) out << ", ";
    first = false;
  }
  void field(const std::string& k, double v) {
    sep();
    out << '"' << k << "\": " << fmt17(v);
  }
  void field(const std::string& k, int v) {
    sep();
    out << '"' << k << "\": " << v;
  }
  void field(const std::string& k, bool v) {
    sep();
    out << '"' << k << "\": " << (v ? "true" : "false");
  }
  void field(const std::string& k, const std::string& v) {
    sep();
    out << '"' << k << "\": \"" << v << '"';
  }
  void raw(const std::string& k, const std::string& v) {
    sep();
    out << '"' << k << "\": " << v;
  }
  std::string str() {
    out << "}";
    return out.str();
  }
};

std::string run_pwa(const ExperimentOptions& opts) {
  const int n_theta = scaled(400, opts.scale);
  const int n_x = 50;
  PwaData train = gen_pwa(n_theta, n_x, opts.seed);
  PwaData test = gen_pwa(n_theta, n_x, opts.seed + 1);

  PcfArchitecture arch = PcfArchitecture::defaults(1, 4, 1);
  TrainConfig cfg;
  cfg.seed = opts.seed;
  cfg.n_workers = opts.n_workers;
  auto [model, report] = fit(arch, train.data, LossSpec{}, RegSpec{}, cfg);

  const Matrix pred = evaluate_batch(model, test.data.X, test.data.Theta);
  double se_all = 0, se_cvx = 0, se_ncvx = 0, se_aff = 0;
  Eigen::Index n_all = 0, n_cvx = 0, n_ncvx = 0;
  for (int t = 0; t < n_theta; ++t) {
    for (int i = 0; i < n_x; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(t) * n_x + i;
      const double r = pred(k, 0) - test.data.Y(k, 0);
      se_all += r * r;
      ++n_all;
      if (test.convex[static_cast<size_t>(t)]) {
        se_cvx += r * r;
        ++n_cvx;
      } else {
        se_ncvx += r * r;
        ++n_ncvx;
        const double affine =
            test.affine_coef(t, 0) + test.affine_coef(t, 1) * test.data.X(k, 0);
        const double ra = pred(k, 0) - affine;
        se_aff += ra * ra;
      }
    }
  }
  auto rmse_of = [](double se, Eigen::Index n) {
    return n > 0 ? std::sqrt(se / static_cast<double>(n)) : 0.0;
  };

  if (!opts.out_dir.empty()) {
    std::ostringstream csv;
    csv << "x0,th0,th1,th2,th3,y_true,y_pred,convex,affine_fit\n";
    for (Eigen::Index k = 0; k < test.data.size(); ++k) {
      const int t = static_cast<int>(k / n_x);
      const double affine = test.affine_coef(t, 0) + test.affine_coef(t, 1) * test.data.X(k, 0);
      csv << fmt17(test.data.X(k, 0));
      for (int c = 0; c < 4; ++c) csv << ',' << fmt17(test.data.Theta(k, c));
      csv << ',' << fmt17(test.data.Y(k, 0)) << ',' << fmt17(pred(k, 0)) << ','
          << (test.convex[static_cast<size_t>(t)] ? 1 : 0) << ',' << fmt17(affine) << '\n';
    }
    write_file(opts.out_dir, "predictions_test.csv", csv.str());
  }

  JsonWriter j;
  j.field("experiment", std::string("pwa"));
  j.field("n_theta", n_theta);
  j.field("n_x", n_x);
  j.field("seed", static_cast<int>(opts.seed));
  j.field("rmse_all", rmse_of(se_all, n_all));
  j.field("rmse_convex", rmse_of(se_cvx, n_cvx));
  j.field("rmse_nonconvex", rmse_of(se_ncvx, n_ncvx));
  j.field("rmse_nonconvex_vs_affine", rmse_of(se_aff, n_ncvx));
  j.field("train_objective", report.train_objective);
  j.field("train_r2", report.train_r2);
  return j.str();
}

std::string run_quadratic(const ExperimentOptions& opts) {
  const int n_theta = scaled(300, opts.scale);
  const int n_x = 100;
  const int n_dim = 3;
  Dataset train = gen_quadratic(n_theta, n_x, n_dim, opts.seed);
  Dataset test = gen_quadratic(n_theta, n_x, n_dim, opts.seed + 1);

  PcfArchitecture arch;
  arch.n = n_dim;
  arch.p = n_dim * n_dim;
  arch.d = 1;
  arch.activation = Activation::Softplus;
  TrainConfig cfg;
  cfg.seed = opts.seed;
  cfg.n_workers = opts.n_workers;
  auto [model, report] = fit(arch, train, LossSpec{}, RegSpec{}, cfg);

  const Matrix pred = evaluate_batch(model, test.X, test.Theta);
  const double test_rmse = rmse(pred, test.Y);
  const double test_r2 = r2_score(pred, test.Y);

  if (!opts.out_dir.empty()) {
    std::ostringstream csv;
    csv << "y_true,y_pred\n";
    for (Eigen::Index k = 0; k < test.size(); ++k)
      csv << fmt17(test.Y(k, 0)) << ',' << fmt17(pred(k, 0)) << '\n';
    write_file(opts.out_dir, "predictions_test.csv", csv.str());
  }

  JsonWriter j;
  j.field("experiment", std::string("quadratic"));
  j.field("n_theta", n_theta);
  j.field("n_x", n_x);
  j.field("seed", static_cast<int>(opts.seed));
  j.field("rmse", test_rmse);
  j.field("r2", test_r2);
  j.field("train_objective", report.train_objective);
  return j.str();
}

std::string run_battery(const ExperimentOptions& opts) {
  const int n_theta = scaled(300, opts.scale);
  const int n_x = 100;
  Dataset train = gen_battery(n_theta, n_x, opts.seed);
  Dataset test = gen_battery(n_theta, n_x, opts.seed + 1);

  PcfArchitecture arch;
  arch.n = 2;
  arch.p = 3;
  arch.d = 1;
  arch.hidden_widths = {5, 5};
  arch.layers = 3;
  arch.psi_hidden = {10};
  arch.activation = Activation::Softplus;
  arch.scaling = true;  // q, b, A, T live on very different ranges
  TrainConfig cfg;
  cfg.seed = opts.seed;
  cfg.n_workers = opts.n_workers;
  cfg.adam_iters = 400;
  cfg.lbfgs_iters = 1500;
  cfg.n_starts = 6;
  auto [model, report] = fit(arch, train, LossSpec{}, RegSpec{}, cfg);

  const Matrix pred = evaluate_batch(model, test.X, test.Theta);
  Matrix pred_short(test.size(), 1);
  for (Eigen::Index k = 0; k < test.size(); ++k)
    pred_short(k, 0) = battery_short(test.X.row(k).transpose(), test.Theta.row(k).transpose());
  const double rmse_pcf = rmse(pred, test.Y);
  const double rmse_short = rmse(pred_short, test.Y);

  if (!opts.out_dir.empty()) {
    std::ostringstream csv;
    csv << "q,b,A,Q,T,y_true,y_pred,y_short\n";
    for (Eigen::Index k = 0; k < test.size(); ++k) {
      csv << fmt17(test.X(k, 0)) << ',' << fmt17(test.X(k, 1));
      for (int c = 0; c < 3; ++c) csv << ',' << fmt17(test.Theta(k, c));
      csv << ',' << fmt17(test.Y(k, 0)) << ',' << fmt17(pred(k, 0)) << ','
          << fmt17(pred_short(k, 0)) << '\n';
    }
    write_file(opts.out_dir, "predictions_test.csv", csv.str());
  }

  JsonWriter j;
  j.field("experiment", std::string("battery"));
  j.field("n_theta", n_theta);
  j.field("n_x", n_x);
  j.field("seed", static_cast<int>(opts.seed));
  j.field("rmse_pcf", rmse_pcf);
  j.field("rmse_short", rmse_short);
  j.field("ratio", rmse_short > 0 ? rmse_pcf / rmse_short : 0.0);
  j.field("train_objective", report.train_objective);
  return j.str();
}

std::string run_adp(const ExperimentOptions& opts) {
  const int n_samples = scaled(300, opts.scale);
  const int horizon = 60;
  const int tail_stride = 2;  // keep every 2nd state of each trajectory

  // open-loop solves across the sampled initial conditions
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> d_delta(-kPi / 6.0, 7.0 * kPi / 6.0);
  std::uniform_real_distribution<double> d_rate(-1.0, 1.0);
  std::uniform_real_distribution<double> d_mass(0.5, 2.0);
  std::vector<Eigen::Vector2d> z0s(static_cast<size_t>(n_samples));
  std::vector<double> masses(static_cast<size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    z0s[static_cast<size_t>(k)] = {d_delta(rng), d_rate(rng)};
    masses[static_cast<size_t>(k)] = d_mass(rng);
  }
  std::vector<OcpResult> solves(static_cast<size_t>(n_samples));
  parallel_for(n_samples, opts.n_workers, [&](int k) {
    PendulumSystem sys;
    sys.mass = masses[static_cast<size_t>(k)];
    OcpOptions oopt;
    oopt.seed = start_seed(opts.seed, k);
    solves[static_cast<size_t>(k)] = solve_ocp(sys, z0s[static_cast<size_t>(k)], horizon, oopt);
  });

  // harvest (state, mass, tail cost) samples along each trajectory
  std::vector<double> xs, ths, ys;
  int ok = 0, failed = 0;
  for (int k = 0; k < n_samples; ++k) {
    const OcpResult& r = solves[static_cast<size_t>(k)];
    if (r.failed) {
      ++failed;
      continue;
    }
    ++ok;
    for (int t = 0; t <= horizon; t += tail_stride) {
      xs.push_back(r.states[static_cast<size_t>(t)][0]);
      xs.push_back(r.states[static_cast<size_t>(t)][1]);
      ths.push_back(masses[static_cast<size_t>(k)]);
      ys.push_back(r.tail_costs[t]);
    }
  }
  if (ok == 0) throw FitFailed("adp: every open-loop solve failed");
  const Eigen::Index N = static_cast<Eigen::Index>(ys.size());
  Dataset train;
  train.X = Eigen::Map<RowMajorMatrix>(xs.data(), N, 2);
  train.Theta = Eigen::Map<RowMajorMatrix>(ths.data(), N, 1);
  train.Y = Eigen::Map<RowMajorMatrix>(ys.data(), N, 1);

  PcfArchitecture arch;
  arch.n = 2;
  arch.p = 1;
  arch.d = 1;
  arch.layers = 3;
  arch.hidden_widths = {20, 20};
  arch.psi_hidden = {10, 10};
  arch.activation = Activation::Softplus;
  arch.quadratic.kind = QuadraticSpec::Kind::Full;
  arch.scaling = true;  // tail costs reach a few hundred
  RegSpec reg;
  reg.kind = RegSpec::Kind::ElasticNet;
  reg.lambda = 1.0;
  reg.alpha_l2 = 1e-8;
  reg.alpha_l1 = 0.1;
  reg.rho_min = 10.0;
  reg.argmin_g = [](const Vector&) {
    Vector g(2);
    g << kPi, 0.0;
    return g;
  };
  TrainConfig cfg;
  cfg.seed = opts.seed;
  cfg.n_workers = opts.n_workers;
  cfg.adam_iters = 300;
  cfg.lbfgs_iters = 1200;
  cfg.n_starts = 4;
  auto [model, report] = fit(arch, train, LossSpec{}, reg, cfg);

  // mean gradient norm at the equilibrium over the training parameters
  double grad_eq = 0.0;
  {
    Vector zeq(2);
    zeq << kPi, 0.0;
    for (int k = 0; k < n_samples; ++k) {
      Vector th(1);
      th[0] = masses[static_cast<size_t>(k)];
      grad_eq += grad_x(model, zeq, th).row(0).norm();
    }
    grad_eq /= n_samples;
  }

  // closed loop from rest at nominal mass, against the open-loop benchmark
  PendulumSystem nominal;
  nominal.mass = 1.0;
  const Eigen::Vector2d z0(0.0, 0.0);
  OcpOptions oopt;
  oopt.seed = start_seed(opts.seed, n_samples + 1);
  const OcpResult open_loop = solve_ocp(nominal, z0, horizon, oopt);
  const int steps = 300;
  const ClosedLoopResult closed = simulate_adp(model, nominal, z0, steps);

  if (!opts.out_dir.empty()) {
    std::ostringstream csv;
    csv << "t,delta,delta_dot,u,stage_cost\n";
    for (int t = 0; t < steps; ++t)
      csv << t << ',' << fmt17(closed.states[static_cast<size_t>(t)][0]) << ','
          << fmt17(closed.states[static_cast<size_t>(t)][1]) << ',' << fmt17(closed.inputs[t])
          << ',' << fmt17(closed.stage_costs[t]) << '\n';
    write_file(opts.out_dir, "closed_loop.csv", csv.str());
    std::ostringstream ocsv;
    ocsv << "t,delta,delta_dot,u\n";
    for (int t = 0; t < horizon; ++t)
      ocsv << t << ',' << fmt17(open_loop.states[static_cast<size_t>(t)][0]) << ','
           << fmt17(open_loop.states[static_cast<size_t>(t)][1]) << ','
           << fmt17(open_loop.inputs[t]) << '\n';
    write_file(opts.out_dir, "open_loop.csv", ocsv.str());
  }

  JsonWriter j;
  j.field("experiment", std::string("adp"));
  j.field("n_samples", n_samples);
  j.field("horizon", horizon);
  j.field("seed", static_cast<int>(opts.seed));
  j.field("ocp_solved", ok);
  j.field("ocp_failed", failed);
  j.field("fit_samples", static_cast<int>(N));
  j.field("train_objective", report.train_objective);
  j.field("grad_at_eq_mean", grad_eq);
  {
    JsonWriter c;
    c.field("reached", closed.first_reach >= 0);
    c.field("first_reach", closed.first_reach);
    c.field("cost", closed.cost);
    c.field("open_loop_cost", open_loop.cost);
    c.field("cost_ratio", open_loop.cost > 0 ? closed.cost / open_loop.cost : 0.0);
    j.raw("closed_loop", c.str());
  }
  return j.str();
}

}  // namespace

std::string run_experiment(const std::string& name, const ExperimentOptions& opts) {
  std::string metrics;
  if (name == "pwa") metrics = run_pwa(opts);
  else if (name == "quadratic") metrics = run_quadratic(opts);
  else if (name == "battery") metrics = run_battery(opts);
  else if (name == "adp") metrics = run_adp(opts);
  else
    throw InvalidInput("unknown experiment '" + name +
                       "' (expected pwa, quadratic, battery, or adp)");
  write_file(opts.out_dir, "metrics.json", metrics + "\n");
  return metrics;
}

}  // namespace pcf::experiments
