// pcf: fit, evaluate, score, and export parametrized convex functions, plus
// the bundled experiment suite. Exit codes: 0 ok, 1 input error, 2 runtime
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcf/cross_validation.hpp"
#include "pcf/experiments/runner.hpp"
#include "pcf/expr_graph.hpp"
#include "pcf/model_io.hpp"
#include "pcf/train.hpp"

namespace {

using nlohmann::json;
using namespace pcf;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Run configuration: JSON mirroring the architecture/loss/reg/train/cv
// structs. Omitted fields fall back to module defaults; unknown keys are hard
// errors so typos cannot silently change a run.
// ---------------------------------------------------------------------------

struct RunConfig {
  PcfArchitecture arch;
  bool n_set = false, p_set = false, d_set = false;
  LossSpec loss;
  RegSpec reg;
  TrainConfig train;
  CvConfig cv;
  double test_fraction = 0.2;
};

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw InvalidInput("config: unknown key '" + where + it.key() + "'");
  }
}

Vector json_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw InvalidInput("config: " + where + " must be an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& e : arr) {
    if (!e.is_number()) throw InvalidInput("config: " + where + " must contain numbers");
    v[i++] = e.get<double>();
  }
  return v;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  if (text.empty()) return cfg;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw InvalidInput(origin + ": config must be a JSON object");
  check_keys(doc, "", {"arch", "loss", "reg", "train", "cv", "test_fraction"});

  if (doc.contains("arch")) {
    const json& a = doc["arch"];
    check_keys(a, "arch.",
               {"n", "p", "d", "layers", "hidden_widths", "activation", "psi_hidden",
                "monotonicity", "quadratic", "scaling"});
    if (a.contains("n")) { cfg.arch.n = a["n"].get<int>(); cfg.n_set = true; }
    if (a.contains("p")) { cfg.arch.p = a["p"].get<int>(); cfg.p_set = true; }
    if (a.contains("d")) { cfg.arch.d = a["d"].get<int>(); cfg.d_set = true; }
    if (a.contains("layers")) cfg.arch.layers = a["layers"].get<int>();
    if (a.contains("hidden_widths"))
      cfg.arch.hidden_widths = a["hidden_widths"].get<std::vector<int>>();
    if (a.contains("activation")) {
      const std::string s = a["activation"].get<std::string>();
      if (s == "relu") cfg.arch.activation = Activation::Relu;
      else if (s == "softplus") cfg.arch.activation = Activation::Softplus;
      else throw InvalidInput("config: arch.activation must be 'relu' or 'softplus'");
    }
    if (a.contains("psi_hidden")) cfg.arch.psi_hidden = a["psi_hidden"].get<std::vector<int>>();
    if (a.contains("monotonicity")) {
      for (const auto& e : a["monotonicity"]) {
        const std::string s = e.get<std::string>();
        if (s == "none") cfg.arch.monotonicity.push_back(Monotonicity::None);
        else if (s == "increasing") cfg.arch.monotonicity.push_back(Monotonicity::Increasing);
        else if (s == "decreasing") cfg.arch.monotonicity.push_back(Monotonicity::Decreasing);
        else throw InvalidInput("config: arch.monotonicity entries must be none/increasing/decreasing");
      }
    }
    if (a.contains("quadratic")) {
      const json& q = a["quadratic"];
      check_keys(q, "arch.quadratic.", {"kind", "rank"});
      const std::string s = q.contains("kind") ? q["kind"].get<std::string>() : "none";
      if (s == "none") cfg.arch.quadratic.kind = QuadraticSpec::Kind::None;
      else if (s == "full") cfg.arch.quadratic.kind = QuadraticSpec::Kind::Full;
      else if (s == "low_rank") cfg.arch.quadratic.kind = QuadraticSpec::Kind::LowRank;
      else throw InvalidInput("config: arch.quadratic.kind must be none/full/low_rank");
      if (q.contains("rank")) cfg.arch.quadratic.rank = q["rank"].get<int>();
    }
    if (a.contains("scaling")) cfg.arch.scaling = a["scaling"].get<bool>();
  }

  if (doc.contains("loss")) {
    const json& l = doc["loss"];
    check_keys(l, "loss.", {"kind", "huber_delta"});
    if (l.contains("kind")) {
      const std::string s = l["kind"].get<std::string>();
      if (s == "quadratic") cfg.loss.kind = LossSpec::Kind::Quadratic;
      else if (s == "l1") cfg.loss.kind = LossSpec::Kind::L1;
      else if (s == "huber") cfg.loss.kind = LossSpec::Kind::Huber;
      else if (s == "logistic") cfg.loss.kind = LossSpec::Kind::Logistic;
      else throw InvalidInput("config: loss.kind must be quadratic/l1/huber/logistic");
    }
    if (l.contains("huber_delta")) cfg.loss.huber_delta = l["huber_delta"].get<double>();
  }

  if (doc.contains("reg")) {
    const json& r = doc["reg"];
    check_keys(r, "reg.",
               {"kind", "lambda", "alpha_l2", "alpha_l1", "rho_min", "argmin_g", "argmin_q"});
    if (r.contains("kind")) {
      const std::string s = r["kind"].get<std::string>();
      if (s == "none") cfg.reg.kind = RegSpec::Kind::None;
      else if (s == "l2") cfg.reg.kind = RegSpec::Kind::L2;
      else if (s == "l1") cfg.reg.kind = RegSpec::Kind::L1;
      else if (s == "elastic_net") cfg.reg.kind = RegSpec::Kind::ElasticNet;
      else throw InvalidInput("config: reg.kind must be none/l2/l1/elastic_net");
    }
    if (r.contains("lambda")) cfg.reg.lambda = r["lambda"].get<double>();
    if (r.contains("alpha_l2")) cfg.reg.alpha_l2 = r["alpha_l2"].get<double>();
    if (r.contains("alpha_l1")) cfg.reg.alpha_l1 = r["alpha_l1"].get<double>();
    if (r.contains("rho_min")) cfg.reg.rho_min = r["rho_min"].get<double>();
    if (r.contains("argmin_g")) {
      const Vector g = json_vector(r["argmin_g"], "reg.argmin_g");
      cfg.reg.argmin_g = [g](const Vector&) { return g; };
    }
    if (r.contains("argmin_q")) {
      const Vector q = json_vector(r["argmin_q"], "reg.argmin_q");
      cfg.reg.argmin_q = [q](const Vector&) { return q; };
    }
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    check_keys(t, "train.",
               {"adam_iters", "adam_lr", "lbfgs_iters", "lbfgs_memory", "lbfgs_max_fevals",
                "n_starts", "n_workers", "seed", "full_batch", "adam_batch", "block_budget"});
    if (t.contains("adam_iters")) cfg.train.adam_iters = t["adam_iters"].get<int>();
    if (t.contains("adam_lr")) cfg.train.adam_lr = t["adam_lr"].get<double>();
    if (t.contains("lbfgs_iters")) cfg.train.lbfgs_iters = t["lbfgs_iters"].get<int>();
    if (t.contains("lbfgs_memory")) cfg.train.lbfgs_memory = t["lbfgs_memory"].get<int>();
    if (t.contains("lbfgs_max_fevals")) cfg.train.lbfgs_max_fevals = t["lbfgs_max_fevals"].get<int>();
    if (t.contains("n_starts")) cfg.train.n_starts = t["n_starts"].get<int>();
    if (t.contains("n_workers")) cfg.train.n_workers = t["n_workers"].get<int>();
    if (t.contains("seed")) cfg.train.seed = t["seed"].get<std::uint64_t>();
    if (t.contains("full_batch")) cfg.train.full_batch = t["full_batch"].get<bool>();
    if (t.contains("adam_batch")) cfg.train.adam_batch = t["adam_batch"].get<int>();
    if (t.contains("block_budget")) cfg.train.block_budget = t["block_budget"].get<int>();
  }

  if (doc.contains("cv")) {
    const json& c = doc["cv"];
    check_keys(c, "cv.", {"enabled", "folds", "lambda_grid", "shuffle_seed"});
    if (c.contains("enabled")) cfg.cv.enabled = c["enabled"].get<bool>();
    if (c.contains("folds")) cfg.cv.folds = c["folds"].get<int>();
    if (c.contains("lambda_grid")) cfg.cv.lambda_grid = c["lambda_grid"].get<std::vector<double>>();
    if (c.contains("shuffle_seed")) cfg.cv.shuffle_seed = c["shuffle_seed"].get<std::uint64_t>();
  }

  if (doc.contains("test_fraction")) {
    cfg.test_fraction = doc["test_fraction"].get<double>();
    if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0)
      throw InvalidInput("config: test_fraction must be in [0, 1)");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// FitReport rendering (deterministic key order and number formatting)
// ---------------------------------------------------------------------------

std::string report_to_json(const FitReport& rep) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"chosen_lambda\": " << fmt17(rep.chosen_lambda) << ",\n";
  out << "  \"train_objective\": " << fmt17(rep.train_objective) << ",\n";
  out << "  \"train_r2\": " << fmt17(rep.train_r2) << ",\n";
  out << "  \"train_rmse\": " << fmt17(rep.train_rmse) << ",\n";
  out << "  \"best_start\": " << rep.best_start << ",\n";
  out << "  \"starts\": [";
  for (size_t s = 0; s < rep.starts.size(); ++s) {
    const StartOutcome& so = rep.starts[s];
    out << (s ? ", " : "") << "{\"start\": " << so.start << ", \"failed\": "
        << (so.failed ? "true" : "false");
    if (so.failed)
      out << ", \"failure\": \"" << so.failure << "\"";
    else
      out << ", \"objective\": " << fmt17(so.objective);
    out << "}";
  }
  out << "],\n";
  out << "  \"lambda_grid\": [";
  for (size_t i = 0; i < rep.lambda_grid.size(); ++i) {
    const LambdaOutcome& lo = rep.lambda_grid[i];
    out << (i ? ", " : "") << "{\"lambda\": " << fmt17(lo.lambda) << ", \"dropped\": "
        << (lo.dropped ? "true" : "false") << ", \"mean_r2\": "
        << (lo.dropped ? "null" : fmt17(lo.mean_r2)) << ", \"fold_r2\": [";
    for (size_t f = 0; f < lo.fold_r2.size(); ++f)
      out << (f ? ", " : "") << (std::isnan(lo.fold_r2[f]) ? "null" : fmt17(lo.fold_r2[f]));
    out << "]}";
  }
  out << "],\n";
  if (rep.test) {
    out << "  \"test\": {\"r2\": " << fmt17(rep.test->r2) << ", \"rmse\": " << fmt17(rep.test->rmse);
    if (rep.test->error_rate) out << ", \"error_rate\": " << fmt17(*rep.test->error_rate);
    out << "}\n";
  } else {
    out << "  \"test\": null\n";
  }
  out << "}\n";
  return out.str();
}

void reconcile_dims(RunConfig& cfg, const Dataset& data, const std::string& data_path) {
  auto mismatch = [&](const char* what, int got, int want) {
    throw InvalidInput("config/arch." + std::string(what) + " = " + std::to_string(want) +
                       " but " + data_path + " has " + std::to_string(got) + " " + what +
                       "-columns");
  };
  if (cfg.n_set) {
    if (cfg.arch.n != data.n()) mismatch("n", data.n(), cfg.arch.n);
  } else {
    cfg.arch.n = data.n();
  }
  if (cfg.p_set) {
    if (cfg.arch.p != data.p()) mismatch("p", data.p(), cfg.arch.p);
  } else {
    cfg.arch.p = data.p();
  }
  if (cfg.d_set) {
    if (cfg.arch.d != data.d()) mismatch("d", data.d(), cfg.arch.d);
  } else {
    cfg.arch.d = data.d();
  }
}

int cmd_fit(const std::string& data_path, const std::string& config_path,
            const std::string& test_path, const std::string& out_path,
            std::optional<std::uint64_t> seed_flag) {
  const Dataset all = read_csv(data_path);
  RunConfig cfg = parse_config(config_path.empty() ? "" : read_file(config_path), config_path);
  if (seed_flag) cfg.train.seed = *seed_flag;
  reconcile_dims(cfg, all, data_path);

  Dataset train_set, test_set;
  bool have_test = false;
  if (!test_path.empty()) {
    train_set = all;
    test_set = read_csv(test_path);
    have_test = true;
  } else if (cfg.test_fraction > 0.0 && all.size() >= 5) {
    std::vector<Eigen::Index> tr, te;
    split_indices(all.size(), 1.0 - cfg.test_fraction, cfg.train.seed, tr, te);
    train_set = all.rows(tr);
    test_set = all.rows(te);
    have_test = test_set.size() >= 2;
  } else {
    train_set = all;
  }

  PcfModel model;
  FitReport report;
  if (cfg.cv.enabled) {
    std::tie(model, report) =
        cross_validate(cfg.arch, train_set, cfg.loss, cfg.reg, cfg.cv, cfg.train);
  } else {
    std::tie(model, report) = fit(cfg.arch, train_set, cfg.loss, cfg.reg, cfg.train);
  }

  if (have_test) {
    TestMetrics tm;
    const Matrix pred = evaluate_batch(model, test_set.X, test_set.Theta);
    tm.r2 = r2_score(pred, test_set.Y);
    tm.rmse = rmse(pred, test_set.Y);
    if (cfg.loss.kind == LossSpec::Kind::Logistic) tm.error_rate = error_rate(pred, test_set.Y);
    report.test = tm;
  }

  if (!out_path.empty()) save_model(model, out_path);
  std::cout << report_to_json(report);
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path) {
  const PcfModel model = load_model(model_path);
  const Dataset data = read_csv(data_path);
  const Matrix pred = evaluate_batch(model, data.X, data.Theta);
  std::cout << predictions_to_csv(pred);
  return 0;
}

int cmd_score(const std::string& model_path, const std::string& data_path,
              const std::string& metric) {
  const PcfModel model = load_model(model_path);
  const Dataset data = read_csv(data_path);
  const Matrix pred = evaluate_batch(model, data.X, data.Theta);
  double value = 0.0;
  if (metric == "r2") value = r2_score(pred, data.Y);
  else if (metric == "rmse") value = rmse(pred, data.Y);
  else if (metric == "error_rate") value = error_rate(pred, data.Y);
  else throw InvalidInput("unknown metric '" + metric + "' (expected r2, rmse, or error_rate)");
  std::cout << fmt17(value) << "\n";
  return 0;
}

int cmd_export(const std::string& model_path, const std::string& mode_str,
               const std::string& theta_str, const std::string& template_path,
               const std::string& out_path) {
  const PcfModel model = load_model(model_path);
  ExportMode mode;
  if (mode_str == "bound") mode = ExportMode::BoundTheta;
  else if (mode_str == "symbolic") mode = ExportMode::SymbolicTheta;
  else throw InvalidInput("mode must be 'bound' or 'symbolic'");

  std::optional<Vector> theta;
  if (!theta_str.empty()) {
    std::vector<double> vals;
    std::stringstream ss(theta_str);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidInput("--theta must be a comma-separated list of numbers");
      }
    }
    theta = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  const ExprGraph graph = to_expr_graph(model, mode, theta);

  std::string text;
  if (!template_path.empty())
    text = emit_code(graph, read_file(template_path));
  else
    text = graph_to_json(graph);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + out_path);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fit, evaluate, score, and export parametrized convex functions"};
  app.require_subcommand(1);

  std::string data_path, config_path, test_path, model_path, out_path, metric = "r2";
  std::string mode = "bound", theta_str, template_path, experiment_name;
  double scale = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 4;

  CLI::App* c_fit = app.add_subcommand("fit", "fit a model to a data file");
  c_fit->add_option("--data", data_path, "training data CSV")->required();
  c_fit->add_option("--config", config_path, "run configuration JSON");
  c_fit->add_option("--test", test_path, "held-out test data CSV (default: seeded 80/20 split)");
  c_fit->add_option("--out", out_path, "output model file")->required();
  c_fit->add_option("--seed", seed, "override train.seed")->each([&](const std::string&) {
    seed_given = true;
  });

  CLI::App* c_eval = app.add_subcommand("eval", "print model predictions for a data file");
  c_eval->add_option("--model", model_path, "model file")->required();
  c_eval->add_option("--data", data_path, "data CSV")->required();

  CLI::App* c_score = app.add_subcommand("score", "score a model on a data file");
  c_score->add_option("--model", model_path, "model file")->required();
  c_score->add_option("--data", data_path, "data CSV")->required();
  c_score->add_option("--metric", metric, "r2 | rmse | error_rate");

  CLI::App* c_export = app.add_subcommand("export", "export a model as an expression graph");
  c_export->add_option("--model", model_path, "model file")->required();
  c_export->add_option("--mode", mode, "bound | symbolic");
  c_export->add_option("--theta", theta_str, "comma-separated theta (bound mode)");
  c_export->add_option("--template", template_path, "render code with this template instead of JSON");
  c_export->add_option("--out", out_path, "output path (default: stdout)");

  CLI::App* c_exp = app.add_subcommand("experiment", "run a bundled experiment");
  c_exp->add_option("name", experiment_name, "pwa | quadratic | battery | adp")->required();
  c_exp->add_option("--scale", scale, "sample-count multiplier (default 1)");
  c_exp->add_option("--seed", seed, "experiment seed");
  c_exp->add_option("--out", out_path, "artifact directory");
  c_exp->add_option("--workers", workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_fit))
      return cmd_fit(data_path, config_path, test_path, out_path,
                     seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt);
    if (app.got_subcommand(c_eval)) return cmd_eval(model_path, data_path);
    if (app.got_subcommand(c_score)) return cmd_score(model_path, data_path, metric);
    if (app.got_subcommand(c_export))
      return cmd_export(model_path, mode, theta_str, template_path, out_path);
    if (app.got_subcommand(c_exp)) {
      experiments::ExperimentOptions opts;
      opts.scale = scale;
      opts.seed = seed;
      opts.out_dir = out_path;
      opts.n_workers = workers;
      std::cout << experiments::run_experiment(experiment_name, opts) << "\n";
      return 0;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const PcfError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
