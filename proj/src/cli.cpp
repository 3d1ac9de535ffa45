#include "cli.hpp"

#include <danr/danr.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>

namespace danr::cli {
namespace {

namespace fs = std::filesystem;
using io::Config;
using io::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out = "danr_out";
  int jobs = 1;
  bool strict = false;
};

class StrictFailure : public Error {
 public:
  using Error::Error;
};

Config load_config(const Common& c, const std::set<std::string>& known) {
  Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
  cfg.check_known(known);
  if (!c.mode.empty()) cfg.set("mode", c.mode);
  return cfg;
}

std::set<std::string> keys(std::initializer_list<std::set<std::string>> parts) {
  std::set<std::string> all;
  for (const auto& p : parts) all.insert(p.begin(), p.end());
  return all;
}

const std::set<std::string> kGenKeys = {"communities", "nodes_per_community", "p_intra", "p_inter", "dim",
                                        "examples_per_node", "noise_std", "test_per_node"};
const std::set<std::string> kLossKeys = {"loss", "C", "c_ridge", "intercept"};
const std::set<std::string> kGridKeys = {"lambda_start", "lambda_ratio", "lambda_end", "mu_start", "mu_step",
                                         "mu_end", "seeds", "seed_list"};
const std::set<std::string> kDriftKeys = {"train_nodes", "test_nodes", "regions", "snapshots", "change_point",
                                          "changed_regions", "dim", "examples_per_node",
                                          "test_examples_per_node", "drift_std", "jump_std", "noise_std", "knn"};

SyntheticParams gen_params(const Config& cfg, std::uint64_t seed) {
  SyntheticParams sp;
  sp.communities = cfg.get("communities", sp.communities);
  sp.nodes_per_community = cfg.get("nodes_per_community", sp.nodes_per_community);
  sp.p_intra = cfg.get("p_intra", sp.p_intra);
  sp.p_inter = cfg.get("p_inter", sp.p_inter);
  sp.dim = cfg.get("dim", sp.dim);
  sp.examples_per_node = cfg.get("examples_per_node", sp.examples_per_node);
  sp.noise_std = cfg.get("noise_std", sp.noise_std);
  sp.seed = seed;
  sp.validate();
  return sp;
}

DriftParams drift_params(const Config& cfg, std::uint64_t seed) {
  DriftParams dp;
  dp.train_nodes = cfg.get("train_nodes", dp.train_nodes);
  dp.test_nodes = cfg.get("test_nodes", dp.test_nodes);
  dp.regions = cfg.get("regions", dp.regions);
  dp.snapshots = cfg.get("snapshots", dp.snapshots);
  dp.change_point = cfg.get("change_point", dp.change_point);
  dp.changed_regions = cfg.get("changed_regions", dp.changed_regions);
  dp.dim = cfg.get("dim", dp.dim);
  dp.examples_per_node = cfg.get("examples_per_node", dp.examples_per_node);
  dp.test_examples_per_node = cfg.get("test_examples_per_node", dp.test_examples_per_node);
  dp.drift_std = cfg.get("drift_std", dp.drift_std);
  dp.jump_std = cfg.get("jump_std", dp.jump_std);
  dp.noise_std = cfg.get("noise_std", dp.noise_std);
  dp.knn = cfg.get("knn", dp.knn);
  dp.seed = seed;
  return dp;
}

std::vector<std::uint64_t> seed_list(const Config& cfg, const Common& c, int default_count) {
  std::vector<std::uint64_t> seeds;
  if (cfg.has("seed_list")) {
    for (double s : cfg.get_list("seed_list", {})) {
      if (s < 0 || s != std::floor(s)) throw InvalidInput("seed_list entries must be nonnegative integers");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else {
    const int count = cfg.get("seeds", default_count);
    if (count < 1) throw InvalidInput("seeds must be >= 1");
    const std::uint64_t first = c.seed.value_or(1);
    for (int i = 0; i < count; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  if (seeds.empty()) throw InvalidInput("no seeds given");
  return seeds;
}

NodeObjective make_objective(const Config& cfg, const NodePayload& p, Eigen::Index dim) {
  const auto loss = cfg.get("loss", std::string("svm"));
  const bool intercept = cfg.get("intercept", loss == "svm");
  if (p.empty()) return NodeObjective::zero(dim + (intercept ? 1 : 0));
  if (loss == "svm") return NodeObjective::svm(p, cfg.get("C", 0.75), intercept);
  if (loss == "ridge") return NodeObjective::ridge(p, cfg.get("c_ridge", 0.1), intercept);
  throw InvalidInput("loss must be svm or ridge");
}

void write_json(const fs::path& path, const json& doc) { io::write_file(path, doc.dump(2) + "\n"); }

void log(std::ostream& err, const std::string& msg) { err << "danr: " << msg << "\n"; }

// ---------------------------------------------------------------------------

int cmd_gen(const Common& c, const std::string& kind, std::ostream& out, std::ostream& err) {
  const fs::path dir = c.out;
  const auto seed = c.seed.value_or(1);
  if (kind == "drift") {
    const auto cfg = load_config(c, kDriftKeys);
    const auto seq = gen_drift_sequence(drift_params(cfg, seed));
    TemporalGraph train = seq.train;
    for (auto& g : train.snapshots) g.coords = seq.train_coords;
    io::save_temporal(dir / "train", train);
    for (int t = 0; t < train.snapshot_count(); ++t) {
      Graph test = build_graph(static_cast<int>(seq.test_coords.rows()), {}, seq.test[static_cast<std::size_t>(t)]);
      test.coords = seq.test_coords;
      io::save_graph(dir / "test" / io::snapshot_name(t), test);
    }
    out << "wrote " << train.snapshot_count() << " snapshots to " << (dir / "train").string() << " and "
        << (dir / "test").string() << "\n";
    return ok;
  }
  if (kind != "sbm") throw InvalidInput("--kind must be sbm or drift");
  const auto cfg = load_config(c, keys({kGenKeys}));
  const auto net = gen_synthetic(gen_params(cfg, seed));
  io::save_graph(dir / "graph.json", net.graph);
  const auto test = gen_test_pairs(net, cfg.get("test_per_node", 10));
  io::save_graph(dir / "test.json", build_graph(net.graph.node_count, {}, test));
  json truth;
  truth["seed"] = seed;
  truth["community"] = net.community;
  json models = json::array();
  for (Eigen::Index k = 0; k < net.models.cols(); ++k) models.push_back(io::vector_json(net.models.col(k)));
  truth["models"] = std::move(models);
  write_json(dir / "truth.json", truth);
  int inter = 0;
  for (const auto& e : net.graph.edges) inter += is_inter(net, e) ? 1 : 0;
  out << "nodes " << net.graph.node_count << " edges " << net.graph.edge_count() << " inter-community "
      << inter << "\n";
  log(err, "wrote " + (dir / "graph.json").string());
  return ok;
}

int cmd_solve(const Common& c, const std::string& input, const std::string& points, const std::string& test_points,
              std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(c, keys({io::solver_keys(), kLossKeys, {"knn", "weighting", "infer_k"}}));
  auto params = io::solver_params(cfg);
  params.threads = std::max(params.threads, c.jobs);
  Graph g;
  std::optional<io::PointsTable> table;
  if (!points.empty()) {
    table = io::load_points(points);
    const auto w = cfg.get("weighting", std::string("uniform"));
    if (w != "uniform" && w != "inverse_distance") throw InvalidInput("weighting must be uniform or inverse_distance");
    g = knn_graph(table->coords, cfg.get("knn", 10),
                  w == "uniform" ? KnnWeighting::uniform : KnnWeighting::inverse_distance, table->payloads());
  } else if (!input.empty()) {
    g = io::load_graph(input);
  } else {
    throw InvalidInput("solve needs --input graph.json or --points points.csv");
  }
  if (!g.has_payloads()) throw InvalidInput("graph has no node payloads to fit");
  const auto d = g.feature_dim();
  std::vector<NodeObjective> objs;
  for (const auto& p : g.payloads) objs.push_back(make_objective(cfg, p, d));
  const auto rep = solve(g, objs, params);
  json doc = io::report_to_json(g, rep, params);
  if (!test_points.empty()) {
    if (!table) throw InvalidInput("--test needs --points for the training locations");
    const auto test = io::load_points(test_points);
    if (test.features.cols() != table->features.cols()) throw DimensionMismatch("test and training features differ");
    const int k = cfg.get("infer_k", cfg.get("knn", 10));
    const Matrix models = predict_unseen(table->coords, rep.x, test.coords, k);
    double se = 0.0;
    const bool icpt = objs.front().intercept();
    for (Eigen::Index i = 0; i < test.size(); ++i) {
      double pred = test.features.row(i).dot(models.col(i).head(test.features.cols()));
      if (icpt) pred += models(models.rows() - 1, i);
      se += (pred - test.targets[i]) * (pred - test.targets[i]);
    }
    doc["test_mse"] = test.size() > 0 ? se / static_cast<double>(test.size()) : 0.0;
  }
  const fs::path dir = c.out;
  write_json(dir / "report.json", doc);
  io::write_file(dir / "trace.csv", io::trace_csv(rep.objective, rep.r_norm, rep.s_norm));
  out << "mode " << to_string(params.mode) << " iterations " << rep.iterations << " converged "
      << (rep.converged ? "yes" : "no") << " objective " << io::format_double(rep.final_objective()) << "\n";
  if (doc.contains("test_mse")) out << "test_mse " << io::format_double(doc["test_mse"].get<double>()) << "\n";
  log(err, "wrote " + (dir / "report.json").string());
  if (!rep.converged && c.strict) throw StrictFailure("solver did not converge within max_outer_iters");
  return ok;
}

harness::ClassificationSpec classification_spec(const Config& cfg, const Common& c) {
  harness::ClassificationSpec spec;
  spec.gen = gen_params(cfg, 1);
  spec.seeds = seed_list(cfg, c, 10);
  spec.lambdas = harness::lambda_grid(cfg.get("lambda_start", 1e-3), cfg.get("lambda_ratio", 1.3),
                                      cfg.get("lambda_end", 1e2));
  spec.mus = harness::mu_grid(cfg.get("mu_start", 0.3), cfg.get("mu_step", 0.02), cfg.get("mu_end", 1.0));
  spec.C = cfg.get("C", spec.C);
  spec.intercept = cfg.get("intercept", spec.intercept);
  spec.test_per_node = cfg.get("test_per_node", spec.test_per_node);
  spec.solver = io::solver_params(cfg);
  spec.jobs = c.jobs;
  if (!c.mode.empty()) spec.modes = {parse_mode(c.mode)};
  return spec;
}

int check_strict(const Common& c, const std::vector<harness::EvalRecord>& rows, std::ostream& err) {
  long bad = 0;
  for (const auto& r : rows) bad += (!r.converged || !r.error.empty()) ? 1 : 0;
  if (bad > 0) {
    log(err, std::to_string(bad) + " cells did not converge or failed");
    if (c.strict) throw StrictFailure("non-converged cells in strict mode");
  }
  return ok;
}

int cmd_sweep(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(c, keys({io::solver_keys(), kGenKeys, kGridKeys, {"C", "intercept"}}));
  const auto spec = classification_spec(cfg, c);
  log(err, "classification sweep over " + std::to_string(spec.seeds.size()) + " seeds");
  const auto rows = harness::run_classification_experiment(spec);
  const fs::path dir = c.out;
  io::write_file(dir / "results.csv", harness::to_csv(rows));
  std::string summary = "seed,local,global,nl_peak,nl_peak_lambda,nl_drop,danr_peak,danr_peak_lambda\n";
  for (auto seed : spec.seeds) {
    const auto s = harness::summarize(rows, seed);
    summary += std::to_string(seed) + "," + io::format_double(s.local) + "," + io::format_double(s.global) + "," +
               io::format_double(s.nl_peak) + "," + io::format_double(s.nl_peak_lambda) + "," +
               io::format_double(s.nl_drop) + "," + io::format_double(s.danr_peak) + "," +
               io::format_double(s.danr_peak_lambda) + "\n";
  }
  io::write_file(dir / "summary.csv", summary);
  out << summary;
  for (auto kind : {plot::PlotKind::accuracy_vs_lambda, plot::PlotKind::accuracy_vs_mu}) {
    try {
      plot::emit_plot(rows, kind, dir / (plot::to_string(kind) + ".svg"));
    } catch (const EmptyResults&) {
    }
  }
  return check_strict(c, rows, err);
}

int cmd_noise(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(c, keys({io::solver_keys(), kGenKeys, kGridKeys, {"C", "intercept", "levels"}}));
  harness::NoiseSpec spec;
  spec.base = classification_spec(cfg, c);
  spec.levels = cfg.get_list("levels", spec.levels);
  std::vector<std::string> warnings;
  const auto rows = harness::run_noise_sweep(spec, &warnings);
  for (const auto& w : warnings) log(err, "warning: " + w);
  const fs::path dir = c.out;
  io::write_file(dir / "results.csv", harness::to_csv(rows));
  const auto table = harness::noise_table_csv(harness::noise_table(rows));
  io::write_file(dir / "noise.csv", table);
  out << table;
  plot::emit_plot(rows, plot::PlotKind::accuracy_vs_noise, dir / "accuracy_vs_noise.svg");
  return check_strict(c, rows, err);
}

STParams st_params(const Config& cfg) {
  STParams p;
  p.lambda1 = cfg.get("lambda1", 0.5);
  p.mu1 = cfg.get("mu1", 0.8);
  p.lambda2 = cfg.get("lambda2", 0.5);
  p.mu2 = cfg.get("mu2", 0.5);
  p.rho1 = cfg.get("rho1", p.rho1);
  p.rho2 = cfg.get("rho2", p.rho2);
  p.p = cfg.get("p", p.p);
  p.window = cfg.get("window", p.window);
  p.eps_primal = cfg.get("eps_primal", p.eps_primal);
  p.eps_dual = cfg.get("eps_dual", p.eps_dual);
  p.eps_inner = cfg.get("eps_inner", p.eps_inner);
  p.max_outer_iters = cfg.get("max_outer_iters", p.max_outer_iters);
  p.max_inner_iters = cfg.get("max_inner_iters", p.max_inner_iters);
  p.validate();
  return p;
}

int cmd_temporal(const Common& c, const std::string& input, const std::string& test_dir, std::ostream& out,
                 std::ostream& err) {
  const std::set<std::string> st_keys = {"lambda1", "mu1", "lambda2", "mu2", "rho1", "rho2", "p", "window",
                                         "eps_primal", "eps_dual", "eps_inner", "max_outer_iters",
                                         "max_inner_iters", "variants", "c_ridge", "infer_k", "tune",
                                         "seeds", "seed_list"};
  const auto cfg = load_config(c, keys({st_keys, kDriftKeys}));
  harness::TemporalSpec spec;
  spec.base = st_params(cfg);
  spec.ridge_c = cfg.get("c_ridge", spec.ridge_c);
  spec.infer_k = cfg.get("infer_k", spec.infer_k);
  spec.jobs = c.jobs;
  if (cfg.has("variants")) {
    spec.variants.clear();
    std::istringstream in(cfg.get("variants", std::string()));
    std::string item;
    while (std::getline(in, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) spec.variants.push_back(parse_variant(item));
    }
  }
  for (auto v : spec.variants) {
    if (v == TemporalVariant::none) continue;
    spec.temporal[v] = {spec.base.lambda2, v == TemporalVariant::st_danr ? spec.base.mu2 : 1.0};
  }
  const fs::path dir = c.out;

  if (!input.empty()) {
    if (test_dir.empty()) throw InvalidInput("temporal --input needs --test with held-out snapshot files");
    harness::TemporalData data;
    data.train = io::load_temporal(input);
    const auto& first = data.train.snapshots.front();
    if (!first.has_coords()) throw InvalidInput("training snapshots need node coordinates");
    data.train_coords = first.coords;
    for (int t = 0; t < data.train.snapshot_count(); ++t) {
      const auto g = io::load_graph(fs::path(test_dir) / io::snapshot_name(t));
      if (!g.has_coords()) throw InvalidInput("test snapshots need coordinates");
      if (t == 0) data.test_coords = g.coords;
      data.test.push_back(g.payloads);
    }
    const auto scaler = harness::Standardizer::fit(data.train);
    const auto std_data = harness::standardize(data);
    json scaling;
    scaling["feature_mean"] = io::vector_json(scaler.feature_mean);
    scaling["feature_scale"] = io::vector_json(scaler.feature_scale);
    scaling["target_mean"] = scaler.target_mean;
    scaling["target_scale"] = scaler.target_scale;
    write_json(dir / "models" / "standardization.json", scaling);
    std::vector<harness::EvalRecord> rows;
    std::string metrics = "snapshot,mse_or_accuracy,temporal_variant\n";
    for (auto v : spec.variants) {
      StreamResult models;
      auto part = harness::run_temporal_variant(spec, std_data, 0, v, &models);
      for (const auto& r : part) {
        metrics += std::to_string(r.snapshot + 1) + "," + io::format_double(r.value) + "," + r.mode + "\n";
      }
      for (std::size_t t = 0; t < models.x.size(); ++t) {
        json doc;
        doc["snapshot"] = t + 1;
        doc["variant"] = to_string(v);
        doc["x"] = io::matrix_rows(models.x[t].transpose());
        write_json(dir / "models" / to_string(v) / io::snapshot_name(static_cast<int>(t)), doc);
      }
      rows.insert(rows.end(), part.begin(), part.end());
    }
    io::write_file(dir / "metrics.csv", metrics);
    io::write_file(dir / "results.csv", harness::to_csv(rows));
    out << harness::temporal_table_csv(rows, data.train.snapshot_count(), spec.variants);
    return check_strict(c, rows, err);
  }

  spec.gen = drift_params(cfg, 1);
  spec.seeds = seed_list(cfg, c, 10);
  if (cfg.get("tune", true)) {
    log(err, "tuning temporal penalties on seeds 1001-1005");
    spec = harness::tune_temporal(spec, {1001, 1002, 1003, 1004, 1005}, {0.05, 0.1, 0.2, 0.5, 1.0, 2.0},
                                  {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0}, {0.3, 0.5, 0.7, 0.9});
  }
  json tuned;
  tuned["lambda1"] = spec.base.lambda1;
  for (const auto& [v, lm] : spec.temporal) tuned[to_string(v)] = {{"lambda2", lm.first}, {"mu2", lm.second}};
  write_json(dir / "params.json", tuned);
  const auto rows = harness::run_temporal_experiment(spec);
  io::write_file(dir / "results.csv", harness::to_csv(rows));
  const auto table = harness::temporal_table_csv(rows, spec.gen.snapshots, spec.variants);
  io::write_file(dir / "table.csv", table);
  out << table;
  plot::emit_plot(rows, plot::PlotKind::mse_vs_snapshot, dir / "mse_vs_snapshot.svg");
  return check_strict(c, rows, err);
}

int cmd_scale(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(c, keys({io::solver_keys(), {"sizes", "degree", "C"}}));
  harness::ScaleSpec spec;
  spec.seed = c.seed.value_or(1);
  SolverParams base;
  base.lambda = 0.5;
  base.mu = 0.6;
  spec.solver = io::solver_params(cfg, base);
  spec.solver.threads = std::max(spec.solver.threads, c.jobs);
  spec.degree = cfg.get("degree", spec.degree);
  spec.C = cfg.get("C", spec.C);
  if (cfg.has("sizes")) {
    spec.sizes.clear();
    for (double s : cfg.get_list("sizes", {})) spec.sizes.push_back(static_cast<int>(s));
  }
  std::vector<std::string> warnings;
  const auto rows = harness::run_scalability(spec, &warnings);
  for (const auto& w : warnings) log(err, "warning: " + w);
  std::string csv = "nodes,seconds,iterations,converged\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.nodes) + "," + io::format_double(r.value) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "\n";
  }
  const fs::path dir = c.out;
  io::write_file(dir / "scale.csv", csv);
  out << csv;
  return check_strict(c, rows, err);
}

int cmd_plot(const Common& c, const std::string& input, const std::string& kind, std::ostream& out) {
  if (input.empty()) throw InvalidInput("plot needs --input results.csv");
  const auto rows = harness::from_csv(io::read_file(input));
  const auto k = plot::parse_kind(kind);
  const fs::path path = fs::path(c.out) / (plot::to_string(k) + ".svg");
  plot::emit_plot(rows, k, path);
  out << "wrote " << path.string() << "\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrepancy-aware network regularization: solver and experiments", "danr_cli"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key = value configuration file");
    sub->add_option("--seed", common.seed, "random seed (first seed for multi-seed runs)");
    sub->add_option("--mode", common.mode, "danr, nl, local or global");
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", common.strict, "exit with status 2 when a solve does not converge");
  };
  std::string input, points, test, kind = "sbm", plot_kind;

  auto* gen = app.add_subcommand("gen", "generate a synthetic network (sbm) or drift sequence (drift)");
  add_common(gen);
  gen->add_option("--kind", kind, "sbm or drift")->capture_default_str();
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem and write a JSON report");
  add_common(solve_cmd);
  solve_cmd->add_option("--input", input, "graph JSON");
  solve_cmd->add_option("--points", points, "points CSV (builds a kNN graph)");
  solve_cmd->add_option("--test", test, "held-out points CSV scored by neighbour averaging");
  auto* sweep = app.add_subcommand("sweep", "lambda x mu classification sweep");
  add_common(sweep);
  auto* noise = app.add_subcommand("noise", "accuracy vs fraction of malicious edges");
  add_common(noise);
  auto* temporal = app.add_subcommand("temporal", "streaming comparison of temporal regularizers");
  add_common(temporal);
  temporal->add_option("--input", input, "temporal directory (default: synthetic drift data)");
  temporal->add_option("--test", test, "directory of held-out snapshot files");
  auto* scale = app.add_subcommand("scale", "runtime vs graph size at constant degree");
  add_common(scale);
  auto* plot_cmd = app.add_subcommand("plot", "render a results CSV as SVG");
  add_common(plot_cmd);
  plot_cmd->add_option("--input", input, "results.csv from sweep, noise or temporal")->required();
  plot_cmd->add_option("--kind", plot_kind, "accuracy_vs_lambda, accuracy_vs_mu, accuracy_vs_noise or mse_vs_snapshot")
      ->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return ok;
    }
    err << e.what() << "\n" << app.help();
    return invalid_input;
  }
  try {
    if (!common.mode.empty()) parse_mode(common.mode);
    if (*gen) return cmd_gen(common, kind, out, err);
    if (*solve_cmd) return cmd_solve(common, input, points, test, out, err);
    if (*sweep) return cmd_sweep(common, out, err);
    if (*noise) return cmd_noise(common, out, err);
    if (*temporal) return cmd_temporal(common, input, test, out, err);
    if (*scale) return cmd_scale(common, out, err);
    if (*plot_cmd) return cmd_plot(common, input, plot_kind, out);
  } catch (const StrictFailure& e) {
    err << "error: " << e.what() << "\n";
    return solver_failure;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return solver_failure;
  }
  return invalid_input;
}

}  // namespace danr::cli
