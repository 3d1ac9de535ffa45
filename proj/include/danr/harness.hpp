#pragma once

// Experiment harness: parameter grids, the synthetic classification sweep,
// the malicious-edge noise sweep, the streaming temporal comparison and the
// scalability protocol. Every experiment produces flat EvalRecord rows.

#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/io.hpp>
#include <danr/objectives.hpp>
#include <danr/solver.hpp>
#include <danr/st_solver.hpp>
#include <danr/synthetic.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace danr::harness {

/// start, start*ratio, ... up to and including the first value >= end.
inline std::vector<double> lambda_grid(double start = 1e-3, double ratio = 1.3, double end = 1e2) {
  if (!(start > 0.0) || !(ratio > 1.0) || !(end >= start)) throw InvalidInput("invalid lambda schedule");
  std::vector<double> g;
  for (int n = 0;; ++n) {
    const double v = start * std::pow(ratio, n);
    g.push_back(v);
    if (v >= end) break;
  }
  return g;
}

/// start, start+step, ... up to end (inclusive, values rounded to 1e-12).
inline std::vector<double> mu_grid(double start = 0.3, double step = 0.02, double end = 1.0) {
  if (!(step > 0.0) || !(end >= start)) throw InvalidInput("invalid mu schedule");
  std::vector<double> g;
  const auto count = static_cast<int>(std::floor((end - start) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) g.push_back(std::round((start + i * step) * 1e12) / 1e12);
  return g;
}

struct EvalRecord {
  std::string experiment;  // classification | noise | temporal | scale
  std::uint64_t seed = 0;
  std::string mode;        // solver mode or temporal variant
  double lambda = 0.0;     // grid value (network penalty for danr and nl)
  double mu = 1.0;
  double noise = 0.0;
  int snapshot = -1;
  int nodes = 0;
  std::string metric;      // accuracy | mse | seconds
  double value = 0.0;
  int clusters = 0;
  int nonzero_alpha = 0;
  int iterations = 0;
  bool converged = true;
  double runtime = 0.0;
  std::string error;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

inline const char* kCsvHeader =
    "experiment,seed,mode,lambda,mu,noise,snapshot,nodes,metric,value,clusters,nonzero_alpha,"
    "iterations,converged,runtime,error";

inline std::string to_csv(const std::vector<EvalRecord>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += io::csv_field(r.experiment) + "," + std::to_string(r.seed) + "," + io::csv_field(r.mode) + "," +
           io::format_double(r.lambda) + "," + io::format_double(r.mu) + "," + io::format_double(r.noise) +
           "," + std::to_string(r.snapshot) + "," + std::to_string(r.nodes) + "," + io::csv_field(r.metric) +
           "," + io::format_double(r.value) + "," + std::to_string(r.clusters) + "," +
           std::to_string(r.nonzero_alpha) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "," + io::format_double(r.runtime) + "," + io::csv_field(r.error) + "\n";
  }
  return out;
}

inline std::vector<EvalRecord> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || io::split_csv_line(line).size() != 16) {
    throw InvalidInput("results file does not start with the expected header");
  }
  std::vector<EvalRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 16) throw InvalidInput("results row has " + std::to_string(f.size()) + " fields");
    EvalRecord r;
    auto as_int = [&](const std::string& s, const char* what) {
      return static_cast<int>(io::parse_double(s, what));
    };
    r.experiment = f[0];
    r.seed = std::stoull(f[1]);
    r.mode = f[2];
    r.lambda = io::parse_double(f[3], "lambda");
    r.mu = io::parse_double(f[4], "mu");
    r.noise = io::parse_double(f[5], "noise");
    r.snapshot = as_int(f[6], "snapshot");
    r.nodes = as_int(f[7], "nodes");
    r.metric = f[8];
    r.value = io::parse_double(f[9], "value");
    r.clusters = as_int(f[10], "clusters");
    r.nonzero_alpha = as_int(f[11], "nonzero_alpha");
    r.iterations = as_int(f[12], "iterations");
    r.converged = f[13] == "1";
    r.runtime = io::parse_double(f[14], "runtime");
    r.error = f[15];
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

// Runs job(i) for i in [0, n) on up to `jobs` workers; results are stored
// by index so the merge order never depends on scheduling.
template <class Job>
void run_jobs(int n, int jobs, Job&& job) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      job(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  (void)jobs;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline int nonzero_groups(const Matrix& m, double tol = 1e-6) {
  int n = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) n += m.col(c).norm() > tol ? 1 : 0;
  return n;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Synthetic classification

struct ClassificationSpec {
  SyntheticParams gen;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> lambdas = lambda_grid();
  std::vector<double> mus = mu_grid();
  std::vector<Mode> modes = {Mode::local, Mode::global, Mode::network_lasso, Mode::danr};
  double C = 0.75;
  bool intercept = true;
  int test_per_node = 10;
  SolverParams solver;  // p, rho and tolerances; lambda, mu and mode are set per cell
  int jobs = 1;
};

struct ClassificationInstance {
  SyntheticNetwork net;
  std::vector<NodePayload> test;
  std::vector<NodeObjective> objectives;
  double achieved_noise = -1.0;
  std::string warning;
};

/// Network, test pairs and SVM objectives for one seed. With noise >= 0
/// the inter-community edges are replaced by that fraction of malicious ones.
inline ClassificationInstance make_instance(const ClassificationSpec& spec, std::uint64_t seed,
                                            double noise = -1.0) {
  SyntheticParams gp = spec.gen;
  gp.seed = seed;
  ClassificationInstance inst;
  inst.net = gen_synthetic(gp);
  inst.test = gen_test_pairs(inst.net, spec.test_per_node);
  if (noise >= 0.0) {
    auto rw = rewire_noise(inst.net, noise, seed);
    inst.net = std::move(rw.net);
    inst.achieved_noise = rw.achieved_noise;
    inst.warning = rw.warning;
  }
  for (const auto& p : inst.net.graph.payloads) {
    inst.objectives.push_back(NodeObjective::svm(p, spec.C, spec.intercept));
  }
  return inst;
}

/// Fraction of test pairs with sign(w . x_w + b) equal to the label.
inline double accuracy(const Matrix& x, const std::vector<NodePayload>& test, bool intercept) {
  long ok = 0;
  long total = 0;
  for (std::size_t j = 0; j < test.size(); ++j) {
    const auto& p = test[j];
    const auto d = p.features.cols();
    const Vector xj = x.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      double v = p.features.row(l).dot(xj.head(d));
      if (intercept) v += xj[d];
      ok += sign_label(v) == p.targets[l] ? 1 : 0;
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(ok) / static_cast<double>(total) : 0.0;
}

inline SolverParams cell_params(const ClassificationSpec& spec, Mode mode, double lambda, double mu) {
  SolverParams p = spec.solver;
  p.mode = mode;
  p.threads = 1;
  p.mu = mode == Mode::danr ? mu : 1.0;
  // danr runs at lambda / mu: fusion weight lambda at every grid value
  p.lambda = mode == Mode::danr ? lambda / mu : lambda;
  if (mode == Mode::local || mode == Mode::global) p.lambda = 0.0;
  return p;
}

/// One mode/mu chain over the lambda grid (warm-started along lambda),
/// stopping after index `upto`. local and global give a single row.
inline std::vector<EvalRecord> run_chain(const ClassificationSpec& spec, const ClassificationInstance& inst,
                                         std::uint64_t seed, Mode mode, double mu,
                                         const std::string& experiment = "classification",
                                         double noise = 0.0, std::size_t upto = SIZE_MAX) {
  std::vector<EvalRecord> rows;
  auto base = [&](double lambda) {
    EvalRecord r;
    r.experiment = experiment;
    r.seed = seed;
    r.mode = to_string(mode);
    r.lambda = lambda;
    r.mu = mode == Mode::danr ? mu : 1.0;
    r.noise = noise;
    r.nodes = inst.net.graph.node_count;
    r.metric = "accuracy";
    return r;
  };
  auto fill = [&](EvalRecord& r, const SolveReport& rep, double secs) {
    r.value = accuracy(rep.x, inst.test, spec.intercept);
    r.clusters = cluster_count(extract_clusters(inst.net.graph, rep.x, default_cluster_tolerance(rep.x)));
    r.nonzero_alpha = detail::nonzero_groups(rep.alpha);
    r.iterations = rep.iterations;
    r.converged = rep.converged;
    r.runtime = secs;
  };
  if (mode == Mode::local || mode == Mode::global) {
    EvalRecord r = base(0.0);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto rep = solve(inst.net.graph, inst.objectives, cell_params(spec, mode, 0.0, 1.0));
      fill(r, rep, detail::seconds_since(t0));
    } catch (const std::exception& ex) {
      r.error = ex.what();
      r.converged = false;
    }
    rows.push_back(std::move(r));
    return rows;
  }
  SolverState warm;
  bool have = false;
  for (std::size_t n = 0; n < spec.lambdas.size() && n <= upto; ++n) {
    EvalRecord r = base(spec.lambdas[n]);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto rep = solve(inst.net.graph, inst.objectives, cell_params(spec, mode, spec.lambdas[n], mu),
                       have ? &warm : nullptr);
      fill(r, rep, detail::seconds_since(t0));
      warm = std::move(rep.state);
      have = true;
    } catch (const std::exception& ex) {
      r.error = ex.what();
      r.converged = false;
      have = false;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

struct ChainJob {
  std::uint64_t seed;
  Mode mode;
  double mu;
  double noise;
};

inline std::vector<ChainJob> chain_jobs(const ClassificationSpec& spec, const std::vector<double>& noise_levels) {
  std::vector<ChainJob> jobs;
  for (double noise : noise_levels) {
    for (auto seed : spec.seeds) {
      for (Mode m : spec.modes) {
        if (m == Mode::danr) {
          for (double mu : spec.mus) jobs.push_back({seed, m, mu, noise});
        } else {
          jobs.push_back({seed, m, 1.0, noise});
        }
      }
    }
  }
  return jobs;
}

inline std::vector<EvalRecord> run_jobs(const ClassificationSpec& spec, const std::vector<ChainJob>& jobs,
                                        const std::string& experiment, std::vector<std::string>* warnings) {
  std::vector<std::vector<EvalRecord>> parts(jobs.size());
  std::vector<std::string> notes(jobs.size());
  detail::run_jobs(static_cast<int>(jobs.size()), spec.jobs, [&](int i) {
    const auto& jb = jobs[static_cast<std::size_t>(i)];
    const auto inst = make_instance(spec, jb.seed, experiment == "noise" ? jb.noise : -1.0);
    notes[static_cast<std::size_t>(i)] = inst.warning;
    parts[static_cast<std::size_t>(i)] = run_chain(spec, inst, jb.seed, jb.mode, jb.mu, experiment, jb.noise);
  });
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.insert(out.end(), parts[i].begin(), parts[i].end());
    if (warnings && !notes[i].empty() &&
        std::find(warnings->begin(), warnings->end(), notes[i]) == warnings->end()) {
      warnings->push_back(notes[i]);
    }
  }
  return out;
}

/// Every (seed, mode, lambda, mu) cell of the classification study.
inline std::vector<EvalRecord> run_classification_experiment(const ClassificationSpec& spec) {
  return run_jobs(spec, chain_jobs(spec, {0.0}), "classification", nullptr);
}

/// Recomputes one cell of run_classification_experiment by replaying its
/// warm-start chain; matches the sweep's row exactly (runtime aside).
inline EvalRecord run_cell(const ClassificationSpec& spec, std::uint64_t seed, Mode mode,
                           std::size_t lambda_index, double mu, double noise = -1.0) {
  const auto inst = make_instance(spec, seed, noise);
  const std::string experiment = noise >= 0.0 ? "noise" : "classification";
  auto rows = run_chain(spec, inst, seed, mode, mu, experiment, std::max(0.0, noise), lambda_index);
  return rows.back();
}

/// Rows matching a predicate.
template <class Pred>
std::vector<EvalRecord> select(const std::vector<EvalRecord>& rows, Pred&& pred) {
  std::vector<EvalRecord> out;
  for (const auto& r : rows) {
    if (pred(r)) out.push_back(r);
  }
  return out;
}

/// Accuracy per lambda for one seed: the network-lasso curve, or the best
/// danr accuracy over mu at each lambda.
inline std::map<double, double> accuracy_curve(const std::vector<EvalRecord>& rows, std::uint64_t seed,
                                               const std::string& mode, double noise = -1.0) {
  std::map<double, double> curve;
  for (const auto& r : rows) {
    if (r.seed != seed || r.mode != mode || r.metric != "accuracy") continue;
    if (noise >= 0.0 && r.noise != noise) continue;
    auto [it, fresh] = curve.emplace(r.lambda, r.value);
    if (!fresh) it->second = std::max(it->second, r.value);
  }
  return curve;
}

struct ClassificationSummary {
  std::uint64_t seed = 0;
  double local = 0.0;
  double global = 0.0;
  double nl_peak = 0.0;
  double nl_peak_lambda = 0.0;
  double nl_drop = 0.0;  // largest one-step fall of the nl curve after its peak
  double danr_peak = 0.0;
  double danr_peak_lambda = 0.0;
};

inline ClassificationSummary summarize(const std::vector<EvalRecord>& rows, std::uint64_t seed,
                                       double noise = -1.0) {
  ClassificationSummary s;
  s.seed = seed;
  for (const auto& r : rows) {
    if (r.seed != seed || (noise >= 0.0 && r.noise != noise)) continue;
    if (r.mode == "local") s.local = r.value;
    if (r.mode == "global") s.global = r.value;
  }
  const auto nl = accuracy_curve(rows, seed, "nl", noise);
  std::vector<std::pair<double, double>> pts(nl.begin(), nl.end());
  std::size_t peak = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].second > pts[peak].second) peak = i;
  }
  if (!pts.empty()) {
    s.nl_peak = pts[peak].second;
    s.nl_peak_lambda = pts[peak].first;
    for (std::size_t i = peak; i + 1 < pts.size(); ++i) {
      s.nl_drop = std::max(s.nl_drop, pts[i].second - pts[i + 1].second);
    }
  }
  for (const auto& [lam, acc] : accuracy_curve(rows, seed, "danr", noise)) {
    if (acc > s.danr_peak) {
      s.danr_peak = acc;
      s.danr_peak_lambda = lam;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Noise sweep

struct NoiseSpec {
  ClassificationSpec base;
  std::vector<double> levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
};

/// Per (noise, seed, mode, lambda, mu) accuracy on rewired networks.
inline std::vector<EvalRecord> run_noise_sweep(NoiseSpec spec, std::vector<std::string>* warnings = nullptr) {
  for (double n : spec.levels) {
    if (!(n >= 0.0 && n <= 0.6)) throw InvalidInput("noise levels must lie in [0, 0.6]");
  }
  spec.base.modes.erase(std::remove_if(spec.base.modes.begin(), spec.base.modes.end(),
                                       [](Mode m) { return m == Mode::local || m == Mode::global; }),
                        spec.base.modes.end());
  return run_jobs(spec.base, chain_jobs(spec.base, spec.levels), "noise", warnings);
}

struct NoisePoint {
  double noise = 0.0;
  std::string mode;
  double mean = 0.0;
  double stddev = 0.0;
  int seeds = 0;
};

/// Best accuracy over (lambda, mu) per seed, averaged over seeds.
inline std::vector<NoisePoint> noise_table(const std::vector<EvalRecord>& rows) {
  std::map<std::pair<double, std::string>, std::map<std::uint64_t, double>> best;
  for (const auto& r : rows) {
    if (r.experiment != "noise" || r.metric != "accuracy") continue;
    auto& slot = best[{r.noise, r.mode}];
    auto [it, fresh] = slot.emplace(r.seed, r.value);
    if (!fresh) it->second = std::max(it->second, r.value);
  }
  std::vector<NoisePoint> out;
  for (const auto& [key, per_seed] : best) {
    NoisePoint pt;
    pt.noise = key.first;
    pt.mode = key.second;
    pt.seeds = static_cast<int>(per_seed.size());
    for (const auto& [s, v] : per_seed) pt.mean += v;
    pt.mean /= pt.seeds;
    for (const auto& [s, v] : per_seed) pt.stddev += (v - pt.mean) * (v - pt.mean);
    pt.stddev = pt.seeds > 1 ? std::sqrt(pt.stddev / (pt.seeds - 1)) : 0.0;
    out.push_back(pt);
  }
  return out;
}

inline std::string noise_table_csv(const std::vector<NoisePoint>& pts) {
  std::string out = "noise,mode,mean_accuracy,std_accuracy,seeds\n";
  for (const auto& p : pts) {
    out += io::format_double(p.noise) + "," + p.mode + "," + io::format_double(p.mean) + "," +
           io::format_double(p.stddev) + "," + std::to_string(p.seeds) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Temporal regression

/// A regression snapshot sequence with held-out test locations.
struct TemporalData {
  TemporalGraph train;
  Matrix train_coords;
  Matrix test_coords;
  std::vector<std::vector<NodePayload>> test;  // [t][test node]
};

/// Zero-mean, unit-variance scaling of features and targets, fitted on
/// the training observations of every snapshot.
struct Standardizer {
  Vector feature_mean;
  Vector feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;

  static Standardizer fit(const TemporalGraph& tg) {
    Standardizer s;
    Eigen::Index d = 0;
    long n = 0;
    for (const auto& g : tg.snapshots) d = std::max(d, g.feature_dim());
    s.feature_mean = Vector::Zero(d);
    Vector sq = Vector::Zero(d);
    double ysum = 0.0;
    double ysq = 0.0;
    for (const auto& g : tg.snapshots) {
      for (const auto& p : g.payloads) {
        for (Eigen::Index l = 0; l < p.size(); ++l) {
          s.feature_mean += p.features.row(l).transpose();
          sq += p.features.row(l).transpose().cwiseAbs2();
          ysum += p.targets[l];
          ysq += p.targets[l] * p.targets[l];
          ++n;
        }
      }
    }
    if (n == 0) throw InvalidInput("no training observations to standardize");
    const double nn = static_cast<double>(n);
    s.feature_mean /= nn;
    s.feature_scale = (sq / nn - s.feature_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(s.feature_scale[i] > 1e-12)) s.feature_scale[i] = 1.0;
    }
    s.target_mean = ysum / nn;
    s.target_scale = std::sqrt(std::max(0.0, ysq / nn - s.target_mean * s.target_mean));
    if (!(s.target_scale > 1e-12)) s.target_scale = 1.0;
    return s;
  }

  NodePayload apply(const NodePayload& p) const {
    NodePayload out;
    out.features = (p.features.rowwise() - feature_mean.transpose()).array().rowwise() /
                   feature_scale.transpose().array();
    out.targets = (p.targets.array() - target_mean) / target_scale;
    return out;
  }
};

inline TemporalData standardize(const TemporalData& data) {
  const auto s = Standardizer::fit(data.train);
  TemporalData out = data;
  for (auto& g : out.train.snapshots) {
    for (auto& p : g.payloads) {
      if (!p.empty()) p = s.apply(p);
    }
  }
  for (auto& row : out.test) {
    for (auto& p : row) {
      if (!p.empty()) p = s.apply(p);
    }
  }
  return out;
}

inline TemporalData drift_data(const DriftParams& dp) {
  auto seq = gen_drift_sequence(dp);
  return {std::move(seq.train), std::move(seq.train_coords), std::move(seq.test_coords), std::move(seq.test)};
}

struct TemporalSpec {
  DriftParams gen;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<TemporalVariant> variants = {TemporalVariant::none, TemporalVariant::t_son,
                                           TemporalVariant::t_sos, TemporalVariant::st_danr};
  STParams base;                                         // spatial terms and tolerances
  std::map<TemporalVariant, std::pair<double, double>> temporal;  // (lambda2, mu2) per variant
  double ridge_c = 0.1;
  int infer_k = 5;
  int jobs = 1;
};

inline STParams variant_params(const TemporalSpec& spec, TemporalVariant v) {
  STParams p = spec.base;
  p.variant = v;
  p.threads = 1;
  if (auto it = spec.temporal.find(v); it != spec.temporal.end()) {
    p.lambda2 = it->second.first;
    p.mu2 = it->second.second;
  }
  if (v == TemporalVariant::none) p.lambda2 = 0.0;
  return p;
}

/// Test MSE of per-location models inferred by neighbour averaging.
inline double test_mse(const Matrix& train_coords, const Matrix& x, const Matrix& test_coords,
                       const std::vector<NodePayload>& test, int k) {
  const Matrix models = predict_unseen(train_coords, x, test_coords, k, InferenceStrategy::average);
  double se = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& p = test[i];
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      const double r = p.features.row(l).dot(models.col(static_cast<Eigen::Index>(i))) - p.targets[l];
      se += r * r;
      ++n;
    }
  }
  return n > 0 ? se / static_cast<double>(n) : 0.0;
}

/// Streams one (standardized) dataset with one variant and scores every
/// snapshot. Snapshot 0 has no temporal term and is only reported for
/// variant none.
inline std::vector<EvalRecord> run_temporal_variant(const TemporalSpec& spec, const TemporalData& data,
                                                    std::uint64_t seed, TemporalVariant v,
                                                    StreamResult* models = nullptr) {
  STObjectives objs;
  for (const auto& g : data.train.snapshots) {
    std::vector<NodeObjective> row;
    const auto d = g.feature_dim();
    for (const auto& p : g.payloads) {
      row.push_back(p.empty() ? NodeObjective::zero(d) : NodeObjective::ridge(p, spec.ridge_c));
    }
    objs.push_back(std::move(row));
  }
  const auto params = variant_params(spec, v);
  std::vector<EvalRecord> rows;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = stream(data.train, objs, params);
  const double secs = detail::seconds_since(t0);
  for (int t = 0; t < data.train.snapshot_count(); ++t) {
    if (t == 0 && v != TemporalVariant::none) continue;
    EvalRecord r;
    r.experiment = "temporal";
    r.seed = seed;
    r.mode = to_string(v);
    r.lambda = params.lambda1;
    r.mu = params.mu1;
    r.snapshot = t;
    r.nodes = data.train.node_count();
    r.metric = "mse";
    r.value = test_mse(data.train_coords, res.x[static_cast<std::size_t>(t)], data.test_coords,
                       data.test[static_cast<std::size_t>(t)], spec.infer_k);
    std::size_t w = 0;
    int first = 0;
    for (; w < res.reports.size(); ++w) {
      const int cnt = static_cast<int>(res.reports[w].x.size());
      if (t < first + cnt) break;
      first += cnt;
    }
    r.iterations = res.reports[w].iterations;
    r.converged = res.reports[w].converged;
    r.nonzero_alpha = detail::nonzero_groups(res.reports[w].boundary_beta);
    r.runtime = secs;
    rows.push_back(std::move(r));
  }
  if (models) *models = res;
  return rows;
}

/// Synthetic drifting-regions study: every seed x variant, streamed.
inline std::vector<EvalRecord> run_temporal_experiment(const TemporalSpec& spec) {
  const int nv = static_cast<int>(spec.variants.size());
  const int n = static_cast<int>(spec.seeds.size()) * nv;
  std::vector<std::vector<EvalRecord>> parts(static_cast<std::size_t>(n));
  detail::run_jobs(n, spec.jobs, [&](int i) {
    const auto seed = spec.seeds[static_cast<std::size_t>(i / nv)];
    const auto v = spec.variants[static_cast<std::size_t>(i % nv)];
    DriftParams dp = spec.gen;
    dp.seed = seed;
    parts[static_cast<std::size_t>(i)] = run_temporal_variant(spec, standardize(drift_data(dp)), seed, v);
  });
  std::vector<EvalRecord> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// Mean MSE over `seeds` and snapshots [first, last] for one variant.
inline double mean_mse(const std::vector<EvalRecord>& rows, const std::string& variant, int first, int last) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.experiment == "temporal" && r.mode == variant && r.snapshot >= first && r.snapshot <= last) {
      s += r.value;
      ++n;
    }
  }
  return n > 0 ? s / n : 0.0;
}

/// Picks lambda1 for the spatial problem (variant none), then (lambda2,
/// mu2) per temporal variant, minimizing mean MSE over snapshots >= 1 on
/// the tuning seeds.
inline TemporalSpec tune_temporal(TemporalSpec spec, const std::vector<std::uint64_t>& tuning_seeds,
                                  const std::vector<double>& lambda1_grid,
                                  const std::vector<double>& lambda2_grid,
                                  const std::vector<double>& mu2_grid) {
  TemporalSpec probe = spec;
  probe.seeds = tuning_seeds;
  auto score = [&](const TemporalSpec& s, TemporalVariant v) {
    TemporalSpec one = s;
    one.variants = {v};
    return mean_mse(run_temporal_experiment(one), to_string(v), 1, s.gen.snapshots - 1);
  };
  double best = INFINITY;
  double best_l1 = spec.base.lambda1;
  for (double l1 : lambda1_grid) {
    probe.base.lambda1 = l1;
    const double m = score(probe, TemporalVariant::none);
    if (m < best) {
      best = m;
      best_l1 = l1;
    }
  }
  spec.base.lambda1 = best_l1;
  probe.base.lambda1 = best_l1;
  for (auto v : spec.variants) {
    if (v == TemporalVariant::none) continue;
    double vbest = INFINITY;
    std::pair<double, double> choice{0.0, 1.0};
    const std::vector<double> mus = v == TemporalVariant::st_danr ? mu2_grid : std::vector<double>{1.0};
    for (double l2 : lambda2_grid) {
      for (double m2 : mus) {
        // st_danr runs at l2 / mu2, as in cell_params
        const std::pair<double, double> cand{l2 / m2, m2};
        probe.temporal[v] = cand;
        const double m = score(probe, v);
        if (m < vbest) {
          vbest = m;
          choice = cand;
        }
      }
    }
    spec.temporal[v] = choice;
  }
  return spec;
}

/// Variant x snapshot table of mean test MSE; temporal variants show N/A
/// on the first snapshot.
inline std::string temporal_table_csv(const std::vector<EvalRecord>& rows, int snapshots,
                                      const std::vector<TemporalVariant>& variants) {
  std::string out = "variant";
  for (int t = 0; t < snapshots; ++t) out += ",snapshot_" + std::to_string(t + 1);
  out += "\n";
  for (auto v : variants) {
    out += to_string(v);
    for (int t = 0; t < snapshots; ++t) {
      if (t == 0 && v != TemporalVariant::none) {
        out += ",N/A";
        continue;
      }
      out += "," + io::format_double(mean_mse(rows, to_string(v), t, t));
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalability

struct ScaleSpec {
  std::vector<int> sizes = {100, 500, 1000};
  double degree = 20.0;
  std::uint64_t seed = 1;
  SolverParams solver;
  double C = 0.75;
};

/// Sorted sizes without duplicates; duplicates produce a warning.
inline std::vector<int> normalize_sizes(std::vector<int> sizes, std::vector<std::string>* warnings) {
  std::sort(sizes.begin(), sizes.end());
  const auto before = sizes.size();
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.size() != before && warnings) warnings->push_back("duplicate sizes removed");
  for (int s : sizes) {
    if (s < 10) throw InvalidInput("graph sizes must be >= 10");
  }
  return sizes;
}

/// Times one cold solve per size on graphs with a constant expected degree.
inline std::vector<EvalRecord> run_scalability(const ScaleSpec& spec, std::vector<std::string>* warnings = nullptr) {
  std::vector<EvalRecord> rows;
  for (int size : normalize_sizes(spec.sizes, warnings)) {
    const auto gp = scalability_params(size, spec.degree, spec.seed);
    const auto net = gen_synthetic(gp);
    std::vector<NodeObjective> objs;
    for (const auto& p : net.graph.payloads) objs.push_back(NodeObjective::svm(p, spec.C, true));
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = solve(net.graph, objs, spec.solver);
    EvalRecord r;
    r.experiment = "scale";
    r.seed = spec.seed;
    r.mode = to_string(spec.solver.mode);
    r.lambda = spec.solver.lambda;
    r.mu = spec.solver.mu;
    r.nodes = net.graph.node_count;
    r.metric = "seconds";
    r.runtime = detail::seconds_since(t0);
    r.value = r.runtime;
    r.clusters = cluster_count(extract_clusters(net.graph, rep.x, default_cluster_tolerance(rep.x)));
    r.nonzero_alpha = detail::nonzero_groups(rep.alpha);
    r.iterations = rep.iterations;
    r.converged = rep.converged;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace danr::harness
