#pragma once

// Static-network DANR:
//   min_{x, alpha} sum_j f_j(x_j)
//       + lambda mu sum_{(j,k)} w_jk ||x_j + alpha_jk - x_k||_2
//       + lambda (1 - mu) sum_{(j,k)} ||alpha_jk||_p
// solved by consensus ADMM, plus the network-lasso, local and global
// reference modes.

#include <danr/engine.hpp>
#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/objectives.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace danr {

enum class Mode { danr, network_lasso, local, global };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::danr: return "danr";
    case Mode::network_lasso: return "nl";
    case Mode::local: return "local";
    case Mode::global: return "global";
  }
  return "danr";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "danr") return Mode::danr;
  if (s == "nl" || s == "network_lasso") return Mode::network_lasso;
  if (s == "local") return Mode::local;
  if (s == "global") return Mode::global;
  throw InvalidInput("unknown mode '" + s + "' (expected danr, nl, local or global)");
}

struct SolverParams {
  double lambda = 0.0;
  double mu = 0.5;
  double p = 3.0;
  double rho1 = 1.0;
  double eps_primal = 0.0;  // <= 0: 1e-4 sqrt(2|E| d)
  double eps_dual = 0.0;
  double eps_inner = 1e-6;
  int max_outer_iters = 1000;
  int max_inner_iters = 50;
  Mode mode = Mode::danr;
  bool pin_alpha = false;    // hold alpha at zero (danr mode only; implied by mu = 1)
  bool balance_rho = false;
  int threads = 1;
  engine::InnerMethod inner = engine::InnerMethod::joint;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
    if (!(mu > 0.0 && mu <= 1.0)) throw InvalidInput("mu must lie in (0, 1]");
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p must satisfy 1 < p < inf");
    if (!(rho1 > 0.0) || !std::isfinite(rho1)) throw InvalidInput("rho1 must be positive");
    if (!(eps_inner > 0.0)) throw InvalidInput("eps_inner must be positive");
    if (max_outer_iters < 1 || max_inner_iters < 1) throw InvalidInput("iteration caps must be >= 1");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
  }
};

using SolverState = engine::State;

struct SolveReport {
  Matrix x;      // d x |V|
  Matrix alpha;  // d x |E|, zero outside danr mode
  std::vector<double> objective;
  std::vector<double> r_norm;
  std::vector<double> s_norm;
  int iterations = 0;
  bool converged = false;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  double seconds_x = 0.0;
  double seconds_edge = 0.0;
  double seconds_dual = 0.0;
  long inner_iterations = 0;
  SolverState state;

  double final_objective() const { return objective.empty() ? 0.0 : objective.back(); }
};

/// DANR objective on x with buffers alpha.
inline double danr_objective(const Graph& g, const std::vector<NodeObjective>& objs,
                             const Matrix& x, const Matrix& alpha, const SolverParams& params) {
  double total = 0.0;
  for (int j = 0; j < g.node_count; ++j) total += objs[static_cast<std::size_t>(j)].eval(x.col(j));
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edges[static_cast<std::size_t>(e)];
    const Vector a = alpha.cols() > e ? Vector(alpha.col(e)) : Vector::Zero(x.rows());
    total += params.lambda * params.mu * ed.weight * (x.col(ed.j) + a - x.col(ed.k)).norm();
    total += params.lambda * (1.0 - params.mu) * lp_norm(a, params.p);
  }
  return total;
}

namespace detail {

inline Eigen::Index check_objectives(const Graph& g, const std::vector<NodeObjective>& objs) {
  if (static_cast<int>(objs.size()) != g.node_count) {
    throw InvalidInput("need one objective per node (" + std::to_string(g.node_count) + "), got " +
                       std::to_string(objs.size()));
  }
  if (objs.empty()) throw InvalidInput("graph has no nodes");
  const auto d = objs.front().dim();
  for (const auto& o : objs) {
    if (o.dim() != d) throw DimensionMismatch("node objectives disagree on model dimension");
  }
  if (d < 1) throw InvalidInput("model dimension must be >= 1");
  return d;
}

inline engine::Settings settings_of(const SolverParams& p) {
  engine::Settings s;
  s.p = p.p;
  s.eps_primal = p.eps_primal;
  s.eps_dual = p.eps_dual;
  s.eps_inner = p.eps_inner;
  s.max_outer = p.max_outer_iters;
  s.max_inner = p.max_inner_iters;
  s.balance_rho = p.balance_rho;
  s.threads = p.threads;
  s.inner = p.inner;
  return s;
}

}  // namespace detail

/// ADMM problem for a static graph. Local mode has no couplings.
inline engine::Problem build_problem(const Graph& g, const std::vector<NodeObjective>& objs,
                                     const SolverParams& params) {
  engine::Problem pb;
  pb.dim = detail::check_objectives(g, objs);
  pb.objectives = objs;
  if (params.mode == Mode::local || params.mode == Mode::global) return pb;
  pb.couplings.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    engine::Coupling c;
    c.left = e.j;
    c.right = e.k;
    c.rho = params.rho1;
    if (params.mode == Mode::network_lasso) {
      c.kind = engine::CouplingKind::fused;
      c.c_fuse = params.lambda * e.weight;
    } else {
      c.kind = engine::CouplingKind::buffered;
      c.c_fuse = params.lambda * params.mu * e.weight;
      c.c_buffer = params.lambda * (1.0 - params.mu);
      // mu = 1 leaves alpha unpenalized; it is held at zero instead.
      c.pin_buffer = params.pin_alpha || params.mu >= 1.0;
    }
    pb.couplings.push_back(std::move(c));
  }
  return pb;
}

/// All-zero state for the graph's copy layout.
inline SolverState init_state(const Graph& g, const SolverParams& params, Eigen::Index dim) {
  if (dim < 1) throw InvalidInput("dim must be >= 1");
  std::vector<NodeObjective> zeros(static_cast<std::size_t>(g.node_count), NodeObjective::zero(dim));
  return engine::init_state(build_problem(g, zeros, params));
}

/// One outer ADMM cycle on `state`.
inline engine::Residuals admm_iterate(SolverState& state, const Graph& g,
                                      const std::vector<NodeObjective>& objs,
                                      const SolverParams& params) {
  params.validate();
  const auto pb = build_problem(g, objs, params);
  if (state.x.cols() != g.node_count || state.buffer.cols() != static_cast<Eigen::Index>(pb.couplings.size())) {
    throw DimensionMismatch("state does not match the graph");
  }
  return engine::iterate(pb, state, detail::settings_of(params));
}

/// Solves in the requested mode. Non-convergence is reported through
/// `converged`, never thrown. `warm` seeds x, copies, buffers and duals.
inline SolveReport solve(const Graph& g, const std::vector<NodeObjective>& objs,
                         const SolverParams& params, const SolverState* warm = nullptr) {
  params.validate();
  const auto d = detail::check_objectives(g, objs);
  SolveReport rep;
  if (params.mode == Mode::global) {
    const NodeObjective pooled = pooled_objective(objs);
    Vector shared = pooled.update(0.0, Vector::Zero(d));
    rep.x = shared.replicate(1, g.node_count);
    rep.alpha = Matrix::Zero(d, g.edge_count());
    SolverParams flat = params;
    flat.lambda = 0.0;
    rep.objective = {danr_objective(g, objs, rep.x, rep.alpha, flat)};
    rep.r_norm = {0.0};
    rep.s_norm = {0.0};
    rep.iterations = 1;
    rep.converged = true;
    rep.state = engine::init_state(build_problem(g, objs, params));
    rep.state.x = rep.x;
    return rep;
  }
  const auto pb = build_problem(g, objs, params);
  const bool warm_ok = warm && warm->x.rows() == d && warm->x.cols() == g.node_count &&
                       warm->buffer.cols() == static_cast<Eigen::Index>(pb.couplings.size());
  auto out = engine::run(pb, detail::settings_of(params), warm_ok ? warm : nullptr);
  rep.x = out.state.x;
  rep.alpha = params.mode == Mode::danr ? out.state.buffer : Matrix::Zero(d, g.edge_count());
  rep.objective = std::move(out.trace.objective);
  rep.r_norm = std::move(out.trace.r_norm);
  rep.s_norm = std::move(out.trace.s_norm);
  rep.iterations = out.iterations;
  rep.converged = out.converged;
  rep.eps_primal = out.eps_primal;
  rep.eps_dual = out.eps_dual;
  rep.seconds_x = out.stats.seconds_x;
  rep.seconds_edge = out.stats.seconds_edge;
  rep.seconds_dual = out.stats.seconds_dual;
  rep.inner_iterations = out.stats.inner_iterations;
  rep.state = std::move(out.state);
  return rep;
}

/// Connected components of the subgraph of edges whose endpoint models
/// differ by at most tol. Returns a label per node (labels 0..c-1, in
/// order of first appearance).
inline std::vector<int> extract_clusters(const Graph& g, const Matrix& x, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("cluster tolerance must be positive");
  std::vector<int> parent(static_cast<std::size_t>(g.node_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  for (const auto& e : g.edges) {
    if ((x.col(e.j) - x.col(e.k)).norm() <= tol) {
      const int a = find(e.j);
      const int b = find(e.k);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  }
  std::vector<int> label(static_cast<std::size_t>(g.node_count), -1);
  std::vector<int> root_label(static_cast<std::size_t>(g.node_count), -1);
  int next = 0;
  for (int v = 0; v < g.node_count; ++v) {
    const int r = find(v);
    if (root_label[static_cast<std::size_t>(r)] < 0) root_label[static_cast<std::size_t>(r)] = next++;
    label[static_cast<std::size_t>(v)] = root_label[static_cast<std::size_t>(r)];
  }
  return label;
}

/// Default cluster tolerance: 1e-3 times the mean model norm.
inline double default_cluster_tolerance(const Matrix& x) {
  if (x.cols() == 0) return 1e-3;
  return std::max(1e-12, 1e-3 * x.colwise().norm().mean());
}

inline int cluster_count(const std::vector<int>& labels) {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

enum class InferenceStrategy { average, refit };

/// Geometric median of the columns of pts by Weiszfeld iteration.
inline Vector geometric_median(const Matrix& pts, int max_iters = 1000, double tol = 1e-12) {
  Vector y = pts.rowwise().mean();
  for (int it = 0; it < max_iters; ++it) {
    Vector num = Vector::Zero(pts.rows());
    double den = 0.0;
    bool at_point = false;
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      const double dist = (pts.col(c) - y).norm();
      if (dist < 1e-15) {
        at_point = true;
        continue;
      }
      num += pts.col(c) / dist;
      den += 1.0 / dist;
    }
    if (!(den > 0.0)) break;
    Vector next = num / den;
    if (at_point) {
      // y sits on a sample point: it is optimal iff the pull of the others is at most 1.
      Vector pull = Vector::Zero(pts.rows());
      for (Eigen::Index c = 0; c < pts.cols(); ++c) {
        const double dist = (pts.col(c) - y).norm();
        if (dist >= 1e-15) pull += (pts.col(c) - y) / dist;
      }
      if (pull.norm() <= 1.0) break;
    }
    const double step = (next - y).norm();
    y = std::move(next);
    if (step <= tol * std::max(1.0, y.norm())) break;
  }
  return y;
}

/// Models for unseen points from their k nearest training nodes: the mean
/// of the neighbours' models, or their geometric median (refit, which
/// minimizes sum_k ||x - x_k||_2 with the neighbours held fixed).
inline Matrix predict_unseen(const Matrix& train_coords, const Matrix& x_solved,
                             const Matrix& new_points, int k,
                             InferenceStrategy strategy = InferenceStrategy::average) {
  if (k < 1) throw InvalidInput("k must be >= 1");
  if (train_coords.rows() < k) {
    throw TooFewPoints("predict_unseen needs at least k = " + std::to_string(k) + " training nodes");
  }
  if (train_coords.rows() != x_solved.cols()) {
    throw DimensionMismatch("one model per training node is required");
  }
  if (new_points.rows() > 0 && new_points.cols() != train_coords.cols()) {
    throw DimensionMismatch("new points and training coordinates differ in dimension");
  }
  Matrix out(x_solved.rows(), new_points.rows());
  for (Eigen::Index i = 0; i < new_points.rows(); ++i) {
    const auto nb = nearest_neighbors(train_coords, new_points.row(i), k);
    Matrix models(x_solved.rows(), static_cast<Eigen::Index>(nb.size()));
    for (std::size_t c = 0; c < nb.size(); ++c) models.col(static_cast<Eigen::Index>(c)) = x_solved.col(nb[c]);
    out.col(i) = strategy == InferenceStrategy::average ? Vector(models.rowwise().mean())
                                                        : geometric_median(models);
  }
  return out;
}

}  // namespace danr
