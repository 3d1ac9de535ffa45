#pragma once

// Spatio-temporal DANR over a sequence of snapshots:
//   sum_{j,t} f_{j,t}(x_{j,t})
//     + lambda1 [mu1 sum w ||x_{j,t} + alpha_{jk,t} - x_{k,t}|| + (1 - mu1) sum ||alpha||_p]
//     + lambda2 R_T
// where R_T depends on the temporal variant:
//   st_danr  mu2 sum w ||x_{j,t} + beta_{j,t} - x_{j,t+1}|| + (1 - mu2) sum ||beta||_p
//   t_son    sum w ||x_{j,t} - x_{j,t+1}||
//   t_sos    sum w ||x_{j,t} - x_{j,t+1}||^2
//   none     0
// Slots are laid out snapshot-major: slot = t * N + j.

#include <danr/engine.hpp>
#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/objectives.hpp>
#include <danr/solver.hpp>

#include <optional>
#include <string>
#include <vector>

namespace danr {

enum class TemporalVariant { none, t_son, t_sos, st_danr };

inline std::string to_string(TemporalVariant v) {
  switch (v) {
    case TemporalVariant::none: return "none";
    case TemporalVariant::t_son: return "t_son";
    case TemporalVariant::t_sos: return "t_sos";
    case TemporalVariant::st_danr: return "st_danr";
  }
  return "none";
}

inline TemporalVariant parse_variant(const std::string& s) {
  if (s == "none") return TemporalVariant::none;
  if (s == "t_son") return TemporalVariant::t_son;
  if (s == "t_sos") return TemporalVariant::t_sos;
  if (s == "st_danr") return TemporalVariant::st_danr;
  throw InvalidInput("unknown temporal variant '" + s + "' (expected none, t_son, t_sos or st_danr)");
}

struct STParams {
  double lambda1 = 0.0;
  double mu1 = 0.5;
  double lambda2 = 0.0;
  double mu2 = 0.5;
  double rho1 = 1.0;
  double rho2 = 0.0;  // <= 0: same as rho1
  double p = 3.0;
  TemporalVariant variant = TemporalVariant::st_danr;
  int window = 1;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  double eps_inner = 1e-6;
  int max_outer_iters = 1000;
  int max_inner_iters = 50;
  bool balance_rho = false;
  int threads = 1;
  engine::InnerMethod inner = engine::InnerMethod::joint;

  double temporal_rho() const { return rho2 > 0.0 ? rho2 : rho1; }

  void validate() const {
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw InvalidInput("lambda1 must be >= 0");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw InvalidInput("lambda2 must be >= 0");
    if (!(mu1 > 0.0 && mu1 <= 1.0)) throw InvalidInput("mu1 must lie in (0, 1]");
    if (!(mu2 > 0.0 && mu2 <= 1.0)) throw InvalidInput("mu2 must lie in (0, 1]");
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p must satisfy 1 < p < inf");
    if (!(rho1 > 0.0)) throw InvalidInput("rho1 must be positive");
    if (window < 1) throw InvalidInput("window must be >= 1");
    if (max_outer_iters < 1 || max_inner_iters < 1) throw InvalidInput("iteration caps must be >= 1");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
  }
};

/// Per-snapshot, per-node objectives: objs[t][j].
using STObjectives = std::vector<std::vector<NodeObjective>>;

/// Models fixed before the first snapshot of a streaming window, with the
/// temporal links that tie them to that snapshot (link.t is ignored).
struct Boundary {
  Matrix x;                    // d x N
  std::vector<char> present;   // per node: x column is meaningful
  std::vector<TemporalLink> links;
};

struct STReport {
  std::vector<Matrix> x;      // per snapshot, d x N
  std::vector<Matrix> alpha;  // per snapshot, d x |E_t|
  Matrix beta;                // d x |links|
  Matrix boundary_beta;       // d x |boundary links|
  std::vector<double> objective;
  std::vector<double> r_norm;
  std::vector<double> s_norm;
  int iterations = 0;
  bool converged = false;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  double seconds = 0.0;
  engine::State state;

  double final_objective() const { return objective.empty() ? 0.0 : objective.back(); }
};

namespace detail {

inline Eigen::Index check_st(const TemporalGraph& tg, const STObjectives& objs) {
  if (static_cast<int>(objs.size()) != tg.snapshot_count()) {
    throw InvalidInput("need one objective list per snapshot");
  }
  Eigen::Index d = -1;
  for (int t = 0; t < tg.snapshot_count(); ++t) {
    const auto& row = objs[static_cast<std::size_t>(t)];
    if (static_cast<int>(row.size()) != tg.node_count()) {
      throw InvalidInput("snapshot " + std::to_string(t) + " needs one objective per node");
    }
    for (const auto& o : row) {
      if (d < 0) d = o.dim();
      if (o.dim() != d) throw DimensionMismatch("objectives disagree on model dimension");
    }
  }
  if (d < 1) throw InvalidInput("model dimension must be >= 1");
  return d;
}

inline engine::Settings settings_of(const STParams& p) {
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

inline bool has_temporal(const STParams& p) {
  return p.variant != TemporalVariant::none && p.lambda2 > 0.0;
}

}  // namespace detail

/// ADMM problem for a snapshot sequence. Couplings are ordered: spatial
/// edges of snapshot 0, 1, ...; then temporal links in list order; then
/// boundary links (streaming) in list order. T-SOS boundary terms become
/// static pulls and add no coupling.
inline engine::Problem build_st_problem(const TemporalGraph& tg, const STObjectives& objs,
                                        const STParams& params, const Boundary* boundary = nullptr,
                                        const std::vector<int>& pinned_snapshots = {}) {
  params.validate();
  engine::Problem pb;
  pb.dim = detail::check_st(tg, objs);
  const int n = tg.node_count();
  const int m = tg.snapshot_count();
  pb.objectives.reserve(static_cast<std::size_t>(n * m));
  for (const auto& row : objs) pb.objectives.insert(pb.objectives.end(), row.begin(), row.end());

  if (!pinned_snapshots.empty()) {
    pb.pinned.assign(static_cast<std::size_t>(n * m), 0);
    for (int t : pinned_snapshots) {
      if (t < 0 || t >= m) throw InvalidInput("pinned snapshot out of range");
      for (int j = 0; j < n; ++j) pb.pinned[static_cast<std::size_t>(t * n + j)] = 1;
    }
  }

  for (int t = 0; t < m; ++t) {
    for (const auto& e : tg.snapshots[static_cast<std::size_t>(t)].edges) {
      engine::Coupling c;
      c.left = t * n + e.j;
      c.right = t * n + e.k;
      c.rho = params.rho1;
      if (params.mu1 >= 1.0) {
        c.kind = engine::CouplingKind::fused;
        c.c_fuse = params.lambda1 * e.weight;
      } else {
        c.kind = engine::CouplingKind::buffered;
        c.c_fuse = params.lambda1 * params.mu1 * e.weight;
        c.c_buffer = params.lambda1 * (1.0 - params.mu1);
      }
      pb.couplings.push_back(std::move(c));
    }
  }

  const bool temporal = detail::has_temporal(params);
  const double rho2 = params.temporal_rho();
  auto temporal_coupling = [&](double w) {
    engine::Coupling c;
    c.rho = rho2;
    switch (params.variant) {
      case TemporalVariant::st_danr:
        if (params.mu2 >= 1.0) {
          c.kind = engine::CouplingKind::fused;
          c.c_fuse = params.lambda2 * w;
        } else {
          c.kind = engine::CouplingKind::buffered;
          c.c_fuse = params.lambda2 * params.mu2 * w;
          c.c_buffer = params.lambda2 * (1.0 - params.mu2);
        }
        break;
      case TemporalVariant::t_son:
        c.kind = engine::CouplingKind::fused;
        c.c_fuse = params.lambda2 * w;
        break;
      case TemporalVariant::t_sos:
        c.kind = engine::CouplingKind::squared;
        c.c_fuse = params.lambda2 * w;
        break;
      case TemporalVariant::none:
        break;
    }
    return c;
  };

  if (temporal) {
    for (const auto& l : tg.links) {
      engine::Coupling c = temporal_coupling(l.weight);
      c.left = l.t * n + l.node;
      c.right = (l.t + 1) * n + l.node;
      pb.couplings.push_back(std::move(c));
    }
  }

  if (boundary && temporal) {
    if (boundary->x.cols() != n || boundary->x.rows() != pb.dim) {
      throw DimensionMismatch("fixed models must be d x N");
    }
    for (const auto& l : boundary->links) {
      if (l.node < 0 || l.node >= n) throw InvalidEdge("boundary link references unknown node");
      if (boundary->present.empty() || !boundary->present[static_cast<std::size_t>(l.node)]) {
        throw MissingFixedModel("no fixed model for node " + std::to_string(l.node) +
                                " at the streaming boundary");
      }
      const Vector anchor = boundary->x.col(l.node);
      if (params.variant == TemporalVariant::t_sos) {
        if (pb.pull_weight.empty()) {
          pb.pull_weight.assign(static_cast<std::size_t>(n * m), 0.0);
          pb.pull_center.assign(static_cast<std::size_t>(n * m), Vector::Zero(pb.dim));
        }
        // lambda2 w ||x - x^||^2 = (2 lambda2 w) / 2 ||x - x^||^2
        const auto s = static_cast<std::size_t>(l.node);
        const double add = 2.0 * params.lambda2 * l.weight;
        const double total = pb.pull_weight[s] + add;
        pb.pull_center[s] = (pb.pull_weight[s] * pb.pull_center[s] + add * anchor) / total;
        pb.pull_weight[s] = total;
        continue;
      }
      engine::Coupling c = temporal_coupling(l.weight);
      c.kind = engine::buffered(c.kind) ? engine::CouplingKind::anchored_buffered
                                        : engine::CouplingKind::anchored_fused;
      c.right = l.node;
      c.anchor = anchor;
      pb.couplings.push_back(std::move(c));
    }
  }
  return pb;
}

/// Regularizer value R_T (without lambda2) on the links of `tg`, with gap
/// x_{j,t} - x_{j,t+1} per link. `beta` is d x |links| (st_danr only).
inline double temporal_regularizer_value(TemporalVariant variant, const std::vector<Matrix>& x,
                                         const Matrix& beta, const TemporalGraph& tg,
                                         const STParams& params) {
  double total = 0.0;
  for (std::size_t i = 0; i < tg.links.size(); ++i) {
    const auto& l = tg.links[i];
    const Vector gap = x[static_cast<std::size_t>(l.t)].col(l.node) -
                       x[static_cast<std::size_t>(l.t) + 1].col(l.node);
    switch (variant) {
      case TemporalVariant::none:
        break;
      case TemporalVariant::t_son:
        total += l.weight * gap.norm();
        break;
      case TemporalVariant::t_sos:
        total += l.weight * gap.squaredNorm();
        break;
      case TemporalVariant::st_danr: {
        const Vector b = beta.cols() > static_cast<Eigen::Index>(i)
                             ? Vector(beta.col(static_cast<Eigen::Index>(i)))
                             : Vector::Zero(gap.size());
        total += params.mu2 * l.weight * (gap + b).norm() + (1.0 - params.mu2) * lp_norm(b, params.p);
        break;
      }
    }
  }
  return total;
}

/// Full spatio-temporal objective for the selected variant.
inline double st_objective(const TemporalGraph& tg, const STObjectives& objs,
                           const std::vector<Matrix>& x, const std::vector<Matrix>& alpha,
                           const Matrix& beta, const STParams& params) {
  detail::check_st(tg, objs);
  if (static_cast<int>(x.size()) != tg.snapshot_count()) {
    throw DimensionMismatch("need one model matrix per snapshot");
  }
  double total = 0.0;
  for (int t = 0; t < tg.snapshot_count(); ++t) {
    const auto& g = tg.snapshots[static_cast<std::size_t>(t)];
    const auto ts = static_cast<std::size_t>(t);
    if (x[ts].cols() != g.node_count) throw DimensionMismatch("model matrix has wrong node count");
    SolverParams sp;
    sp.lambda = params.lambda1;
    sp.mu = params.mu1;
    sp.p = params.p;
    const Matrix a = ts < alpha.size() ? alpha[ts] : Matrix::Zero(x[ts].rows(), g.edge_count());
    total += danr_objective(g, objs[ts], x[ts], a, sp);
  }
  if (params.variant != TemporalVariant::none) {
    total += params.lambda2 * temporal_regularizer_value(params.variant, x, beta, tg, params);
  }
  return total;
}

namespace detail {

inline STReport unpack(const TemporalGraph& tg, const STParams& params, engine::Outcome&& out,
                       std::size_t boundary_links) {
  STReport rep;
  const int n = tg.node_count();
  const int m = tg.snapshot_count();
  const auto d = out.state.x.rows();
  Eigen::Index ci = 0;
  for (int t = 0; t < m; ++t) {
    rep.x.push_back(out.state.x.middleCols(static_cast<Eigen::Index>(t) * n, n));
    const auto e = static_cast<Eigen::Index>(tg.snapshots[static_cast<std::size_t>(t)].edges.size());
    rep.alpha.push_back(params.mu1 < 1.0 ? Matrix(out.state.buffer.middleCols(ci, e)) : Matrix::Zero(d, e));
    ci += e;
  }
  const auto links = static_cast<Eigen::Index>(tg.links.size());
  const bool temporal = has_temporal(params);
  const bool buffers = temporal && params.variant == TemporalVariant::st_danr && params.mu2 < 1.0;
  rep.beta = buffers ? Matrix(out.state.buffer.middleCols(ci, links)) : Matrix::Zero(d, links);
  if (temporal) ci += links;
  const auto bl = static_cast<Eigen::Index>(boundary_links);
  const bool boundary_coupled = temporal && params.variant != TemporalVariant::t_sos;
  rep.boundary_beta = buffers && boundary_coupled ? Matrix(out.state.buffer.middleCols(ci, bl))
                                                  : Matrix::Zero(d, bl);
  rep.objective = std::move(out.trace.objective);
  rep.r_norm = std::move(out.trace.r_norm);
  rep.s_norm = std::move(out.trace.s_norm);
  rep.iterations = out.iterations;
  rep.converged = out.converged;
  rep.eps_primal = out.eps_primal;
  rep.eps_dual = out.eps_dual;
  rep.seconds = out.stats.seconds_x + out.stats.seconds_edge + out.stats.seconds_dual;
  rep.state = std::move(out.state);
  return rep;
}

}  // namespace detail

/// Batch solve over every snapshot. Snapshots listed in `pinned` keep the
/// models given for them in `pinned_models` (same order).
inline STReport solve_batch(const TemporalGraph& tg, const STObjectives& objs, const STParams& params,
                            const engine::State* warm = nullptr,
                            const std::vector<int>& pinned = {},
                            const std::vector<Matrix>& pinned_models = {}) {
  if (pinned.size() != pinned_models.size()) {
    throw InvalidInput("one model matrix is required per pinned snapshot");
  }
  const auto pb = build_st_problem(tg, objs, params, nullptr, pinned);
  engine::State start = warm ? *warm : engine::init_state(pb);
  const int n = tg.node_count();
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    if (pinned_models[i].rows() != pb.dim || pinned_models[i].cols() != n) {
      throw DimensionMismatch("pinned models must be d x N");
    }
    start.x.middleCols(static_cast<Eigen::Index>(pinned[i]) * n, n) = pinned_models[i];
  }
  auto out = engine::run(pb, detail::settings_of(params), &start);
  return detail::unpack(tg, params, std::move(out), 0);
}

/// Solves the snapshots of `window` with the models before it fixed.
inline STReport solve_streaming(const TemporalGraph& window, const Boundary& fixed,
                                const STObjectives& objs, const STParams& params,
                                const engine::State* warm = nullptr) {
  const auto pb = build_st_problem(window, objs, params, &fixed);
  auto out = engine::run(pb, detail::settings_of(params), warm);
  return detail::unpack(window, params, std::move(out), fixed.links.size());
}

/// Engine state for the streaming problem on snapshots [tau+1, M) taken
/// from a batch state over [0, M): slots, copies, duals and buffers of the
/// kept couplings carry over; links leaving snapshot tau become boundary
/// couplings (the right-hand copy and dual survive).
inline engine::State streaming_state_from_batch(const TemporalGraph& full, const STParams& params,
                                                const engine::State& batch, int tau) {
  const int n = full.node_count();
  const int m = full.snapshot_count();
  if (tau < 0 || tau + 1 >= m) throw InvalidInput("tau must leave at least one snapshot");
  const auto d = batch.x.rows();
  std::vector<Eigen::Index> spatial_start(static_cast<std::size_t>(m) + 1, 0);
  for (int t = 0; t < m; ++t) {
    spatial_start[static_cast<std::size_t>(t) + 1] =
        spatial_start[static_cast<std::size_t>(t)] +
        static_cast<Eigen::Index>(full.snapshots[static_cast<std::size_t>(t)].edges.size());
  }
  const bool temporal = detail::has_temporal(params);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = spatial_start[static_cast<std::size_t>(tau) + 1]; c < spatial_start.back(); ++c) {
    keep.push_back(c);
  }
  std::vector<Eigen::Index> boundary;
  if (temporal) {
    for (std::size_t i = 0; i < full.links.size(); ++i) {
      const auto idx = spatial_start.back() + static_cast<Eigen::Index>(i);
      if (full.links[i].t > tau) keep.push_back(idx);
    }
    if (params.variant != TemporalVariant::t_sos) {
      for (std::size_t i = 0; i < full.links.size(); ++i) {
        if (full.links[i].t == tau) boundary.push_back(spatial_start.back() + static_cast<Eigen::Index>(i));
      }
    }
  }
  engine::State st;
  const int slots = (m - tau - 1) * n;
  st.x = batch.x.middleCols(static_cast<Eigen::Index>(tau + 1) * n, slots);
  st.svm_dual.assign(batch.svm_dual.begin() + static_cast<std::ptrdiff_t>((tau + 1) * n),
                     batch.svm_dual.begin() + static_cast<std::ptrdiff_t>(m * n));
  const auto total = static_cast<Eigen::Index>(keep.size() + boundary.size());
  st.u_left = Matrix::Zero(d, total);
  st.u_right = Matrix::Zero(d, total);
  st.d_left = Matrix::Zero(d, total);
  st.d_right = Matrix::Zero(d, total);
  st.buffer = Matrix::Zero(d, total);
  Eigen::Index out = 0;
  for (auto c : keep) {
    st.u_left.col(out) = batch.u_left.col(c);
    st.u_right.col(out) = batch.u_right.col(c);
    st.d_left.col(out) = batch.d_left.col(c);
    st.d_right.col(out) = batch.d_right.col(c);
    st.buffer.col(out) = batch.buffer.col(c);
    ++out;
  }
  for (auto c : boundary) {
    st.u_right.col(out) = batch.u_right.col(c);
    st.d_right.col(out) = batch.d_right.col(c);
    st.buffer.col(out) = batch.buffer.col(c);
    ++out;
  }
  st.rho_scale = batch.rho_scale;
  return st;
}

/// Sub-sequence [first, first + count) of `tg` with the links inside it
/// (re-based) and the links entering it from snapshot first - 1.
inline std::pair<TemporalGraph, std::vector<TemporalLink>> window_of(const TemporalGraph& tg, int first,
                                                                     int count) {
  TemporalGraph w;
  w.snapshots.assign(tg.snapshots.begin() + first, tg.snapshots.begin() + first + count);
  std::vector<TemporalLink> entering;
  for (const auto& l : tg.links) {
    if (l.t >= first && l.t + 1 < first + count) w.links.push_back({l.node, l.t - first, l.weight});
    if (l.t == first - 1) entering.push_back({l.node, 0, l.weight});
  }
  return {std::move(w), std::move(entering)};
}

struct StreamResult {
  std::vector<Matrix> x;      // per snapshot
  std::vector<STReport> reports;  // one per window
};

/// Forward streaming over the whole sequence: snapshot 0 is solved on its
/// own, then windows of `params.window` snapshots are solved with the last
/// committed models fixed. Past snapshots are never revisited.
inline StreamResult stream(const TemporalGraph& tg, const STObjectives& objs, const STParams& params) {
  params.validate();
  detail::check_st(tg, objs);
  StreamResult res;
  const int m = tg.snapshot_count();
  const int n = tg.node_count();
  int t = 0;
  std::optional<Boundary> boundary;
  while (t < m) {
    const int count = t == 0 ? 1 : std::min(params.window, m - t);
    auto [win, entering] = window_of(tg, t, count);
    STObjectives wobjs(objs.begin() + t, objs.begin() + t + count);
    STReport rep;
    if (!boundary) {
      rep = solve_batch(win, wobjs, params);
    } else {
      boundary->links = std::move(entering);
      rep = solve_streaming(win, *boundary, wobjs, params);
    }
    for (const auto& xm : rep.x) res.x.push_back(xm);
    Boundary next;
    next.x = rep.x.back();
    next.present.assign(static_cast<std::size_t>(n), 0);
    const auto& last = win.snapshots.back();
    for (int j = 0; j < n; ++j) next.present[static_cast<std::size_t>(j)] = node_present(last, j) ? 1 : 0;
    boundary = std::move(next);
    res.reports.push_back(std::move(rep));
    t += count;
  }
  return res;
}

}  // namespace danr
