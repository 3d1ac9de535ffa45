#pragma once

// Consensus ADMM over "slots" (model vectors) joined by pairwise couplings.
// Static DANR uses one slot per node and one coupling per edge; the
// spatio-temporal solvers add one slot per (node, snapshot) and temporal
// couplings between consecutive snapshots.
//
// Each coupling keeps a consensus copy of both endpoint models and a scaled
// dual per copy. One outer iteration is
//   1. x-update per slot (parallel),
//   2. copy/buffer update per coupling (parallel),
//   3. dual update per copy,
// with residuals r = ||x~ - u|| and s = ||rho (u_old - u_new)||.

#include <danr/error.hpp>
#include <danr/linalg.hpp>
#include <danr/objectives.hpp>
#include <danr/prox.hpp>

#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace danr::engine {

/// Edge term between slots l and r:
///   buffered           c_fuse ||x_l + a - x_r||_2 + c_buffer ||a||_p
///   fused              c_fuse ||x_l - x_r||_2
///   squared            c_fuse ||x_l - x_r||_2^2
///   anchored_buffered  c_fuse ||anchor + a - x_r||_2 + c_buffer ||a||_p
///   anchored_fused     c_fuse ||anchor - x_r||_2
/// Anchored couplings tie a slot to a fixed vector and have no left slot.
enum class CouplingKind { buffered, fused, squared, anchored_buffered, anchored_fused };

inline bool anchored(CouplingKind k) {
  return k == CouplingKind::anchored_buffered || k == CouplingKind::anchored_fused;
}
inline bool buffered(CouplingKind k) {
  return k == CouplingKind::buffered || k == CouplingKind::anchored_buffered;
}

struct Coupling {
  CouplingKind kind = CouplingKind::buffered;
  int left = -1;
  int right = -1;
  double c_fuse = 0.0;
  double c_buffer = 0.0;
  double rho = 1.0;
  bool pin_buffer = false;  // hold the buffer at its current value
  Vector anchor;
};

struct Problem {
  Eigen::Index dim = 0;
  std::vector<NodeObjective> objectives;  // one per slot
  std::vector<Coupling> couplings;
  std::vector<char> pinned;               // optional: slot x held fixed
  std::vector<double> pull_weight;        // optional: w/2 ||x - center||^2
  std::vector<Vector> pull_center;

  int slot_count() const { return static_cast<int>(objectives.size()); }
  bool is_pinned(int s) const {
    return !pinned.empty() && pinned[static_cast<std::size_t>(s)] != 0;
  }
  double pull(int s) const {
    return pull_weight.empty() ? 0.0 : pull_weight[static_cast<std::size_t>(s)];
  }
  /// A coupling is inactive when every slot it touches is pinned.
  bool active(const Coupling& c) const {
    return !((anchored(c.kind) || is_pinned(c.left)) && is_pinned(c.right));
  }
};

/// How a buffered coupling's (copies, buffer) subproblem is solved:
/// exactly in one shot, or by alternating the pair update and the buffer
/// subproblem until the iterates move less than eps_inner.
enum class InnerMethod { joint, alternating };

struct Settings {
  double p = 3.0;
  InnerMethod inner = InnerMethod::joint;
  double eps_primal = 0.0;  // <= 0: 1e-4 sqrt(copies * dim)
  double eps_dual = 0.0;
  double eps_inner = 1e-6;
  int max_outer = 1000;
  int max_inner = 50;
  bool balance_rho = false;
  int threads = 1;
};

struct State {
  Matrix x;        // dim x slots
  Matrix u_left;   // dim x couplings
  Matrix u_right;
  Matrix d_left;
  Matrix d_right;
  Matrix buffer;   // alpha / beta per coupling
  std::vector<Vector> svm_dual;  // per slot warm starts
  double rho_scale = 1.0;
  int iteration = 0;
};

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

struct Trace {
  std::vector<double> objective;
  std::vector<double> r_norm;
  std::vector<double> s_norm;
};

struct Stats {
  double seconds_x = 0.0;
  double seconds_edge = 0.0;
  double seconds_dual = 0.0;
  long inner_iterations = 0;
  long interior_alpha_solves = 0;
};

inline State init_state(const Problem& pb) {
  const auto d = pb.dim;
  const auto m = static_cast<Eigen::Index>(pb.couplings.size());
  State st;
  st.x = Matrix::Zero(d, pb.slot_count());
  st.u_left = Matrix::Zero(d, m);
  st.u_right = Matrix::Zero(d, m);
  st.d_left = Matrix::Zero(d, m);
  st.d_right = Matrix::Zero(d, m);
  st.buffer = Matrix::Zero(d, m);
  st.svm_dual.assign(static_cast<std::size_t>(pb.slot_count()), Vector());
  return st;
}

inline int copy_count(const Problem& pb) {
  int n = 0;
  for (const auto& c : pb.couplings) {
    if (!pb.active(c)) continue;
    n += anchored(c.kind) ? 1 : 2;
  }
  return n;
}

inline double default_tolerance(const Problem& pb) {
  return 1e-4 * std::sqrt(static_cast<double>(std::max(1, copy_count(pb))) *
                          static_cast<double>(pb.dim));
}

/// Objective on x: losses of free slots, static pulls and coupling terms.
inline double objective(const Problem& pb, const Matrix& x, const Matrix& buffer, double p) {
  double total = 0.0;
  for (int s = 0; s < pb.slot_count(); ++s) {
    if (pb.is_pinned(s)) continue;
    const Vector xs = x.col(s);
    total += pb.objectives[static_cast<std::size_t>(s)].eval(xs);
    const double w = pb.pull(s);
    if (w > 0.0) total += 0.5 * w * (xs - pb.pull_center[static_cast<std::size_t>(s)]).squaredNorm();
  }
  for (std::size_t i = 0; i < pb.couplings.size(); ++i) {
    const auto& c = pb.couplings[i];
    if (!pb.active(c)) continue;
    const auto ci = static_cast<Eigen::Index>(i);
    const Vector left = anchored(c.kind) ? c.anchor : Vector(x.col(c.left));
    const Vector gap = left - x.col(c.right);
    switch (c.kind) {
      case CouplingKind::buffered:
      case CouplingKind::anchored_buffered:
        total += c.c_fuse * (gap + buffer.col(ci)).norm() + c.c_buffer * lp_norm(buffer.col(ci), p);
        break;
      case CouplingKind::fused:
      case CouplingKind::anchored_fused:
        total += c.c_fuse * gap.norm();
        break;
      case CouplingKind::squared:
        total += c.c_fuse * gap.squaredNorm();
        break;
    }
  }
  return total;
}

namespace detail {

struct Incidence {
  int coupling;
  bool left;
};

inline std::vector<std::vector<Incidence>> incidence(const Problem& pb) {
  std::vector<std::vector<Incidence>> inc(static_cast<std::size_t>(pb.slot_count()));
  for (std::size_t i = 0; i < pb.couplings.size(); ++i) {
    const auto& c = pb.couplings[i];
    if (!pb.active(c)) continue;
    if (!anchored(c.kind)) inc[static_cast<std::size_t>(c.left)].push_back({static_cast<int>(i), true});
    inc[static_cast<std::size_t>(c.right)].push_back({static_cast<int>(i), false});
  }
  return inc;
}

// Runs body(i) for i in [0, n) across workers; the first failure by index
// is rethrown after the loop so errors are independent of scheduling.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads)) if (threads > 1)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  (void)threads;
}

struct EdgeResult {
  long inner = 0;
  bool interior = false;
};

// Two-sided buffered update: alternate the closed-form pair update, the
// buffer subproblem with the copies held, and a buffer step with the edge
// gap z = u_l + alpha - u_r held, until the iterates settle.
inline EdgeResult buffered_update(const Coupling& c, double rho, const Settings& set,
                                  const Vector& a, const Vector& b, Vector& ul, Vector& ur,
                                  Vector& alpha) {
  EdgeResult res;
  prox::PairUpdateInput in{a, b, alpha, c.c_fuse, rho};
  if (c.pin_buffer) {
    const auto pu = prox::fused_pair_update(in);
    ul = pu.u_jk;
    ur = pu.u_kj;
    res.inner = 1;
    return res;
  }
  if (set.inner == InnerMethod::joint) {
    auto bp = prox::buffered_pair_update(a, b, c.c_buffer, c.c_fuse, rho, set.p, alpha);
    res.interior = !bp.alpha.isZero(0.0) && !(bp.u_jk + bp.alpha - bp.u_kj).isZero(0.0);
    ul = std::move(bp.u_jk);
    ur = std::move(bp.u_kj);
    alpha = std::move(bp.alpha);
    res.inner = 1;
    return res;
  }
  const Vector sum = a + b;
  const Vector e = a - b;
  const prox::AlphaSubproblem base{Vector(), c.c_buffer, c.c_fuse, set.p};
  Vector prev_l = ul;
  Vector prev_r = ur;
  Vector prev_a = alpha;
  for (int it = 0; it < set.max_inner; ++it) {
    in.alpha = alpha;
    const auto pu = prox::fused_pair_update(in);
    prox::AlphaSubproblem sub = base;
    sub.v = pu.u_jk - pu.u_kj;
    const auto ar = prox::alpha_subproblem(sub, alpha);
    if (ar.regime == prox::AlphaRegime::interior) res.interior = true;
    const Vector z = pu.u_jk + ar.alpha - pu.u_kj;
    alpha = prox::lp_prox(z - e, 2.0 * c.c_buffer / rho, set.p);
    const Vector gap = z - alpha;
    ul = 0.5 * (sum + gap);
    ur = 0.5 * (sum - gap);
    ++res.inner;
    const double du = std::sqrt((ul - prev_l).squaredNorm() + (ur - prev_r).squaredNorm());
    const double da = (alpha - prev_a).norm();
    if (du <= set.eps_inner && da <= set.eps_inner) break;
    prev_l = ul;
    prev_r = ur;
    prev_a = alpha;
  }
  return res;
}

// One-sided buffered update against a fixed anchor x^:
//   min_{v, beta} c_fuse ||x^ + beta - v|| + c_buffer ||beta||_p + rho/2 ||v - b||^2.
inline EdgeResult anchored_buffered_update(const Coupling& c, double rho, const Settings& set,
                                           const Vector& b, Vector& v, Vector& beta) {
  EdgeResult res;
  const Vector& xh = c.anchor;
  if (c.pin_buffer) {
    const Vector g = xh + beta;
    v = g + prox::shrink(b - g, c.c_fuse / rho);
    res.inner = 1;
    return res;
  }
  if (set.inner == InnerMethod::joint) {
    auto [vn, bn] = prox::anchored_pair_update(xh, b, c.c_buffer, c.c_fuse, rho, set.p, beta);
    res.interior = !bn.isZero(0.0) && !(xh + bn - vn).isZero(0.0);
    v = std::move(vn);
    beta = std::move(bn);
    res.inner = 1;
    return res;
  }
  const prox::AlphaSubproblem base{Vector(), c.c_buffer, c.c_fuse, set.p};
  Vector prev_v = v;
  Vector prev_b = beta;
  for (int it = 0; it < set.max_inner; ++it) {
    const Vector g = xh + beta;
    v = g + prox::shrink(b - g, c.c_fuse / rho);
    prox::AlphaSubproblem sub = base;
    sub.v = xh - v;
    const auto ar = prox::alpha_subproblem(sub, beta);
    if (ar.regime == prox::AlphaRegime::interior) res.interior = true;
    const Vector z = xh + ar.alpha - v;
    beta = prox::lp_prox(b - xh + z, c.c_buffer / rho, set.p);
    v = xh + beta - z;
    ++res.inner;
    if ((v - prev_v).norm() <= set.eps_inner && (beta - prev_b).norm() <= set.eps_inner) break;
    prev_v = v;
    prev_b = beta;
  }
  return res;
}

}  // namespace detail

/// Executes one outer iteration in place and returns its residuals.
inline Residuals iterate(const Problem& pb, State& st, const Settings& set, Stats* stats = nullptr) {
  using clock = std::chrono::steady_clock;
  const int slots = pb.slot_count();
  const int m = static_cast<int>(pb.couplings.size());
  const auto d = pb.dim;
  const auto incid = detail::incidence(pb);

  auto t0 = clock::now();
  detail::parallel_for(slots, set.threads, [&](int s) {
    if (pb.is_pinned(s)) return;
    const auto& obj = pb.objectives[static_cast<std::size_t>(s)];
    double W = pb.pull(s);
    Vector S = Vector::Zero(d);
    if (W > 0.0) S += W * pb.pull_center[static_cast<std::size_t>(s)];
    for (const auto& [ci, left] : incid[static_cast<std::size_t>(s)]) {
      const double rho = pb.couplings[static_cast<std::size_t>(ci)].rho * st.rho_scale;
      W += rho;
      if (left) {
        S += rho * (st.u_left.col(ci) - st.d_left.col(ci));
      } else {
        S += rho * (st.u_right.col(ci) - st.d_right.col(ci));
      }
    }
    if (obj.kind() == LossKind::zero && !(W > 0.0)) {
      st.x.col(s).setZero();
      return;
    }
    try {
      st.x.col(s) = obj.update(W, S, &st.svm_dual[static_cast<std::size_t>(s)]);
    } catch (const std::exception& ex) {
      throw Error("x-update of slot " + std::to_string(s) + ": " + ex.what());
    }
  });
  auto t1 = clock::now();

  std::vector<double> s_parts(static_cast<std::size_t>(m), 0.0);
  std::vector<long> inner(static_cast<std::size_t>(m), 0);
  std::vector<char> interior(static_cast<std::size_t>(m), 0);
  detail::parallel_for(m, set.threads, [&](int i) {
    const auto& c = pb.couplings[static_cast<std::size_t>(i)];
    if (!pb.active(c)) return;
    const double rho = c.rho * st.rho_scale;
    const Vector old_l = st.u_left.col(i);
    const Vector old_r = st.u_right.col(i);
    const Vector b = st.x.col(c.right) + st.d_right.col(i);
    Vector ul = old_l;
    Vector ur = old_r;
    Vector buf = st.buffer.col(i);
    detail::EdgeResult er;
    try {
      switch (c.kind) {
        case CouplingKind::buffered: {
          const Vector a = st.x.col(c.left) + st.d_left.col(i);
          er = detail::buffered_update(c, rho, set, a, b, ul, ur, buf);
          break;
        }
        case CouplingKind::fused: {
          const Vector a = st.x.col(c.left) + st.d_left.col(i);
          const auto pu = prox::fused_pair_update({a, b, Vector::Zero(d), c.c_fuse, rho});
          ul = pu.u_jk;
          ur = pu.u_kj;
          er.inner = 1;
          break;
        }
        case CouplingKind::squared: {
          const Vector a = st.x.col(c.left) + st.d_left.col(i);
          const double k = 2.0 * c.c_fuse / (rho + 4.0 * c.c_fuse);
          ul = a - k * (a - b);
          ur = b + k * (a - b);
          er.inner = 1;
          break;
        }
        case CouplingKind::anchored_buffered:
          er = detail::anchored_buffered_update(c, rho, set, b, ur, buf);
          break;
        case CouplingKind::anchored_fused:
          ur = c.anchor + prox::shrink(b - c.anchor, c.c_fuse / rho);
          er.inner = 1;
          break;
      }
    } catch (const std::exception& ex) {
      throw Error("edge update of coupling " + std::to_string(i) + " (" +
                  std::to_string(c.left) + "," + std::to_string(c.right) + "): " + ex.what());
    }
    double sp = (ur - old_r).squaredNorm();
    if (!anchored(c.kind)) sp += (ul - old_l).squaredNorm();
    s_parts[static_cast<std::size_t>(i)] = rho * rho * sp;
    inner[static_cast<std::size_t>(i)] = er.inner;
    interior[static_cast<std::size_t>(i)] = er.interior ? 1 : 0;
    st.u_left.col(i) = ul;
    st.u_right.col(i) = ur;
    st.buffer.col(i) = buf;
  });
  auto t2 = clock::now();

  std::vector<double> r_parts(static_cast<std::size_t>(m), 0.0);
  detail::parallel_for(m, set.threads, [&](int i) {
    const auto& c = pb.couplings[static_cast<std::size_t>(i)];
    if (!pb.active(c)) return;
    const Vector rr = st.x.col(c.right) - st.u_right.col(i);
    st.d_right.col(i) += rr;
    double rp = rr.squaredNorm();
    if (!anchored(c.kind)) {
      const Vector rl = st.x.col(c.left) - st.u_left.col(i);
      st.d_left.col(i) += rl;
      rp += rl.squaredNorm();
    }
    r_parts[static_cast<std::size_t>(i)] = rp;
  });
  auto t3 = clock::now();

  Residuals res;
  double rs = 0.0;
  double ss = 0.0;
  for (int i = 0; i < m; ++i) {
    rs += r_parts[static_cast<std::size_t>(i)];
    ss += s_parts[static_cast<std::size_t>(i)];
  }
  res.primal = std::sqrt(rs);
  res.dual = std::sqrt(ss);
  ++st.iteration;
  if (stats) {
    stats->seconds_x += std::chrono::duration<double>(t1 - t0).count();
    stats->seconds_edge += std::chrono::duration<double>(t2 - t1).count();
    stats->seconds_dual += std::chrono::duration<double>(t3 - t2).count();
    for (int i = 0; i < m; ++i) {
      stats->inner_iterations += inner[static_cast<std::size_t>(i)];
      stats->interior_alpha_solves += interior[static_cast<std::size_t>(i)];
    }
  }
  return res;
}

struct Outcome {
  State state;
  Trace trace;
  Stats stats;
  int iterations = 0;
  bool converged = false;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
};

/// Iterates until both residuals fall below their tolerances or
/// `max_outer` is reached. Starts from `warm` when given (its copies and
/// duals must match the problem's coupling layout).
inline Outcome run(const Problem& pb, const Settings& set, const State* warm = nullptr) {
  if (pb.dim < 1) throw InvalidInput("problem dimension must be >= 1");
  for (const auto& o : pb.objectives) {
    if (o.dim() != pb.dim) throw DimensionMismatch("objective dimension differs from problem");
  }
  for (const auto& c : pb.couplings) {
    const bool bad_left = !anchored(c.kind) && (c.left < 0 || c.left >= pb.slot_count());
    if (bad_left || c.right < 0 || c.right >= pb.slot_count()) {
      throw InvalidEdge("coupling references an unknown slot");
    }
    if (anchored(c.kind) && c.anchor.size() != pb.dim) {
      throw DimensionMismatch("anchored coupling needs an anchor of problem dimension");
    }
    if (!(c.rho > 0.0) || c.c_fuse < 0.0 || c.c_buffer < 0.0) {
      throw InvalidInput("coupling needs rho > 0 and nonnegative weights");
    }
  }
  Outcome out;
  out.state = warm ? *warm : init_state(pb);
  auto& st = out.state;
  if (st.x.rows() != pb.dim || st.x.cols() != pb.slot_count() ||
      st.buffer.cols() != static_cast<Eigen::Index>(pb.couplings.size())) {
    throw DimensionMismatch("warm state does not match the problem layout");
  }
  if (st.svm_dual.size() != static_cast<std::size_t>(pb.slot_count())) {
    st.svm_dual.assign(static_cast<std::size_t>(pb.slot_count()), Vector());
  }
  out.eps_primal = set.eps_primal > 0.0 ? set.eps_primal : default_tolerance(pb);
  out.eps_dual = set.eps_dual > 0.0 ? set.eps_dual : default_tolerance(pb);
  const bool coupled = copy_count(pb) > 0;
  const int max_outer = coupled ? set.max_outer : 1;
  for (int it = 0; it < max_outer; ++it) {
    const Residuals r = iterate(pb, st, set, &out.stats);
    ++out.iterations;
    if (!st.x.allFinite()) {
      throw NonFinite("non-finite model after iteration " + std::to_string(st.iteration) +
                      " (r=" + std::to_string(r.primal) + ", s=" + std::to_string(r.dual) + ")");
    }
    out.trace.r_norm.push_back(r.primal);
    out.trace.s_norm.push_back(r.dual);
    out.trace.objective.push_back(objective(pb, st.x, st.buffer, set.p));
    if (r.primal <= out.eps_primal && r.dual <= out.eps_dual) {
      out.converged = true;
      break;
    }
    if (set.balance_rho) {
      double factor = 1.0;
      if (r.primal > 10.0 * r.dual) factor = 2.0;
      if (r.dual > 10.0 * r.primal) factor = 0.5;
      if (factor != 1.0) {
        st.rho_scale *= factor;
        st.d_left /= factor;
        st.d_right /= factor;
      }
    }
  }
  return out;
}

}  // namespace danr::engine
