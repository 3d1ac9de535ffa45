#pragma once

// Per-node convex losses and their ADMM x-update solvers.
//
// Every x-update in the solvers has the form
//   argmin_x f(x) + sum_i rho_i/2 ||x - m_i||^2,
// which only depends on W = sum_i rho_i and S = sum_i rho_i m_i, so the
// solvers below take (W, S) directly.

#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace danr {

enum class LossKind { ridge, svm, zero };

/// One node's loss. Build through the named constructors.
///
/// ridge: sum_l (x . w_l - y_l)^2 + c ||x_w||^2
/// svm:   margin/2 ||x_w||^2 + C sum_l max(0, 1 - y_l x . w_l)
/// zero:  0
///
/// With an intercept each w_l gets a trailing 1 and x_w drops the last
/// coordinate. `margin` is 1 for a single node; pooled objectives (global
/// mode) scale it by the number of pooled nodes.
class NodeObjective {
 public:
  NodeObjective() = default;

  static NodeObjective ridge(const NodePayload& data, double c_ridge, bool intercept = false) {
    if (!(c_ridge >= 0.0) || !std::isfinite(c_ridge)) throw InvalidInput("c_ridge must be >= 0");
    NodeObjective o(LossKind::ridge, data, intercept);
    o.reg_ = c_ridge;
    o.gram_ = o.design_.transpose() * o.design_;
    o.rhs_ = o.design_.transpose() * o.targets_;
    return o;
  }

  static NodeObjective svm(const NodePayload& data, double C, bool intercept = true,
                           double margin = 1.0) {
    if (!(C > 0.0) || !std::isfinite(C)) throw InvalidInput("svm C must be positive");
    if (!(margin > 0.0)) throw InvalidInput("svm margin weight must be positive");
    for (Eigen::Index l = 0; l < data.targets.size(); ++l) {
      if (data.targets[l] != 1.0 && data.targets[l] != -1.0) {
        throw InvalidInput("svm labels must be +1 or -1");
      }
    }
    NodeObjective o(LossKind::svm, data, intercept);
    o.reg_ = C;
    o.margin_ = margin;
    return o;
  }

  static NodeObjective zero(Eigen::Index dim) {
    NodeObjective o;
    o.kind_ = LossKind::zero;
    o.dim_ = dim;
    return o;
  }

  LossKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  bool intercept() const { return intercept_; }
  double regularization() const { return reg_; }
  double margin() const { return margin_; }
  const Matrix& design() const { return design_; }
  const Vector& targets() const { return targets_; }

  /// Loss value at x.
  double eval(const Vector& x) const {
    if (x.size() != dim_) {
      throw DimensionMismatch("loss_eval: expected dimension " + std::to_string(dim_) + ", got " +
                              std::to_string(x.size()));
    }
    switch (kind_) {
      case LossKind::zero:
        return 0.0;
      case LossKind::ridge: {
        const double fit = (design_ * x - targets_).squaredNorm();
        return fit + reg_ * weights(x).squaredNorm();
      }
      case LossKind::svm: {
        const Vector margins = targets_.cwiseProduct(design_ * x);
        double hinge = 0.0;
        for (Eigen::Index l = 0; l < margins.size(); ++l) hinge += std::max(0.0, 1.0 - margins[l]);
        return 0.5 * margin_ * weights(x).squaredNorm() + reg_ * hinge;
      }
    }
    return 0.0;
  }

  /// argmin_x f(x) + W/2 ||x||^2 - S . x.
  ///
  /// `warm` (optional) carries the SVM dual vector between calls; the
  /// caller owns it so repeated solves stay reproducible.
  /// Throws SingularSystem when the problem has no unique minimizer
  /// (W = 0 and f not strongly convex in every direction).
  Vector update(double W, const Vector& S, Vector* warm = nullptr) const {
    if (S.size() != dim_) throw DimensionMismatch("x_update: term dimension mismatch");
    if (!(W >= 0.0) || !std::isfinite(W)) throw InvalidInput("x_update: W must be >= 0");
    switch (kind_) {
      case LossKind::zero:
        if (!(W > 0.0)) throw SingularSystem("x_update: zero loss without quadratic terms");
        return S / W;
      case LossKind::ridge:
        return ridge_update(W, S);
      case LossKind::svm:
        if (intercept_ && !(W > 0.0)) return svm_smo(S);
        return svm_dual_ascent(W, S, warm);
    }
    return Vector::Zero(dim_);
  }

 private:
  NodeObjective(LossKind kind, const NodePayload& data, bool intercept)
      : kind_(kind), intercept_(intercept), targets_(data.targets) {
    const Eigen::Index d = data.features.cols();
    dim_ = d + (intercept ? 1 : 0);
    design_.resize(data.features.rows(), dim_);
    design_.leftCols(d) = data.features;
    if (intercept) design_.col(d).setOnes();
  }

  Eigen::Ref<const Vector> weights(const Vector& x) const {
    return x.head(intercept_ ? dim_ - 1 : dim_);
  }

  Vector ridge_update(double W, const Vector& S) const {
    Matrix m = 2.0 * gram_;
    const Eigen::Index nw = intercept_ ? dim_ - 1 : dim_;
    m.diagonal().head(nw).array() += 2.0 * reg_;
    m.diagonal().array() += W;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
      throw SingularSystem("ridge x_update: normal equations are singular");
    }
    Vector sol = llt.solve(2.0 * rhs_ + S);
    if (!sol.allFinite()) throw SingularSystem("ridge x_update: non-finite solution");
    return sol;
  }

  // Dual coordinate ascent for
  //   min 1/2 x'Dx - S'x + C sum max(0, 1 - y_l a_l'x),
  // D = diag(margin + W on weights, W on the intercept), D > 0 here.
  // Primal x = D^-1 (S + sum a_l y_l w_l) with 0 <= a_l <= C. Stops when
  // the duality gap drops to 1e-8.
  Vector svm_dual_ascent(double W, const Vector& S, Vector* warm) const {
    const Eigen::Index n = targets_.size();
    Vector dinv = Vector::Constant(dim_, 1.0 / (margin_ + W));
    if (intercept_) dinv[dim_ - 1] = 1.0 / W;
    Vector a = (warm && warm->size() == n) ? *warm : Vector::Zero(n);
    Vector z = S;
    for (Eigen::Index l = 0; l < n; ++l) z += a[l] * targets_[l] * design_.row(l).transpose();
    Vector x = dinv.cwiseProduct(z);
    Vector qdiag(n);
    for (Eigen::Index l = 0; l < n; ++l) {
      qdiag[l] = design_.row(l).cwiseAbs2().dot(dinv.transpose());
    }
    const double C = reg_;
    for (int sweep = 0; sweep < 100000; ++sweep) {
      for (Eigen::Index l = 0; l < n; ++l) {
        if (!(qdiag[l] > 0.0)) continue;
        const double g = 1.0 - targets_[l] * design_.row(l).dot(x);
        const double next = std::clamp(a[l] + g / qdiag[l], 0.0, C);
        const double step = next - a[l];
        if (step == 0.0) continue;
        a[l] = next;
        x += (step * targets_[l]) * dinv.cwiseProduct(design_.row(l).transpose());
      }
      if (sweep % 4 == 3 || n == 0) {
        z = x.cwiseQuotient(dinv);
        const double quad = 0.5 * x.dot(z);
        double hinge = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) {
          hinge += std::max(0.0, 1.0 - targets_[l] * design_.row(l).dot(x));
        }
        const double primal = quad - S.dot(x) + C * hinge;
        const double dual = a.sum() - quad;
        if (primal - dual <= 1e-8) break;
      }
    }
    if (warm) *warm = a;
    return x;
  }

  // W = 0 with an intercept: the bias is unregularized and the dual gains
  // the equality constraint sum a_l y_l = 0. Sequential minimal
  // optimization with maximal-violating-pair selection.
  Vector svm_smo(const Vector& S) const {
    if (S.norm() > 0.0) {
      throw SingularSystem("svm x_update: unregularized intercept with a linear term");
    }
    const Eigen::Index n = targets_.size();
    const Eigen::Index d = dim_ - 1;
    const Matrix feats = design_.leftCols(d) / std::sqrt(margin_);
    const Matrix K = feats * feats.transpose();
    const double C = reg_;
    const Vector& y = targets_;
    Vector a = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);  // gradient of 1/2 a'Qa - 1'a
    auto up = [&](Eigen::Index l) { return (y[l] > 0 && a[l] < C) || (y[l] < 0 && a[l] > 0); };
    auto low = [&](Eigen::Index l) { return (y[l] > 0 && a[l] > 0) || (y[l] < 0 && a[l] < C); };
    for (int it = 0; it < 1000000; ++it) {
      Eigen::Index i = -1;
      Eigen::Index j = -1;
      double gmax = -std::numeric_limits<double>::infinity();
      double gmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index l = 0; l < n; ++l) {
        const double v = -y[l] * grad[l];
        if (up(l) && v > gmax) {
          gmax = v;
          i = l;
        }
        if (low(l) && v < gmin) {
          gmin = v;
          j = l;
        }
      }
      if (i < 0 || j < 0 || gmax - gmin <= 1e-12) break;
      const double quad = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-15);
      double step = (gmax - gmin) / quad;
      // move a_i along y_i and a_j along -y_j
      const double room_i = y[i] > 0 ? C - a[i] : a[i];
      const double room_j = y[j] > 0 ? a[j] : C - a[j];
      step = std::min({step, room_i, room_j});
      a[i] += y[i] * step;
      a[j] -= y[j] * step;
      for (Eigen::Index l = 0; l < n; ++l) {
        grad[l] += y[l] * step * (K(l, i) - K(l, j));
      }
    }
    Vector x(dim_);
    Vector w = Vector::Zero(d);
    for (Eigen::Index l = 0; l < n; ++l) w += a[l] * y[l] * design_.row(l).head(d).transpose();
    w /= margin_;
    x.head(d) = w;
    // Intercept from the KKT conditions: free vectors pin it exactly,
    // otherwise take the midpoint of the feasible interval (or its finite end).
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double target = y[l] - design_.row(l).head(d).dot(w);  // b making margin exactly 1
      const bool at_zero = a[l] <= 1e-12 * C;
      const bool at_c = a[l] >= C * (1.0 - 1e-12);
      if (!at_zero && !at_c) {
        free_sum += target;
        ++free_count;
      } else if ((at_zero && y[l] > 0) || (at_c && y[l] < 0)) {
        lo = std::max(lo, target);
      } else {
        hi = std::min(hi, target);
      }
    }
    double b = 0.0;
    if (free_count > 0) {
      b = free_sum / free_count;
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
      b = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      b = lo;
    } else if (std::isfinite(hi)) {
      b = hi;
    }
    x[d] = b;
    return x;
  }

  LossKind kind_ = LossKind::zero;
  Eigen::Index dim_ = 0;
  bool intercept_ = false;
  double reg_ = 0.0;
  double margin_ = 1.0;
  Matrix design_;
  Vector targets_;
  Matrix gram_;
  Vector rhs_;
};

inline double loss_eval(const NodeObjective& obj, const Vector& x) { return obj.eval(x); }

/// A quadratic pull rho/2 ||x - u + delta||^2 toward a consensus copy.
struct QuadraticTerm {
  Vector u;
  Vector delta;
  double rho = 1.0;
};

/// argmin_x f(x) + rho1/2 sum ||x - u_k + delta_k||^2 + sum rho_i/2 ||x - v_i + delta_i||^2.
inline Vector x_update(const NodeObjective& obj, const std::vector<QuadraticTerm>& neighbor_terms,
                       const std::vector<QuadraticTerm>& extra_terms, double rho1) {
  double W = 0.0;
  Vector S = Vector::Zero(obj.dim());
  for (const auto& t : neighbor_terms) {
    if (t.u.size() != obj.dim() || t.delta.size() != obj.dim()) {
      throw DimensionMismatch("x_update: neighbor term dimension mismatch");
    }
    W += rho1;
    S += rho1 * (t.u - t.delta);
  }
  for (const auto& t : extra_terms) {
    if (t.u.size() != obj.dim() || t.delta.size() != obj.dim()) {
      throw DimensionMismatch("x_update: extra term dimension mismatch");
    }
    W += t.rho;
    S += t.rho * (t.u - t.delta);
  }
  return obj.update(W, S);
}

/// One pooled objective equal to sum_j f_j(x) for a shared model x.
inline NodeObjective pooled_objective(const std::vector<NodeObjective>& objs) {
  if (objs.empty()) throw InvalidInput("pooled_objective: no objectives");
  Eigen::Index rows = 0;
  int count = 0;
  const NodeObjective* proto = nullptr;
  for (const auto& o : objs) {
    if (o.kind() == LossKind::zero) continue;
    if (proto && (o.kind() != proto->kind() || o.dim() != proto->dim() ||
                  o.intercept() != proto->intercept() ||
                  o.regularization() != proto->regularization())) {
      throw InvalidInput("pooled_objective: objectives differ in kind or hyperparameters");
    }
    proto = &o;
    rows += o.design().rows();
    ++count;
  }
  if (!proto) return NodeObjective::zero(objs.front().dim());
  const Eigen::Index d = proto->intercept() ? proto->dim() - 1 : proto->dim();
  NodePayload pooled;
  pooled.features.resize(rows, d);
  pooled.targets.resize(rows);
  Eigen::Index r = 0;
  for (const auto& o : objs) {
    if (o.kind() == LossKind::zero) continue;
    const auto n = o.design().rows();
    pooled.features.middleRows(r, n) = o.design().leftCols(d);
    pooled.targets.segment(r, n) = o.targets();
    r += n;
  }
  if (proto->kind() == LossKind::ridge) {
    return NodeObjective::ridge(pooled, proto->regularization() * count, proto->intercept());
  }
  return NodeObjective::svm(pooled, proto->regularization(), proto->intercept(),
                            proto->margin() * count);
}

}  // namespace danr
