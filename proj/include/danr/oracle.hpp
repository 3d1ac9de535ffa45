#pragma once

// Black-box convex minimizer used as an independent oracle in tests. It
// only sees function values: gradients are central finite differences, so
// it shares no code path with the closed forms it is used to check.

#include <danr/linalg.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>
#include <algorithm>
#include <random>

namespace danr::oracle {

using Objective = std::function<double(const Vector&)>;

struct Options {
  int restarts = 3;
  int max_bfgs_iters = 4000;
  double start_scale = 1.0;
  std::uint64_t seed = 0x0a11ce5eedULL;
  std::optional<Vector> start;
};

struct Result {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  long evaluations = 0;
};

namespace detail {

class Counted {
 public:
  explicit Counted(const Objective& f) : f_(f) {}
  double operator()(const Vector& x) {
    ++count_;
    return f_(x);
  }
  long count() const { return count_; }

 private:
  const Objective& f_;
  long count_ = 0;
};

inline Vector fd_gradient(Counted& f, const Vector& x, double rel_step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Exact-ish minimization of a convex function along x + t d (golden section
/// on an expanded bracket). Returns the best step found.
inline double line_minimize(Counted& f, const Vector& x, const Vector& d, double fx,
                            double& best_value) {
  auto phi = [&](double t) { return f(x + t * d); };
  double step = 1e-3;
  double fp = phi(step);
  double fm = phi(-step);
  double sign = 1.0;
  if (fp >= fx && fm >= fx) {
    // Bracket already around zero; shrink the probe until it tightens.
    double lo = -step, hi = step;
    double t_best = 0.0;
    best_value = fx;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), e = lo + gr * (hi - lo);
    double fc = phi(c), fe = phi(e);
    for (int it = 0; it < 60; ++it) {
      if (fc < fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - gr * (hi - lo);
        fc = phi(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + gr * (hi - lo);
        fe = phi(e);
      }
    }
    for (double t : {c, e}) {
      const double v = phi(t);
      if (v < best_value) {
        best_value = v;
        t_best = t;
      }
    }
    return t_best;
  }
  if (fm < fp) sign = -1.0;
  double prev = 0.0, cur = step, fcur = std::min(fp, fm);
  double next = 2.0 * cur, fnext = phi(sign * next);
  int guard = 0;
  while (fnext < fcur && guard++ < 200) {
    prev = cur;
    cur = next;
    fcur = fnext;
    next *= 2.0;
    fnext = phi(sign * next);
  }
  double lo = prev, hi = next;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), e = lo + gr * (hi - lo);
  double fc = phi(sign * c), fe = phi(sign * e);
  for (int it = 0; it < 80 && (hi - lo) > 1e-15 * std::max(1.0, hi); ++it) {
    if (fc < fe) {
      hi = e;
      e = c;
      fe = fc;
      c = hi - gr * (hi - lo);
      fc = phi(sign * c);
    } else {
      lo = c;
      c = e;
      fc = fe;
      e = lo + gr * (hi - lo);
      fe = phi(sign * e);
    }
  }
  const double t = (fc < fe) ? c : e;
  best_value = std::min(fc, fe);
  if (best_value >= fx) {
    best_value = fx;
    return 0.0;
  }
  return sign * t;
}

/// BFGS with a weak-Wolfe bisection line search; known to behave well on
/// nonsmooth convex functions.
inline void bfgs(Counted& f, Vector& x, double& fx, int max_iters, double rel_step) {
  const auto n = x.size();
  Matrix hinv = Matrix::Identity(n, n);
  Vector g = fd_gradient(f, x, rel_step);
  for (int it = 0; it < max_iters; ++it) {
    if (g.norm() < 1e-13) break;
    Vector d = -hinv * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
    bool ok = false;
    Vector xn, gn;
    double fn = fx;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * d;
      fn = f(xn);
      if (fn > fx + 1e-4 * t * slope) {
        hi = t;
      } else {
        gn = fd_gradient(f, xn, rel_step);
        if (gn.dot(d) < 0.9 * slope) {
          lo = t;
        } else {
          ok = true;
          break;
        }
      }
      t = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
      if (!std::isinf(hi) && hi - lo < 1e-18) break;
    }
    if (!ok) {
      if (fn < fx) {
        x = xn;
        fx = fn;
        g = fd_gradient(f, x, rel_step);
        hinv.setIdentity();
        continue;
      }
      break;
    }
    const Vector s = xn - x;
    const Vector yv = gn - g;
    const double sy = s.dot(yv);
    const bool progress = fx - fn > 1e-16 * std::max(1.0, std::abs(fx));
    x = xn;
    fx = fn;
    g = gn;
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(n, n);
      hinv = (id - rho * s * yv.transpose()) * hinv * (id - rho * yv * s.transpose()) +
             rho * s * s.transpose();
    }
    if (!progress && s.norm() < 1e-15 * std::max(1.0, x.norm())) break;
  }
}

/// Rounds of exact line searches along coordinate axes, coordinate pairs
/// and random directions until a round improves by less than `tol`.
inline void polish(Counted& f, Vector& x, double& fx, double tol, std::mt19937_64& rng) {
  const auto n = x.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int round = 0; round < 50; ++round) {
    const double start = fx;
    auto try_dir = [&](const Vector& d) {
      double v = fx;
      const double t = line_minimize(f, x, d, fx, v);
      if (v < fx) {
        x += t * d;
        fx = v;
      }
    };
    for (Eigen::Index i = 0; i < n; ++i) try_dir(Vector::Unit(n, i));
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector d(n);
      for (Eigen::Index k = 0; k < n; ++k) d[k] = normal(rng);
      try_dir(d / d.norm());
    }
    if (start - fx < 0.01 * tol) break;
  }
}

// Smooth directions at a kink: gradients sampled near x vary strongly only
// across the kink, so the weak singular directions of their spread span the
// subspace along which f is differentiable.
inline Matrix smooth_subspace(Counted& f, const Vector& x, double radius, std::mt19937_64& rng) {
  const auto n = x.size();
  const auto samples = 2 * n + 2;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix grads(n, samples);
  for (Eigen::Index sidx = 0; sidx < samples; ++sidx) {
    Vector dir(n);
    for (Eigen::Index k = 0; k < n; ++k) dir[k] = normal(rng);
    dir *= radius / dir.norm();
    grads.col(sidx) = fd_gradient(f, x + dir, 1e-3 * radius);
  }
  const Vector mean = grads.rowwise().mean();
  grads.colwise() -= mean;
  Eigen::JacobiSVD<Matrix> svd(grads, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  const double cut = 1e-3 * std::max(sv.size() > 0 ? sv[0] : 0.0, 1e-300);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  return svd.matrixU().rightCols(n - rank);
}

// Alternates subspace identification with BFGS restricted to the smooth
// subspace; kinks of norms of affine maps are affine, so the restricted
// function stays smooth near the optimum.
inline void manifold_refine(Counted& f, Vector& x, double& fx, double tol, std::mt19937_64& rng) {
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  for (int round = 0; round < 4; ++round) {
    const double before = fx;
    const Matrix U = smooth_subspace(f, x, 1e-5 * scale, rng);
    if (U.cols() == 0 || U.cols() == x.size()) break;
    const Vector base = x;
    const Objective restricted = [&](const Vector& w) { return f(base + U * w); };
    Counted g(restricted);
    Vector w = Vector::Zero(U.cols());
    double fw = fx;
    bfgs(g, w, fw, 2000, 1e-7);
    if (fw < fx) {
      x = base + U * w;
      fx = fw;
    }
    polish(f, x, fx, tol, rng);
    if (before - fx < tol) break;
  }
}

}  // namespace detail

/// Minimizes a convex black-box function: per restart, BFGS on finite
/// difference gradients, line-search polishing, then BFGS restricted to the estimated smooth subspace to
/// settle onto kinks. Returns the best point over all restarts.
inline Result minimize(const Objective& objective, int dim, double tolerance,
                       const Options& opt = {}) {
  detail::Counted f(objective);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Result best;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Vector x(dim);
    if (r == 0) {
      x = opt.start ? *opt.start : Vector::Zero(dim);
    } else {
      for (int i = 0; i < dim; ++i) x[i] = opt.start_scale * normal(rng);
      if (opt.start) x += *opt.start;
    }
    double fx = f(x);
    detail::bfgs(f, x, fx, opt.max_bfgs_iters, 1e-7);
    detail::polish(f, x, fx, tolerance, rng);
    detail::manifold_refine(f, x, fx, tolerance, rng);
    if (fx < best.value) {
      best.value = fx;
      best.x = x;
    }
  }
  best.evaluations = f.count();
  return best;
}

}  // namespace danr::oracle
