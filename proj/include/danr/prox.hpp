#pragma once

// Edge-level subproblem solvers used inside every ADMM coupling update.

#include <danr/error.hpp>
#include <danr/linalg.hpp>

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace danr::prox {

/// Inputs of the consensus-pair subproblem
///   min_{u1,u2} c ||u1 + alpha - u2||_2 + rho/2 (||a - u1||^2 + ||b - u2||^2).
struct PairUpdateInput {
  Vector a;      // x_j + delta_jk
  Vector b;      // x_k + delta_kj
  Vector alpha;  // buffer held fixed
  double c = 0;  // lambda * mu * omega_jk
  double rho = 1;
};

struct PairUpdate {
  Vector u_jk;
  Vector u_kj;
  double theta = 0;
};

/// Fusion coefficient theta = min(c / (rho ||a - b + alpha||), 1/2); a zero gap
/// gives the fully fused value 1/2.
inline double fusion_theta(double gap_norm, double c, double rho) {
  if (c <= 0.0) return 0.0;
  if (!(gap_norm > 0.0)) return 0.5;
  return std::min(c / (rho * gap_norm), 0.5);
}

/// Exact minimizer of the consensus-pair subproblem.
inline PairUpdate fused_pair_update(const PairUpdateInput& in) {
  if (in.a.size() != in.b.size() || in.a.size() != in.alpha.size()) {
    throw DimensionMismatch("fused_pair_update: vector sizes differ");
  }
  if (!in.a.allFinite() || !in.b.allFinite() || !in.alpha.allFinite() || !std::isfinite(in.c) ||
      !std::isfinite(in.rho)) {
    throw NonFinite("fused_pair_update: non-finite input");
  }
  if (in.c < 0.0 || !(in.rho > 0.0)) throw InvalidInput("fused_pair_update: need c >= 0, rho > 0");
  const double theta = fusion_theta((in.a - in.b + in.alpha).norm(), in.c, in.rho);
  PairUpdate out;
  out.theta = theta;
  out.u_jk = (1.0 - theta) * in.a + theta * in.b - theta * in.alpha;
  out.u_kj = theta * in.a + (1.0 - theta) * in.b + theta * in.alpha;
  return out;
}

/// Objective of the consensus-pair subproblem (used for checks and tests).
inline double pair_objective(const PairUpdateInput& in, const Vector& u_jk, const Vector& u_kj) {
  return in.c * (u_jk + in.alpha - u_kj).norm() +
         0.5 * in.rho * ((in.a - u_jk).squaredNorm() + (in.b - u_kj).squaredNorm());
}

/// h(alpha) = c1 ||alpha||_p + c2 ||v + alpha||_2.
struct AlphaSubproblem {
  Vector v;        // u_jk - u_kj after the pair update
  double c1 = 0;   // lambda (1 - mu)
  double c2 = 0;   // lambda mu omega_jk
  double p = 3.0;
};

enum class AlphaRegime { origin, full_absorption, interior, unchanged };

struct AlphaResult {
  Vector alpha;
  AlphaRegime regime = AlphaRegime::origin;
  bool converged = true;
  int iterations = 0;
};

inline double alpha_objective(const AlphaSubproblem& s, const Vector& alpha) {
  return s.c1 * lp_norm(alpha, s.p) + s.c2 * (s.v + alpha).norm();
}

/// alpha = 0 is optimal iff c2 ||v||_q / ||v||_2 <= c1.
inline bool origin_is_optimal(const AlphaSubproblem& s) {
  const double vn = s.v.norm();
  if (!(vn > 0.0)) return true;
  return s.c2 * lp_norm(s.v, dual_exponent(s.p)) / vn <= s.c1;
}

/// alpha = -v is optimal iff c1 ||grad ||.||_p (-v)||_2 <= c2.
inline bool absorption_is_optimal(const AlphaSubproblem& s) {
  if (!(s.v.norm() > 0.0)) return true;
  const Vector neg = -s.v;
  return s.c1 * lp_gradient(neg, s.p).norm() <= s.c2;
}

namespace detail {

/// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign
/// (Brent's method).
template <class F>
double find_root(F&& f, double lo, double hi, double flo, double fhi, double xtol,
                 int max_iters, int* used = nullptr) {
  double a = lo, b = hi, fa = flo, fb = fhi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a, fc = fa, d = b - a, e = d;
  int it = 0;
  for (; it < max_iters; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double pp, q;
      const double s = fb / fa;
      if (a == c) {
        pp = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc, r = fb / fc;
        pp = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (pp > 0.0) q = -q;
      pp = std::abs(pp);
      if (2.0 * pp < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = pp / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
  }
  if (used) *used = it;
  return b;
}

/// Nonnegative root y of y + kappa y^(p-1) = a (a >= 0, kappa > 0).
inline double lp_scalar(double a, double kappa, double p) {
  if (!(a > 0.0)) return 0.0;
  if (p == 2.0) return a / (1.0 + kappa);
  if (p == 3.0) return 2.0 * a / (1.0 + std::sqrt(1.0 + 4.0 * kappa * a));
  auto g = [&](double y) { return y + kappa * std::pow(y, p - 1.0) - a; };
  return find_root(g, 0.0, a, -a, g(a), 1e-16 * a, 200);
}

}  // namespace detail

/// Proximal map of t ||.||_p:  argmin t ||x||_p + 1/2 ||x - w||^2.
///
/// Zero exactly when ||w||_q <= t. Otherwise x_i = sign(w_i) y_i with
/// y_i + t (y_i / N)^(p-1) = |w_i| and N = ||y||_p, found by a scalar
/// root search on N.
inline Vector lp_prox(const Vector& w, double t, double p) {
  const auto d = w.size();
  if (t <= 0.0) return w;
  const double wq = lp_norm(w, dual_exponent(p));
  if (wq <= t) return Vector::Zero(d);
  if (p == 2.0) return w * (1.0 - t / w.norm());
  const Vector a = w.cwiseAbs();
  Vector y(d);
  auto fill = [&](double n) {
    const double kappa = t * std::pow(n, 1.0 - p);
    for (Eigen::Index i = 0; i < d; ++i) y[i] = detail::lp_scalar(a[i], kappa, p);
  };
  // phi(N) = ||y(N)||_p / N - 1 falls from (||w||_q / t)^(q/p) - 1 > 0 at 0+
  // to a negative value at ||w||_p.
  auto phi = [&](double n) {
    fill(n);
    return lp_norm(y, p) / n - 1.0;
  };
  const double hi = lp_norm(a, p);
  double lo = hi * 1e-3;
  double flo = phi(lo);
  while (flo <= 0.0 && lo > hi * 1e-300) {
    lo *= 1e-3;
    flo = phi(lo);
  }
  const double fhi = phi(hi);
  const double n = detail::find_root(phi, lo, hi, flo, fhi, 1e-15 * hi, 200);
  fill(n);
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = w[i] < 0.0 ? -y[i] : y[i];
  return x;
}

/// Euclidean projection onto {y : ||y||_q <= r}, q the dual exponent of p.
inline Vector dual_ball_project(const Vector& w, double r, double p) {
  if (r <= 0.0) return Vector::Zero(w.size());
  return w - lp_prox(w, r, p);
}

/// Minimizes h(alpha) = c1 ||alpha||_p + c2 ||v + alpha||_2.
///
/// The two nonsmooth candidates alpha = 0 and alpha = -v are tested through
/// their exact optimality conditions first. Otherwise, with s = ||v + alpha||
/// at the optimum, alpha = prox_{(c1 s / c2) ||.||_p}(-v), and s is the root
/// of ||v + alpha(s)|| = s, found by a bracketed scalar search.
/// `converged` is false if the search hits `max_iters`.
inline AlphaResult alpha_subproblem(const AlphaSubproblem& s, const Vector& warm_start,
                                    int max_iters = 200, double tolerance = 1e-12) {
  if (!(s.p > 1.0) || !std::isfinite(s.p)) throw InvalidInput("alpha_subproblem: need 1 < p < inf");
  if (s.c1 < 0.0 || s.c2 < 0.0) throw InvalidInput("alpha_subproblem: need c1, c2 >= 0");
  if (!s.v.allFinite()) throw NonFinite("alpha_subproblem: non-finite v");
  const auto d = s.v.size();
  AlphaResult out;
  if (s.c1 == 0.0 && s.c2 == 0.0) {
    out.alpha = warm_start.size() == d ? warm_start : Vector::Zero(d);
    out.regime = AlphaRegime::unchanged;
    return out;
  }
  if (!(s.v.norm() > 0.0) || s.c2 == 0.0 || origin_is_optimal(s)) {
    out.alpha = Vector::Zero(d);
    out.regime = AlphaRegime::origin;
    return out;
  }
  if (s.c1 == 0.0 || absorption_is_optimal(s)) {
    out.alpha = -s.v;
    out.regime = AlphaRegime::full_absorption;
    return out;
  }
  out.regime = AlphaRegime::interior;
  const double k = s.c1 / s.c2;
  const Vector w = -s.v;
  // Beyond s_max the prox returns 0 and ||v|| < s_max since the origin is
  // not optimal; near 0 the ratio tends to k ||grad||_2 > 1.
  const double s_max = lp_norm(w, dual_exponent(s.p)) / k;
  auto g = [&](double sv) { return (s.v + lp_prox(w, k * sv, s.p)).norm() / sv - 1.0; };
  double lo = s_max * 1e-3;
  double glo = g(lo);
  while (glo <= 0.0 && lo > s_max * 1e-300) {
    lo *= 1e-3;
    glo = g(lo);
  }
  const double ghi = g(s_max);
  int used = 0;
  const double root = detail::find_root(g, lo, s_max, glo, ghi, tolerance * s_max, max_iters, &used);
  out.iterations = used;
  out.converged = used < max_iters;
  out.alpha = lp_prox(w, k * root, s.p);
  (void)warm_start;
  return out;
}

/// Projection onto K = {y : ||y||_2 <= c2, ||y||_q <= c1}, the dual ball of
/// the buffered edge penalty psi(D) = min_a c1 ||a||_p + c2 ||D + a||_2.
/// With gamma the multiplier of the l2 constraint, y = P_q(w / (1 + gamma)).
inline Vector buffered_dual_project(const Vector& w, double c1, double c2, double p) {
  if (c2 <= 0.0 || c1 <= 0.0) return Vector::Zero(w.size());
  Vector y = dual_ball_project(w, c1, p);
  if (y.norm() <= c2) return y;
  const double wn = w.norm();
  auto f = [&](double gamma) { return dual_ball_project(w / (1.0 + gamma), c1, p).norm() - c2; };
  const double hi = std::max(0.0, wn / c2 - 1.0);
  const double gamma = detail::find_root(f, 0.0, hi, y.norm() - c2, f(hi), 1e-15 * (1.0 + hi), 200);
  y = dual_ball_project(w / (1.0 + gamma), c1, p);
  const double yn = y.norm();
  if (yn > c2) y *= c2 / yn;
  return y;
}

struct BufferedPair {
  Vector u_jk;
  Vector u_kj;
  Vector alpha;
};

/// Exact joint minimizer over (u_jk, u_kj, alpha) of
///   c2 ||u_jk + alpha - u_kj||_2 + c1 ||alpha||_p + rho/2 (||a - u_jk||^2 + ||b - u_kj||^2).
/// u_jk + u_kj = a + b at the optimum and the gap D = u_jk - u_kj is the
/// prox of the buffered edge penalty at a - b; alpha then solves the
/// alpha-subproblem for v = D.
inline BufferedPair buffered_pair_update(const Vector& a, const Vector& b, double c1, double c2,
                                         double rho, double p, const Vector& alpha_warm) {
  if (a.size() != b.size()) throw DimensionMismatch("buffered_pair_update: vector sizes differ");
  if (!(rho > 0.0) || c1 < 0.0 || c2 < 0.0) throw InvalidInput("buffered_pair_update: bad weights");
  const Vector e = a - b;
  const Vector gap = e - (2.0 / rho) * buffered_dual_project(0.5 * rho * e, c1, c2, p);
  BufferedPair out;
  out.alpha = alpha_subproblem({gap, c1, c2, p}, alpha_warm).alpha;
  out.u_jk = 0.5 * (a + b + gap);
  out.u_kj = 0.5 * (a + b - gap);
  return out;
}

/// One-sided variant against a fixed anchor h:
///   min_{v, beta} c2 ||h + beta - v||_2 + c1 ||beta||_p + rho/2 ||v - b||^2.
inline std::pair<Vector, Vector> anchored_pair_update(const Vector& h, const Vector& b, double c1,
                                                      double c2, double rho, double p,
                                                      const Vector& beta_warm) {
  if (h.size() != b.size()) throw DimensionMismatch("anchored_pair_update: vector sizes differ");
  if (!(rho > 0.0) || c1 < 0.0 || c2 < 0.0) throw InvalidInput("anchored_pair_update: bad weights");
  const Vector e = h - b;
  const Vector gap = e - (1.0 / rho) * buffered_dual_project(rho * e, c1, c2, p);
  Vector beta = alpha_subproblem({gap, c1, c2, p}, beta_warm).alpha;
  return {h - gap, std::move(beta)};
}

/// Sum over groups of ||alpha_g||_p.
inline double group_lp_norm(std::span<const Vector> groups, double p) {
  if (!(p > 1.0)) throw InvalidInput("group_lp_norm: need p > 1");
  double total = 0.0;
  for (const auto& g : groups) total += lp_norm(g, p);
  return total;
}

/// Column-wise variant for groups stored as the columns of a matrix.
inline double group_lp_norm(const Matrix& groups, double p) {
  if (!(p > 1.0)) throw InvalidInput("group_lp_norm: need p > 1");
  double total = 0.0;
  for (Eigen::Index c = 0; c < groups.cols(); ++c) total += lp_norm(groups.col(c), p);
  return total;
}

/// Block soft threshold: w * max(0, 1 - t / ||w||).
inline Vector shrink(const Vector& w, double t) {
  const double n = w.norm();
  if (n <= t) return Vector::Zero(w.size());
  return w * (1.0 - t / n);
}

}  // namespace danr::prox
