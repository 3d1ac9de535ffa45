#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace danr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Conjugate exponent q with 1/p + 1/q = 1.
inline double dual_exponent(double p) { return p / (p - 1.0); }

/// ||v||_p for 1 <= p < inf, computed with max-abs scaling so large
/// entries do not overflow the power sum.
template <class Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& v, double p) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return 0.0;
  if (p == 2.0) return v.norm();
  if (p == 1.0) return v.cwiseAbs().sum();
  double acc = 0.0;
  if (p == 3.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double r = std::abs(v[i]) / scale;
      acc += r * r * r;
    }
    return scale * std::cbrt(acc);
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    acc += std::pow(std::abs(v[i]) / scale, p);
  }
  return scale * std::pow(acc, 1.0 / p);
}

/// Gradient of ||.||_p at a nonzero point: sign(v_i) (|v_i| / ||v||_p)^(p-1).
inline Vector lp_gradient(const Vector& v, double p) {
  const double n = lp_norm(v, p);
  Vector g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = std::abs(v[i]) / n;
    g[i] = (v[i] < 0 ? -1.0 : (v[i] > 0 ? 1.0 : 0.0)) * std::pow(r, p - 1.0);
  }
  return g;
}

/// Hessian of ||.||_p at a nonzero point:
///   (p-1)/N * (diag((|v_i|/N)^(p-2)) - g g^T).
/// For p < 2 the diagonal blows up at zero coordinates; it is clamped.
inline Matrix lp_hessian(const Vector& v, double p, const Vector& grad) {
  const double n = lp_norm(v, p);
  const Eigen::Index d = v.size();
  Matrix h = -(grad * grad.transpose());
  for (Eigen::Index i = 0; i < d; ++i) {
    const double r = std::abs(v[i]) / n;
    double diag = (p == 2.0) ? 1.0 : std::pow(r, p - 2.0);
    if (!std::isfinite(diag)) diag = 1e12;
    h(i, i) += std::min(diag, 1e12);
  }
  return h * ((p - 1.0) / n);
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace danr
