#include <danr/oracle.hpp>
#include <danr/prox.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace danr;
using namespace danr::prox;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index d, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, scale);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n01(rng);
  return v;
}

double pair_oracle(const PairUpdateInput& in) {
  const auto d = in.a.size();
  const auto f = [&](const Vector& z) { return pair_objective(in, z.head(d), z.tail(d)); };
  Vector start(2 * d);
  start << in.a, in.b;
  oracle::Options opt;
  opt.start = start;
  return oracle::minimize(f, static_cast<int>(2 * d), 1e-12, opt).value;
}

// First-order residual of h at alpha: distance from 0 to the subdifferential.
double alpha_residual(const AlphaSubproblem& s, const Vector& alpha) {
  const Vector r = s.v + alpha;
  const double an = alpha.norm();
  const double rn = r.norm();
  if (an > 0.0 && rn > 0.0) return (s.c1 * lp_gradient(alpha, s.p) + s.c2 * r / rn).norm();
  if (an == 0.0 && rn > 0.0) {
    // need -c2 r / |r| in c1 * (dual-norm ball)
    const Vector g = s.c2 * r / rn;
    return std::max(0.0, lp_norm(g, dual_exponent(s.p)) - s.c1);
  }
  if (rn == 0.0 && an > 0.0) {
    const Vector g = s.c1 * lp_gradient(alpha, s.p);
    return std::max(0.0, g.norm() - s.c2);
  }
  return 0.0;
}

}  // namespace

TEST(FusedPairUpdate, ZeroGapFusesAtCommonPoint) {
  const auto out = fused_pair_update({vec({1, 1}), vec({1, 1}), vec({0, 0}), 0.7, 1.0});
  EXPECT_DOUBLE_EQ(out.theta, 0.5);
  EXPECT_TRUE(out.u_jk.isApprox(vec({1, 1})));
  EXPECT_TRUE(out.u_kj.isApprox(vec({1, 1})));
}

TEST(FusedPairUpdate, NoPenaltyKeepsInputs) {
  const auto out = fused_pair_update({vec({2, 0}), vec({5, 1}), vec({0.3, -4}), 0.0, 1.0});
  EXPECT_EQ(out.theta, 0.0);
  EXPECT_TRUE(out.u_jk == vec({2, 0}));
  EXPECT_TRUE(out.u_kj == vec({5, 1}));
}

TEST(FusedPairUpdate, InteriorAndClampedCasesMatchOracle) {
  const PairUpdateInput inner{vec({0, 0}), vec({4, 0}), vec({0, 0}), 1.0, 1.0};
  const auto a = fused_pair_update(inner);
  EXPECT_NEAR(a.theta, 0.25, 1e-15);
  EXPECT_NEAR((a.u_jk - vec({1, 0})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((a.u_kj - vec({3, 0})).norm(), 0.0, 1e-14);
  EXPECT_NEAR(pair_objective(inner, a.u_jk, a.u_kj), pair_oracle(inner), 1e-8);

  const PairUpdateInput clamp{vec({0, 0}), vec({1, 0}), vec({0, 0}), 10.0, 1.0};
  const auto b = fused_pair_update(clamp);
  EXPECT_EQ(b.theta, 0.5);
  EXPECT_NEAR((b.u_jk - vec({0.5, 0})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((b.u_kj - vec({0.5, 0})).norm(), 0.0, 1e-14);
  EXPECT_NEAR(pair_objective(clamp, b.u_jk, b.u_kj), pair_oracle(clamp), 1e-8);
}

TEST(FusedPairUpdate, RejectsBadInput) {
  EXPECT_THROW(fused_pair_update({vec({std::nan("")}), vec({0}), vec({0}), 1.0, 1.0}), NonFinite);
  EXPECT_THROW(fused_pair_update({vec({0}), vec({0}), vec({0}), 1.0, 0.0}), InvalidInput);
  EXPECT_THROW(fused_pair_update({vec({0}), vec({0}), vec({0}), -1.0, 1.0}), InvalidInput);
  EXPECT_THROW(fused_pair_update({vec({0, 1}), vec({0}), vec({0}), 1.0, 1.0}), DimensionMismatch);
}

TEST(FusedPairUpdateProperty, LocalOptimalityAndOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    PairUpdateInput in{random_vector(rng, d), random_vector(rng, d), random_vector(rng, d, 0.5), 2.0 * u01(rng),
                       0.2 + 2.0 * u01(rng)};
    const auto out = fused_pair_update(in);
    const double f = pair_objective(in, out.u_jk, out.u_kj);
    for (int k = 0; k < 1000; ++k) {
      const double scale = 1e-3 * (1 + k % 10);
      const Vector pj = out.u_jk + random_vector(rng, d, scale);
      const Vector pk = out.u_kj + random_vector(rng, d, scale);
      ASSERT_LE(f, pair_objective(in, pj, pk) + 1e-12);
    }
    EXPECT_NEAR(f, pair_oracle(in), 1e-6);
  }
}

TEST(FusedPairUpdateProperty, ThetaMonotoneInC) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    PairUpdateInput in{random_vector(rng, 3), random_vector(rng, 3), random_vector(rng, 3), 0.0, 1.3};
    double last = -1.0;
    for (double c = 0.0; c <= 5.0; c += 0.05) {
      in.c = c;
      const auto out = fused_pair_update(in);
      EXPECT_GE(out.theta, last);
      last = out.theta;
      if (out.theta == 0.5) {
        EXPECT_NEAR((out.u_jk + in.alpha - out.u_kj).norm(), 0.0, 1e-12);
      }
    }
  }
}

TEST(FusedPairUpdateProperty, ScalingCovariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    PairUpdateInput in{random_vector(rng, 4), random_vector(rng, 4), random_vector(rng, 4), 0.8, 1.0};
    const auto base = fused_pair_update(in);
    const double s = 0.1 + trial * 0.2;
    PairUpdateInput scaled{s * in.a, s * in.b, s * in.alpha, s * in.c, in.rho};
    const auto out = fused_pair_update(scaled);
    EXPECT_NEAR((out.u_jk - s * base.u_jk).norm(), 0.0, 1e-12 * s * (1 + base.u_jk.norm()));
    EXPECT_NEAR((out.u_kj - s * base.u_kj).norm(), 0.0, 1e-12 * s * (1 + base.u_kj.norm()));
  }
}

TEST(AlphaSubproblem, ZeroVectorGivesZero) {
  const auto r = alpha_subproblem({vec({0, 0, 0}), 1.0, 1.0, 3.0}, vec({0.2, 0.1, 0}));
  EXPECT_TRUE(r.alpha.isZero());
}

TEST(AlphaSubproblem, OriginCondition) {
  const AlphaSubproblem s{vec({3, 4}), 1.2, 1.0, 3.0};
  // ||(0.6, 0.8)||_1.5
  const double lhs = std::pow(std::pow(0.6, 1.5) + std::pow(0.8, 1.5), 1.0 / 1.5);
  EXPECT_NEAR(lhs, 1.117, 1e-3);
  EXPECT_TRUE(origin_is_optimal(s));
  const auto r = alpha_subproblem(s, Vector::Zero(2));
  EXPECT_EQ(r.regime, AlphaRegime::origin);
  EXPECT_TRUE(r.alpha.isZero());
  // grid check: no point of a fine grid beats the origin
  double best = alpha_objective(s, Vector::Zero(2));
  for (double x = -5; x <= 1; x += 0.01) {
    for (double y = -6; y <= 1; y += 0.01) best = std::min(best, alpha_objective(s, vec({x, y})));
  }
  EXPECT_GE(best, alpha_objective(s, Vector::Zero(2)) - 1e-12);
}

TEST(AlphaSubproblem, AbsorptionCondition) {
  const AlphaSubproblem s{vec({1, 0}), 0.5, 1.0, 3.0};
  EXPECT_NEAR(lp_gradient(-s.v, 3.0).norm(), 1.0, 1e-15);
  EXPECT_TRUE(absorption_is_optimal(s));
  const auto r = alpha_subproblem(s, Vector::Zero(2));
  EXPECT_EQ(r.regime, AlphaRegime::full_absorption);
  EXPECT_TRUE(r.alpha.isApprox(vec({-1, 0})));
  const auto o = oracle::minimize([&](const Vector& a) { return alpha_objective(s, a); }, 2, 1e-12);
  EXPECT_NEAR(alpha_objective(s, r.alpha), o.value, 1e-6);
}

TEST(AlphaSubproblem, DegenerateWeights) {
  const Vector warm = vec({0.3, -0.2});
  const auto both = alpha_subproblem({vec({1, 2}), 0.0, 0.0, 3.0}, warm);
  EXPECT_TRUE(both.alpha == warm);
  EXPECT_EQ(both.regime, AlphaRegime::unchanged);
  const auto no_c1 = alpha_subproblem({vec({1, 2}), 0.0, 1.0, 3.0}, warm);
  EXPECT_TRUE(no_c1.alpha.isApprox(vec({-1, -2})));
  EXPECT_THROW(alpha_subproblem({vec({1}), 1.0, 1.0, 1.0}, vec({0})), InvalidInput);
  EXPECT_THROW(alpha_subproblem({vec({1}), -1.0, 1.0, 3.0}, vec({0})), InvalidInput);
}

TEST(AlphaSubproblemProperty, InteriorMatchesOracleAndResidual) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index d = 1 + trial % 6;
    const double p = trial % 2 ? 3.0 : 2.0;
    AlphaSubproblem s{random_vector(rng, d), 0.0, 0.2 + 2.0 * u01(rng), p};
    s.c1 = s.c2 * (0.5 + 1.2 * u01(rng));
    const auto r = alpha_subproblem(s, Vector::Zero(d));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.regime == AlphaRegime::origin, origin_is_optimal(s));
    if (!origin_is_optimal(s)) {
      EXPECT_EQ(r.regime == AlphaRegime::full_absorption, absorption_is_optimal(s));
    }
    EXPECT_LE(alpha_residual(s, r.alpha), 1e-6);
    const auto o = oracle::minimize([&](const Vector& a) { return alpha_objective(s, a); }, static_cast<int>(d),
                                    1e-12);
    EXPECT_LE(alpha_objective(s, r.alpha), o.value + 1e-9);
  }
}

TEST(AlphaSubproblemProperty, InteriorBand) {
  // interior iff c2 / ||grad||_p(-v)||_2 < c1 < c2 ||v||_q / ||v||_2
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = 2 + trial % 5;
    AlphaSubproblem s{random_vector(rng, d), 0.0, 0.5 + u01(rng), 3.0};
    const double lo = s.c2 / lp_gradient(-s.v, 3.0).norm();
    const double hi = s.c2 * lp_norm(s.v, 1.5) / s.v.norm();
    ASSERT_LT(lo, hi);
    s.c1 = lo + (0.05 + 0.9 * u01(rng)) * (hi - lo);
    const auto r = alpha_subproblem(s, Vector::Zero(d));
    EXPECT_EQ(r.regime, AlphaRegime::interior);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(alpha_residual(s, r.alpha), 1e-6);
    const auto o = oracle::minimize([&](const Vector& a) { return alpha_objective(s, a); }, static_cast<int>(d),
                                    1e-12);
    EXPECT_LE(alpha_objective(s, r.alpha), o.value + 1e-9);
  }
}

TEST(AlphaSubproblemProperty, WarmStartDoesNotChangeTheAnswer) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    AlphaSubproblem s{random_vector(rng, 3), 0.6, 1.0, 3.0};
    const auto a = alpha_subproblem(s, Vector::Zero(3));
    const auto b = alpha_subproblem(s, random_vector(rng, 3));
    EXPECT_NEAR(alpha_objective(s, a.alpha), alpha_objective(s, b.alpha), 1e-12);
  }
}

TEST(BufferedPairUpdate, JointMinimizerMatchesOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const double p = trial % 2 ? 3.0 : 2.0;
    const Vector a = random_vector(rng, d);
    const Vector b = random_vector(rng, d);
    const double c2 = 0.2 + 2.0 * u01(rng);
    const double c1 = c2 * (0.5 + 1.2 * u01(rng));
    const double rho = 0.3 + 2.0 * u01(rng);
    const auto out = buffered_pair_update(a, b, c1, c2, rho, p, Vector::Zero(d));
    const auto f = [&](const Vector& z) {
      const Vector u1 = z.head(d), u2 = z.segment(d, d), al = z.tail(d);
      return c2 * (u1 + al - u2).norm() + c1 * lp_norm(al, p) +
             0.5 * rho * ((a - u1).squaredNorm() + (b - u2).squaredNorm());
    };
    Vector z(3 * d);
    z << out.u_jk, out.u_kj, out.alpha;
    const auto o = oracle::minimize(f, static_cast<int>(3 * d), 1e-12);
    EXPECT_LE(f(z), o.value + 1e-8);
    EXPECT_GE(f(z), o.value - 1e-5);
  }
}

TEST(AnchoredPairUpdate, MatchesOracle) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 15; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const Vector h = random_vector(rng, d);
    const Vector b = random_vector(rng, d);
    const double c1 = 0.7, c2 = 0.9, rho = 1.1, p = 3.0;
    const auto [v, beta] = anchored_pair_update(h, b, c1, c2, rho, p, Vector::Zero(d));
    const auto f = [&](const Vector& z) {
      const Vector vv = z.head(d), bb = z.tail(d);
      return c2 * (h + bb - vv).norm() + c1 * lp_norm(bb, p) + 0.5 * rho * (vv - b).squaredNorm();
    };
    Vector z(2 * d);
    z << v, beta;
    EXPECT_NEAR(f(z), oracle::minimize(f, static_cast<int>(2 * d), 1e-12).value, 1e-6);
  }
}

TEST(GroupLpNorm, Values) {
  EXPECT_EQ(group_lp_norm(Matrix::Zero(3, 4), 3.0), 0.0);
  std::vector<Vector> one = {vec({3, 4})};
  EXPECT_NEAR(group_lp_norm(one, 2.0), 5.0, 1e-15);
  std::vector<Vector> ones = {vec({1, 1, 1})};
  EXPECT_NEAR(group_lp_norm(ones, 3.0), 1.4422495703074083, 1e-15);
  Matrix m(2, 2);
  m << 3, 1, 4, 1;
  EXPECT_NEAR(group_lp_norm(m, 2.0), 5.0 + std::sqrt(2.0), 1e-14);
}

TEST(LpProx, ZeroInsideDualBallAndStationaryOutside) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Vector w = random_vector(rng, 4);
    const double t = 0.3 + 0.05 * trial;
    const Vector x = lp_prox(w, t, 3.0);
    if (lp_norm(w, 1.5) <= t) {
      EXPECT_TRUE(x.isZero());
    } else {
      EXPECT_NEAR((x - w + t * lp_gradient(x, 3.0)).norm(), 0.0, 1e-9);
    }
  }
}

TEST(Oracle, QuadraticBowl) {
  const auto r = oracle::minimize([](const Vector& x) { return x.squaredNorm(); }, 2, 1e-12);
  EXPECT_LT(r.x.norm(), 1e-6);
  EXPECT_LT(r.value, 1e-12);
}
