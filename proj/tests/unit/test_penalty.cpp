#include <cmath>

#include <gtest/gtest.h>

#include <perturbex/errors.hpp>
#include <perturbex/harness.hpp>
#include <perturbex/penalty.hpp>
#include <perturbex/solver.hpp>

using namespace perturbex;

namespace {

struct Anchored {
  Problem problem;
  Vector xstar;
  Matrix H;
};

Anchored logistic(Eigen::Index p, std::uint64_t seed) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = p;
  d.n = 200;
  d.seed = seed;
  Anchored s{make_problem(d), Vector(), Matrix()};
  s.xstar = newton_minimize(*s.problem.oracle, Vector::Zero(p)).xhat;
  s.H = s.problem.oracle->hessian(s.xstar);
  return s;
}

SmoothnessCertificate penalized_certificate(const Anchored& s, const Matrix& g2, std::uint64_t seed) {
  const OraclePtr fG = quadratically_penalize(s.problem.oracle, g2);
  const SpdOperator FG = SpdOperator::from_dense(s.H + g2);
  const SpdOperator D = FG.power(Power::kSqrt);
  EstimatorSettings es;
  es.seed = seed;
  es.samples = 200;
  es.with_omega = false;
  return estimate_certificate(*fG, s.xstar, FG, D, auto_radius_penalty(FG, D, g2 * s.xstar, default_constants()), es,
                              "f_G");
}

}  // namespace

TEST(RidgeExact, MatchesClosedFormAndSolver) {
  Rng rng(1);
  for (int trial = 0; trial < 6; ++trial) {
    const SpdOperator F = SpdOperator::from_dense(random_spd(5, 100, rng));
    const Vector c = random_gaussian(5, rng);
    Matrix R(5, trial % 2 == 0 ? 2 : 5);
    for (Eigen::Index j = 0; j < R.cols(); ++j) R.col(j) = random_gaussian(5, rng);
    const Matrix g2 = R * R.transpose();
    const PenaltyBiasReport rep = ridge_bias_exact_quadratic(F, g2, c);
    const Vector closed = -(F.matrix() + g2).ldlt().solve(g2 * c);
    EXPECT_LE((rep.predicted_bias - closed).norm(), 1e-12 * (1 + closed.norm()));
    const ComparisonReport cmp = verify_penalty(*quadratically_penalize(make_quadratic(F, c), g2), c, rep);
    EXPECT_LE((cmp.actual_shift - closed).norm(), 1e-10 * (1 + closed.norm()));
    EXPECT_TRUE(cmp.violations().empty());
  }
}

TEST(RidgeExact, ZeroPenaltyZeroBias) {
  const SpdOperator F = SpdOperator::from_dense(Matrix{{2, 0.1}, {0.1, 1}});
  const PenaltyBiasReport rep = ridge_bias_exact_quadratic(F, Matrix::Zero(2, 2), Vector::Ones(2));
  EXPECT_EQ(rep.predicted_bias.norm(), 0.0);
  EXPECT_EQ(rep.bG, 0.0);
}

TEST(Ridge, BiasGrowsWithLambda) {
  const Anchored s = logistic(4, 2);
  double prev_pred = 0.0, prev_actual = 0.0;
  for (const double lam : {0.001, 0.01, 0.05, 0.1, 0.5}) {
    const Matrix g2 = lam * Matrix::Identity(4, 4);
    const PenaltyBiasReport rep = ridge_bias_bounds(*s.problem.oracle, s.xstar, g2, penalized_certificate(s, g2, 3));
    const ComparisonReport cmp = verify_penalty(*quadratically_penalize(s.problem.oracle, g2), s.xstar, rep);
    EXPECT_GT(rep.predicted_bias.norm(), prev_pred);
    EXPECT_GT(cmp.actual_shift.norm(), prev_actual);
    prev_pred = rep.predicted_bias.norm();
    prev_actual = cmp.actual_shift.norm();
  }
}

TEST(Ridge, CubicAndQuarticHold) {
  for (const std::uint64_t seed : {4u, 5u, 6u}) {
    const Anchored s = logistic(5, seed);
    const Matrix g2 = 0.02 * Matrix::Identity(5, 5);
    const SmoothnessCertificate c = penalized_certificate(s, g2, seed + 10);
    const OraclePtr fG = quadratically_penalize(s.problem.oracle, g2);
    for (const PenaltyBiasReport& rep : {ridge_bias_bounds(*s.problem.oracle, s.xstar, g2, c),
                                         ridge_bias_fourth_order(*s.problem.oracle, s.xstar, g2, c)}) {
      const ComparisonReport cmp = verify_penalty(*fG, s.xstar, rep);
      EXPECT_TRUE(cmp.certifying) << to_string(rep.order);
      EXPECT_TRUE(cmp.violations().empty()) << to_string(rep.order);
    }
  }
}

TEST(Ridge, RejectsNonStationaryAnchor) {
  const Anchored s = logistic(3, 7);
  const Matrix g2 = 0.1 * Matrix::Identity(3, 3);
  const SmoothnessCertificate c = penalized_certificate(s, g2, 8);
  try {
    ridge_bias_bounds(*s.problem.oracle, s.xstar + Vector::Constant(3, 0.1), g2, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAtMinimum);
  }
}

TEST(Exchangeability, QuadraticSmoothPenaltyEqualsRidge) {
  // A quadratic form passed as a smooth penalty has to reproduce the ridge report.
  const Anchored s = logistic(4, 9);
  Rng rng(10);
  Matrix R(4, 4);
  for (Eigen::Index j = 0; j < 4; ++j) R.col(j) = 0.1 * random_gaussian(4, rng);
  const Matrix g2 = R * R.transpose();
  const SmoothnessCertificate c = penalized_certificate(s, g2, 11);
  for (const Order o : {Order::kThird, Order::kFourth}) {
    const PenaltyBiasReport ridge = o == Order::kThird ? ridge_bias_bounds(*s.problem.oracle, s.xstar, g2, c)
                                                       : ridge_bias_fourth_order(*s.problem.oracle, s.xstar, g2, c);
    const PenaltyBiasReport smooth = smooth_penalty_bias(*s.problem.oracle, s.xstar, make_quadratic_form(g2), c, o);
    EXPECT_LE((ridge.predicted_bias - smooth.predicted_bias).norm(), 1e-12 * (1 + ridge.predicted_bias.norm()));
    EXPECT_NEAR(ridge.bG, smooth.bG, 1e-12 * (1 + ridge.bG));
  }
}

TEST(Smooth, LogisticPenaltyHolds) {
  const Anchored s = logistic(4, 12);
  ProblemDescriptor pd;
  pd.kind = "logsumexp";
  pd.dim = 4;
  pd.n = 30;
  pd.reg = 0.0;
  pd.seed = 13;
  const OraclePtr pen = scale_oracle(make_problem(pd).oracle, 0.01);
  const OraclePtr fG = smoothly_penalize(s.problem.oracle, pen);
  const SpdOperator FG = SpdOperator::from_dense(fG->hessian(s.xstar));
  const SpdOperator D = FG.power(Power::kSqrt);
  EstimatorSettings es;
  es.seed = 14;
  es.samples = 200;
  es.with_omega = false;
  const SmoothnessCertificate c = estimate_certificate(
      *fG, s.xstar, FG, D, auto_radius_penalty(FG, D, pen->gradient(s.xstar), default_constants()), es, "f_G");
  for (const Order o : {Order::kThird, Order::kFourth}) {
    const PenaltyBiasReport rep = smooth_penalty_bias(*s.problem.oracle, s.xstar, pen, c, o);
    const ComparisonReport cmp = verify_penalty(*fG, s.xstar, rep);
    EXPECT_TRUE(cmp.violations().empty()) << to_string(o);
  }
  EXPECT_THROW(smooth_penalty_bias(*s.problem.oracle, s.xstar, pen, c, Order::kSecond), Error);
}
