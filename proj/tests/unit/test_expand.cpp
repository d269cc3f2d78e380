#include <cmath>

#include <gtest/gtest.h>

#include <perturbex/errors.hpp>
#include <perturbex/expand.hpp>
#include <perturbex/harness.hpp>
#include <perturbex/solver.hpp>

using namespace perturbex;

namespace {

struct Anchored {
  Problem problem;
  Vector xstar;
  SpdOperator F = SpdOperator::identity(1);
  SpdOperator D = SpdOperator::identity(1);
};

Anchored logistic(Eigen::Index p, std::uint64_t seed) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = p;
  d.n = 200;
  d.seed = seed;
  Anchored s{make_problem(d), Vector(), SpdOperator::identity(1), SpdOperator::identity(1)};
  s.xstar = newton_minimize(*s.problem.oracle, Vector::Zero(p)).xhat;
  s.F = SpdOperator::from_dense(s.problem.oracle->hessian(s.xstar));
  s.D = s.F.power(Power::kSqrt);
  return s;
}

Vector direction(const SpdOperator& F, double scale, std::uint64_t seed) {
  Rng rng(seed);
  return scale * F.apply(Power::kSqrt, random_unit(F.dim(), rng));
}

SmoothnessCertificate estimated(const Anchored& s, const Vector& a, std::uint64_t seed) {
  const double r = auto_radius_linear(s.F, s.D, a, 1.0, default_constants());
  EstimatorSettings es;
  es.seed = seed;
  es.samples = 200;
  return estimate_certificate(*s.problem.oracle, s.xstar, s.F, s.D, r, es);
}

}  // namespace

TEST(Exact, QuadraticMatchesSolver) {
  Rng rng(1);
  const SpdOperator F = SpdOperator::from_dense(random_spd(8, 1e3, rng));
  const Vector c = random_gaussian(8, rng);
  const Vector a = random_gaussian(8, rng);
  const OraclePtr q = make_quadratic(F, c);
  const ExpansionReport rep = exact_quadratic_expansion(F, a);
  const ComparisonReport cmp = verify_expansion(*q, c, a, rep);
  EXPECT_LE((cmp.actual_shift - rep.predicted_shift).norm(), 1e-10 * (1 + rep.predicted_shift.norm()));
  EXPECT_NEAR(cmp.actual_value_change, rep.predicted_value_change, 1e-12 * (1 + std::abs(rep.predicted_value_change)));
  EXPECT_TRUE(cmp.violations().empty());
}

TEST(Skew, CubicClosedForm) {
  // f = x³ has f''' = 6; at u = 1 the skew value is 1 and its gradient 3.
  const OraclePtr cubic = make_separable_polynomial(1, {0, 0, 0, 1});
  const SkewTerm t = skewness_correction(*cubic, Vector::Zero(1), Vector::Ones(1));
  EXPECT_NEAR(t.value, 1.0, 1e-14);
  EXPECT_NEAR(t.gradient(0), 3.0, 1e-14);
  const SkewTerm h = skewness_correction(*cubic, Vector::Zero(1), Vector::Constant(1, 2.0));
  EXPECT_NEAR(h.value, 8.0, 1e-13);
  EXPECT_NEAR(h.gradient(0), 12.0, 1e-13);
}

TEST(Skew, Homogeneity) {
  const Anchored s = logistic(4, 2);
  Rng rng(3);
  const Vector u = random_gaussian(4, rng);
  const SkewTerm t1 = skewness_correction(*s.problem.oracle, s.xstar, u);
  const SkewTerm t2 = skewness_correction(*s.problem.oracle, s.xstar, -2.0 * u);
  EXPECT_NEAR(t2.value, -8.0 * t1.value, 1e-12 * (1 + std::abs(t1.value)));
  EXPECT_LE((t2.gradient - 4.0 * t1.gradient).norm(), 1e-12 * (1 + t1.gradient.norm()));
}

TEST(Antisymmetry, OddOrdersFlipEvenCorrectionStays) {
  const Anchored s = logistic(5, 4);
  const Vector a = direction(s.F, 0.05, 5);
  const SmoothnessCertificate c = estimated(s, a, 6);
  for (const Order o : {Order::kSecond, Order::kThird}) {
    const ExpansionReport p = expansion(o, *s.problem.oracle, s.xstar, s.F, a, c);
    const ExpansionReport m = expansion(o, *s.problem.oracle, s.xstar, s.F, -a, c);
    EXPECT_LE((p.predicted_shift + m.predicted_shift).norm(), 1e-14 * p.predicted_shift.norm());
    EXPECT_NEAR(p.predicted_value_change, m.predicted_value_change, 1e-15);
  }
  const ExpansionReport p = fourth_order_expansion(*s.problem.oracle, s.xstar, s.F, a, c);
  const ExpansionReport m = fourth_order_expansion(*s.problem.oracle, s.xstar, s.F, -a, c);
  ASSERT_TRUE(p.skew_correction && m.skew_correction);
  EXPECT_LE((*p.skew_correction - *m.skew_correction).norm(), 1e-14 * p.skew_correction->norm());
  EXPECT_LE((p.predicted_shift + m.predicted_shift - 2.0 * *p.skew_correction).norm(),
            1e-12 * p.predicted_shift.norm());
  EXPECT_NEAR(*p.skew_value, -*m.skew_value, 1e-15);
}

TEST(Validity, LogisticAllOrdersCertifyWithoutViolation) {
  for (const std::uint64_t seed : {7u, 8u, 9u}) {
    const Anchored s = logistic(5, seed);
    const Vector a = direction(s.F, 0.05, seed + 10);
    const SmoothnessCertificate c = estimated(s, a, seed + 20);
    for (const Order o : {Order::kSecond, Order::kThird, Order::kFourth}) {
      const ExpansionReport rep = expansion(o, *s.problem.oracle, s.xstar, s.F, a, c);
      const ComparisonReport cmp = verify_expansion(*s.problem.oracle, s.xstar, a, rep);
      EXPECT_TRUE(cmp.certifying) << to_string(o);
      EXPECT_TRUE(cmp.violations().empty()) << to_string(o);
    }
  }
}

TEST(Validity, DeclaredTooSmallTauIsCaught) {
  const Anchored s = logistic(5, 11);
  const Vector a = direction(s.F, 0.2, 12);
  const double r = auto_radius_linear(s.F, s.D, a, 1.0, default_constants());
  const SmoothnessCertificate c = declared_certificate(s.D, r, 1.0, 0.0, 1e-6, std::nullopt);
  const ExpansionReport rep = third_order_expansion(s.F, s.xstar, a, c);
  const ComparisonReport cmp = verify_expansion(*s.problem.oracle, s.xstar, a, rep);
  EXPECT_TRUE(cmp.certifying);
  EXPECT_FALSE(cmp.violations().empty());
}

TEST(Gates, LargeTauUncertifies) {
  const Anchored s = logistic(3, 13);
  const Vector a = direction(s.F, 0.1, 14);
  const double r = auto_radius_linear(s.F, s.D, a, 1.0, default_constants());
  const SmoothnessCertificate c = declared_certificate(s.D, r, 1.0, 0.0, 1e3, 1e3);
  const BoundSet b = third_order_bounds(s.F, a, c);
  EXPECT_FALSE(b.groups_pass({"third_order_shift"}));
  for (const auto& sb : b.shifts) {
    if (sb.group == "third_order_shift") {
      EXPECT_FALSE(sb.certified);
    }
  }
}

TEST(Gates, MissingTauSkipsOrder) {
  const Anchored s = logistic(3, 15);
  const Vector a = direction(s.F, 0.1, 16);
  const SmoothnessCertificate c = declared_certificate(s.D, 1.0, 1.0, 0.0, std::nullopt, std::nullopt);
  EXPECT_THROW(third_order_expansion(s.F, s.xstar, a, c), Error);
}

TEST(Dominance, FourthOrderResidualBelowThird) {
  const Anchored s = logistic(5, 17);
  const Vector a = direction(s.F, 0.02, 18);
  const SmoothnessCertificate c = estimated(s, a, 19);
  const ComparisonReport c3 =
      verify_expansion(*s.problem.oracle, s.xstar, a, third_order_expansion(s.F, s.xstar, a, c));
  const ComparisonReport c4 =
      verify_expansion(*s.problem.oracle, s.xstar, a, fourth_order_expansion(*s.problem.oracle, s.xstar, s.F, a, c));
  const ComparisonEntry* r3 = c3.find("third_order_shift/D^-1F:first_order_residual");
  const ComparisonEntry* r4 = c4.find("fourth_order/D^-1F:skew_residual");
  ASSERT_NE(r3, nullptr);
  ASSERT_NE(r4, nullptr);
  EXPECT_LE(r4->residual, r3->residual);
}

TEST(Distance, NewtonStepFromNearbyIterate) {
  const Anchored s = logistic(4, 20);
  Rng rng(21);
  const Vector xk = s.xstar + 0.02 * s.F.apply(Power::kInvSqrt, random_unit(4, rng));
  const SpdOperator Fk = SpdOperator::from_dense(s.problem.oracle->hessian(xk));
  const SpdOperator Dk = Fk.power(Power::kSqrt);
  const Vector gk = s.problem.oracle->gradient(xk);
  EstimatorSettings es;
  es.seed = 22;
  es.samples = 200;
  es.with_omega = false;
  const SmoothnessCertificate c = estimate_certificate(*s.problem.oracle, xk, Fk, Dk,
                                                       auto_radius_linear(Fk, Dk, gk, 1.0, default_constants()), es);
  const ExpansionReport rep = distance_to_optimum(*s.problem.oracle, xk, c);
  EXPECT_EQ(rep.hessian_at, "iterate");
  const ComparisonReport cmp = compare_report(rep, s.xstar - xk, 0.0, s.problem.oracle->value(xk));
  const ComparisonEntry* e = cmp.find("third_order_shift/D^-1F:first_order_residual");
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(e->certified);
  EXPECT_LE(e->slack, kSlackTolerance);
}

TEST(QpLemma, ValidTriplePasses) {
  Rng rng(23);
  const SpdOperator U = SpdOperator::from_dense(random_spd(4, 10, rng));
  const Vector s = 0.9 * random_unit(4, rng);
  const DiagnosticsRecord r = qp_lemma_check(U, s, 0.2, 1.0, 2000, 24);
  EXPECT_TRUE(r.all_passed());
}

TEST(QpLemma, PreconditionNamed) {
  const SpdOperator U = SpdOperator::identity(2);
  try {
    qp_lemma_check(U, Vector::Constant(2, 0.6), 10.0, 1.0, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPreconditionViolated);
  }
}
