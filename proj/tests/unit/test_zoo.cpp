#include <gtest/gtest.h>

#include <perturbex/errors.hpp>
#include <perturbex/solver.hpp>
#include <perturbex/zoo.hpp>

using namespace perturbex;

TEST(Zoo, SeededDeterminism) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = 5;
  d.seed = 42;
  const Problem a = make_problem(d);
  const Problem b = make_problem(d);
  const Vector x = Vector::LinSpaced(5, -1, 1);
  EXPECT_EQ(a.oracle->value(x), b.oracle->value(x));
  d.seed = 43;
  EXPECT_NE(make_problem(d).oracle->value(x), a.oracle->value(x));
}

TEST(Zoo, QuadraticHasClosedFormMinimizer) {
  ProblemDescriptor d;
  d.kind = "quadratic";
  d.dim = 6;
  d.cond = 100;
  d.seed = 3;
  const Problem p = make_problem(d);
  ASSERT_TRUE(p.minimizer && p.hessian);
  EXPECT_LE(p.oracle->gradient(*p.minimizer).norm(), 1e-12);
  const Vector ev = p.hessian->eigenvalues();
  EXPECT_NEAR(ev(0) / ev(ev.size() - 1), 100.0, 1e-8);
}

TEST(Zoo, DescriptorJsonRoundTrip) {
  ProblemDescriptor d;
  d.kind = "logsumexp";
  d.dim = 4;
  d.n = 33;
  d.reg = 0.2;
  d.temp = 0.7;
  d.seed = 9;
  d.higher = HigherDerivatives::kFiniteDifference;
  const ProblemDescriptor e = descriptor_from_json(to_json(d));
  EXPECT_EQ(e.kind, d.kind);
  EXPECT_EQ(e.dim, d.dim);
  EXPECT_EQ(e.n, d.n);
  EXPECT_EQ(e.reg, d.reg);
  EXPECT_EQ(e.temp, d.temp);
  EXPECT_EQ(e.seed, d.seed);
  EXPECT_EQ(e.higher, d.higher);
}

TEST(Zoo, RejectsUnknownKind) {
  EXPECT_THROW(descriptor_from_json(nlohmann::json{{"kind", "cauchy"}, {"dim", 2}}), Error);
  EXPECT_THROW(descriptor_from_json(nlohmann::json{{"kind", "logistic"}, {"dim", 0}}), Error);
}

TEST(Zoo, HigherDerivativeModes) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = 3;
  d.higher = HigherDerivatives::kNone;
  EXPECT_FALSE(make_problem(d).oracle->has_third());
  d.higher = HigherDerivatives::kFiniteDifference;
  EXPECT_TRUE(make_problem(d).oracle->has_fourth());
}

TEST(Zoo, RandomSpdSpectrum) {
  Rng rng(1);
  const SpdOperator m = SpdOperator::from_dense(random_spd(7, 50.0, rng));
  EXPECT_GE(m.min_eigenvalue(), 1.0 - 1e-10);
  EXPECT_LE(m.max_eigenvalue(), 50.0 + 1e-8);
  EXPECT_NEAR(random_unit(9, rng).norm(), 1.0, 1e-15);
}

TEST(Zoo, LogisticConvergesQuickly) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = 10;
  d.n = 200;
  d.reg = 0.1;
  d.seed = 8;
  const Problem p = make_problem(d);
  const SolveResult r = newton_minimize(*p.oracle, Vector::Zero(10));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 50);
}
