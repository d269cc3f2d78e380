#include <gtest/gtest.h>

#include <perturbex/diagnostics.hpp>
#include <perturbex/zoo.hpp>

using namespace perturbex;

namespace {

// Gradient deliberately off by 1% in the first coordinate.
class Skewed : public Oracle {
 public:
  Eigen::Index dim() const override { return 2; }
  std::string name() const override { return "skewed"; }
  double value(const Vector& x) const override { return 0.5 * x.squaredNorm() + std::pow(x(0), 3); }
  Vector gradient(const Vector& x) const override {
    Vector g = x;
    g(0) += 3.0 * x(0) * x(0) * 1.01;
    return g;
  }
  Matrix hessian(const Vector& x) const override {
    Matrix h = Matrix::Identity(2, 2);
    h(0, 0) += 6.0 * x(0);
    return h;
  }
};

}  // namespace

TEST(RelativeMismatch, Floor) {
  const Vector one = Vector::Ones(1);
  EXPECT_DOUBLE_EQ(relative_mismatch(one, one), 0.0);
  EXPECT_NEAR(relative_mismatch(1.01 * one, one), 0.01 / 1.01, 1e-15);
  EXPECT_NEAR(relative_mismatch(1e-9 * one, Vector::Zero(1)), 1e-9 / 1e-6, 1e-15);
}

TEST(FdProbe, DetectsWrongGradient) {
  Skewed f;
  const DiagnosticsRecord r = fd_probe(f, (Vector(2) << 0.8, -0.3).finished(), 4, 1);
  const DiagnosticEntry* g = r.find("gradient");
  ASSERT_NE(g, nullptr);
  EXPECT_FALSE(g->passed());
  EXPECT_FALSE(r.all_passed());
}

TEST(FdProbe, WitnessRecorded) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = 3;
  const Problem p = make_problem(d);
  const Vector x = Vector::Constant(3, 0.1);
  const DiagnosticsRecord r = fd_probe(*p.oracle, x, 4, 2);
  EXPECT_TRUE(r.all_passed());
  for (const auto& e : r.entries) {
    EXPECT_GT(e.evaluations, 0u) << e.name;
    EXPECT_EQ(e.witness_point.size(), 3) << e.name;
  }
}

TEST(DiagnosticEntry, AdvisoryNeverFails) {
  DiagnosticEntry e = DiagnosticEntry::named("x", 1.0, true);
  e.offer(5.0, Vector::Zero(1), Vector::Zero(1));
  EXPECT_TRUE(e.passed());
  DiagnosticEntry f = DiagnosticEntry::named("y");
  f.offer(0.5, Vector::Zero(1), Vector::Zero(1));
  f.offer(1.5, Vector::Ones(1), Vector::Zero(1));
  f.offer(0.7, Vector::Zero(1), Vector::Zero(1));
  EXPECT_EQ(f.worst_ratio, 1.5);
  EXPECT_EQ(f.witness_point(0), 1.0);
  EXPECT_EQ(f.evaluations, 3u);
  EXPECT_FALSE(f.passed());
}
