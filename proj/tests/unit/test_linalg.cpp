#include <functional>

#include <gtest/gtest.h>

#include <perturbex/errors.hpp>
#include <perturbex/linalg.hpp>
#include <perturbex/zoo.hpp>

using namespace perturbex;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

}  // namespace

TEST(SpdOperator, IdentitySpectrum) {
  const SpdOperator m = SpdOperator::from_dense(Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(m.eigenvalues()(0), 1.0);
  EXPECT_DOUBLE_EQ(m.eigenvalues()(1), 1.0);
}

TEST(SpdOperator, DiagonalSpectrumDescending) {
  const SpdOperator m = SpdOperator::from_dense(diag({2, 4}));
  EXPECT_DOUBLE_EQ(m.eigenvalues()(0), 4.0);
  EXPECT_DOUBLE_EQ(m.eigenvalues()(1), 2.0);
  EXPECT_NEAR(std::abs(m.eigenvectors()(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(m.eigenvectors()(0, 1)), 1.0, 1e-15);
}

TEST(SpdOperator, TwoByTwoByHand) {
  const SpdOperator m = SpdOperator::from_dense(Matrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(m.eigenvalues()(0), 3.0, 1e-14);
  EXPECT_NEAR(m.eigenvalues()(1), 1.0, 1e-14);
}

TEST(SpdOperator, RejectsAsymmetric) {
  EXPECT_EQ(code_of([] { SpdOperator::from_dense(Matrix{{2, 1}, {0.9, 2}}); }), ErrorCode::kNotSymmetric);
}

TEST(SpdOperator, RejectsSingular) {
  EXPECT_EQ(code_of([] { SpdOperator::from_dense(diag({1, 1e-12})); }), ErrorCode::kNotPositiveDefinite);
  EXPECT_EQ(code_of([] { SpdOperator::from_dense(diag({1, -1})); }), ErrorCode::kNotPositiveDefinite);
}

TEST(SpdOperator, ReconstructionError) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Matrix m = random_spd(8, 1e4, rng);
    const SpdOperator op = SpdOperator::from_dense(m);
    const Matrix back = op.eigenvectors() * op.eigenvalues().asDiagonal() * op.eigenvectors().transpose();
    EXPECT_LE((back - m).norm(), 1e-10 * m.norm());
  }
}

TEST(ApplyPower, ClosedForms) {
  const Vector v = (Vector(2) << 3, 4).finished();
  EXPECT_LE((apply_power(SpdOperator::identity(2), Power::kInvSqrt, v) - v).norm(), 1e-15);
  const Vector w = apply_power(SpdOperator::from_dense(diag({4, 9})), Power::kSqrt, Vector::Ones(2));
  EXPECT_NEAR(w(0), 2.0, 1e-14);
  EXPECT_NEAR(w(1), 3.0, 1e-14);
}

TEST(ApplyPower, InverseSolves) {
  Rng rng(5);
  const Matrix m = random_spd(12, 1e3, rng);
  const SpdOperator op = SpdOperator::from_dense(m);
  const Vector v = random_gaussian(12, rng);
  EXPECT_LE((m * op.solve(v) - v).norm(), 1e-10 * v.norm());
}

TEST(ApplyPower, SquareRootRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    const Eigen::Index p = 2 + i % 9;
    const SpdOperator op = SpdOperator::from_dense(random_spd(p, 1e6, rng));
    const Vector v = random_gaussian(p, rng);
    const Vector back = op.apply(Power::kInvSqrt, op.apply(Power::kSqrt, v));
    EXPECT_LE((back - v).norm(), 1e-10 * v.norm());
  }
}

TEST(WeightedNorm, Examples) {
  const Vector v = (Vector(2) << 3, 4).finished();
  EXPECT_DOUBLE_EQ(weighted_norm(SpdOperator::identity(2), v), 5.0);
  EXPECT_NEAR(weighted_norm(SpdOperator::from_dense(diag({2, 0.5})), (Vector(2) << 1, 2).finished()),
              std::sqrt(5.0), 1e-15);
  EXPECT_EQ(weighted_norm(SpdOperator::from_dense(diag({2, 3})), Vector::Zero(2)), 0.0);
}

TEST(WeightedNorm, SquareRootGivesQuadraticForm) {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const Matrix m = random_spd(6, 1e3, rng);
    const SpdOperator op = SpdOperator::from_dense(m);
    const Vector v = random_gaussian(6, rng);
    const double n = weighted_norm(op.power(Power::kSqrt), v);
    EXPECT_NEAR(n * n, v.dot(m * v), 1e-10 * v.dot(m * v));
    EXPECT_NEAR(dual_norm(op.power(Power::kSqrt), v) * dual_norm(op.power(Power::kSqrt), v), v.dot(op.solve(v)), 1e-10 * v.dot(op.solve(v)));
  }
}

TEST(Kappa, Examples) {
  const SpdOperator f = SpdOperator::from_dense(diag({4, 9}));
  EXPECT_NEAR(kappa_between(f.power(Power::kSqrt), f), 1.0, 1e-12);
  EXPECT_NEAR(kappa_between(SpdOperator::identity(2), f), 0.5, 1e-12);
  EXPECT_EQ(kappa_between_squared(Matrix::Zero(2, 2), f), 0.0);
}

TEST(Kappa, ScalesLinearly) {
  Rng rng(13);
  for (const double c : {0.1, 0.7, 1.0, 3.0, 25.0}) {
    const SpdOperator f = SpdOperator::from_dense(random_spd(5, 100.0, rng));
    const SpdOperator root = f.power(Power::kSqrt);
    const SpdOperator d = SpdOperator::from_spectrum(root.eigenvectors(), c * root.eigenvalues());
    EXPECT_NEAR(kappa_between(d, f), c, 1e-10 * c);
  }
}

TEST(Linalg, DimensionAndFiniteChecks) {
  EXPECT_EQ(code_of([] { require_same_dim(2, 3, "x"); }), ErrorCode::kDimensionMismatch);
  Vector v = Vector::Zero(2);
  v(1) = std::nan("");
  EXPECT_EQ(code_of([&] { require_finite(v, "v"); }), ErrorCode::kNonFinite);
  EXPECT_EQ(code_of([] { require_symmetric_psd(diag({1, -0.5})); }), ErrorCode::kNotPsd);
  EXPECT_NO_THROW(require_symmetric_psd(Matrix{{1, 1}, {1, 1}}));
}

TEST(Linalg, OperatorNorm) {
  EXPECT_NEAR(symmetric_operator_norm(diag({-3, 2})), 3.0, 1e-14);
}
