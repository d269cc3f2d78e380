#pragma once

#include <Eigen/Dense>

#include "perturbex/errors.hpp"

namespace perturbex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Exponents supported by SpdOperator::apply.
enum class Power { kInverse, kInvSqrt, kSqrt, kOne };

double to_exponent(Power t);

/// Symmetric positive-definite operator with a cached eigendecomposition.
///
/// The spectrum is stored in descending order. Instances are immutable once
/// built, so a single operator may be shared between threads.
class SpdOperator {
 public:
  static constexpr double kSymmetryTol = 1e-12;
  static constexpr double kDefaultEpsSpd = 1e-10;

  /// Factorizes `m`. Throws kNotSymmetric when the largest asymmetry exceeds
  /// kSymmetryTol * max|m|, kNotPositiveDefinite when the smallest eigenvalue
  /// is not above eps_rel times the largest one.
  static SpdOperator from_dense(const Matrix& m, double eps_rel = kDefaultEpsSpd);

  /// Builds V diag(values) V^T directly from a known spectrum.
  static SpdOperator from_spectrum(const Matrix& eigenvectors, const Vector& eigenvalues,
                                   double eps_rel = kDefaultEpsSpd);

  static SpdOperator identity(Eigen::Index dim);

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double max_eigenvalue() const { return eigenvalues_(0); }
  double min_eigenvalue() const { return eigenvalues_(eigenvalues_.size() - 1); }

  /// V Λ^t V^T v.
  Vector apply(Power t, const Vector& v) const;
  Matrix power_matrix(Power t) const;

  Vector solve(const Vector& v) const { return apply(Power::kInverse, v); }

  /// Operator with the same eigenvectors and eigenvalues λ^t.
  SpdOperator power(Power t) const;

 private:
  SpdOperator(Matrix m, Vector values, Matrix vectors)
      : matrix_(std::move(m)), eigenvalues_(std::move(values)), eigenvectors_(std::move(vectors)) {}

  Matrix matrix_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

SpdOperator spd_from_dense(const Matrix& m, double eps_rel = SpdOperator::kDefaultEpsSpd);

inline Vector apply_power(const SpdOperator& m, Power t, const Vector& v) { return m.apply(t, v); }

/// ‖M v‖.
double weighted_norm(const SpdOperator& m, const Vector& v);

/// ‖M^{-1} v‖, the dual of weighted_norm.
double dual_norm(const SpdOperator& m, const Vector& v);

/// Smallest κ ≥ 0 with D² ≤ κ²F: the square root of λ_max(F^{-1/2} D² F^{-1/2}).
double kappa_between(const SpdOperator& d, const SpdOperator& f);

/// Same as above for a possibly singular PSD metric given by its square D².
double kappa_between_squared(const Matrix& d2, const SpdOperator& f);

/// Throws kNotSymmetric / kNotPsd unless `m` is symmetric with eigenvalues
/// ≥ -tol_rel * max(1, max|λ|). Zero eigenvalues are allowed.
void require_symmetric_psd(const Matrix& m, double tol_rel = 1e-12);

/// Throws kNonFinite if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what);

/// Largest singular value of a symmetric matrix.
double symmetric_operator_norm(const Matrix& m);

}  // namespace perturbex
