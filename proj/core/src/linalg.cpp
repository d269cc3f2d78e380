#include "perturbex/linalg.hpp"

#include <cmath>
#include <sstream>

namespace perturbex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBadLabels: return "BadLabels";
    case ErrorCode::kNotAtMinimum: return "NotAtMinimum";
    case ErrorCode::kMissingThirdDerivative: return "MissingThirdDerivative";
    case ErrorCode::kMissingFourthDerivative: return "MissingFourthDerivative";
    case ErrorCode::kHessianNotPd: return "HessianNotPd";
    case ErrorCode::kMaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::kLineSearchFailed: return "LineSearchFailed";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

double to_exponent(Power t) {
  switch (t) {
    case Power::kInverse: return -1.0;
    case Power::kInvSqrt: return -0.5;
    case Power::kSqrt: return 0.5;
    case Power::kOne: return 1.0;
  }
  return 1.0;
}

namespace {

Vector powered(const Vector& values, Power t) {
  switch (t) {
    case Power::kInverse: return values.cwiseInverse();
    case Power::kInvSqrt: return values.cwiseSqrt().cwiseInverse();
    case Power::kSqrt: return values.cwiseSqrt();
    case Power::kOne: return values;
  }
  return values;
}

void check_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  if (!m.allFinite()) throw Error(ErrorCode::kNonFinite, "matrix has non-finite entries");
}

void check_symmetric(const Matrix& m, double tol_rel) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol_rel * scale) {
    std::ostringstream os;
    os << "max |M - M^T| = " << asym << " exceeds " << tol_rel << " * max|M| = " << tol_rel * scale;
    throw Error(ErrorCode::kNotSymmetric, os.str());
  }
}

}  // namespace

SpdOperator SpdOperator::from_dense(const Matrix& m, double eps_rel) {
  check_square(m);
  check_symmetric(m, kSymmetryTol);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "eigendecomposition failed");
  }
  // Eigen sorts ascending; the operator keeps the spectrum descending.
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double largest = values(0);
  const double smallest = values(values.size() - 1);
  if (!(largest > 0.0) || !(smallest > eps_rel * largest)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << smallest << " not above " << eps_rel << " * " << largest;
    throw Error(ErrorCode::kNotPositiveDefinite, os.str());
  }
  return SpdOperator(sym, values, vectors);
}

SpdOperator SpdOperator::from_spectrum(const Matrix& eigenvectors, const Vector& eigenvalues,
                                       double eps_rel) {
  if (eigenvectors.rows() != eigenvectors.cols() || eigenvectors.cols() != eigenvalues.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum shape mismatch");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(eigenvalues.size()));
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return eigenvalues(a) > eigenvalues(b); });
  Vector values(eigenvalues.size());
  Matrix vectors(eigenvectors.rows(), eigenvectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    values(static_cast<Eigen::Index>(k)) = eigenvalues(order[k]);
    vectors.col(static_cast<Eigen::Index>(k)) = eigenvectors.col(order[k]);
  }
  if (!(values(0) > 0.0) || !(values(values.size() - 1) > eps_rel * values(0))) {
    throw Error(ErrorCode::kNotPositiveDefinite, "spectrum not positive");
  }
  Matrix m = vectors * values.asDiagonal() * vectors.transpose();
  m = 0.5 * (m + m.transpose()).eval();
  return SpdOperator(std::move(m), std::move(values), std::move(vectors));
}

SpdOperator SpdOperator::identity(Eigen::Index dim) {
  return SpdOperator(Matrix::Identity(dim, dim), Vector::Ones(dim), Matrix::Identity(dim, dim));
}

Vector SpdOperator::apply(Power t, const Vector& v) const {
  require_same_dim(dim(), v.size(), "SpdOperator::apply");
  if (t == Power::kOne) return matrix_ * v;
  const Vector coeff = eigenvectors_.transpose() * v;
  return eigenvectors_ * powered(eigenvalues_, t).cwiseProduct(coeff);
}

Matrix SpdOperator::power_matrix(Power t) const {
  if (t == Power::kOne) return matrix_;
  Matrix out = eigenvectors_ * powered(eigenvalues_, t).asDiagonal() * eigenvectors_.transpose();
  return 0.5 * (out + out.transpose());
}

SpdOperator SpdOperator::power(Power t) const {
  Vector values = powered(eigenvalues_, t);
  Matrix vectors = eigenvectors_;
  if (t == Power::kInverse || t == Power::kInvSqrt) {
    values.reverseInPlace();
    vectors = vectors.rowwise().reverse().eval();
  }
  Matrix m = vectors * values.asDiagonal() * vectors.transpose();
  m = 0.5 * (m + m.transpose()).eval();
  return SpdOperator(std::move(m), std::move(values), std::move(vectors));
}

SpdOperator spd_from_dense(const Matrix& m, double eps_rel) { return SpdOperator::from_dense(m, eps_rel); }

double weighted_norm(const SpdOperator& m, const Vector& v) {
  require_same_dim(m.dim(), v.size(), "weighted_norm");
  return (m.matrix() * v).norm();
}

double dual_norm(const SpdOperator& m, const Vector& v) {
  require_same_dim(m.dim(), v.size(), "dual_norm");
  return m.apply(Power::kInverse, v).norm();
}

double kappa_between_squared(const Matrix& d2, const SpdOperator& f) {
  require_same_dim(d2.rows(), f.dim(), "kappa_between");
  require_same_dim(d2.cols(), f.dim(), "kappa_between");
  const Matrix f_inv_half = f.power_matrix(Power::kInvSqrt);
  Matrix b = f_inv_half * d2 * f_inv_half;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

double kappa_between(const SpdOperator& d, const SpdOperator& f) {
  const Matrix d2 = d.matrix() * d.matrix();
  return kappa_between_squared(0.5 * (d2 + d2.transpose()), f);
}

void require_symmetric_psd(const Matrix& m, double tol_rel) {
  check_square(m);
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  check_symmetric(m, SpdOperator::kSymmetryTol);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues()(0);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (smallest < -tol_rel * std::max(1.0, largest)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << smallest << " is negative";
    throw Error(ErrorCode::kNotPsd, os.str());
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::kNonFinite, std::string(what) + " has non-finite entries");
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension " << a << " vs " << b;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

double symmetric_operator_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace perturbex
