#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "perturbex/linalg.hpp"

namespace perturbex {

/// Smooth scalar field with derivatives through fourth order.
///
/// Higher derivatives are exposed only as contractions against a repeated
/// direction u:
///   third_dir(x, u)_i  = <∇³f(x), u ⊗ u ⊗ e_i>
///   fourth_dir(x, u)_i = <∇⁴f(x), u ⊗ u ⊗ u ⊗ e_i>
/// Implementations must be observationally pure so that concurrent
/// evaluation from several threads is safe.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Eigen::Index dim() const = 0;
  virtual std::string name() const = 0;
  virtual bool has_third() const { return false; }
  virtual bool has_fourth() const { return false; }

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Symmetric; positive definiteness is checked where it is needed.
  virtual Matrix hessian(const Vector& x) const = 0;

  /// Throw kMissingThirdDerivative / kMissingFourthDerivative unless overridden.
  virtual Vector third_dir(const Vector& x, const Vector& u) const;
  virtual Vector fourth_dir(const Vector& x, const Vector& u) const;
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// g(x) = f(x) + <x, A>.
OraclePtr linearly_perturb(OraclePtr f, const Vector& a);

/// f(x) + x^T G² x / 2. The argument is G² itself (symmetric PSD, possibly singular).
OraclePtr quadratically_penalize(OraclePtr f, const Matrix& g2);

/// f(x) + pen(x); every derivative order adds. Capabilities are the
/// intersection of the two operands.
OraclePtr smoothly_penalize(OraclePtr f, OraclePtr pen);

/// w · f for a weight w ≥ 0.
OraclePtr scale_oracle(OraclePtr f, double w);

/// x^T M x / 2 for a symmetric PSD M.
OraclePtr make_quadratic_form(const Matrix& m);

/// (x - c)^T F (x - c) / 2.
OraclePtr make_quadratic(const SpdOperator& f, const Vector& center);

/// (1/n) Σ log(1 + exp(-y_i x_i^T v)) + reg ‖v‖²/2 with labels in {-1, +1}.
OraclePtr make_logistic(const Matrix& x, const Vector& y, double reg);

/// temp · log Σ exp(x_i^T v / temp) + reg ‖v‖²/2.
OraclePtr make_logsumexp(const Matrix& x, double temp, double reg);

/// Σ_i Σ_k coeffs[k] · v_i^k, applied coordinate-wise. Used for closed-form
/// one-dimensional controls (x³/6, x⁴/24, x²/2 + x⁴, ...).
OraclePtr make_separable_polynomial(Eigen::Index dim, std::vector<double> coeffs);

/// Identically zero (useful as a neutral penalty).
OraclePtr make_zero(Eigen::Index dim);

/// Constant c.
OraclePtr make_constant(Eigen::Index dim, double c);

/// Supplies third_dir / fourth_dir by symmetric differences of the Hessian
/// (resp. of third_dir) along u, with step h = kFdHigherStep / max(1, ‖u‖) so
/// the spatial displacement never exceeds kFdHigherStep. Analytic derivatives
/// of the wrapped oracle, when present, are ignored.
OraclePtr with_fd_higher_derivatives(OraclePtr f);

/// Hides third/fourth derivatives (capability-gate testing).
OraclePtr without_higher_derivatives(OraclePtr f);

inline constexpr double kFdHigherStep = 1e-4;

}  // namespace perturbex
