#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perturbex/bounds.hpp"
#include "perturbex/constants.hpp"
#include "perturbex/diagnostics.hpp"
#include "perturbex/smoothness.hpp"
#include "perturbex/solver.hpp"

namespace perturbex {

enum class Order { kExact, kSecond, kThird, kFourth };

std::string_view to_string(Order o);
Order order_from_string(std::string_view s);

struct SkewTerm {
  double value = 0.0;  // 𝒯(u) = ⟨∇³f(x*), u⊗³⟩/6
  Vector gradient;     // ∇𝒯(u) = ⟨∇³f(x*), u⊗²⟩/2
};

/// Prediction for the minimizer shift and value change under a linear
/// perturbation A at anchor υ*. Penalty reports reuse it with A = M_G and
/// F = F_G.
struct ExpansionReport {
  std::string kind = "linear";  // linear | distance | ridge | smooth_penalty
  Order order = Order::kExact;
  Vector anchor;
  Vector a;
  SpdOperator F = SpdOperator::identity(1);
  /// Where F was evaluated: "minimizer" (υ*), "perturbed_minimizer" or "iterate".
  std::string hessian_at = "minimizer";
  Vector predicted_shift;
  double predicted_value_change = 0.0;
  /// Order 4 only: -F⁻¹∇𝒯(F⁻¹A) and 𝒯(F⁻¹A).
  std::optional<Vector> skew_correction;
  std::optional<double> skew_value;
  double b = 0.0;       // ‖D F⁻¹ A‖
  double fa_norm = 0.0; // ‖F^{-1/2} A‖
  BoundSet bounds;
  std::optional<SmoothnessCertificate> certificate;
};

/// Shift -F⁻¹A and value change -‖F^{-1/2}A‖²/2, exact for quadratic f.
ExpansionReport exact_quadratic_expansion(const SpdOperator& F, const Vector& a);

/// Gates ‖F^{-1/2}A‖ ≤ ν r and ν + δκ² < 1; radii r (F^{1/2}) and κ r (D).
BoundSet concentration_certificate(const SpdOperator& F, const SpdOperator& D, const Vector& a, double nu, double r,
                                   double kappa, double delta2, const Constants& k = default_constants());

/// Concentration (ν from the constants table, δ = ω) plus the ω ≤ 1/3
/// sandwich on 2δg + ‖F^{-1/2}A‖² and the D-norm shift radii.
BoundSet second_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                             const Constants& k = default_constants());

/// Both cubic theorems: value group (gates r ≥ 4κ/3 ‖F^{-1/2}A‖,
/// κ³τ₃‖F^{-1/2}A‖ < 1/4) and locally uniform group (r ≥ 3b/2, κ²τ₃b < 4/9).
BoundSet third_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                            const Constants& k = default_constants());

/// Order-4 gates and radii given the skew term at u = F⁻¹A.
BoundSet fourth_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                             const SkewTerm& skew, const Constants& k = default_constants());

SkewTerm skewness_correction(const Oracle& f, const Vector& xstar, const Vector& u);

ExpansionReport second_order_expansion(const SpdOperator& F, const Vector& xstar, const Vector& a,
                                       const SmoothnessCertificate& cert, const Constants& k = default_constants());
ExpansionReport third_order_expansion(const SpdOperator& F, const Vector& xstar, const Vector& a,
                                      const SmoothnessCertificate& cert, const Constants& k = default_constants());
/// ā = -F⁻¹{A + ∇𝒯(F⁻¹A)}, value change -‖F^{-1/2}A‖²/2 - 𝒯(F⁻¹A).
ExpansionReport fourth_order_expansion(const Oracle& f, const Vector& xstar, const SpdOperator& F, const Vector& a,
                                       const SmoothnessCertificate& cert, const Constants& k = default_constants());

/// Dispatch on order; kExact ignores f and cert.
ExpansionReport expansion(Order order, const Oracle& f, const Vector& xstar, const SpdOperator& F, const Vector& a,
                          const SmoothnessCertificate& cert, const Constants& k = default_constants());

/// f is a linear perturbation of f_k(υ) = f(υ) - ⟨υ - x_k, ∇f(x_k)⟩ with
/// A = ∇f(x_k), so the cubic bounds at x_k certify υ* - x_k ≈ -F⁻¹∇f(x_k).
/// F = ∇²f(x_k); the certificate must be measured around x_k.
ExpansionReport distance_to_optimum(const Oracle& f, const Vector& xk, const SmoothnessCertificate& cert,
                                    const Constants& k = default_constants());

/// Samples the two objectives of the auxiliary cubic-vs-quadratic lemma in
/// the Euclidean ball of radius r, together with the analytic candidates
/// u_ρ = (U + ρI)⁻¹Us and s_ρ = (U - ρI)⁻¹Us, ρ = τr/3. Throws
/// kPreconditionViolated naming the failed gate.
DiagnosticsRecord qp_lemma_check(const SpdOperator& U, const Vector& s, double tau, double r, std::size_t samples,
                               std::uint64_t seed, const Constants& k = default_constants());

struct ComparisonEntry {
  std::string key;
  bool certified = false;
  bool advisory = false;
  double residual = 0.0;
  /// Shift radius, or the bound on the side the residual falls.
  double radius = 0.0;
  double slack = 0.0;
};

struct ComparisonReport {
  Vector actual_shift;
  double actual_value_change = 0.0;
  double base_value = 0.0;
  int solver_iterations = 0;
  double solver_decrement = 0.0;
  bool certifying = false;
  std::vector<ComparisonEntry> entries;

  /// Certified entries whose slack exceeds 1 + 1e-9.
  std::vector<std::string> violations() const;
  const ComparisonEntry* find(const std::string& key) const;
};

inline constexpr double kSlackTolerance = 1.0 + 1e-9;

/// Residual of every bound in the report against a known shift and value
/// change. base_value is g(υ*), used for the value roundoff floor.
ComparisonReport compare_report(const ExpansionReport& report, const Vector& actual_shift, double actual_value_change,
                                double base_value);

/// Solves g = f + ⟨·, A⟩ from x* with Newton and compares.
ComparisonReport verify_expansion(const Oracle& f, const Vector& xstar, const Vector& a, const ExpansionReport& report,
                                  const SolverSettings& settings = {});

/// Residual of a shift target in a norm; exposed for the scaling study.
double shift_residual(const ExpansionReport& report, NormTag norm, ShiftTarget target, const Vector& actual_shift);
double value_residual(const ExpansionReport& report, ValueTarget target, double actual_value_change);

}  // namespace perturbex
