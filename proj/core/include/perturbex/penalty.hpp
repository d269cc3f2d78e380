#pragma once

#include <optional>

#include "perturbex/expand.hpp"

namespace perturbex {

/// Bias υ*_G - υ* of a penalized minimizer. The embedded expansion treats the
/// penalized objective as a linear perturbation with A = M_G and F = F_G.
struct PenaltyBiasReport {
  std::string kind = "ridge";  // ridge | smooth_penalty
  Order order = Order::kExact;
  double bG = 0.0;
  Vector m;
  Vector predicted_bias;
  /// Order 4: -F_G⁻¹∇𝒯(F_G⁻¹M_G).
  std::optional<Vector> mu_correction;
  double value_prediction = 0.0;
  ExpansionReport expansion;

  const BoundSet& bounds() const { return expansion.bounds; }
};

/// Exact lemma for quadratic f: bias -F_G⁻¹G²υ*, value change -‖F_G^{-1/2}G²υ*‖²/2.
PenaltyBiasReport ridge_bias_exact_quadratic(const SpdOperator& F, const Matrix& g2, const Vector& upsstar);

/// Cubic ridge theorem. cert is measured on f_G with D² ≤ κ²F_G,
/// F_G = ∇²f(υ*) + G². Throws kNotAtMinimum when ‖D⁻¹∇f(υ*)‖ > 1e-6 (1 + |f(υ*)|).
PenaltyBiasReport ridge_bias_bounds(const Oracle& f, const Vector& upsstar, const Matrix& g2,
                                    const SmoothnessCertificate& cert, const Constants& k = default_constants());

/// Quartic ridge theorem with μ_G = -F_G⁻¹{G²υ* + ∇𝒯(F_G⁻¹G²υ*)}.
PenaltyBiasReport ridge_bias_fourth_order(const Oracle& f, const Vector& upsstar, const Matrix& g2,
                                          const SmoothnessCertificate& cert, const Constants& k = default_constants());

/// Same structure with M_G = ∇pen(υ*), F_G = ∇²f_G(υ*) and 𝒯 from ∇³f_G(υ*).
PenaltyBiasReport smooth_penalty_bias(const Oracle& f, const Vector& upsstar, const OraclePtr& pen,
                                      const SmoothnessCertificate& cert, Order order,
                                      const Constants& k = default_constants());

/// Minimizes fG from υ* and compares against every bound.
ComparisonReport verify_penalty(const Oracle& fG, const Vector& upsstar, const PenaltyBiasReport& report,
                                const SolverSettings& settings = {});

}  // namespace perturbex
