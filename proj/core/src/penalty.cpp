#include "perturbex/penalty.hpp"

#include <cmath>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

void require_anchor(const Oracle& f, const Vector& upsstar, const SpdOperator& d) {
  require_same_dim(f.dim(), upsstar.size(), "penalty anchor");
  require_same_dim(d.dim(), upsstar.size(), "penalty metric");
  const double g = dual_norm(d, f.gradient(upsstar));
  const double scale = 1.0 + std::abs(f.value(upsstar));
  if (g > 1e-6 * scale) {
    throw Error(ErrorCode::kNotAtMinimum, "‖D⁻¹∇f(υ*)‖ = " + std::to_string(g) + " exceeds 1e-6 scale");
  }
}

SpdOperator penalized_hessian(const Matrix& fg_hessian) {
  try {
    return SpdOperator::from_dense(fg_hessian);
  } catch (const Error& e) {
    throw Error(ErrorCode::kHessianNotPd, std::string("penalized Hessian: ") + e.what());
  }
}

// Cubic theorem: the locally uniform gates certify the D radius, the D⁻¹F_G
// residual and the value bound together.
BoundSet cubic_penalty_bounds(const SpdOperator& fg, const Vector& m, const SmoothnessCertificate& cert,
                              const Constants& k) {
  const double b = weighted_norm(cert.D, fg.solve(m));
  const double kap2 = cert.kappa * cert.kappa;
  const double t3 = cert.tau3.value_or(std::nan(""));
  BoundSet out;
  out.add_gate("D^2 <= kappa^2 F_G", "common", kappa_between(cert.D, fg), cert.kappa * (1.0 + 1e-10) + 1e-10, false);
  out.add_gate("r >= (3/2) bG", "penalty_o3", k.t3_shift_radius_factor * b, cert.r, false);
  out.add_gate("kappa^2 tau3 bG < 4/9", "penalty_o3", kap2 * t3 * b, k.t3_shift_tau_gate, true);
  const std::vector<std::string> req{"common", "penalty_o3"};
  out.add_shift("penalty_o3", NormTag::kD, ShiftTarget::kShift, k.t3_shift_radius_factor * b, req);
  out.add_shift("penalty_o3", NormTag::kDinvF, ShiftTarget::kFirstOrderResidual,
                k.t3_shift_residual_coef * t3 * b * b, req);
  const double vb = k.t3_value_coef * t3 * b * b * b;
  out.add_value("penalty_o3", ValueTarget::kQuadraticGap, -vb, vb, req);
  out.finalize();
  return out;
}

BoundSet quartic_penalty_bounds(const SpdOperator& fg, const Vector& m, const SmoothnessCertificate& cert,
                                const Constants& k) {
  const double b = weighted_norm(cert.D, fg.solve(m));
  const double kap2 = cert.kappa * cert.kappa;
  const double t3 = cert.tau3.value_or(std::nan(""));
  const double t4 = cert.tau4.value_or(std::nan(""));
  BoundSet out;
  out.add_gate("D^2 <= kappa^2 F_G", "common", kappa_between(cert.D, fg), cert.kappa * (1.0 + 1e-10) + 1e-10, false);
  out.add_gate("r >= (3/2) bG", "penalty_o4", k.t3_shift_radius_factor * b, cert.r, false);
  out.add_gate("kappa^2 tau3 bG < 4/9", "penalty_o4", kap2 * t3 * b, k.t3_shift_tau_gate, true);
  out.add_gate("kappa^2 tau4 bG^2 < 1/3", "penalty_o4", kap2 * t4 * b * b, k.t4_tau4_gate, true);
  const std::vector<std::string> req{"common", "penalty_o4"};
  out.add_shift("penalty_o4", NormTag::kD, ShiftTarget::kShift, k.t3_shift_radius_factor * b, req);
  out.add_shift("penalty_o4", NormTag::kDinvF, ShiftTarget::kSkewResidual,
                (k.ridge4_shift_tau4_coef * t4 + k.ridge4_shift_tau3sq_coef * kap2 * t3 * t3) * b * b * b, req);
  const double inner = t4 + k.t4_value_sextic_inner_tau3sq * kap2 * t3 * t3;
  const double vb = (k.t4_value_quartic_tau4_coef * t4 + k.t4_value_quartic_tau3sq_coef * kap2 * t3 * t3) *
                        std::pow(b, 4) +
                    k.t4_value_sextic_coef * kap2 * inner * inner * std::pow(b, 6);
  out.add_value("penalty_o4", ValueTarget::kFourthOrderGap, -vb, vb, req);
  const double tb = k.skew_value_coef * t3 * b * b * b;
  out.add_value("skew", ValueTarget::kSkewTensor, -tb, tb, {});
  out.add_shift("skew", NormTag::kDinvF, ShiftTarget::kSkewTerm, k.skew_shift_coef * t3 * b * b, {});
  // ‖D F_G⁻¹ D‖ ≤ κ² turns the dual-norm skew bound into a D-norm one.
  out.add_shift("skew", NormTag::kD, ShiftTarget::kMuProximity, kap2 * k.mu_proximity_coef * t3 * b * b, {});
  ShiftBound& literal =
      out.add_shift("skew", NormTag::kD, ShiftTarget::kMuProximityLiteral, k.mu_proximity_coef * t3 * b * b, {});
  literal.advisory = true;
  out.finalize();
  return out;
}

PenaltyBiasReport build(std::string kind, Order order, const Oracle* third_source, const Vector& upsstar,
                        const SpdOperator& fg, const Vector& m, const SmoothnessCertificate& cert, const Constants& k) {
  PenaltyBiasReport rep;
  rep.kind = kind;
  rep.order = order;
  rep.m = m;
  ExpansionReport& e = rep.expansion;
  e.kind = std::move(kind);
  e.order = order;
  e.anchor = upsstar;
  e.a = m;
  e.F = fg;
  const Vector newton = fg.solve(m);
  e.predicted_shift = -newton;
  e.fa_norm = fg.apply(Power::kInvSqrt, m).norm();
  e.predicted_value_change = -0.5 * e.fa_norm * e.fa_norm;
  e.certificate = cert;
  e.b = weighted_norm(cert.D, newton);
  if (order == Order::kThird) {
    if (!cert.tau3) throw Error(ErrorCode::kMissingThirdDerivative, "certificate has no tau3");
    e.bounds = cubic_penalty_bounds(fg, m, cert, k);
  } else {
    if (!cert.tau3 || !third_source->has_third()) throw Error(ErrorCode::kMissingThirdDerivative, third_source->name());
    if (!cert.tau4 || !third_source->has_fourth()) {
      throw Error(ErrorCode::kMissingFourthDerivative, third_source->name());
    }
    const SkewTerm skew = skewness_correction(*third_source, upsstar, newton);
    e.skew_correction = -fg.solve(skew.gradient);
    e.skew_value = skew.value;
    e.predicted_shift += *e.skew_correction;
    e.predicted_value_change -= skew.value;
    e.bounds = quartic_penalty_bounds(fg, m, cert, k);
    rep.mu_correction = e.skew_correction;
  }
  rep.bG = e.b;
  rep.predicted_bias = e.predicted_shift;
  rep.value_prediction = e.predicted_value_change;
  return rep;
}

OraclePtr borrow(const Oracle& f) { return OraclePtr(std::shared_ptr<const Oracle>(), &f); }

}  // namespace

PenaltyBiasReport ridge_bias_exact_quadratic(const SpdOperator& F, const Matrix& g2, const Vector& upsstar) {
  require_same_dim(F.dim(), upsstar.size(), "ridge_bias_exact_quadratic");
  require_same_dim(g2.rows(), upsstar.size(), "ridge_bias_exact_quadratic G2");
  require_symmetric_psd(g2);
  const SpdOperator fg = penalized_hessian(F.matrix() + g2);
  const Vector m = g2 * upsstar;
  PenaltyBiasReport rep;
  rep.kind = "ridge";
  rep.order = Order::kExact;
  rep.m = m;
  rep.expansion = exact_quadratic_expansion(fg, m);
  rep.expansion.kind = "ridge";
  rep.expansion.anchor = upsstar;
  rep.bG = rep.expansion.fa_norm;
  rep.predicted_bias = rep.expansion.predicted_shift;
  rep.value_prediction = rep.expansion.predicted_value_change;
  return rep;
}

PenaltyBiasReport ridge_bias_bounds(const Oracle& f, const Vector& upsstar, const Matrix& g2,
                                    const SmoothnessCertificate& cert, const Constants& k) {
  require_anchor(f, upsstar, cert.D);
  require_symmetric_psd(g2);
  const SpdOperator fg = penalized_hessian(f.hessian(upsstar) + g2);
  return build("ridge", Order::kThird, &f, upsstar, fg, g2 * upsstar, cert, k);
}

PenaltyBiasReport ridge_bias_fourth_order(const Oracle& f, const Vector& upsstar, const Matrix& g2,
                                          const SmoothnessCertificate& cert, const Constants& k) {
  require_anchor(f, upsstar, cert.D);
  require_symmetric_psd(g2);
  const SpdOperator fg = penalized_hessian(f.hessian(upsstar) + g2);
  return build("ridge", Order::kFourth, &f, upsstar, fg, g2 * upsstar, cert, k);
}

PenaltyBiasReport smooth_penalty_bias(const Oracle& f, const Vector& upsstar, const OraclePtr& pen,
                                      const SmoothnessCertificate& cert, Order order, const Constants& k) {
  if (order != Order::kThird && order != Order::kFourth) {
    throw Error(ErrorCode::kInvalidConfig, "smooth_penalty_bias supports orders 3 and 4");
  }
  require_anchor(f, upsstar, cert.D);
  require_same_dim(pen->dim(), upsstar.size(), "penalty");
  const OraclePtr fg_oracle = smoothly_penalize(borrow(f), pen);
  const SpdOperator fg = penalized_hessian(fg_oracle->hessian(upsstar));
  return build("smooth_penalty", order, fg_oracle.get(), upsstar, fg, pen->gradient(upsstar), cert, k);
}

ComparisonReport verify_penalty(const Oracle& fG, const Vector& upsstar, const PenaltyBiasReport& report,
                                const SolverSettings& settings) {
  const SolveResult sol = newton_minimize(fG, upsstar, settings);
  const double base = fG.value(upsstar);
  ComparisonReport cmp = compare_report(report.expansion, sol.xhat - upsstar, sol.value - base, base);
  cmp.solver_iterations = sol.iterations;
  cmp.solver_decrement = sol.grad_norm_dual;
  return cmp;
}

}  // namespace perturbex
