#include "perturbex/expand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKappaSlack = 1e-10;

std::vector<std::string> with_common(std::initializer_list<std::string> groups) {
  std::vector<std::string> out{"common"};
  out.insert(out.end(), groups.begin(), groups.end());
  return out;
}

void add_metric_gate(BoundSet& out, const SpdOperator& F, const SpdOperator& D, double kappa) {
  const double k = kappa_between(D, F);
  out.add_gate("D^2 <= kappa^2 F", "common", k, kappa * (1.0 + kKappaSlack) + kKappaSlack, false);
}

double positive_or_inf(double denom, double numer) { return denom > 0.0 ? numer / denom : kInf; }

double tau_or_nan(const std::optional<double>& t) { return t.value_or(std::numeric_limits<double>::quiet_NaN()); }

struct Norms {
  double b;
  double fa;
};

Norms norms_of(const SpdOperator& F, const SpdOperator& D, const Vector& a) {
  require_same_dim(F.dim(), a.size(), "perturbation");
  require_same_dim(D.dim(), a.size(), "metric");
  require_finite(a, "perturbation");
  return {weighted_norm(D, F.solve(a)), F.apply(Power::kInvSqrt, a).norm()};
}

ExpansionReport base_report(Order order, const SpdOperator& F, const Vector& xstar, const Vector& a) {
  ExpansionReport rep;
  rep.order = order;
  rep.anchor = xstar;
  rep.a = a;
  rep.F = F;
  rep.predicted_shift = -F.solve(a);
  rep.fa_norm = F.apply(Power::kInvSqrt, a).norm();
  rep.predicted_value_change = -0.5 * rep.fa_norm * rep.fa_norm;
  return rep;
}

double roundoff_floor_shift(double scale) { return 1e-10 * std::max(1.0, scale); }

double guarded_slack(double residual, double radius, double floor) {
  const double excess = std::max(residual - floor, 0.0);
  if (excess == 0.0) return 0.0;
  if (!(radius > 0.0)) return kInf;
  return excess / radius;
}

Vector apply_norm(const ExpansionReport& rep, NormTag norm, const Vector& v) {
  const SpdOperator* d = rep.certificate ? &rep.certificate->D : nullptr;
  switch (norm) {
    case NormTag::kEuclid: return v;
    case NormTag::kFHalf: return rep.F.apply(Power::kSqrt, v);
    case NormTag::kD:
      if (d == nullptr) throw Error(ErrorCode::kPreconditionViolated, "D-norm bound without a certificate");
      return d->apply(Power::kOne, v);
    case NormTag::kDinvF:
      if (d == nullptr) throw Error(ErrorCode::kPreconditionViolated, "D-norm bound without a certificate");
      return d->apply(Power::kInverse, rep.F.apply(Power::kOne, v));
  }
  return v;
}

Vector target_vector(const ExpansionReport& rep, ShiftTarget target, const Vector& actual_shift) {
  const Vector newton = rep.F.solve(rep.a);
  switch (target) {
    case ShiftTarget::kShift: return actual_shift;
    case ShiftTarget::kFirstOrderResidual: return actual_shift + newton;
    case ShiftTarget::kSkewResidual: return actual_shift - rep.predicted_shift;
    case ShiftTarget::kSkewTerm:
    case ShiftTarget::kMuProximity: return rep.predicted_shift + newton;
    case ShiftTarget::kMuProximityLiteral: return rep.predicted_shift - newton;
  }
  return actual_shift;
}

}  // namespace

std::string_view to_string(Order o) {
  switch (o) {
    case Order::kExact: return "exact";
    case Order::kSecond: return "2";
    case Order::kThird: return "3";
    case Order::kFourth: return "4";
  }
  return "?";
}

Order order_from_string(std::string_view s) {
  if (s == "exact") return Order::kExact;
  if (s == "2") return Order::kSecond;
  if (s == "3") return Order::kThird;
  if (s == "4") return Order::kFourth;
  throw Error(ErrorCode::kInvalidConfig, "unknown order '" + std::string(s) + "'");
}

ExpansionReport exact_quadratic_expansion(const SpdOperator& F, const Vector& a) {
  require_same_dim(F.dim(), a.size(), "exact_quadratic_expansion");
  require_finite(a, "perturbation");
  ExpansionReport rep = base_report(Order::kExact, F, Vector::Zero(a.size()), a);
  rep.b = rep.fa_norm;
  rep.bounds.add_shift("exact", NormTag::kEuclid, ShiftTarget::kFirstOrderResidual, 0.0, {});
  rep.bounds.add_value("exact", ValueTarget::kQuadraticGap, 0.0, 0.0, {});
  rep.bounds.finalize();
  return rep;
}

BoundSet concentration_certificate(const SpdOperator& F, const SpdOperator& D, const Vector& a, double nu, double r,
                                   double kappa, double delta2, const Constants&) {
  if (!(nu > 0.0 && nu < 1.0)) throw Error(ErrorCode::kPreconditionViolated, "nu must lie in (0, 1)");
  const Norms n = norms_of(F, D, a);
  BoundSet out;
  add_metric_gate(out, F, D, kappa);
  out.add_gate("||F^-1/2 A|| <= nu r", "concentration", n.fa, nu * r, false);
  out.add_gate("nu + delta kappa^2 < 1", "concentration", nu + delta2 * kappa * kappa, 1.0, true);
  const auto req = with_common({"concentration"});
  out.add_shift("concentration", NormTag::kFHalf, ShiftTarget::kShift, r, req);
  out.add_shift("concentration", NormTag::kD, ShiftTarget::kShift, kappa * r, req);
  out.finalize();
  return out;
}

BoundSet second_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                             const Constants& k) {
  BoundSet out = concentration_certificate(F, cert.D, a, k.concentration_nu, cert.r, cert.kappa, cert.omega, k);
  const Norms n = norms_of(F, cert.D, a);
  const double w = cert.omega;
  const double k2w = cert.kappa * cert.kappa * w;
  out.add_gate("omega <= 1/3", "second_order", w, k.second_order_omega_max, false);
  const auto req = with_common({"concentration", "second_order"});
  const double b2 = n.b * n.b;
  const double sq = k.second_order_sqrt_coef * std::sqrt(w);
  out.add_value("second_order", ValueTarget::kQuadraticGap, -positive_or_inf(1.0 - k2w, w) * b2, w / (1.0 + k2w) * b2,
                req);
  out.add_shift("second_order", NormTag::kD, ShiftTarget::kFirstOrderResidual, positive_or_inf(1.0 - k2w, sq) * n.b,
                req);
  out.add_shift("second_order", NormTag::kD, ShiftTarget::kShift, positive_or_inf(1.0 - k2w, 1.0 + sq) * n.b, req);
  out.finalize();
  return out;
}

BoundSet third_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                            const Constants& k) {
  const Norms n = norms_of(F, cert.D, a);
  const double kap = cert.kappa;
  const double t3 = tau_or_nan(cert.tau3);
  BoundSet out;
  add_metric_gate(out, F, cert.D, kap);

  out.add_gate("r >= (4 kappa/3) ||F^-1/2 A||", "third_order_value", k.t3_value_radius_factor * kap * n.fa, cert.r,
               false);
  out.add_gate("kappa^3 tau3 ||F^-1/2 A|| < 1/4", "third_order_value", kap * kap * kap * t3 * n.fa,
               k.t3_value_tau_gate, true);
  const auto reqv = with_common({"third_order_value"});
  out.add_shift("third_order_value", NormTag::kFHalf, ShiftTarget::kShift, k.t3_value_radius_factor * n.fa, reqv);
  out.add_shift("third_order_value", NormTag::kD, ShiftTarget::kShift, k.t3_value_radius_factor * kap * n.fa, reqv);
  const double vb = k.t3_value_coef * t3 * n.b * n.b * n.b;
  out.add_value("third_order_value", ValueTarget::kQuadraticGap, -vb, vb, reqv);

  out.add_gate("r >= (3/2) b", "third_order_shift", k.t3_shift_radius_factor * n.b, cert.r, false);
  out.add_gate("kappa^2 tau3 b < 4/9", "third_order_shift", kap * kap * t3 * n.b, k.t3_shift_tau_gate, true);
  const auto reqs = with_common({"third_order_shift"});
  out.add_shift("third_order_shift", NormTag::kD, ShiftTarget::kShift, k.t3_shift_radius_factor * n.b, reqs);
  out.add_shift("third_order_shift", NormTag::kDinvF, ShiftTarget::kFirstOrderResidual,
                k.t3_shift_residual_coef * t3 * n.b * n.b, reqs);
  out.finalize();
  return out;
}

BoundSet fourth_order_bounds(const SpdOperator& F, const Vector& a, const SmoothnessCertificate& cert,
                             const SkewTerm&, const Constants& k) {
  const Norms n = norms_of(F, cert.D, a);
  const double kap2 = cert.kappa * cert.kappa;
  const double t3 = tau_or_nan(cert.tau3);
  const double t4 = tau_or_nan(cert.tau4);
  const double b = n.b;
  BoundSet out;
  add_metric_gate(out, F, cert.D, cert.kappa);
  out.add_gate("r >= (3/2) b", "fourth_order", k.t3_shift_radius_factor * b, cert.r, false);
  out.add_gate("kappa^2 tau3 b < 4/9", "fourth_order", kap2 * t3 * b, k.t3_shift_tau_gate, true);
  out.add_gate("kappa^2 tau4 b^2 < 1/3", "fourth_order", kap2 * t4 * b * b, k.t4_tau4_gate, true);
  const auto req = with_common({"fourth_order"});
  out.add_shift("fourth_order", NormTag::kD, ShiftTarget::kShift, k.t3_shift_radius_factor * b, req);
  out.add_shift("fourth_order", NormTag::kDinvF, ShiftTarget::kSkewResidual,
                (k.t4_shift_tau4_coef * t4 + k.t4_shift_tau3sq_coef * kap2 * t3 * t3) * b * b * b, req);
  const double inner = t4 + k.t4_value_sextic_inner_tau3sq * kap2 * t3 * t3;
  const double vb = (k.t4_value_quartic_tau4_coef * t4 + k.t4_value_quartic_tau3sq_coef * kap2 * t3 * t3) *
                        std::pow(b, 4) +
                    k.t4_value_sextic_coef * kap2 * inner * inner * std::pow(b, 6);
  out.add_value("fourth_order", ValueTarget::kFourthOrderGap, -vb, vb, req);
  const double tb = k.skew_value_coef * t3 * b * b * b;
  out.add_value("skew", ValueTarget::kSkewTensor, -tb, tb, {});
  out.add_shift("skew", NormTag::kDinvF, ShiftTarget::kSkewTerm, k.skew_shift_coef * t3 * b * b, {});
  out.finalize();
  return out;
}

SkewTerm skewness_correction(const Oracle& f, const Vector& xstar, const Vector& u) {
  if (!f.has_third()) throw Error(ErrorCode::kMissingThirdDerivative, f.name());
  require_same_dim(f.dim(), u.size(), "skewness_correction");
  const Vector t = f.third_dir(xstar, u);
  return {t.dot(u) / 6.0, 0.5 * t};
}

ExpansionReport second_order_expansion(const SpdOperator& F, const Vector& xstar, const Vector& a,
                                       const SmoothnessCertificate& cert, const Constants& k) {
  ExpansionReport rep = base_report(Order::kSecond, F, xstar, a);
  rep.b = weighted_norm(cert.D, F.solve(a));
  rep.bounds = second_order_bounds(F, a, cert, k);
  rep.certificate = cert;
  return rep;
}

ExpansionReport third_order_expansion(const SpdOperator& F, const Vector& xstar, const Vector& a,
                                      const SmoothnessCertificate& cert, const Constants& k) {
  if (!cert.tau3) throw Error(ErrorCode::kMissingThirdDerivative, "certificate has no tau3");
  ExpansionReport rep = base_report(Order::kThird, F, xstar, a);
  rep.b = weighted_norm(cert.D, F.solve(a));
  rep.bounds = third_order_bounds(F, a, cert, k);
  rep.certificate = cert;
  return rep;
}

ExpansionReport fourth_order_expansion(const Oracle& f, const Vector& xstar, const SpdOperator& F, const Vector& a,
                                       const SmoothnessCertificate& cert, const Constants& k) {
  if (!cert.tau3 || !f.has_third()) throw Error(ErrorCode::kMissingThirdDerivative, f.name());
  if (!cert.tau4 || !f.has_fourth()) throw Error(ErrorCode::kMissingFourthDerivative, f.name());
  ExpansionReport rep = base_report(Order::kFourth, F, xstar, a);
  const Vector newton = F.solve(a);
  const SkewTerm skew = skewness_correction(f, xstar, newton);
  rep.skew_correction = -F.solve(skew.gradient);
  rep.skew_value = skew.value;
  rep.predicted_shift = -newton + *rep.skew_correction;
  rep.predicted_value_change -= skew.value;
  rep.b = weighted_norm(cert.D, newton);
  rep.bounds = fourth_order_bounds(F, a, cert, skew, k);
  rep.certificate = cert;
  return rep;
}

ExpansionReport expansion(Order order, const Oracle& f, const Vector& xstar, const SpdOperator& F, const Vector& a,
                          const SmoothnessCertificate& cert, const Constants& k) {
  switch (order) {
    case Order::kExact: {
      ExpansionReport rep = exact_quadratic_expansion(F, a);
      rep.anchor = xstar;
      return rep;
    }
    case Order::kSecond: return second_order_expansion(F, xstar, a, cert, k);
    case Order::kThird: return third_order_expansion(F, xstar, a, cert, k);
    case Order::kFourth: return fourth_order_expansion(f, xstar, F, a, cert, k);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown order");
}

ExpansionReport distance_to_optimum(const Oracle& f, const Vector& xk, const SmoothnessCertificate& cert,
                                    const Constants& k) {
  require_same_dim(f.dim(), xk.size(), "distance_to_optimum");
  SpdOperator F = SpdOperator::identity(1);
  try {
    F = SpdOperator::from_dense(f.hessian(xk));
  } catch (const Error& e) {
    throw Error(ErrorCode::kHessianNotPd, e.what());
  }
  ExpansionReport rep = third_order_expansion(F, xk, f.gradient(xk), cert, k);
  rep.kind = "distance";
  rep.hessian_at = "iterate";
  return rep;
}

DiagnosticsRecord qp_lemma_check(const SpdOperator& U, const Vector& s, double tau, double r, std::size_t samples,
                               std::uint64_t seed, const Constants& k) {
  require_same_dim(U.dim(), s.size(), "qp_lemma_check");
  require_finite(s, "s");
  const double sn = s.norm();
  if (!(k.qp_s_lower_fraction * r <= sn && sn <= r)) {
    throw Error(ErrorCode::kPreconditionViolated,
                "gate (3/4) r <= ||s|| <= r failed: ||s|| = " + std::to_string(sn) + ", r = " + std::to_string(r));
  }
  if (!(tau >= 0.0 && tau * r <= k.qp_tau_r_max)) {
    throw Error(ErrorCode::kPreconditionViolated, "gate tau r <= 1/3 failed: tau r = " + std::to_string(tau * r));
  }
  if (!(U.min_eigenvalue() >= 1.0 - 1e-12)) {
    throw Error(ErrorCode::kPreconditionViolated,
                "gate U >= I failed: smallest eigenvalue " + std::to_string(U.min_eigenvalue()));
  }
  const Eigen::Index p = s.size();
  const Matrix& um = U.matrix();
  const double bound = k.qp_bound_coef * tau * sn * sn * sn;
  auto quad = [&](const Vector& u) {
    const Vector d = u - s;
    return d.dot(um * d);
  };
  auto cubic = [&](const Vector& u) { return k.qp_cubic_coef * tau * std::pow(u.norm(), 3); };
  auto ratio = [&](double obj) {
    const double floor = 1e-13 * (1.0 + s.dot(um * s));
    if (obj <= bound + floor) return bound > 0.0 ? std::max(obj, 0.0) / bound : 0.0;
    return bound > 0.0 ? obj / bound : kInf;
  };

  DiagnosticsRecord rec;
  rec.kind = "qp_lemma_check";
  DiagnosticEntry hi = DiagnosticEntry::named("max_objective");
  DiagnosticEntry lo = DiagnosticEntry::named("min_objective");
  DiagnosticEntry relax = DiagnosticEntry::named("max_objective_vs_qp_relaxation", 1.0, true);
  const double rho = k.qp_rho_coef * tau * r;
  const Matrix id = Matrix::Identity(p, p);
  const Vector us = um * s;
  const double relaxed = rho * s.dot(um * (um - rho * id).ldlt().solve(s));

  double best_min = kInf;
  Vector best_min_u;
  auto visit = [&](Vector u) {
    const double un = u.norm();
    if (un > r) u *= r / un;
    const double q = quad(u);
    const double c = cubic(u);
    hi.offer(ratio(c - q), s, u);
    if (relaxed > 0.0) relax.offer((c - q) / relaxed, s, u);
    const double m = c + q;
    if (m < best_min) {
      best_min = m;
      best_min_u = u;
    }
    ++lo.evaluations;
  };

  visit((um + rho * id).ldlt().solve(us));
  visit((um - rho * id).ldlt().solve(us));
  visit(s);
  visit(Vector::Zero(p));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector z = random_unit(p, rng);
    switch (i % 3) {
      case 0: visit(r * std::pow(unit(rng), 1.0 / static_cast<double>(p)) * z); break;
      case 1: visit(r * z); break;
      default: visit(s + (0.1 * r * unit(rng)) * z); break;
    }
  }
  lo.worst_ratio = ratio(best_min);
  lo.witness_point = s;
  lo.witness_direction = best_min_u;
  rec.entries.push_back(std::move(hi));
  rec.entries.push_back(std::move(lo));
  rec.entries.push_back(std::move(relax));
  return rec;
}

double shift_residual(const ExpansionReport& report, NormTag norm, ShiftTarget target, const Vector& actual_shift) {
  return apply_norm(report, norm, target_vector(report, target, actual_shift)).norm();
}

double value_residual(const ExpansionReport& report, ValueTarget target, double dv) {
  const double q = report.fa_norm * report.fa_norm;
  const double t = report.skew_value.value_or(0.0);
  switch (target) {
    case ValueTarget::kQuadraticGap: return 2.0 * dv + q;
    case ValueTarget::kFourthOrderGap: return dv + 0.5 * q + t;
    case ValueTarget::kSkewTensor: return t;
  }
  return 0.0;
}

std::vector<std::string> ComparisonReport::violations() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.certified && !e.advisory && !(e.slack <= kSlackTolerance)) out.push_back(e.key);
  }
  return out;
}

const ComparisonEntry* ComparisonReport::find(const std::string& key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

ComparisonReport compare_report(const ExpansionReport& report, const Vector& actual_shift, double dv,
                                double base_value) {
  require_same_dim(report.a.size(), actual_shift.size(), "compare_report");
  ComparisonReport cmp;
  cmp.actual_shift = actual_shift;
  cmp.actual_value_change = dv;
  cmp.base_value = base_value;
  cmp.certifying = report.bounds.certifying();
  for (const auto& b : report.bounds.shifts) {
    ComparisonEntry e;
    e.key = b.key();
    e.certified = b.certified;
    e.advisory = b.advisory;
    e.radius = b.radius;
    e.residual = shift_residual(report, b.norm, b.target, actual_shift);
    const double scale = is_static(b.target) ? apply_norm(report, b.norm, report.F.solve(report.a)).norm()
                                              : apply_norm(report, b.norm, actual_shift).norm();
    e.slack = guarded_slack(e.residual, b.radius, roundoff_floor_shift(scale));
    cmp.entries.push_back(std::move(e));
  }
  const double vfloor = 1e-12 * std::max({1.0, std::abs(base_value), std::abs(dv)});
  for (const auto& b : report.bounds.values) {
    ComparisonEntry e;
    e.key = b.key();
    e.certified = b.certified;
    e.residual = value_residual(report, b.target, dv);
    if (e.residual >= 0.0) {
      e.radius = b.upper;
      e.slack = guarded_slack(e.residual, b.upper, vfloor);
    } else {
      e.radius = b.lower;
      e.slack = guarded_slack(-e.residual, -b.lower, vfloor);
    }
    cmp.entries.push_back(std::move(e));
  }
  return cmp;
}

ComparisonReport verify_expansion(const Oracle& f, const Vector& xstar, const Vector& a, const ExpansionReport& report,
                                  const SolverSettings& settings) {
  require_same_dim(f.dim(), a.size(), "verify_expansion");
  if ((report.a - a).norm() > 0.0) {
    throw Error(ErrorCode::kPreconditionViolated, "report was built for a different perturbation");
  }
  // Shallow wrapper around a borrowed oracle.
  OraclePtr borrowed(std::shared_ptr<const Oracle>(), &f);
  const OraclePtr g = linearly_perturb(borrowed, a);
  const SolveResult sol = newton_minimize(*g, xstar, settings);
  const double g0 = g->value(xstar);
  ComparisonReport cmp = compare_report(report, sol.xhat - xstar, sol.value - g0, g0);
  cmp.solver_iterations = sol.iterations;
  cmp.solver_decrement = sol.grad_norm_dual;
  return cmp;
}

}  // namespace perturbex
