#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "perturbex/errors.hpp"
#include "perturbex/harness.hpp"

namespace perturbex {

namespace {

class Suite {
 public:
  void expect(const std::string& name, bool ok, const std::string& detail = "") {
    checks_.push_back({name, ok, ok ? "" : detail});
  }

  // Runs body; an exception is a failure unless the body expects it.
  void run(const std::string& name, const std::function<void(Suite&)>& body) {
    try {
      body(*this);
    } catch (const std::exception& e) {
      checks_.push_back({name, false, std::string("threw ") + e.what()});
    }
  }

  std::vector<SelftestCheck> take() { return std::move(checks_); }

 private:
  std::vector<SelftestCheck> checks_;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

template <class F>
bool throws_code(ErrorCode code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

const ShiftBound* shift(const BoundSet& b, const std::string& key) {
  for (const auto& s : b.shifts) {
    if (s.key() == key) return &s;
  }
  return nullptr;
}

const ValueBound* value(const BoundSet& b, const std::string& key) {
  for (const auto& v : b.values) {
    if (v.key() == key) return &v;
  }
  return nullptr;
}

// Residual radii and value bounds; the plain shift radii scale with b.
bool residual_radii_zero(const BoundSet& b) {
  for (const auto& s : b.shifts) {
    if (s.target != ShiftTarget::kShift && s.radius != 0.0) return false;
  }
  for (const auto& v : b.values) {
    if (v.lower != 0.0 || v.upper != 0.0) return false;
  }
  return true;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

void linalg_checks(Suite& s) {
  s.run("linalg.identity_spectrum", [](Suite& t) {
    const SpdOperator id = SpdOperator::from_dense(Matrix::Identity(2, 2));
    t.expect("linalg.identity_spectrum", id.eigenvalues().isApprox(vec({1, 1})));
  });
  s.run("linalg.diagonal_spectrum", [](Suite& t) {
    const SpdOperator d = SpdOperator::from_dense(diag2(2, 4));
    const Matrix v = d.eigenvectors().cwiseAbs();
    t.expect("linalg.diagonal_spectrum", d.eigenvalues().isApprox(vec({4, 2})) && near(v(1, 0), 1.0, 1e-15) &&
                                             near(v(0, 1), 1.0, 1e-15));
  });
  s.run("linalg.apply_power", [](Suite& t) {
    const Vector a = SpdOperator::identity(2).apply(Power::kInvSqrt, vec({3, 4}));
    const Vector b = SpdOperator::from_dense(diag2(4, 9)).apply(Power::kSqrt, vec({1, 1}));
    t.expect("linalg.apply_power", (a - vec({3, 4})).norm() < 1e-15 && (b - vec({2, 3})).norm() < 1e-14);
  });
  s.run("linalg.weighted_norm", [](Suite& t) {
    const SpdOperator id = SpdOperator::identity(2);
    const SpdOperator m = SpdOperator::from_dense(diag2(3, 7));
    t.expect("linalg.weighted_norm",
             near(weighted_norm(id, vec({3, 4})), 5.0, 1e-15) && weighted_norm(m, Vector::Zero(2)) == 0.0);
  });
  s.run("linalg.kappa", [](Suite& t) {
    const SpdOperator f = SpdOperator::from_dense(Matrix{{3, 1}, {1, 2}});
    const double k1 = kappa_between(f.power(Power::kSqrt), f);
    const double k0 = std::sqrt(kappa_between_squared(Matrix::Zero(2, 2), f));
    t.expect("linalg.kappa", near(k1, 1.0, 1e-12) && k0 == 0.0, "kappa " + num(k1) + ", " + num(k0));
  });
}

void oracle_checks(Suite& s) {
  const SpdOperator F = SpdOperator::from_dense(Matrix{{2, 0.5}, {0.5, 1}});
  const OraclePtr q = make_quadratic(F, vec({0.3, -0.2}));
  const std::vector<Vector> probes{vec({0, 0}), vec({1, -1}), vec({-0.4, 2.5})};
  s.run("oracle.zero_linear_perturbation", [&](Suite& t) {
    const OraclePtr g = linearly_perturb(q, Vector::Zero(2));
    bool ok = true;
    for (const auto& x : probes) ok = ok && g->value(x) == q->value(x) && g->gradient(x) == q->gradient(x);
    t.expect("oracle.zero_linear_perturbation", ok);
  });
  s.run("oracle.linear_gradient", [&](Suite& t) {
    const Vector a = vec({0.7, -1.3});
    const OraclePtr g = linearly_perturb(make_quadratic_form(F.matrix()), a);
    t.expect("oracle.linear_gradient", (g->gradient(Vector::Zero(2)) - a).norm() < 1e-15);
  });
  s.run("oracle.zero_quadratic_penalty", [&](Suite& t) {
    const OraclePtr g = quadratically_penalize(q, Matrix::Zero(2, 2));
    bool ok = true;
    for (const auto& x : probes) ok = ok && g->value(x) == q->value(x) && g->hessian(x) == q->hessian(x);
    t.expect("oracle.zero_quadratic_penalty", ok);
  });
  s.run("oracle.ridge_hessian", [&](Suite& t) {
    const OraclePtr g = quadratically_penalize(make_quadratic_form(Matrix::Identity(2, 2)), Matrix::Identity(2, 2));
    bool ok = true;
    for (const auto& x : probes) ok = ok && (g->hessian(x) - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-15;
    t.expect("oracle.ridge_hessian", ok);
  });
  s.run("oracle.zero_smooth_penalty", [&](Suite& t) {
    const OraclePtr g = smoothly_penalize(q, make_zero(2));
    bool ok = true;
    for (const auto& x : probes) ok = ok && g->value(x) == q->value(x) && g->gradient(x) == q->gradient(x);
    t.expect("oracle.zero_smooth_penalty", ok);
  });
  s.run("oracle.quadratic_smooth_penalty", [&](Suite& t) {
    const Matrix g2{{1.0, 0.2}, {0.2, 0.5}};
    const OraclePtr a = smoothly_penalize(q, make_quadratic_form(g2));
    const OraclePtr b = quadratically_penalize(q, g2);
    double worst = 0.0;
    for (const auto& x : probes) {
      worst = std::max({worst, std::abs(a->value(x) - b->value(x)), (a->gradient(x) - b->gradient(x)).norm(),
                        (a->hessian(x) - b->hessian(x)).norm()});
    }
    t.expect("oracle.quadratic_smooth_penalty", worst <= 1e-14, "mismatch " + num(worst));
  });
  s.run("oracle.quadratic_centre", [&](Suite& t) {
    const Vector c = vec({0.3, -0.2});
    const Vector w = vec({0.6, 0.8});
    const double dv = q->value(c + F.apply(Power::kInvSqrt, w)) - q->value(c);
    t.expect("oracle.quadratic_centre", q->gradient(c).norm() == 0.0 && near(dv, 0.5, 1e-14) &&
                                            q->third_dir(probes[1], w).norm() == 0.0);
  });
  s.run("oracle.logistic_at_zero", [](Suite& t) {
    const OraclePtr f = make_logistic(Matrix{{1.0, 0.0}}, vec({1.0}), 1.0);
    const Vector g = f->gradient(Vector::Zero(2));
    t.expect("oracle.logistic_at_zero",
             near(f->value(Vector::Zero(2)), std::log(2.0), 1e-15) && (g - vec({-0.5, 0.0})).norm() < 1e-15);
  });
  s.run("oracle.logsumexp_degenerate", [](Suite& t) {
    const OraclePtr zero_rows = make_logsumexp(Matrix::Zero(3, 2), 1.0, 0.0);
    const OraclePtr one_row = make_logsumexp(Matrix{{0.5, -1.0}}, 1.0, 0.3);
    const Vector x = vec({0.2, 0.9});
    t.expect("oracle.logsumexp_degenerate", near(zero_rows->value(x), std::log(3.0), 1e-15) &&
                                                zero_rows->gradient(x).norm() < 1e-15 &&
                                                one_row->third_dir(x, vec({1.0, 2.0})).norm() < 1e-14);
  });
}

void smoothness_checks(Suite& s) {
  const SpdOperator F = SpdOperator::from_dense(Matrix{{2, 0.5}, {0.5, 1}});
  const Vector c = vec({0.3, -0.2});
  const OraclePtr q = make_quadratic(F, c);
  s.run("smoothness.quadratic_constants", [&](Suite& t) {
    const SpdOperator d = F.power(Power::kSqrt);
    const double w = estimate_omega(*q, c, d, F, 1.0, 64, 1);
    const double t3 = estimate_tau3(*q, c, d, 1.0, 64, 2);
    const double t4 = estimate_tau4(*q, c, d, 1.0, 64, 3);
    t.expect("smoothness.quadratic_constants", w <= 1e-10 && t3 == 0.0 && t4 == 0.0,
             "omega " + num(w) + " tau3 " + num(t3) + " tau4 " + num(t4));
  });
  s.run("smoothness.cubic_tau4", [](Suite& t) {
    const OraclePtr cubic = make_separable_polynomial(1, {0.0, 0.0, 0.5, 1.0 / 6.0});
    const double t4 = estimate_tau4(*cubic, Vector::Zero(1), SpdOperator::identity(1), 0.5, 32, 4);
    t.expect("smoothness.cubic_tau4", t4 == 0.0, "tau4 " + num(t4));
  });
  s.run("smoothness.quadratic_taylor", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(F.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.0, 0.0);
    const DiagnosticsRecord rec = taylor_diagnostics(*q, c, cert, 64, 5);
    bool ok = true;
    for (const auto& e : rec.entries) ok = ok && e.worst_ratio == 0.0;
    t.expect("smoothness.quadratic_taylor", ok);
  });
}

void solver_checks(Suite& s) {
  s.run("solver.quadratic_one_step", [](Suite& t) {
    const SpdOperator F = SpdOperator::from_dense(Matrix{{4, 1}, {1, 3}});
    const Vector c = vec({1.5, -2.0});
    const SolveResult r = newton_minimize(*make_quadratic(F, c), vec({-3, 7}));
    t.expect("solver.quadratic_one_step", r.iterations == 1 && (r.xhat - c).norm() <= 1e-12,
             "iterations " + std::to_string(r.iterations));
  });
  s.run("solver.indefinite_hessian", [](Suite& t) {
    const OraclePtr f = make_separable_polynomial(2, {0.0, 0.0, -0.5});
    t.expect("solver.indefinite_hessian",
             throws_code(ErrorCode::kHessianNotPd, [&] { newton_minimize(*f, vec({0.1, 0.2})); }));
  });
}

void expand_checks(Suite& s, const Constants& k) {
  const SpdOperator id = SpdOperator::identity(2);
  s.run("expand.zero_perturbation", [&](Suite& t) {
    const ExpansionReport r = exact_quadratic_expansion(SpdOperator::from_dense(diag2(2, 4)), Vector::Zero(2));
    t.expect("expand.zero_perturbation", r.predicted_shift.norm() == 0.0 && r.predicted_value_change == 0.0);
  });
  s.run("expand.concentration_pass", [&](Suite& t) {
    const BoundSet b = concentration_certificate(id, id, vec({0.5, 0.0}), 0.6, 1.0, 1.0, 0.2, k);
    const ShiftBound* fh = shift(b, "concentration/F^1/2:shift");
    const ShiftBound* dn = shift(b, "concentration/D:shift");
    t.expect("expand.concentration_pass",
             b.certifying() && fh && dn && near(fh->radius, 1.0, 1e-15) && near(dn->radius, 1.0, 1e-15));
  });
  s.run("expand.concentration_fail", [&](Suite& t) {
    const BoundSet b = concentration_certificate(id, id, vec({0.5, 0.0}), 0.6, 1.0, 1.0, 0.5, k);
    t.expect("expand.concentration_fail", !b.certifying());
  });
  const Vector unit = vec({1.0, 0.0});
  s.run("expand.second_order_quadratic_limit", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(id, 2.0, 1.0, 0.0, std::nullopt, std::nullopt);
    const BoundSet b = second_order_bounds(id, unit, cert, k);
    const ValueBound* v = value(b, "second_order/value:quadratic_gap");
    const ShiftBound* r = shift(b, "second_order/D:first_order_residual");
    t.expect("expand.second_order_quadratic_limit", v && r && v->lower == 0.0 && v->upper == 0.0 && r->radius == 0.0);
  });
  s.run("expand.second_order_radius", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(id, 2.0, 1.0, 1.0 / 3.0, std::nullopt, std::nullopt);
    const ShiftBound* r = shift(second_order_bounds(id, unit, cert, k), "second_order/D:first_order_residual");
    t.expect("expand.second_order_radius", r && near(r->radius, 3.0 * std::sqrt(1.0 / 3.0), 1e-12));
  });
  s.run("expand.third_order_radii", [&](Suite& t) {
    const SmoothnessCertificate zero = declared_certificate(id, 2.0, 1.0, 0.0, 0.0, std::nullopt);
    const BoundSet b0 = third_order_bounds(id, unit, zero, k);
    const SmoothnessCertificate cert = declared_certificate(id, 2.0, 1.0, 0.0, 0.4, std::nullopt);
    const BoundSet b = third_order_bounds(id, unit, cert, k);
    const ShiftBound* r = shift(b, "third_order_shift/D^-1F:first_order_residual");
    const ValueBound* v = value(b, "third_order_value/value:quadratic_gap");
    t.expect("expand.third_order_radii", residual_radii_zero(b0) && b.groups_pass({"third_order_shift"}) && r &&
                                            near(r->radius, 0.3, 1e-15) && v && near(v->upper, 0.2, 1e-15));
  });
  s.run("expand.quadratic_skew", [&](Suite& t) {
    const OraclePtr q = make_quadratic(id, Vector::Zero(2));
    const SkewTerm sk = skewness_correction(*q, Vector::Zero(2), vec({1.0, -2.0}));
    t.expect("expand.quadratic_skew", sk.value == 0.0 && sk.gradient.norm() == 0.0);
  });
  s.run("expand.fourth_order_quadratic", [&](Suite& t) {
    const SpdOperator F = SpdOperator::from_dense(diag2(2, 4));
    const OraclePtr q = make_quadratic(F, Vector::Zero(2));
    const Vector a = vec({0.1, 0.2});
    const SmoothnessCertificate cert = declared_certificate(F.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.0, 0.0);
    const ExpansionReport r = fourth_order_expansion(*q, Vector::Zero(2), F, a, cert, k);
    t.expect("expand.fourth_order_quadratic",
             (r.predicted_shift + F.solve(a)).norm() < 1e-16 && shift(r.bounds, "fourth_order/D^-1F:skew_residual")
                                                             ->radius == 0.0);
  });
  s.run("expand.fourth_order_radius", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(id, 2.0, 1.0, 0.0, 0.4, 0.3);
    const BoundSet b = fourth_order_bounds(id, unit, cert, SkewTerm{0.0, Vector::Zero(2)}, k);
    const ShiftBound* r = shift(b, "fourth_order/D^-1F:skew_residual");
    t.expect("expand.fourth_order_radius", b.groups_pass({"fourth_order"}) && r && near(r->radius, 0.31, 1e-15));
  });
  s.run("expand.distance_at_minimizer", [&](Suite& t) {
    const SpdOperator F = SpdOperator::from_dense(Matrix{{3, 1}, {1, 2}});
    const Vector c = vec({0.5, 0.25});
    const OraclePtr q = make_quadratic(F, c);
    const SmoothnessCertificate cert = declared_certificate(F.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.0, std::nullopt);
    const ExpansionReport at = distance_to_optimum(*q, c, cert, k);
    const Vector xk = vec({-1.0, 2.0});
    const ExpansionReport away = distance_to_optimum(*q, xk, cert, k);
    t.expect("expand.distance_at_minimizer", at.predicted_shift.norm() == 0.0 && residual_radii_zero(at.bounds) &&
                                                 (xk + away.predicted_shift - c).norm() < 1e-12);
  });
  s.run("expand.qp_lemma_zero_tau", [&](Suite& t) {
    const DiagnosticsRecord rec = qp_lemma_check(id, vec({0.8, 0.0}), 0.0, 1.0, 60, 7, k);
    const DiagnosticEntry* hi = rec.find("max_objective");
    t.expect("expand.qp_lemma_zero_tau", hi && hi->worst_ratio == 0.0 && rec.all_passed());
  });
  s.run("expand.qp_lemma_gate", [&](Suite& t) {
    t.expect("expand.qp_lemma_gate", throws_code(ErrorCode::kPreconditionViolated,
                                               [&] { qp_lemma_check(id, vec({0.7, 0.0}), 0.1, 1.0, 10, 1, k); }));
  });
  s.run("expand.gate_failure_flagged", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(id, 0.1, 1.0, 0.0, 0.4, std::nullopt);
    const ExpansionReport r = third_order_expansion(id, Vector::Zero(2), unit, cert, k);
    bool none_certified = true;
    for (const auto& b : r.bounds.shifts) none_certified = none_certified && !(b.certified && b.group != "skew");
    t.expect("expand.gate_failure_flagged", !r.bounds.certifying() && none_certified);
  });
}

void penalty_checks(Suite& s, const Constants& k) {
  s.run("penalty.centred_ridge", [](Suite& t) {
    const PenaltyBiasReport r =
        ridge_bias_exact_quadratic(SpdOperator::from_dense(diag2(2, 3)), Matrix::Identity(2, 2), Vector::Zero(2));
    t.expect("penalty.centred_ridge", r.predicted_bias.norm() == 0.0 && r.value_prediction == 0.0);
  });
  s.run("penalty.one_dimensional_ridge", [](Suite& t) {
    const PenaltyBiasReport r =
        ridge_bias_exact_quadratic(SpdOperator::identity(1), Matrix::Identity(1, 1), Vector::Ones(1));
    t.expect("penalty.one_dimensional_ridge",
             near(r.predicted_bias(0), -0.5, 1e-15) && near(r.value_prediction, -0.25, 1e-15));
  });
  const SpdOperator F = SpdOperator::from_dense(Matrix{{2, 0.3}, {0.3, 1}});
  const Vector ups = vec({0.4, -0.6});
  const OraclePtr q = make_quadratic(F, ups);
  s.run("penalty.zero_ridge", [&](Suite& t) {
    const SmoothnessCertificate cert = declared_certificate(F.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.2, std::nullopt);
    const PenaltyBiasReport r = ridge_bias_bounds(*q, ups, Matrix::Zero(2, 2), cert, k);
    bool zero = residual_radii_zero(r.bounds());
    for (const auto& b : r.bounds().shifts) zero = zero && b.radius == 0.0;
    t.expect("penalty.zero_ridge", r.bG == 0.0 && r.predicted_bias.norm() == 0.0 && zero);
  });
  const Matrix g2 = 0.5 * Matrix::Identity(2, 2);
  const SpdOperator FG = SpdOperator::from_dense(F.matrix() + g2);
  const SmoothnessCertificate qcert = declared_certificate(FG.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.0, 0.0, "f_G");
  s.run("penalty.quadratic_exact", [&](Suite& t) {
    const PenaltyBiasReport r3 = ridge_bias_bounds(*q, ups, g2, qcert, k);
    const PenaltyBiasReport r4 = ridge_bias_fourth_order(*q, ups, g2, qcert, k);
    const Vector exact = -FG.solve(g2 * ups);
    const ComparisonReport c3 = verify_penalty(*quadratically_penalize(q, g2), ups, r3);
    t.expect("penalty.quadratic_exact", r3.bounds().certifying() && r4.bounds().certifying() &&
                                            (r3.predicted_bias - exact).norm() < 1e-14 &&
                                            (r4.predicted_bias - exact).norm() < 1e-14 &&
                                            residual_radii_zero(r4.bounds()) && c3.violations().empty());
  });
  s.run("penalty.fourth_order_radius", [&](Suite& t) {
    // 1-d quadratic f = x²/2 at 0 with M chosen so that b_G = 0.5 under D = F_G^{1/2} = 1.
    const OraclePtr f = make_quadratic(SpdOperator::identity(1), Vector::Zero(1));
    const SmoothnessCertificate cert =
        declared_certificate(SpdOperator::identity(1), 1.0, 1.0, 0.0, 0.3, 0.2, "f_G");
    const OraclePtr pen = make_separable_polynomial(1, {0.0, 0.5});  // gradient 0.5 everywhere
    const PenaltyBiasReport r = smooth_penalty_bias(*f, Vector::Zero(1), pen, cert, Order::kFourth, k);
    const ShiftBound* b = shift(r.bounds(), "penalty_o4/D^-1F:skew_residual");
    t.expect("penalty.fourth_order_radius", near(r.bG, 0.5, 1e-15) && r.bounds().groups_pass({"penalty_o4"}) && b &&
                                                near(b->radius, 0.02375, 1e-15),
             b ? "radius " + num(b->radius) : "missing bound");
  });
  s.run("penalty.constant_pen", [&](Suite& t) {
    const PenaltyBiasReport r = smooth_penalty_bias(*q, ups, make_constant(2, 3.0), qcert, Order::kThird, k);
    t.expect("penalty.constant_pen", r.m.norm() == 0.0 && r.predicted_bias.norm() == 0.0);
  });
  s.run("penalty.quadratic_pen_consistency", [&](Suite& t) {
    const Problem lg = make_problem({.kind = "logistic", .dim = 3, .n = 60, .reg = 0.2, .seed = 11});
    const Vector x = solve_anchor(lg, {}).xstar;
    const Matrix gg = Matrix{{0.4, 0.1, 0.0}, {0.1, 0.3, 0.0}, {0.0, 0.0, 0.2}};
    const SpdOperator fg = SpdOperator::from_dense(lg.oracle->hessian(x) + gg);
    const SmoothnessCertificate cert = declared_certificate(fg.power(Power::kSqrt), 1.0, 1.0, 0.0, 0.5, 0.5, "f_G");
    double worst = 0.0;
    for (const Order o : {Order::kThird, Order::kFourth}) {
      const PenaltyBiasReport a = o == Order::kThird ? ridge_bias_bounds(*lg.oracle, x, gg, cert, k)
                                                     : ridge_bias_fourth_order(*lg.oracle, x, gg, cert, k);
      const PenaltyBiasReport b = smooth_penalty_bias(*lg.oracle, x, make_quadratic_form(gg), cert, o, k);
      worst = std::max({worst, (a.predicted_bias - b.predicted_bias).norm(), std::abs(a.bG - b.bG)});
      for (std::size_t i = 0; i < a.bounds().shifts.size(); ++i) {
        worst = std::max(worst, std::abs(a.bounds().shifts[i].radius - b.bounds().shifts[i].radius));
      }
    }
    t.expect("penalty.quadratic_pen_consistency", worst <= 1e-14, "mismatch " + num(worst));
  });
}

ExperimentConfig quick_config(const std::string& kind, std::uint64_t seed) {
  ExperimentConfig c;
  c.problem.kind = kind;
  c.problem.dim = 3;
  c.problem.n = 80;
  c.problem.seed = seed;
  c.perturbation.direction_seed = seed + 1;
  c.perturbation.scale = 0.05;
  c.certificate.estimator.seed = seed + 2;
  c.certificate.estimator.samples = 60;
  c.scaling_eps = default_scaling_grid();
  return c;
}

void harness_checks(Suite& s, const Constants& k, std::uint64_t seed) {
  s.run("harness.quadratic_exact", [&](Suite& t) {
    ExperimentConfig c = quick_config("quadratic", seed);
    c.orders = {Order::kExact};
    const CertifyOutcome o = run_certify(c, k);
    const double res = o.report["orders"][0]["comparison"]["entries"][0]["residual"].get<double>();
    t.expect("harness.quadratic_exact", o.violations == 0 && o.rows.size() == 1 && res <= 1e-10,
             "residual " + num(res));
  });
  s.run("harness.missing_third_skips", [&](Suite& t) {
    ExperimentConfig c = quick_config("logistic", seed);
    c.problem.higher = HigherDerivatives::kNone;
    c.orders = {Order::kFourth};
    const CertifyOutcome o = run_certify(c, k);
    t.expect("harness.missing_third_skips", o.rows.empty() && !o.warnings.empty() &&
                                                o.report["orders"][0]["status"].get<std::string>() == "skipped");
  });
  s.run("harness.quadratic_scaling_floor", [&](Suite& t) {
    const ScalingOutcome o = run_scaling(quick_config("quadratic", seed));
    t.expect("harness.quadratic_scaling_floor", !o.partial && !o.slope_first_order && !o.slope_skew &&
                                                    !o.slope_value_o2 && !o.slope_value_o4);
  });
  s.run("harness.zero_lambda_row", [&](Suite& t) {
    ExperimentConfig c = quick_config("logistic", seed);
    c.ridge_lambdas = {0.0};
    const SweepOutcome o = run_ridge_sweep(c, k);
    t.expect("harness.zero_lambda_row", o.rows.size() == 1 && o.rows[0].bG == 0.0 &&
                                            o.rows[0].pred_bias_norm == 0.0 && o.rows[0].actual_bias_norm == 0.0);
  });
}

void qp_lemma_suite(Suite& s, const Constants& k, std::uint64_t seed) {
  s.run("qp_lemma.suite", [&](Suite& t) {
    Rng rng(derive_seed(seed, "qp_lemma"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t failed = 0;
    std::string first;
    for (int i = 0; i < 20; ++i) {
      const Eigen::Index p = 2 + i % 4;
      const double r = 0.5 + 2.0 * unit(rng);
      const SpdOperator U = SpdOperator::from_dense(random_spd(p, 1.0 + 20.0 * unit(rng), rng));
      const Vector s_vec = (0.75 + 0.25 * unit(rng)) * r * random_unit(p, rng);
      const double tau = unit(rng) / (3.0 * r);
      const DiagnosticsRecord rec = qp_lemma_check(U, s_vec, tau, r, 2000, rng(), k);
      if (!rec.all_passed()) {
        ++failed;
        if (first.empty()) first = "instance " + std::to_string(i);
      }
    }
    t.expect("qp_lemma.suite", failed == 0, std::to_string(failed) + " failing, first " + first);
  });
}

void taylor_suite(Suite& s, std::uint64_t seed) {
  for (const std::string kind : {"logistic", "logsumexp"}) {
    const std::string name = "taylor." + kind;
    s.run(name, [&](Suite& t) {
      ProblemDescriptor d;
      d.kind = kind;
      d.dim = 3;
      d.n = 80;
      d.seed = seed;
      const Problem p = make_problem(d);
      const Anchor a = solve_anchor(p, {});
      const SpdOperator D = a.F.power(Power::kSqrt);
      EstimatorSettings es;
      es.seed = seed;
      es.samples = 200;
      const SmoothnessCertificate cert = estimate_certificate(*p.oracle, a.xstar, a.F, D, 0.5, es);
      const DiagnosticsRecord rec = taylor_diagnostics(*p.oracle, a.xstar, cert, 300, derive_seed(seed, name));
      std::string detail;
      for (const auto& e : rec.entries) {
        if (!e.passed()) detail += e.name + "=" + num(e.worst_ratio) + " ";
      }
      t.expect(name, rec.all_passed(), detail);
    });
  }
  s.run("taylor.cubic_control", [&](Suite& t) {
    const OraclePtr cubic = make_separable_polynomial(1, {0.0, 0.0, 0.5, 1.0 / 6.0});
    const SmoothnessCertificate cert =
        declared_certificate(SpdOperator::identity(1), 0.5, 1.0, 0.0, 1.0, 0.0);
    const DiagnosticsRecord rec = taylor_diagnostics(*cubic, Vector::Zero(1), cert, 300, derive_seed(seed, "cubic"));
    const DiagnosticEntry* g = rec.find("gradient_remainder");
    t.expect("taylor.cubic_control", rec.all_passed() && g && g->worst_ratio >= 0.95,
             g ? "gradient_remainder ratio " + num(g->worst_ratio) : "missing entry");
  });
}

}  // namespace

std::vector<SelftestCheck> run_selftest(const Constants& k, std::uint64_t seed) {
  Suite s;
  const std::vector<std::string> bad = constants_integrity_failures(k);
  std::string detail;
  for (const auto& b : bad) detail += b + "; ";
  s.expect("constants.integrity", bad.empty(), detail);
  linalg_checks(s);
  oracle_checks(s);
  smoothness_checks(s);
  solver_checks(s);
  expand_checks(s, k);
  penalty_checks(s, k);
  harness_checks(s, k, seed);
  qp_lemma_suite(s, k, seed);
  taylor_suite(s, seed);
  return s.take();
}

int cmd_selftest(const RunOptions& opts) {
  std::ostream& log = opts.log ? *opts.log : std::cerr;
  Constants k;
  try {
    k = opts.constants_path ? load_constants(*opts.constants_path) : default_constants();
  } catch (const Error& e) {
    log << "perturbex: constants table rejected: " << e.what() << "\n";
    return e.code() == ErrorCode::kIo ? static_cast<int>(kExitError) : static_cast<int>(kExitViolation);
  }
  std::vector<SelftestCheck> checks;
  try {
    checks = run_selftest(k, opts.seed.value_or(kDefaultSelftestSeed));
  } catch (const std::exception& e) {
    log << "perturbex: " << e.what() << "\n";
    return static_cast<int>(kExitError);
  }
  std::size_t failed = 0;
  std::ostringstream csv;
  csv << "check,passed,detail\n";
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    csv << c.name << "," << (c.passed ? "true" : "false") << ",\"" << c.detail << "\"\n";
    if (!c.passed) ++failed;
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  if (!opts.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    std::ofstream out(std::filesystem::path(opts.out_dir) / "selftest.csv");
    if (out) out << csv.str();
  }
  return failed == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitViolation);
}

}  // namespace perturbex
