#include "perturbex/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "perturbex/errors.hpp"
#include "perturbex/serialize.hpp"

namespace perturbex {

using nlohmann::json;

namespace {

constexpr double kAutoRadiusMargin = 1.01;
constexpr double kMinRadius = 1e-8;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ostream& log_of(const RunOptions& o) { return o.log ? *o.log : std::cerr; }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

bool is_penalty(const PerturbationSpec& p) { return p.type != PerturbationSpec::Type::kLinear; }

std::string type_name(PerturbationSpec::Type t) {
  switch (t) {
    case PerturbationSpec::Type::kLinear: return "linear";
    case PerturbationSpec::Type::kRidge: return "ridge";
    case PerturbationSpec::Type::kQuadratic: return "quadratic";
    case PerturbationSpec::Type::kSmooth: return "smooth";
  }
  return "?";
}

SpdOperator hessian_at(const Oracle& f, const Vector& x) {
  try {
    return SpdOperator::from_dense(f.hessian(x));
  } catch (const Error& e) {
    throw Error(ErrorCode::kHessianNotPd, std::string("Hessian at the anchor: ") + e.what());
  }
}

std::size_t failed_gates(const BoundSet& b) {
  return static_cast<std::size_t>(std::count_if(b.gates.begin(), b.gates.end(), [](const Gate& g) { return !g.satisfied; }));
}

std::string failed_gate_names(const BoundSet& b) {
  std::string out;
  for (const auto& g : b.gates) {
    if (g.satisfied) continue;
    if (!out.empty()) out += ";";
    out += g.group + ":" + g.name;
  }
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + p.string());
}

std::filesystem::path prepare_out(const RunOptions& o) {
  std::filesystem::path dir(o.out_dir.empty() ? "." : o.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

ExperimentConfig load_for_run(const RunOptions& o) {
  ExperimentConfig c = load_config(o.config_path);
  if (o.seed) c.certificate.estimator.seed = *o.seed;
  return c;
}

Constants constants_for_run(const RunOptions& o) {
  return o.constants_path ? load_constants(*o.constants_path) : default_constants();
}

template <class F>
int guarded(const RunOptions& o, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log_of(o) << "perturbex: " << e.what() << "\n";
  } catch (const std::exception& e) {
    log_of(o) << "perturbex: " << e.what() << "\n";
  }
  return kExitError;
}

// Everything the penalized runs share: f_G, its Hessian at υ*, M_G.
struct PenaltySetup {
  OraclePtr fG;
  SpdOperator FG = SpdOperator::identity(1);
  Vector m;
  std::optional<Matrix> g2;  // quadratic penalties only
  OraclePtr pen;             // smooth penalties only
};

PenaltySetup penalty_setup(const PerturbationSpec& spec, const Anchor& anchor) {
  PenaltySetup s;
  const Eigen::Index p = anchor.xstar.size();
  switch (spec.type) {
    case PerturbationSpec::Type::kRidge: s.g2 = spec.lambda * Matrix::Identity(p, p); break;
    case PerturbationSpec::Type::kQuadratic: s.g2 = *spec.g2; break;
    case PerturbationSpec::Type::kSmooth: {
      const Problem pen = make_problem(*spec.pen);
      s.pen = scale_oracle(pen.oracle, spec.weight);
      break;
    }
    case PerturbationSpec::Type::kLinear: throw Error(ErrorCode::kInvalidConfig, "not a penalty");
  }
  if (s.g2) {
    s.fG = quadratically_penalize(anchor.f, *s.g2);
    s.m = *s.g2 * anchor.xstar;
  } else {
    s.fG = smoothly_penalize(anchor.f, s.pen);
    s.m = s.pen->gradient(anchor.xstar);
  }
  s.FG = hessian_at(*s.fG, anchor.xstar);
  return s;
}

struct OrderOutcome {
  json entry;
  CertifyRow row;
  std::optional<ComparisonReport> cmp;
};

CertifyRow row_from(const std::string& order, const std::string& kind, const ExpansionReport& e,
                    const ComparisonReport& c) {
  CertifyRow r;
  r.order = order;
  r.kind = kind;
  r.b = e.b;
  r.gates_total = e.bounds.gates.size();
  r.gates_passed = r.gates_total - failed_gates(e.bounds);
  r.certifying = e.bounds.certifying();
  for (const auto& x : c.entries) {
    if (!x.certified || x.advisory) continue;
    ++r.certified_bounds;
    r.max_certified_slack = std::max(r.max_certified_slack, x.slack);
  }
  r.violations = c.violations().size();
  r.predicted_value_change = e.predicted_value_change;
  r.actual_value_change = c.actual_value_change;
  return r;
}

OrderOutcome finish(const std::string& order, const std::string& kind, const ExpansionReport& e, json report,
                    ComparisonReport c) {
  OrderOutcome out;
  out.row = row_from(order, kind, e, c);
  out.entry = {{"order", order},
               {"status", "ok"},
               {"report", std::move(report)},
               {"comparison", to_json(c)},
               {"violations", c.violations()},
               {"failed_gates", failed_gate_names(e.bounds)}};
  out.cmp = std::move(c);
  return out;
}

json skipped(const std::string& order, const std::string& reason) {
  return {{"order", order}, {"status", "skipped"}, {"reason", reason}};
}

}  // namespace

Anchor solve_anchor(const Problem& problem, const SolverSettings& settings) {
  Anchor a;
  a.f = problem.oracle;
  const Vector x0 = problem.minimizer ? *problem.minimizer : Vector::Zero(problem.oracle->dim());
  a.solve = newton_minimize(*a.f, x0, settings);
  a.xstar = a.solve.xhat;
  a.F = problem.hessian ? *problem.hessian : hessian_at(*a.f, a.xstar);
  return a;
}

Vector linear_perturbation(const PerturbationSpec& spec, const SpdOperator& F) {
  if (spec.a) {
    require_same_dim(F.dim(), spec.a->size(), "perturbation.A");
    return *spec.a;
  }
  Rng rng(spec.direction_seed);
  const Vector z = random_unit(F.dim(), rng);
  return spec.scale * F.apply(Power::kSqrt, z);
}

SpdOperator scaled_root_metric(const SpdOperator& F, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidConfig, "metric scale must be positive");
  const Vector vals = c * F.eigenvalues().cwiseSqrt();
  return SpdOperator::from_spectrum(F.eigenvectors(), vals);
}

double auto_radius_linear(const SpdOperator& F, const SpdOperator& D, const Vector& a, double kappa,
                          const Constants& k) {
  const double fa = F.apply(Power::kInvSqrt, a).norm();
  const double b = weighted_norm(D, F.solve(a));
  const double r = std::max({fa / k.concentration_nu, k.t3_value_radius_factor * kappa * fa,
                             k.t3_shift_radius_factor * b});
  return std::max(kAutoRadiusMargin * r, kMinRadius);
}

double auto_radius_penalty(const SpdOperator& FG, const SpdOperator& D, const Vector& m, const Constants& k) {
  const double b = weighted_norm(D, FG.solve(m));
  return std::max(kAutoRadiusMargin * k.t3_shift_radius_factor * b, kMinRadius);
}

SmoothnessCertificate build_certificate(const CertificateSpec& spec, const Oracle& f, const Vector& x,
                                        const SpdOperator& F, const SpdOperator& D, double r, bool with_omega,
                                        const std::string& anchor) {
  if (spec.source == CertificateSpec::Source::kDeclared) {
    return declared_certificate(D, r, spec.kappa, spec.omega, spec.tau3, spec.tau4, anchor);
  }
  EstimatorSettings s = spec.estimator;
  s.with_omega = with_omega;
  return estimate_certificate(f, x, F, D, r, s, anchor);
}

CertifyOutcome run_certify(const ExperimentConfig& config, const Constants& k) {
  CertifyOutcome out;
  const Problem problem = make_problem(config.problem);
  const Anchor anchor = solve_anchor(problem, config.solver);
  const PerturbationSpec& pspec = config.perturbation;
  const CertificateSpec& cspec = config.certificate;
  const bool quadratic = problem.hessian.has_value();

  json& rep = out.report;
  rep["schema"] = kReportSchema;
  rep["config"] = config.source;
  rep["problem"] = to_json(config.problem);
  rep["minimizer"] = {{"solve", to_json(anchor.solve)}, {"xstar", to_json(anchor.xstar)}};
  rep["constants"] = constants_to_json(k);
  json orders = json::array();

  std::optional<PenaltySetup> pen;
  Vector a;
  SpdOperator F = anchor.F;
  OraclePtr target = anchor.f;
  std::string cert_anchor = "f";
  if (is_penalty(pspec)) {
    pen = penalty_setup(pspec, anchor);
    F = pen->FG;
    target = pen->fG;
    cert_anchor = "f_G";
    rep["perturbation"] = {{"type", type_name(pspec.type)}, {"M", to_json(pen->m)}};
  } else {
    a = linear_perturbation(pspec, F);
    rep["perturbation"] = {{"type", "linear"}, {"A", to_json(a)}};
  }

  const SpdOperator D = scaled_root_metric(F, cspec.metric_scale);
  const double kappa_for_radius =
      cspec.source == CertificateSpec::Source::kDeclared ? cspec.kappa : kappa_between(D, F);
  const double r = cspec.r ? *cspec.r
                   : pen  ? auto_radius_penalty(F, D, pen->m, k)
                          : auto_radius_linear(F, D, a, kappa_for_radius, k);
  const SmoothnessCertificate cert =
      build_certificate(cspec, *target, anchor.xstar, F, D, r, !pen.has_value(), cert_anchor);
  rep["certificate"] = to_json(cert);

  auto warn = [&](const std::string& w) { out.warnings.push_back(w); };

  for (const Order order : config.orders) {
    const std::string name(to_string(order));
    if (order == Order::kExact && !quadratic) {
      warn("order exact skipped: problem is not quadratic");
      orders.push_back(skipped(name, "problem is not quadratic"));
      continue;
    }
    if ((order == Order::kThird || order == Order::kFourth) && !cert.tau3) {
      warn("order " + name + " skipped: third derivatives unavailable");
      orders.push_back(skipped(name, "third derivatives unavailable"));
      continue;
    }
    if (order == Order::kFourth && !cert.tau4) {
      warn("order 4 skipped: fourth derivatives unavailable");
      orders.push_back(skipped(name, "fourth derivatives unavailable"));
      continue;
    }
    OrderOutcome o;
    if (!pen) {
      const ExpansionReport e = expansion(order, *anchor.f, anchor.xstar, anchor.F, a, cert, k);
      ComparisonReport c = verify_expansion(*anchor.f, anchor.xstar, a, e, config.solver);
      o = finish(name, "linear", e, to_json(e), std::move(c));
    } else {
      if (order == Order::kSecond) {
        warn("order 2 skipped: penalties have order exact, 3 and 4");
        orders.push_back(skipped(name, "no second-order penalty form"));
        continue;
      }
      if (order == Order::kExact && !pen->g2) {
        warn("order exact skipped: smooth penalty");
        orders.push_back(skipped(name, "smooth penalty has no exact form"));
        continue;
      }
      PenaltyBiasReport pr;
      if (order == Order::kExact) {
        pr = ridge_bias_exact_quadratic(anchor.F, *pen->g2, anchor.xstar);
      } else if (pen->g2) {
        pr = order == Order::kThird ? ridge_bias_bounds(*anchor.f, anchor.xstar, *pen->g2, cert, k)
                                    : ridge_bias_fourth_order(*anchor.f, anchor.xstar, *pen->g2, cert, k);
      } else {
        pr = smooth_penalty_bias(*anchor.f, anchor.xstar, pen->pen, cert, order, k);
      }
      ComparisonReport c = verify_penalty(*pen->fG, anchor.xstar, pr, config.solver);
      o = finish(name, pr.kind, pr.expansion, to_json(pr), std::move(c));
    }
    out.violations += o.row.violations;
    if (o.row.gates_passed < o.row.gates_total) ++out.gate_failures;
    out.rows.push_back(o.row);
    orders.push_back(std::move(o.entry));
  }
  rep["orders"] = std::move(orders);
  rep["warnings"] = out.warnings;
  rep["summary"] = {{"violations", out.violations}, {"orders_with_failed_gates", out.gate_failures}};
  return out;
}

std::optional<double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (std::isfinite(y[i]) && y[i] > floor && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 3) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  return sxy / sxx;
}

ScalingOutcome run_scaling(const ExperimentConfig& config) {
  if (is_penalty(config.perturbation)) {
    throw Error(ErrorCode::kInvalidConfig, "scaling needs a linear perturbation");
  }
  const Problem problem = make_problem(config.problem);
  const Anchor anchor = solve_anchor(problem, config.solver);
  const Vector a0 = linear_perturbation(config.perturbation, anchor.F);
  const SpdOperator D = scaled_root_metric(anchor.F, config.certificate.metric_scale);
  const bool skew = anchor.f->has_third();

  std::vector<std::future<ScalingRow>> jobs;
  for (const double eps : config.scaling_eps) {
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      const Vector a = eps * a0;
      const Vector newton = anchor.F.solve(a);
      const double fa2 = a.dot(newton);
      const OraclePtr g = linearly_perturb(anchor.f, a);
      const SolveResult sol = newton_minimize(*g, anchor.xstar, config.solver);
      const Vector delta = sol.xhat - anchor.xstar;
      const double dv = sol.value - g->value(anchor.xstar);
      ScalingRow row;
      row.eps = eps;
      row.b = weighted_norm(D, newton);
      row.first_order_residual = (delta + newton).norm();
      row.value_error_o2 = std::abs(dv + 0.5 * fa2);
      if (skew) {
        const SkewTerm t = skewness_correction(*anchor.f, anchor.xstar, newton);
        const Vector abar = -newton - anchor.F.solve(t.gradient);
        row.skew_residual = (delta - abar).norm();
        row.value_error_o4 = std::abs(dv + 0.5 * fa2 + t.value);
      } else {
        row.skew_residual = kNaN;
        row.value_error_o4 = kNaN;
      }
      return row;
    }));
  }
  ScalingOutcome out;
  for (auto& j : jobs) {
    try {
      if (out.partial) {
        j.wait();
        continue;
      }
      out.rows.push_back(j.get());
    } catch (const std::exception& e) {
      out.partial = true;
      out.failure = e.what();
    }
  }
  std::vector<double> x, y1, y2, y3, y4;
  for (const auto& r : out.rows) {
    x.push_back(r.eps);
    y1.push_back(r.first_order_residual);
    y2.push_back(r.skew_residual);
    y3.push_back(r.value_error_o2);
    y4.push_back(r.value_error_o4);
  }
  out.slope_first_order = fit_loglog_slope(x, y1);
  out.slope_skew = fit_loglog_slope(x, y2);
  out.slope_value_o2 = fit_loglog_slope(x, y3);
  out.slope_value_o4 = fit_loglog_slope(x, y4);
  return out;
}

SweepOutcome run_ridge_sweep(const ExperimentConfig& config, const Constants& k) {
  if (config.ridge_lambdas.empty()) throw Error(ErrorCode::kInvalidConfig, "ridge_sweep.lambdas is missing");
  const Problem problem = make_problem(config.problem);
  const Anchor anchor = solve_anchor(problem, config.solver);
  const Eigen::Index p = anchor.xstar.size();
  const Matrix base = config.ridge_g2 ? *config.ridge_g2 : Matrix::Identity(p, p);

  struct Point {
    SweepRow row;
    std::vector<std::string> warnings;
    std::size_t gate_failures = 0;
  };
  std::vector<std::future<Point>> jobs;
  for (const double lambda : config.ridge_lambdas) {
    jobs.push_back(std::async(std::launch::async, [&, lambda] {
      Point pt;
      SweepRow& row = pt.row;
      row.lambda = lambda;
      const Matrix g2 = lambda * base;
      const OraclePtr fG = quadratically_penalize(anchor.f, g2);
      const SpdOperator FG = hessian_at(*fG, anchor.xstar);
      const Vector m = g2 * anchor.xstar;
      const SpdOperator D = scaled_root_metric(FG, config.certificate.metric_scale);
      const double r = config.certificate.r ? *config.certificate.r : auto_radius_penalty(FG, D, m, k);
      const SmoothnessCertificate cert =
          build_certificate(config.certificate, *fG, anchor.xstar, FG, D, r, false, "f_G");
      row.bG = weighted_norm(D, FG.solve(m));
      if (!cert.tau3) {
        pt.warnings.push_back("lambda " + fmt(lambda) + ": third derivatives unavailable, row left empty");
        row.residual_o3 = row.radius_o3 = row.slack_o3 = kNaN;
        row.residual_o4 = row.radius_o4 = row.slack_o4 = kNaN;
        return pt;
      }
      const std::string o3_key = "penalty_o3/D^-1F:first_order_residual";
      const std::string o4_key = "penalty_o4/D^-1F:skew_residual";
      const PenaltyBiasReport r3 = ridge_bias_bounds(*anchor.f, anchor.xstar, g2, cert, k);
      const ComparisonReport c3 = verify_penalty(*fG, anchor.xstar, r3, config.solver);
      row.gate_tau3 = r3.bounds().certifying() ? "pass" : "fail";
      pt.gate_failures += r3.bounds().certifying() ? 0 : 1;
      const ComparisonEntry* e3 = c3.find(o3_key);
      row.radius_o3 = e3->radius;
      row.residual_o3 = e3->residual;
      row.slack_o3 = e3->slack;
      row.certified_o3 = e3->certified;
      row.violations += c3.violations().size();
      row.pred_bias_norm = r3.predicted_bias.norm();
      row.actual_bias_norm = c3.actual_shift.norm();
      if (cert.tau4) {
        const PenaltyBiasReport r4 = ridge_bias_fourth_order(*anchor.f, anchor.xstar, g2, cert, k);
        const ComparisonReport c4 = verify_penalty(*fG, anchor.xstar, r4, config.solver);
        row.gate_tau4 = r4.bounds().certifying() ? "pass" : "fail";
        pt.gate_failures += r4.bounds().certifying() ? 0 : 1;
        const ComparisonEntry* e4 = c4.find(o4_key);
        row.radius_o4 = e4->radius;
        row.residual_o4 = e4->residual;
        row.slack_o4 = e4->slack;
        row.certified_o4 = e4->certified;
        row.violations += c4.violations().size();
        row.pred_bias_norm = r4.predicted_bias.norm();
      } else {
        pt.warnings.push_back("lambda " + fmt(lambda) + ": order 4 skipped, fourth derivatives unavailable");
        row.residual_o4 = row.radius_o4 = row.slack_o4 = kNaN;
      }
      return pt;
    }));
  }
  SweepOutcome out;
  std::optional<std::string> failure;
  for (auto& j : jobs) {
    try {
      Point pt = j.get();
      out.violations += pt.row.violations;
      out.gate_failures += pt.gate_failures;
      out.warnings.insert(out.warnings.end(), pt.warnings.begin(), pt.warnings.end());
      out.rows.push_back(std::move(pt.row));
    } catch (const std::exception& e) {
      if (!failure) failure = e.what();
    }
  }
  if (failure) throw Error(ErrorCode::kPreconditionViolated, "ridge sweep: " + *failure);
  return out;
}

int cmd_certify(const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig config = load_for_run(opts);
    const Constants k = constants_for_run(opts);
    for (const auto& f : constants_integrity_failures(k)) log_of(opts) << "perturbex: warning: constant " << f << "\n";
    const CertifyOutcome o = run_certify(config, k);
    const auto dir = prepare_out(opts);
    write_file(dir / "report.json", dump_report(o.report));
    std::ostringstream csv;
    csv << "order,kind,b,gates_passed,gates_total,certifying,certified_bounds,max_certified_slack,violations,"
           "predicted_value_change,actual_value_change\n";
    for (const auto& r : o.rows) {
      csv << r.order << "," << r.kind << "," << fmt(r.b) << "," << r.gates_passed << "," << r.gates_total << ","
          << (r.certifying ? "true" : "false") << "," << r.certified_bounds << "," << fmt(r.max_certified_slack) << ","
          << r.violations << "," << fmt(r.predicted_value_change) << "," << fmt(r.actual_value_change) << "\n";
    }
    write_file(dir / "summary.csv", csv.str());
    for (const auto& w : o.warnings) log_of(opts) << "perturbex: warning: " << w << "\n";
    if (o.violations > 0) {
      log_of(opts) << "perturbex: " << o.violations << " certified bound(s) violated\n";
      return static_cast<int>(kExitViolation);
    }
    if (opts.require_gates && o.gate_failures > 0) {
      log_of(opts) << "perturbex: gates failed for " << o.gate_failures << " order(s)\n";
      return static_cast<int>(kExitGateFailure);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_scaling(const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig config = load_for_run(opts);
    const ScalingOutcome o = run_scaling(config);
    const auto dir = prepare_out(opts);
    std::ostringstream csv;
    csv << "eps,b,first_order_residual,skew_residual,value_error_o2,value_error_o4\n";
    for (const auto& r : o.rows) {
      csv << fmt(r.eps) << "," << fmt(r.b) << "," << fmt(r.first_order_residual) << "," << fmt(r.skew_residual)
          << "," << fmt(r.value_error_o2) << "," << fmt(r.value_error_o4) << "\n";
    }
    write_file(dir / "scaling.csv", csv.str());
    auto slope = [](const std::optional<double>& s) { return s ? fmt(*s) : std::string("floor"); };
    std::ostringstream sl;
    sl << "quantity,slope\n"
       << "first_order_residual," << slope(o.slope_first_order) << "\n"
       << "skew_residual," << slope(o.slope_skew) << "\n"
       << "value_error_o2," << slope(o.slope_value_o2) << "\n"
       << "value_error_o4," << slope(o.slope_value_o4) << "\n"
       << "partial," << (o.partial ? "true" : "false") << "\n";
    write_file(dir / "scaling_slopes.csv", sl.str());
    if (o.partial) {
      log_of(opts) << "perturbex: scaling stopped after " << o.rows.size() << " point(s): " << o.failure << "\n";
      return static_cast<int>(kExitError);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_ridge_sweep(const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig config = load_for_run(opts);
    const Constants k = constants_for_run(opts);
    const SweepOutcome o = run_ridge_sweep(config, k);
    const auto dir = prepare_out(opts);
    std::ostringstream csv;
    csv << "lambda,bG,gate_tau3,gate_tau4,pred_bias_norm,actual_bias_norm,radius_o3,residual_o3,radius_o4,"
           "residual_o4,slack_o3,slack_o4,certified_o3,certified_o4,violations\n";
    for (const auto& r : o.rows) {
      csv << fmt(r.lambda) << "," << fmt(r.bG) << "," << r.gate_tau3 << "," << r.gate_tau4 << ","
          << fmt(r.pred_bias_norm) << "," << fmt(r.actual_bias_norm) << "," << fmt(r.radius_o3) << ","
          << fmt(r.residual_o3) << "," << fmt(r.radius_o4) << "," << fmt(r.residual_o4) << "," << fmt(r.slack_o3)
          << "," << fmt(r.slack_o4) << "," << (r.certified_o3 ? "true" : "false") << ","
          << (r.certified_o4 ? "true" : "false") << "," << r.violations << "\n";
    }
    write_file(dir / "ridge_sweep.csv", csv.str());
    for (const auto& w : o.warnings) log_of(opts) << "perturbex: warning: " << w << "\n";
    if (o.violations > 0) return static_cast<int>(kExitViolation);
    if (opts.require_gates && o.gate_failures > 0) return static_cast<int>(kExitGateFailure);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace perturbex
