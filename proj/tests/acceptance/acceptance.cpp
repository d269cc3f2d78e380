// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here and
// nowhere else; a failing criterion makes the binary exit nonzero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <perturbex/harness.hpp>
#include <perturbex/serialize.hpp>

using namespace perturbex;

namespace {

// criterion 1 and 2
constexpr int kExactInstances = 100;
constexpr double kShiftTol = 1e-10;
constexpr double kValueRelTol = 1e-12;
constexpr double kExactSeconds = 10.0;
// criterion 3 and 7
constexpr int kLinearInstances = 120;
constexpr int kRidgeInstances = 50;
constexpr int kSmoothInstances = 50;
constexpr std::size_t kMinGatePassing = 200;
constexpr double kInflation = 1.5;
constexpr double kValiditySeconds = 300.0;
constexpr double kDominanceRel = 1e-12;
constexpr double kDominanceAbs = 1e-15;
// criterion 4
constexpr double kSlopeFirstOrder = 1.85;
constexpr double kSlopeSkew = 2.8;
constexpr double kSlopeValueO4 = 3.8;
constexpr double kScalingSeconds = 60.0;
// criterion 5
constexpr int kLemmaTriples = 50;
constexpr std::size_t kLemmaSamples = 100000;
constexpr double kLemmaSeconds = 60.0;
// criterion 6
constexpr double kCubicControlBand = 0.05;

constexpr std::uint64_t kSeed = 314159;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Matrix random_psd(Eigen::Index p, Rng& rng, bool rank_deficient) {
  const Eigen::Index rank = rank_deficient ? std::max<Eigen::Index>(1, p / 2) : p;
  Matrix b(p, rank);
  for (Eigen::Index j = 0; j < rank; ++j) b.col(j) = random_gaussian(p, rng);
  Matrix g2 = b * b.transpose() / static_cast<double>(rank);
  return 0.5 * (g2 + g2.transpose());
}

Verdict quadratic_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(kSeed, "c1"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_shift = 0.0, worst_value = 0.0;
  for (int i = 0; i < kExactInstances; ++i) {
    const Eigen::Index p = std::array<Eigen::Index, 3>{2, 10, 50}[i % 3];
    const SpdOperator F = SpdOperator::from_dense(random_spd(p, std::pow(10.0, 3.0 * unit(rng)), rng));
    const Vector c = random_gaussian(p, rng);
    const Vector a = (0.1 + unit(rng)) * F.apply(Power::kSqrt, random_unit(p, rng));
    const OraclePtr f = make_quadratic(F, c);
    const ExpansionReport rep = exact_quadratic_expansion(F, a);
    const ComparisonReport cmp = verify_expansion(*f, c, a, rep);
    worst_shift = std::max(worst_shift, (rep.predicted_shift - cmp.actual_shift).norm());
    worst_value = std::max(worst_value, std::abs(rep.predicted_value_change - cmp.actual_value_change) /
                                            std::abs(cmp.actual_value_change));
  }
  const double t = seconds_since(t0);
  return {worst_shift <= kShiftTol && worst_value <= kValueRelTol && t < kExactSeconds,
          "max shift err " + num(worst_shift) + ", max rel value err " + num(worst_value) + ", " + num(t) + " s"};
}

Verdict ridge_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(kSeed, "c2"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_shift = 0.0, worst_value = 0.0;
  for (int i = 0; i < kExactInstances; ++i) {
    const Eigen::Index p = std::array<Eigen::Index, 3>{2, 10, 50}[i % 3];
    const SpdOperator F = SpdOperator::from_dense(random_spd(p, std::pow(10.0, 3.0 * unit(rng)), rng));
    const Vector ups = random_gaussian(p, rng);
    const Matrix g2 = (0.05 + unit(rng)) * random_psd(p, rng, i % 4 == 0);
    const OraclePtr f = make_quadratic(F, ups);
    const PenaltyBiasReport rep = ridge_bias_exact_quadratic(F, g2, ups);
    const OraclePtr fg = quadratically_penalize(f, g2);
    const ComparisonReport cmp = verify_penalty(*fg, ups, rep);
    const Vector closed = -SpdOperator::from_dense(F.matrix() + g2).solve(g2 * ups);
    worst_shift = std::max({worst_shift, (rep.predicted_bias - cmp.actual_shift).norm(),
                            (rep.predicted_bias - closed).norm()});
    worst_value = std::max(worst_value, std::abs(rep.value_prediction - cmp.actual_value_change) /
                                            std::abs(cmp.actual_value_change));
  }
  const double t = seconds_since(t0);
  return {worst_shift <= kShiftTol && worst_value <= kValueRelTol && t < kExactSeconds,
          "max shift err " + num(worst_shift) + ", max rel value err " + num(worst_value) + ", " + num(t) + " s"};
}

struct ValidityStats {
  std::size_t instances = 0;
  std::size_t gate_passing = 0;
  std::size_t certified_checks = 0;
  std::size_t violations = 0;
  std::size_t per_kind_passing[5] = {0, 0, 0, 0, 0};  // o2, o3, o4, ridge, smooth
  std::size_t dominance_pairs = 0;
  std::size_t dominance_failures = 0;
  double worst_slack = 0.0;
  std::string first_violation;
  std::string first_dominance;
  std::vector<std::string> errors;
  double seconds = 0.0;
};

ExperimentConfig validity_config(std::uint64_t i, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ExperimentConfig c;
  c.problem.kind = unit(rng) < 0.5 ? "logistic" : "logsumexp";
  c.problem.dim = 2 + static_cast<Eigen::Index>(unit(rng) * 9.0);
  c.problem.n = 60 + static_cast<Eigen::Index>(unit(rng) * 140.0);
  c.problem.reg = 0.05 + 0.2 * unit(rng);
  c.problem.seed = rng();
  c.problem.temp = 0.5 + unit(rng);
  c.problem.signal = 0.5 + 2.0 * unit(rng);
  c.certificate.estimator.seed = rng();
  c.certificate.estimator.inflation = kInflation;
  c.certificate.estimator.samples = 300;
  if (i < static_cast<std::uint64_t>(kLinearInstances)) {
    c.perturbation.direction_seed = rng();
    c.perturbation.scale = std::pow(10.0, -2.0 + 1.5 * unit(rng));
    c.orders = {Order::kSecond, Order::kThird, Order::kFourth};
  } else if (i < static_cast<std::uint64_t>(kLinearInstances + kRidgeInstances)) {
    c.perturbation.type = PerturbationSpec::Type::kRidge;
    c.perturbation.lambda = std::pow(10.0, -2.5 + 2.0 * unit(rng));
    c.orders = {Order::kThird, Order::kFourth};
  } else {
    c.perturbation.type = PerturbationSpec::Type::kSmooth;
    ProblemDescriptor pen;
    pen.kind = "logsumexp";
    pen.dim = c.problem.dim;
    pen.n = 10 + static_cast<Eigen::Index>(unit(rng) * 30.0);
    pen.reg = 0.0;
    pen.seed = rng();
    c.perturbation.pen = pen;
    c.perturbation.weight = std::pow(10.0, -2.5 + 1.5 * unit(rng));
    c.orders = {Order::kThird, Order::kFourth};
  }
  return c;
}

double entry_residual(const nlohmann::json& order, const std::string& key) {
  for (const auto& e : order["comparison"]["entries"]) {
    if (e["key"].get<std::string>() == key) return e["residual"].get<double>();
  }
  return std::nan("");
}

ValidityStats bound_validity() {
  const auto t0 = std::chrono::steady_clock::now();
  ValidityStats st;
  Rng rng(derive_seed(kSeed, "c3"));
  const int total = kLinearInstances + kRidgeInstances + kSmoothInstances;
  for (int i = 0; i < total; ++i) {
    const ExperimentConfig c = validity_config(static_cast<std::uint64_t>(i), rng);
    CertifyOutcome out;
    try {
      out = run_certify(c, default_constants());
    } catch (const std::exception& e) {
      st.errors.push_back("instance " + std::to_string(i) + ": " + e.what());
      continue;
    }
    ++st.instances;
    const bool linear = c.perturbation.type == PerturbationSpec::Type::kLinear;
    const bool ridge = c.perturbation.type == PerturbationSpec::Type::kRidge;
    const nlohmann::json* o3 = nullptr;
    const nlohmann::json* o4 = nullptr;
    for (std::size_t k = 0; k < out.rows.size(); ++k) {
      const CertifyRow& row = out.rows[k];
      st.certified_checks += row.certified_bounds;
      st.worst_slack = std::max(st.worst_slack, row.max_certified_slack);
      st.violations += row.violations;
      if (row.violations > 0 && st.first_violation.empty()) {
        st.first_violation = "instance " + std::to_string(i) + " order " + row.order;
      }
      if (!row.certifying) continue;
      ++st.gate_passing;
      const std::size_t kind = linear ? (row.order == "2" ? 0 : row.order == "3" ? 1 : 2) : ridge ? 3 : 4;
      ++st.per_kind_passing[kind];
      for (const auto& o : out.report["orders"]) {
        if (o["order"].get<std::string>() != row.order) continue;
        if (row.order == "3") o3 = &o;
        if (row.order == "4") o4 = &o;
      }
    }
    if (o3 && o4) {
      const std::string k3 = linear ? "third_order_shift/D^-1F:first_order_residual"
                                    : "penalty_o3/D^-1F:first_order_residual";
      const std::string k4 = linear ? "fourth_order/D^-1F:skew_residual" : "penalty_o4/D^-1F:skew_residual";
      const double r3 = entry_residual(*o3, k3);
      const double r4 = entry_residual(*o4, k4);
      ++st.dominance_pairs;
      if (!(r4 <= r3 * (1.0 + kDominanceRel) + kDominanceAbs)) {
        ++st.dominance_failures;
        if (st.first_dominance.empty()) {
          st.first_dominance = "instance " + std::to_string(i) + ": " + num(r4) + " > " + num(r3);
        }
      }
    }
  }
  st.seconds = seconds_since(t0);
  return st;
}

Verdict validity_verdict(const ValidityStats& st) {
  bool every_kind = true;
  for (std::size_t n : st.per_kind_passing) every_kind = every_kind && n > 0;
  std::string d = std::to_string(st.gate_passing) + " gate-passing (instance, order) pairs over " +
                  std::to_string(st.instances) + " instances [o2 " + std::to_string(st.per_kind_passing[0]) +
                  ", o3 " + std::to_string(st.per_kind_passing[1]) + ", o4 " + std::to_string(st.per_kind_passing[2]) +
                  ", ridge " + std::to_string(st.per_kind_passing[3]) + ", smooth " +
                  std::to_string(st.per_kind_passing[4]) + "], " + std::to_string(st.certified_checks) +
                  " certified bound checks, " + std::to_string(st.violations) + " violations, max slack " +
                  num(st.worst_slack) + ", " + num(st.seconds) + " s";
  if (!st.first_violation.empty()) d += "; first violation " + st.first_violation;
  if (!st.errors.empty()) d += "; " + std::to_string(st.errors.size()) + " errors, first: " + st.errors.front();
  return {st.errors.empty() && st.violations == 0 && st.gate_passing >= kMinGatePassing && every_kind &&
              st.seconds < kValiditySeconds,
          d};
}

Verdict dominance_verdict(const ValidityStats& st) {
  std::string d = std::to_string(st.dominance_pairs) + " instances with orders 3 and 4 gate-passing, " +
                  std::to_string(st.dominance_failures) + " where order 4 is worse";
  if (!st.first_dominance.empty()) d += "; first " + st.first_dominance;
  return {st.errors.empty() && st.dominance_pairs > 0 && st.dominance_failures == 0, d};
}

Verdict order_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.problem.kind = "logistic";
  c.problem.dim = 10;
  c.problem.n = 200;
  c.problem.reg = 0.1;
  c.problem.seed = 5;
  c.perturbation.direction_seed = 6;
  c.perturbation.scale = 1.0;
  c.certificate.estimator.seed = 7;
  c.scaling_eps = default_scaling_grid();
  const ScalingOutcome o = run_scaling(c);
  const double t = seconds_since(t0);
  auto show = [](const std::optional<double>& s) { return s ? num(*s) : std::string("floor"); };
  const bool ok = !o.partial && o.slope_first_order && *o.slope_first_order >= kSlopeFirstOrder && o.slope_skew &&
                  *o.slope_skew >= kSlopeSkew && o.slope_value_o4 && *o.slope_value_o4 >= kSlopeValueO4 &&
                  t < kScalingSeconds;
  return {ok, "slopes first-order " + show(o.slope_first_order) + ", skew-corrected " + show(o.slope_skew) +
                  ", order-4 value " + show(o.slope_value_o4) + ", " + num(t) + " s"};
}

Verdict auxiliary_lemma() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(kSeed, "c5"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_hi = 0.0, worst_lo = 0.0;
  int failed = 0;
  for (int i = 0; i < kLemmaTriples; ++i) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(unit(rng) * 10.0);
    const double r = std::pow(10.0, -1.0 + 2.0 * unit(rng));
    const SpdOperator U = SpdOperator::from_dense(random_spd(p, std::pow(10.0, 2.0 * unit(rng)), rng));
    const Vector s = (0.75 + 0.25 * unit(rng)) * r * random_unit(p, rng);
    const double tau = unit(rng) / (3.0 * r);
    const DiagnosticsRecord rec = qp_lemma_check(U, s, tau, r, kLemmaSamples, rng());
    const DiagnosticEntry* hi = rec.find("max_objective");
    const DiagnosticEntry* lo = rec.find("min_objective");
    worst_hi = std::max(worst_hi, hi->worst_ratio);
    worst_lo = std::max(worst_lo, lo->worst_ratio);
    if (!hi->passed() || !lo->passed() || hi->evaluations < kLemmaSamples) ++failed;
  }
  const double t = seconds_since(t0);
  return {failed == 0 && t < kLemmaSeconds, std::to_string(kLemmaTriples) + " triples x " +
                                                std::to_string(kLemmaSamples) + " samples, worst ratios " +
                                                num(worst_hi) + " / " + num(worst_lo) + ", " + num(t) + " s"};
}

Verdict taylor_remainders() {
  double worst = 0.0;
  std::string worst_at;
  int instances = 0;
  for (const std::string kind : {"logistic", "logsumexp"}) {
    for (const Eigen::Index p : {2, 5, 10}) {
      for (const double r : {0.25, 0.5, 1.0}) {
        ProblemDescriptor d;
        d.kind = kind;
        d.dim = p;
        d.n = 150;
        d.seed = derive_seed(kSeed, kind) + static_cast<std::uint64_t>(p);
        const Problem prob = make_problem(d);
        const Anchor a = solve_anchor(prob, {});
        EstimatorSettings es;
        es.seed = d.seed + 1;
        es.inflation = kInflation;
        const SmoothnessCertificate cert =
            estimate_certificate(*prob.oracle, a.xstar, a.F, a.F.power(Power::kSqrt), r, es);
        const DiagnosticsRecord rec = taylor_diagnostics(*prob.oracle, a.xstar, cert, 400, d.seed + 2);
        ++instances;
        for (const auto& e : rec.entries) {
          if (e.advisory) continue;
          if (e.worst_ratio > worst) {
            worst = e.worst_ratio;
            worst_at = kind + " p=" + std::to_string(p) + " r=" + num(r) + " " + e.name;
          }
        }
      }
    }
  }
  const OraclePtr cubic = make_separable_polynomial(1, {0.0, 0.0, 0.5, 1.0 / 6.0});
  const SmoothnessCertificate exact = declared_certificate(SpdOperator::identity(1), 0.5, 1.0, 0.0, 1.0, 0.0);
  const DiagnosticsRecord ctl = taylor_diagnostics(*cubic, Vector::Zero(1), exact, 400, kSeed);
  double cubic_ratio = ctl.find("gradient_remainder")->worst_ratio;
  for (const auto& e : ctl.entries) {
    if (!e.advisory && e.name != "fourth_order_gradient_remainder") cubic_ratio = std::min(cubic_ratio, e.worst_ratio);
  }
  bool cubic_ok = ctl.all_passed() && cubic_ratio >= 1.0 - kCubicControlBand;
  return {worst <= kTaylorTolerance && cubic_ok,
          std::to_string(instances) + " zoo instances, worst ratio " + num(worst) + " (" + worst_at +
              "), cubic control min ratio " + num(cubic_ratio)};
}

Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("perturbex_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "config.json";
  {
    std::ofstream out(cfg);
    out << R"({"problem": {"kind": "logsumexp", "dim": 6, "n": 120, "reg": 0.1, "seed": 21},
              "perturbation": {"type": "linear", "direction_seed": 22, "scale": 0.08},
              "certificate": {"source": "estimated", "seed": 23, "samples": 400},
              "orders": [2, 3, 4]})";
  }
  auto run = [&](const std::string& name) {
    RunOptions o;
    o.config_path = cfg.string();
    o.out_dir = (dir / name).string();
    o.seed = 99;
    const int code = cmd_certify(o);
    std::ifstream in(dir / name / "report.json", std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return std::make_pair(code, s.str());
  };
  const auto a = run("a");
  const auto b = run("b");
  std::filesystem::remove_all(dir);
  const bool ok = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  return {ok, "exit codes " + std::to_string(a.first) + "/" + std::to_string(b.first) + ", " +
                  std::to_string(a.second.size()) + " bytes, identical " + (a.second == b.second ? "yes" : "no")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const std::string& name, const Verdict& v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " " << name << ": " << v.detail << std::endl;
    if (!v.pass) ++failures;
  };
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("threw ") + e.what()};
    }
  };
  report(1, "quadratic exactness", guarded(quadratic_exactness));
  report(2, "ridge exactness", guarded(ridge_exactness));
  ValidityStats st;
  try {
    st = bound_validity();
  } catch (const std::exception& e) {
    st.errors.push_back(e.what());
  }
  report(3, "bound validity", validity_verdict(st));
  report(4, "order scaling", guarded(order_scaling));
  report(5, "auxiliary lemma", guarded(auxiliary_lemma));
  report(6, "Taylor remainders", guarded(taylor_remainders));
  report(7, "fourth-order dominance", dominance_verdict(st));
  report(8, "determinism", guarded(determinism));
  return failures == 0 ? 0 : 1;
}
