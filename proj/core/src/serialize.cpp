#include "perturbex/serialize.hpp"

#include <cmath>

#include "perturbex/errors.hpp"

namespace perturbex {

using nlohmann::json;

json number_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidConfig, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::kInvalidConfig, "expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::kInvalidConfig, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (row.size() != cols) throw Error(ErrorCode::kInvalidConfig, "ragged matrix");
    m.row(i) = row.transpose();
  }
  return m;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? number_to_json(*v) : json(nullptr); }

}  // namespace

json to_json(const SmoothnessCertificate& c) {
  json j;
  j["anchor"] = c.anchor;
  j["r"] = number_to_json(c.r);
  j["kappa"] = number_to_json(c.kappa);
  j["omega"] = number_to_json(c.omega);
  j["tau3"] = optional_number(c.tau3);
  j["tau4"] = optional_number(c.tau4);
  j["D_eigenvalues"] = to_json(c.D.eigenvalues());
  json prov;
  if (c.provenance.kind == Provenance::Kind::kEstimated) {
    prov["kind"] = "estimated";
    prov["samples"] = c.provenance.samples;
    prov["seed"] = c.provenance.seed;
    prov["inflation"] = c.provenance.inflation;
    prov["omega_raw"] = number_to_json(c.provenance.omega_raw);
    prov["tau3_raw"] = c.tau3 ? number_to_json(c.provenance.tau3_raw) : json(nullptr);
    prov["tau4_raw"] = optional_number(c.provenance.tau4_raw);
    prov["bound"] = "sampled lower bound times inflation";
  } else {
    prov["kind"] = "declared";
  }
  j["provenance"] = prov;
  return j;
}

json to_json(const BoundSet& b) {
  json gates = json::array();
  for (const auto& g : b.gates) {
    gates.push_back({{"name", g.name},
                     {"group", g.group},
                     {"lhs", number_to_json(g.lhs)},
                     {"rhs", number_to_json(g.rhs)},
                     {"strict", g.strict},
                     {"satisfied", g.satisfied}});
  }
  json shifts = json::array();
  for (const auto& s : b.shifts) {
    shifts.push_back({{"key", s.key()},
                      {"norm", std::string(to_string(s.norm))},
                      {"target", std::string(to_string(s.target))},
                      {"radius", number_to_json(s.radius)},
                      {"requires", s.requires_groups},
                      {"certified", s.certified},
                      {"advisory", s.advisory}});
  }
  json values = json::array();
  for (const auto& v : b.values) {
    values.push_back({{"key", v.key()},
                      {"target", std::string(to_string(v.target))},
                      {"lower", number_to_json(v.lower)},
                      {"upper", number_to_json(v.upper)},
                      {"requires", v.requires_groups},
                      {"certified", v.certified}});
  }
  return {{"certifying", b.certifying()}, {"gates", gates}, {"shift_bounds", shifts}, {"value_bounds", values}};
}

json to_json(const ExpansionReport& r) {
  json j;
  j["kind"] = r.kind;
  j["order"] = std::string(to_string(r.order));
  j["hessian_at"] = r.hessian_at;
  j["predicted_shift"] = to_json(r.predicted_shift);
  j["predicted_value_change"] = number_to_json(r.predicted_value_change);
  j["skew_correction"] = r.skew_correction ? to_json(*r.skew_correction) : json(nullptr);
  j["skew_value"] = optional_number(r.skew_value);
  j["b"] = number_to_json(r.b);
  j["fa_norm"] = number_to_json(r.fa_norm);
  j["bounds"] = to_json(r.bounds);
  j["certificate"] = r.certificate ? to_json(*r.certificate) : json(nullptr);
  return j;
}

json to_json(const ComparisonReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"key", e.key},
                       {"certified", e.certified},
                       {"advisory", e.advisory},
                       {"residual", number_to_json(e.residual)},
                       {"radius", number_to_json(e.radius)},
                       {"slack", number_to_json(e.slack)}});
  }
  json j;
  j["actual_shift"] = to_json(r.actual_shift);
  j["actual_value_change"] = number_to_json(r.actual_value_change);
  j["solver_iterations"] = r.solver_iterations;
  j["solver_decrement"] = number_to_json(r.solver_decrement);
  j["certifying"] = r.certifying;
  j["entries"] = entries;
  j["violations"] = r.violations();
  return j;
}

json to_json(const PenaltyBiasReport& r) {
  json j;
  j["kind"] = r.kind;
  j["order"] = std::string(to_string(r.order));
  j["bG"] = number_to_json(r.bG);
  j["M"] = to_json(r.m);
  j["predicted_bias"] = to_json(r.predicted_bias);
  j["mu_correction"] = r.mu_correction ? to_json(*r.mu_correction) : json(nullptr);
  j["value_prediction"] = number_to_json(r.value_prediction);
  j["expansion"] = to_json(r.expansion);
  return j;
}

json to_json(const DiagnosticsRecord& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"worst_ratio", number_to_json(e.worst_ratio)},
                       {"threshold", number_to_json(e.threshold)},
                       {"advisory", e.advisory},
                       {"passed", e.passed()},
                       {"evaluations", e.evaluations},
                       {"step", number_to_json(e.step)},
                       {"witness_point", to_json(e.witness_point)},
                       {"witness_direction", to_json(e.witness_direction)},
                       {"witness_direction2", to_json(e.witness_direction2)}});
  }
  return {{"kind", r.kind}, {"all_passed", r.all_passed()}, {"entries", entries}};
}

json to_json(const SolveResult& r) {
  return {{"xhat", to_json(r.xhat)},
          {"value", number_to_json(r.value)},
          {"grad_norm_dual", number_to_json(r.grad_norm_dual)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"tol", number_to_json(r.tol)}};
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

}  // namespace perturbex
