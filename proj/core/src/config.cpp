#include "perturbex/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "perturbex/errors.hpp"
#include "perturbex/serialize.hpp"

namespace perturbex {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::kInvalidConfig, where + ": unknown key '" + key + "'");
  }
}

double positive(const json& j, const char* key, const std::string& where) {
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidConfig, where + "." + key + " must be positive");
  }
  return v;
}

std::optional<double> optional_nonneg(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const double v = j.at(key).get<double>();
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidConfig, std::string("certificate.") + key + " must be finite and >= 0");
  }
  return v;
}

PerturbationSpec parse_perturbation(const json& j) {
  PerturbationSpec p;
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    only_keys(j, {"type", "A", "direction_seed", "scale"}, "perturbation");
    if (j.contains("A")) {
      p.a = vector_from_json(j.at("A"));
      require_finite(*p.a, "perturbation.A");
    } else {
      if (!j.contains("direction_seed")) {
        throw Error(ErrorCode::kInvalidConfig, "linear perturbation needs A or direction_seed");
      }
      p.direction_seed = j.at("direction_seed").get<std::uint64_t>();
      p.scale = j.value("scale", p.scale);
      if (!(p.scale >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "perturbation.scale must be >= 0");
    }
  } else if (type == "ridge") {
    only_keys(j, {"type", "lambda"}, "perturbation");
    p.type = PerturbationSpec::Type::kRidge;
    p.lambda = j.at("lambda").get<double>();
    if (!(p.lambda >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "perturbation.lambda must be >= 0");
  } else if (type == "quadratic") {
    only_keys(j, {"type", "G2"}, "perturbation");
    p.type = PerturbationSpec::Type::kQuadratic;
    p.g2 = matrix_from_json(j.at("G2"));
    require_symmetric_psd(*p.g2);
  } else if (type == "smooth") {
    only_keys(j, {"type", "pen", "weight"}, "perturbation");
    p.type = PerturbationSpec::Type::kSmooth;
    p.pen = descriptor_from_json(j.at("pen"));
    p.weight = j.value("weight", p.weight);
    if (!(p.weight >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "perturbation.weight must be >= 0");
  } else {
    throw Error(ErrorCode::kInvalidConfig, "perturbation.type must be linear|ridge|quadratic|smooth");
  }
  return p;
}

CertificateSpec parse_certificate(const json& j) {
  CertificateSpec c;
  const std::string source = j.value("source", std::string("estimated"));
  if (j.contains("r") && !j.at("r").is_null()) {
    if (j.at("r").is_string()) {
      if (j.at("r").get<std::string>() != "auto") throw Error(ErrorCode::kInvalidConfig, "certificate.r: number or \"auto\"");
    } else {
      c.r = positive(j, "r", "certificate");
    }
  }
  c.metric_scale = j.contains("metric_scale") ? positive(j, "metric_scale", "certificate") : 1.0;
  if (source == "estimated") {
    only_keys(j, {"source", "samples", "seed", "inflation", "ascent_steps", "r", "metric_scale"}, "certificate");
    if (!j.contains("seed")) throw Error(ErrorCode::kInvalidConfig, "estimated certificates need an explicit seed");
    c.estimator.seed = j.at("seed").get<std::uint64_t>();
    c.estimator.samples = j.value("samples", c.estimator.samples);
    c.estimator.inflation = j.value("inflation", c.estimator.inflation);
    c.estimator.ascent_steps = j.value("ascent_steps", c.estimator.ascent_steps);
    if (c.estimator.samples < 1) throw Error(ErrorCode::kInvalidConfig, "certificate.samples must be >= 1");
    if (!(c.estimator.inflation >= 1.0)) throw Error(ErrorCode::kInvalidConfig, "certificate.inflation must be >= 1");
  } else if (source == "declared") {
    only_keys(j, {"source", "kappa", "omega", "tau3", "tau4", "r", "metric_scale"}, "certificate");
    c.source = CertificateSpec::Source::kDeclared;
    c.kappa = j.contains("kappa") ? j.at("kappa").get<double>() : c.metric_scale;
    c.omega = optional_nonneg(j, "omega").value_or(0.0);
    c.tau3 = optional_nonneg(j, "tau3");
    c.tau4 = optional_nonneg(j, "tau4");
    if (!(c.kappa >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "certificate.kappa must be >= 0");
  } else {
    throw Error(ErrorCode::kInvalidConfig, "certificate.source must be estimated|declared");
  }
  return c;
}

std::vector<double> parse_positive_list(const json& j, const std::string& where, bool allow_zero) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::kInvalidConfig, where + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j) {
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < 0.0 || (!allow_zero && x == 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, where + " entries must be " + (allow_zero ? ">= 0" : "> 0"));
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace

std::vector<double> default_scaling_grid() {
  std::vector<double> eps;
  for (int k = 1; k <= 8; ++k) eps.push_back(std::ldexp(1.0, -k));
  return eps;
}

ExperimentConfig config_from_json(const json& j) {
  only_keys(j, {"problem", "perturbation", "certificate", "orders", "solver", "scaling", "ridge_sweep"}, "config");
  ExperimentConfig c;
  c.source = j;
  try {
    c.problem = descriptor_from_json(j.at("problem"));
    if (j.contains("perturbation")) c.perturbation = parse_perturbation(j.at("perturbation"));
    if (j.contains("certificate")) {
      c.certificate = parse_certificate(j.at("certificate"));
    } else {
      throw Error(ErrorCode::kInvalidConfig, "config needs a certificate section (seeds are mandatory)");
    }
    if (j.contains("orders")) {
      c.orders.clear();
      for (const auto& o : j.at("orders")) {
        c.orders.push_back(order_from_string(o.is_string() ? o.get<std::string>() : std::to_string(o.get<int>())));
      }
      if (c.orders.empty()) throw Error(ErrorCode::kInvalidConfig, "orders must not be empty");
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      only_keys(s, {"tol", "max_iter"}, "solver");
      if (s.contains("tol") && !s.at("tol").is_null()) c.solver.tol = positive(s, "tol", "solver");
      c.solver.max_iter = s.value("max_iter", c.solver.max_iter);
      if (c.solver.max_iter < 1) throw Error(ErrorCode::kInvalidConfig, "solver.max_iter must be >= 1");
    }
    c.scaling_eps = default_scaling_grid();
    if (j.contains("scaling")) {
      const json& s = j.at("scaling");
      only_keys(s, {"eps"}, "scaling");
      if (s.contains("eps")) c.scaling_eps = parse_positive_list(s.at("eps"), "scaling.eps", false);
    }
    if (j.contains("ridge_sweep")) {
      const json& s = j.at("ridge_sweep");
      only_keys(s, {"lambdas", "G2"}, "ridge_sweep");
      c.ridge_lambdas = parse_positive_list(s.at("lambdas"), "ridge_sweep.lambdas", true);
      if (s.contains("G2")) {
        c.ridge_g2 = matrix_from_json(s.at("G2"));
        require_symmetric_psd(*c.ridge_g2);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  const Eigen::Index p = c.problem.dim;
  if (c.perturbation.a && c.perturbation.a->size() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "perturbation.A has the wrong length");
  }
  if (c.perturbation.g2 && (c.perturbation.g2->rows() != p || c.perturbation.g2->cols() != p)) {
    throw Error(ErrorCode::kDimensionMismatch, "perturbation.G2 has the wrong shape");
  }
  if (c.perturbation.pen && c.perturbation.pen->dim != p) {
    throw Error(ErrorCode::kDimensionMismatch, "perturbation.pen.dim differs from problem.dim");
  }
  if (c.ridge_g2 && (c.ridge_g2->rows() != p || c.ridge_g2->cols() != p)) {
    throw Error(ErrorCode::kDimensionMismatch, "ridge_sweep.G2 has the wrong shape");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace perturbex
