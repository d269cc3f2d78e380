#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <perturbex/json.hpp>

#include "perturbex/expand.hpp"
#include "perturbex/zoo.hpp"

namespace perturbex {

struct PerturbationSpec {
  enum class Type { kLinear, kRidge, kQuadratic, kSmooth };
  Type type = Type::kLinear;
  /// Linear: explicit A, or a seeded unit direction rescaled so that
  /// ‖F^{-1/2}A‖ = scale at the minimizer.
  std::optional<Vector> a;
  std::uint64_t direction_seed = 0;
  double scale = 0.1;
  /// Ridge: G² = λ I.
  double lambda = 0.0;
  /// Quadratic: explicit G².
  std::optional<Matrix> g2;
  /// Smooth: weight · (zoo penalty).
  std::optional<ProblemDescriptor> pen;
  double weight = 1.0;
};

struct CertificateSpec {
  enum class Source { kEstimated, kDeclared };
  Source source = Source::kEstimated;
  EstimatorSettings estimator;
  /// Unset means the smallest radius passing every radius gate, times 1.01.
  std::optional<double> r;
  /// D = metric_scale · F^{1/2}, so κ = metric_scale at the anchor.
  double metric_scale = 1.0;
  // declared constants
  double kappa = 1.0;
  double omega = 0.0;
  std::optional<double> tau3;
  std::optional<double> tau4;
};

struct ExperimentConfig {
  ProblemDescriptor problem;
  PerturbationSpec perturbation;
  CertificateSpec certificate;
  std::vector<Order> orders{Order::kSecond, Order::kThird, Order::kFourth};
  SolverSettings solver;
  std::vector<double> scaling_eps;
  std::vector<double> ridge_lambdas;
  std::optional<Matrix> ridge_g2;
  nlohmann::json source;
};

/// Strict parse: unknown keys and ill-typed values throw kInvalidConfig.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Default ε grid 2^{-1}, ..., 2^{-8}.
std::vector<double> default_scaling_grid();

}  // namespace perturbex
