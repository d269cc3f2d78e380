#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include <perturbex/json.hpp>

#include "perturbex/oracle.hpp"

namespace perturbex {

using Rng = std::mt19937_64;

Vector random_gaussian(Eigen::Index dim, Rng& rng);

/// Uniform on the Euclidean unit sphere.
Vector random_unit(Eigen::Index dim, Rng& rng);

/// Q diag(λ) Q^T with λ log-uniform in [1, cond] and Haar-ish Q (QR of a Gaussian).
Matrix random_spd(Eigen::Index dim, double cond, Rng& rng);

/// How a zoo problem provides third and fourth derivatives.
enum class HigherDerivatives { kAnalytic, kFiniteDifference, kNone };

/// Seeded description of a test problem; a (seed, shape) pair fully
/// determines the generated data.
struct ProblemDescriptor {
  std::string kind = "logistic";  // quadratic | logistic | logsumexp
  Eigen::Index dim = 2;
  Eigen::Index n = 100;
  double reg = 0.1;
  std::uint64_t seed = 0;
  double temp = 1.0;        // logsumexp
  double cond = 10.0;       // quadratic
  double signal = 1.0;      // logistic: scale of the label-generating parameter
  HigherDerivatives higher = HigherDerivatives::kAnalytic;
};

struct Problem {
  ProblemDescriptor descriptor;
  OraclePtr oracle;
  /// Known minimizer, when available in closed form (quadratic).
  std::optional<Vector> minimizer;
  /// Hessian for quadratic problems.
  std::optional<SpdOperator> hessian;
};

Problem make_problem(const ProblemDescriptor& d);

ProblemDescriptor descriptor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemDescriptor& d);

}  // namespace perturbex
