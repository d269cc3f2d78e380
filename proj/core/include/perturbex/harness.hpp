#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <perturbex/json.hpp>

#include "perturbex/config.hpp"
#include "perturbex/constants.hpp"
#include "perturbex/penalty.hpp"

namespace perturbex {

/// Exit-code contract shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitViolation = 2, kExitGateFailure = 3 };

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  /// Overrides certificate.seed.
  std::optional<std::uint64_t> seed;
  bool require_gates = false;
  std::optional<std::string> constants_path;
  std::ostream* log = nullptr;  // warnings; std::cerr when unset
};

/// Minimizer of the unperturbed problem and its Hessian.
struct Anchor {
  OraclePtr f;
  Vector xstar;
  SpdOperator F = SpdOperator::identity(1);
  SolveResult solve;
};

Anchor solve_anchor(const Problem& problem, const SolverSettings& settings);

/// Explicit A, or the seeded direction rescaled to ‖F^{-1/2}A‖ = scale.
Vector linear_perturbation(const PerturbationSpec& spec, const SpdOperator& F);

/// D = c · F^{1/2}.
SpdOperator scaled_root_metric(const SpdOperator& F, double c);

/// Smallest r passing every radius gate of orders 2 to 4, times 1.01.
double auto_radius_linear(const SpdOperator& F, const SpdOperator& D, const Vector& a, double kappa,
                          const Constants& k);
/// 1.01 · (3/2) b_G.
double auto_radius_penalty(const SpdOperator& FG, const SpdOperator& D, const Vector& m, const Constants& k);

SmoothnessCertificate build_certificate(const CertificateSpec& spec, const Oracle& f, const Vector& x,
                                        const SpdOperator& F, const SpdOperator& D, double r, bool with_omega,
                                        const std::string& anchor);

struct CertifyRow {
  std::string order;
  std::string kind;
  double b = 0.0;
  std::size_t gates_passed = 0;
  std::size_t gates_total = 0;
  bool certifying = false;
  std::size_t certified_bounds = 0;
  double max_certified_slack = 0.0;
  std::size_t violations = 0;
  double predicted_value_change = 0.0;
  double actual_value_change = 0.0;
};

struct CertifyOutcome {
  nlohmann::json report;
  std::vector<CertifyRow> rows;
  std::vector<std::string> warnings;
  std::size_t violations = 0;
  std::size_t gate_failures = 0;
};

CertifyOutcome run_certify(const ExperimentConfig& config, const Constants& k);

struct ScalingRow {
  double eps = 0.0;
  double b = 0.0;
  double first_order_residual = 0.0;  // ‖ῠ - υ* + F⁻¹A‖
  double skew_residual = 0.0;         // ‖ῠ - υ* - ā‖
  double value_error_o2 = 0.0;        // |δg + ‖F^{-1/2}A‖²/2|
  double value_error_o4 = 0.0;        // |δg + ‖F^{-1/2}A‖²/2 + 𝒯(F⁻¹A)|
};

struct ScalingOutcome {
  std::vector<ScalingRow> rows;
  std::optional<double> slope_first_order;
  std::optional<double> slope_skew;
  std::optional<double> slope_value_o2;
  std::optional<double> slope_value_o4;
  bool partial = false;
  std::string failure;
};

inline constexpr double kScalingFloor = 1e-12;

/// Least-squares slope of log y on log x over points with y above floor;
/// empty when fewer than three points remain.
std::optional<double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                                       double floor = kScalingFloor);

ScalingOutcome run_scaling(const ExperimentConfig& config);

struct SweepRow {
  double lambda = 0.0;
  double bG = 0.0;
  std::string gate_tau3 = "n/a";
  std::string gate_tau4 = "n/a";
  double pred_bias_norm = 0.0;
  double actual_bias_norm = 0.0;
  double radius_o3 = 0.0;
  double residual_o3 = 0.0;
  double radius_o4 = 0.0;
  double residual_o4 = 0.0;
  double slack_o3 = 0.0;
  double slack_o4 = 0.0;
  bool certified_o3 = false;
  bool certified_o4 = false;
  std::size_t violations = 0;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
  std::size_t violations = 0;
  std::size_t gate_failures = 0;
};

SweepOutcome run_ridge_sweep(const ExperimentConfig& config, const Constants& k);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline constexpr std::uint64_t kDefaultSelftestSeed = 20240917;

std::vector<SelftestCheck> run_selftest(const Constants& k, std::uint64_t seed = kDefaultSelftestSeed);

int cmd_certify(const RunOptions& opts);
int cmd_scaling(const RunOptions& opts);
int cmd_ridge_sweep(const RunOptions& opts);
/// Constants integrity, auxiliary lemma suite, Taylor diagnostics on zoo
/// problems and the closed-form examples; exit 2 on any failure.
int cmd_selftest(const RunOptions& opts);

}  // namespace perturbex
