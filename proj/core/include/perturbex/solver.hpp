#pragma once

#include <optional>
#include <vector>

#include "perturbex/oracle.hpp"

namespace perturbex {

struct SolverSettings {
  /// Newton-decrement tolerance; unset means 1e-12 (1 + |f(x0)|).
  std::optional<double> tol;
  int max_iter = 100;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct SolveResult {
  Vector xhat;
  double value = 0.0;
  /// ‖∇²f(x̂)^{-1/2} ∇f(x̂)‖, the Newton decrement at x̂.
  double grad_norm_dual = 0.0;
  int iterations = 0;
  bool converged = false;
  double tol = 0.0;
  /// f at x0 followed by f at every accepted iterate.
  std::vector<double> history;
  /// History indices reached by a full step taken in the roundoff regime,
  /// where the Armijo test is no longer meaningful.
  std::vector<int> roundoff_steps;
};

/// Damped Newton with Armijo backtracking, full step first. Throws
/// kHessianNotPd, kMaxIterExceeded or kLineSearchFailed.
SolveResult newton_minimize(const Oracle& f, const Vector& x0, const SolverSettings& settings = {});

}  // namespace perturbex
