#include "perturbex/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

SpdOperator hessian_at(const Oracle& f, const Vector& x, int iter) {
  try {
    return SpdOperator::from_dense(f.hessian(x));
  } catch (const Error& e) {
    throw Error(ErrorCode::kHessianNotPd, "iterate " + std::to_string(iter) + ": " + e.what());
  }
}

}  // namespace

SolveResult newton_minimize(const Oracle& f, const Vector& x0, const SolverSettings& s) {
  require_same_dim(f.dim(), x0.size(), "newton_minimize");
  require_finite(x0, "x0");
  SolveResult res;
  res.xhat = x0;
  res.value = f.value(x0);
  if (!std::isfinite(res.value)) throw Error(ErrorCode::kNonFinite, "f(x0) is not finite");
  res.tol = s.tol.value_or(1e-12 * (1.0 + std::abs(res.value)));
  res.history.push_back(res.value);

  Vector g = f.gradient(res.xhat);
  for (int it = 0;; ++it) {
    const SpdOperator h = hessian_at(f, res.xhat, it);
    const Vector step = -h.solve(g);
    const double slope = g.dot(step);
    const double decrement = std::sqrt(std::max(-slope, 0.0));
    res.grad_norm_dual = decrement;
    res.iterations = it;
    if (decrement <= res.tol) {
      res.converged = true;
      return res;
    }
    if (it >= s.max_iter) {
      throw Error(ErrorCode::kMaxIterExceeded,
                  std::to_string(s.max_iter) + " iterations, decrement " + std::to_string(decrement));
    }

    // Near the minimizer the predicted decrease drops below the resolution
    // of f, and a tiny backtracked step can pass the Armijo test on a tie.
    // There the full step is taken when it shrinks the decrement.
    const double roundoff = 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(res.value));
    Vector trial;
    double ftrial = 0.0;
    bool accepted = false;
    if (decrement * decrement <= roundoff) {
      trial = res.xhat + step;
      ftrial = f.value(trial);
      if (std::isfinite(ftrial)) {
        const Vector gtrial = f.gradient(trial);
        try {
          const SpdOperator ht = SpdOperator::from_dense(f.hessian(trial));
          accepted = std::sqrt(std::max(gtrial.dot(ht.solve(gtrial)), 0.0)) < decrement;
        } catch (const Error&) {
          accepted = false;
        }
      }
      if (accepted) res.roundoff_steps.push_back(it + 1);
    }
    double t = 1.0;
    for (int k = 0; !accepted && k <= s.max_backtracks; ++k, t *= s.backtrack) {
      trial = res.xhat + t * step;
      ftrial = f.value(trial);
      accepted = std::isfinite(ftrial) && ftrial < res.value && ftrial <= res.value + s.armijo_c * t * slope;
    }
    if (!accepted) {
      throw Error(ErrorCode::kLineSearchFailed,
                  "iterate " + std::to_string(it) + ", decrement " + std::to_string(decrement));
    }
    res.xhat = trial;
    res.value = ftrial;
    res.history.push_back(res.value);
    g = f.gradient(res.xhat);
  }
}

}  // namespace perturbex
