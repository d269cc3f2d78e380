#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "perturbex/diagnostics.hpp"
#include "perturbex/oracle.hpp"
#include "perturbex/zoo.hpp"

namespace perturbex {

struct Provenance {
  enum class Kind { kDeclared, kEstimated };
  Kind kind = Kind::kDeclared;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double inflation = 1.0;
  /// Raw sampled maxima before inflation (estimated certificates only).
  double omega_raw = 0.0;
  double tau3_raw = 0.0;
  std::optional<double> tau4_raw;
};

/// Local metric, radius and smoothness constants over U_r = {u : ‖Du‖ ≤ r}.
/// Estimated constants are sampled lower bounds scaled by the inflation
/// factor; provenance records which.
struct SmoothnessCertificate {
  SpdOperator D = SpdOperator::identity(1);
  double r = 1.0;
  double kappa = 1.0;
  double omega = 0.0;
  std::optional<double> tau3;
  std::optional<double> tau4;
  Provenance provenance;
  /// Name of the function the constants were measured on ("f", "g", "f_G").
  std::string anchor = "f";
};

struct EstimatorSettings {
  std::size_t samples = 400;
  std::uint64_t seed = 0;
  double inflation = 1.5;
  /// Power-ascent refinements applied to each sampled direction.
  std::size_t ascent_steps = 8;
  /// ω needs a zero gradient at the anchor; penalty certificates skip it and
  /// leave omega as NaN.
  bool with_omega = true;
};

/// Independent stream for a named estimator derived from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Point u = D⁻¹(r ρ^{1/p} z/‖z‖) uniform in {‖Du‖ ≤ r}. When on_sphere is
/// set the radial factor is 1.
Vector sample_ball(const SpdOperator& d, double r, Rng& rng, bool on_sphere = false);

/// ω̂ = max over υ in {‖F^{1/2}(υ - x*)‖ ≤ r} of
///   2 |f(υ) - f(x*) - ‖F^{1/2}(υ - x*)‖²/2| / ‖D(υ - x*)‖².
/// Half of the samples lie on the boundary sphere. Offsets with
/// ‖Du‖ ≤ 1e-4 r are skipped. Throws kNotAtMinimum when
/// ‖D⁻¹∇f(x*)‖ > 1e-8 (1 + |f(x*)|).
double estimate_omega(const Oracle& f, const Vector& xstar, const SpdOperator& d, const SpdOperator& fh,
                      double r, std::size_t samples, std::uint64_t seed);

/// τ̂₃ = max of ‖D⁻¹ third_dir(x + u, v)‖ / ‖Dv‖² over sampled u ∈ U_r and
/// directions v; the sup over w is attained in closed form by the dual norm.
/// Sample 0 uses u = 0. Each direction is refined by ascent_steps of
/// ṽ ← D⁻¹ t(D⁻¹ṽ), still a lower bound on the true supremum.
double estimate_tau3(const Oracle& f, const Vector& x, const SpdOperator& d, double r, std::size_t samples,
                     std::uint64_t seed, std::size_t ascent_steps = 8);

/// Same construction with fourth_dir and ‖Dv‖³.
double estimate_tau4(const Oracle& f, const Vector& x, const SpdOperator& d, double r, std::size_t samples,
                     std::uint64_t seed, std::size_t ascent_steps = 8);

/// Estimated certificate at x with Hessian fh and metric d: κ exact, ω and
/// τ's sampled then multiplied by the inflation factor. τ₃ / τ₄ are left
/// empty when the oracle lacks the derivative.
SmoothnessCertificate estimate_certificate(const Oracle& f, const Vector& x, const SpdOperator& fh,
                                           const SpdOperator& d, double r, const EstimatorSettings& s,
                                           std::string anchor = "f");

SmoothnessCertificate declared_certificate(const SpdOperator& d, double r, double kappa, double omega,
                                           std::optional<double> tau3, std::optional<double> tau4,
                                           std::string anchor = "f");

/// Worst sampled lhs/rhs for the Taylor-remainder inequalities at x:
///   gradient_remainder       ‖D⁻¹{∇f(x+u) - ∇f(x) - ∇²f(x)u}‖ ≤ τ₃/2 ‖Du‖²
///   hessian_lipschitz        ‖D⁻¹{∇²f(x+u₁) - ∇²f(x+u)}D⁻¹‖ ≤ τ₃ ‖D(u₁-u)‖
///   two_point_gradient       ‖D⁻¹{∇f(x+u₁) - ∇f(x+u) - ∇²f(x)Δ}‖ ≤ τ₃(‖DΔ‖²/2 + ‖Du‖‖DΔ‖)
///   two_point_gradient_literal  same lhs against 3τ₃/2 ‖DΔ‖² (advisory)
///   fourth_order_gradient_remainder  with the ½∇³f(x)[u,u] term, ≤ τ₄/6 ‖Du‖³
/// Offsets are drawn in U_r. Roundoff-level lhs against a zero rhs counts as 0.
DiagnosticsRecord taylor_diagnostics(const Oracle& f, const Vector& x, const SmoothnessCertificate& cert,
                                     std::size_t samples, std::uint64_t seed);

inline constexpr double kTaylorTolerance = 1.0 + 1e-8;

}  // namespace perturbex
