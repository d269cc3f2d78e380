#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <perturbex/json.hpp>

namespace perturbex {

/// Every numeric constant that enters a gate or a radius. Keeping them in one
/// table lets a run record exactly which values certified it.
struct Constants {
  // concentration
  double concentration_nu = 0.75;
  // second order
  double second_order_omega_max = 1.0 / 3.0;
  double second_order_sqrt_coef = 2.0;
  // third order, value theorem
  double t3_value_radius_factor = 4.0 / 3.0;
  double t3_value_tau_gate = 0.25;
  double t3_value_coef = 0.5;
  // third order, locally uniform theorem
  double t3_shift_radius_factor = 1.5;
  double t3_shift_tau_gate = 4.0 / 9.0;
  double t3_shift_residual_coef = 0.75;
  // fourth order
  double t4_tau4_gate = 1.0 / 3.0;
  double t4_shift_tau4_coef = 0.5;
  double t4_shift_tau3sq_coef = 1.0;
  double t4_value_quartic_tau4_coef = 1.0 / 8.0;
  double t4_value_quartic_tau3sq_coef = 4.0 / 8.0;
  double t4_value_sextic_coef = 0.25;
  double t4_value_sextic_inner_tau3sq = 2.0;
  double skew_value_coef = 1.0 / 6.0;
  double skew_shift_coef = 0.5;
  // penalized problems
  double ridge4_shift_tau4_coef = 0.5;
  double ridge4_shift_tau3sq_coef = 1.0;
  double mu_proximity_coef = 0.5;
  // auxiliary quadratic-programming lemma
  double qp_s_lower_fraction = 0.75;
  double qp_tau_r_max = 1.0 / 3.0;
  double qp_cubic_coef = 1.0 / 3.0;
  double qp_bound_coef = 0.5;
  double qp_rho_coef = 1.0 / 3.0;
  // harness
  double inflation = 1.5;
};

struct ConstantEntry {
  std::string_view name;
  double Constants::*field;
  /// Exact value as a fraction, used by the integrity check.
  std::string_view fraction;
  std::string_view anchor;
};

const Constants& default_constants();
std::span<const ConstantEntry> constant_entries();

/// Parses "a/b" or a decimal.
double parse_fraction(std::string_view text);

/// Names of entries whose value differs from its fraction by more than 1e-15
/// relative; empty when the table is intact.
std::vector<std::string> constants_integrity_failures(const Constants& c);

nlohmann::json constants_to_json(const Constants& c);
/// Starts from the defaults and overrides the listed keys; unknown keys throw kInvalidConfig.
Constants constants_from_json(const nlohmann::json& j);
Constants load_constants(const std::string& path);

}  // namespace perturbex
