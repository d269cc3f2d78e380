#include "perturbex/constants.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

using C = Constants;

constexpr std::array<ConstantEntry, 27> kEntries{{
    {"concentration_nu", &C::concentration_nu, "3/4", "concentration gate ‖F^{-1/2}A‖ ≤ ν r, value used by the cubic proofs"},
    {"second_order_omega_max", &C::second_order_omega_max, "1/3", "second-order gate ω ≤ 1/3"},
    {"second_order_sqrt_coef", &C::second_order_sqrt_coef, "2", "2√ω in the second-order shift radii"},
    {"t3_value_radius_factor", &C::t3_value_radius_factor, "4/3", "r ≥ (4κ/3)‖F^{-1/2}A‖ and the matching F^{1/2} radius"},
    {"t3_value_tau_gate", &C::t3_value_tau_gate, "1/4", "κ³τ₃‖F^{-1/2}A‖ < 1/4"},
    {"t3_value_coef", &C::t3_value_coef, "1/2", "|2Δg + ‖F^{-1/2}A‖²| ≤ (τ₃/2) b³"},
    {"t3_shift_radius_factor", &C::t3_shift_radius_factor, "3/2", "r ≥ (3/2) b and ‖D(ῠ - υ*)‖ ≤ (3/2) b"},
    {"t3_shift_tau_gate", &C::t3_shift_tau_gate, "4/9", "κ²τ₃ b < 4/9"},
    {"t3_shift_residual_coef", &C::t3_shift_residual_coef, "3/4", "‖D⁻¹F(ῠ - υ* + F⁻¹A)‖ ≤ (3τ₃/4) b²"},
    {"t4_tau4_gate", &C::t4_tau4_gate, "1/3", "κ²τ₄ b² < 1/3"},
    {"t4_shift_tau4_coef", &C::t4_shift_tau4_coef, "1/2", "(τ₄/2 + κ²τ₃²) b³, τ₄ part"},
    {"t4_shift_tau3sq_coef", &C::t4_shift_tau3sq_coef, "1", "(τ₄/2 + κ²τ₃²) b³, τ₃² part"},
    {"t4_value_quartic_tau4_coef", &C::t4_value_quartic_tau4_coef, "1/8", "(τ₄ + 4κ²τ₃²)/8 b⁴, τ₄ part"},
    {"t4_value_quartic_tau3sq_coef", &C::t4_value_quartic_tau3sq_coef, "4/8", "(τ₄ + 4κ²τ₃²)/8 b⁴, τ₃² part"},
    {"t4_value_sextic_coef", &C::t4_value_sextic_coef, "1/4", "κ²(τ₄ + 2κ²τ₃²)²/4 b⁶"},
    {"t4_value_sextic_inner_tau3sq", &C::t4_value_sextic_inner_tau3sq, "2", "inner 2κ²τ₃² of the b⁶ term"},
    {"skew_value_coef", &C::skew_value_coef, "1/6", "|𝒯(F⁻¹A)| ≤ (τ₃/6) b³"},
    {"skew_shift_coef", &C::skew_shift_coef, "1/2", "‖D⁻¹F(ā + F⁻¹A)‖ ≤ (τ₃/2) b²"},
    {"ridge4_shift_tau4_coef", &C::ridge4_shift_tau4_coef, "1/2", "penalized (τ₄ + 2κ²τ₃²)/2 b_G³, τ₄ part"},
    {"ridge4_shift_tau3sq_coef", &C::ridge4_shift_tau3sq_coef, "1", "penalized (τ₄ + 2κ²τ₃²)/2 b_G³, τ₃² part"},
    {"mu_proximity_coef", &C::mu_proximity_coef, "1/2",
     "‖D(μ_G + F_G⁻¹M)‖ ≤ (τ₃/2) b_G²; the printed form has a minus sign, see the literal diagnostic"},
    {"qp_s_lower_fraction", &C::qp_s_lower_fraction, "3/4", "auxiliary QP lemma, (3/4) r ≤ ‖s‖"},
    {"qp_tau_r_max", &C::qp_tau_r_max, "1/3", "auxiliary QP lemma, τ r ≤ 1/3"},
    {"qp_cubic_coef", &C::qp_cubic_coef, "1/3", "auxiliary QP lemma objective τ/3 ‖u‖³"},
    {"qp_bound_coef", &C::qp_bound_coef, "1/2", "auxiliary QP lemma bound τ/2 ‖s‖³"},
    {"qp_rho_coef", &C::qp_rho_coef, "1/3", "auxiliary QP lemma candidate shift ρ = τ r/3"},
    {"inflation", &C::inflation, "3/2", "default inflation of sampled constants"},
}};

}  // namespace

const Constants& default_constants() {
  static const Constants c{};
  return c;
}

std::span<const ConstantEntry> constant_entries() { return kEntries; }

double parse_fraction(std::string_view text) {
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error(ErrorCode::kInvalidConfig, "bad number '" + std::string(text) + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse(text);
  return parse(text.substr(0, slash)) / parse(text.substr(slash + 1));
}

std::vector<std::string> constants_integrity_failures(const Constants& c) {
  std::vector<std::string> bad;
  for (const auto& e : constant_entries()) {
    const double want = parse_fraction(e.fraction);
    const double got = c.*(e.field);
    if (!(std::abs(got - want) <= 1e-15 * std::abs(want))) bad.emplace_back(e.name);
  }
  return bad;
}

nlohmann::json constants_to_json(const Constants& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : constant_entries()) j[std::string(e.name)] = c.*(e.field);
  return j;
}

Constants constants_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "constants must be a JSON object");
  Constants c = default_constants();
  for (const auto& [key, value] : j.items()) {
    const ConstantEntry* hit = nullptr;
    for (const auto& e : constant_entries()) {
      if (e.name == key) hit = &e;
    }
    if (hit == nullptr) throw Error(ErrorCode::kInvalidConfig, "unknown constant '" + key + "'");
    if (!value.is_number()) throw Error(ErrorCode::kInvalidConfig, "constant '" + key + "' must be a number");
    c.*(hit->field) = value.get<double>();
  }
  return c;
}

Constants load_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return constants_from_json(j);
}

}  // namespace perturbex
