#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace perturbex {

enum class NormTag { kEuclid, kD, kFHalf, kDinvF };

/// Vector whose norm a shift bound controls. Δ = ῠ - υ* is the actual shift,
/// A the perturbation (M for penalties), ā the order-4 prediction.
enum class ShiftTarget {
  kShift,               // Δ
  kFirstOrderResidual,  // Δ + F⁻¹A
  kSkewResidual,        // Δ - ā
  kSkewTerm,            // ā + F⁻¹A (prediction only)
  kMuProximity,         // D(μ_G + F_G⁻¹M) (prediction only)
  kMuProximityLiteral,  // D(μ_G - F_G⁻¹M), printed sign (advisory)
};

enum class ValueTarget {
  kQuadraticGap,    // 2δ + ‖F^{-1/2}A‖²
  kFourthOrderGap,  // δ + ‖F^{-1/2}A‖²/2 + 𝒯(F⁻¹A)
  kSkewTensor,      // 𝒯(F⁻¹A) (prediction only)
};

std::string_view to_string(NormTag t);
std::string_view to_string(ShiftTarget t);
std::string_view to_string(ValueTarget t);
NormTag norm_tag_from_string(std::string_view s);
ShiftTarget shift_target_from_string(std::string_view s);
ValueTarget value_target_from_string(std::string_view s);

/// True when the target is a function of the prediction alone.
bool is_static(ShiftTarget t);
bool is_static(ValueTarget t);

/// One precondition: lhs < rhs (strict) or lhs ≤ rhs.
struct Gate {
  std::string name;
  std::string group;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;
  bool satisfied = false;
};

struct ShiftBound {
  std::string group;
  NormTag norm = NormTag::kD;
  ShiftTarget target = ShiftTarget::kShift;
  double radius = 0.0;
  /// Gate groups that must all pass for the radius to be certified.
  std::vector<std::string> requires_groups;
  bool advisory = false;
  bool certified = false;
  std::string key() const;
};

struct ValueBound {
  std::string group;
  ValueTarget target = ValueTarget::kQuadraticGap;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::string> requires_groups;
  bool certified = false;
  std::string key() const;
};

struct BoundSet {
  std::vector<Gate> gates;
  std::vector<ShiftBound> shifts;
  std::vector<ValueBound> values;

  Gate& add_gate(std::string name, std::string group, double lhs, double rhs, bool strict);
  ShiftBound& add_shift(std::string group, NormTag norm, ShiftTarget target, double radius,
                        std::vector<std::string> requires_groups);
  ValueBound& add_value(std::string group, ValueTarget target, double lower, double upper,
                        std::vector<std::string> requires_groups);

  /// Every gate in every listed group holds. A group with no gates passes.
  bool groups_pass(const std::vector<std::string>& groups) const;
  /// All gates hold.
  bool certifying() const;
  /// Sets the certified flag of each bound from its gate groups.
  void finalize();
  void append(const BoundSet& other);
};

/// Gate evaluation with a NaN-safe comparison (NaN never satisfies).
bool gate_holds(double lhs, double rhs, bool strict);

}  // namespace perturbex
