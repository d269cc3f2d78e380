#include "perturbex/bounds.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

constexpr std::array<std::pair<NormTag, std::string_view>, 4> kNorms{{
    {NormTag::kEuclid, "euclid"},
    {NormTag::kD, "D"},
    {NormTag::kFHalf, "F^1/2"},
    {NormTag::kDinvF, "D^-1F"},
}};

constexpr std::array<std::pair<ShiftTarget, std::string_view>, 6> kShiftTargets{{
    {ShiftTarget::kShift, "shift"},
    {ShiftTarget::kFirstOrderResidual, "first_order_residual"},
    {ShiftTarget::kSkewResidual, "skew_residual"},
    {ShiftTarget::kSkewTerm, "skew_term"},
    {ShiftTarget::kMuProximity, "mu_proximity"},
    {ShiftTarget::kMuProximityLiteral, "mu_proximity_literal"},
}};

constexpr std::array<std::pair<ValueTarget, std::string_view>, 3> kValueTargets{{
    {ValueTarget::kQuadraticGap, "quadratic_gap"},
    {ValueTarget::kFourthOrderGap, "fourth_order_gap"},
    {ValueTarget::kSkewTensor, "skew_tensor"},
}};

template <class Table, class E>
std::string_view lookup(const Table& table, E e) {
  for (const auto& [k, v] : table) {
    if (k == e) return v;
  }
  return "?";
}

template <class Table>
auto reverse_lookup(const Table& table, std::string_view s, const char* what) {
  for (const auto& [k, v] : table) {
    if (v == s) return k;
  }
  throw Error(ErrorCode::kInvalidConfig, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(NormTag t) { return lookup(kNorms, t); }
std::string_view to_string(ShiftTarget t) { return lookup(kShiftTargets, t); }
std::string_view to_string(ValueTarget t) { return lookup(kValueTargets, t); }
NormTag norm_tag_from_string(std::string_view s) { return reverse_lookup(kNorms, s, "norm"); }
ShiftTarget shift_target_from_string(std::string_view s) { return reverse_lookup(kShiftTargets, s, "shift target"); }
ValueTarget value_target_from_string(std::string_view s) { return reverse_lookup(kValueTargets, s, "value target"); }

bool is_static(ShiftTarget t) {
  return t == ShiftTarget::kSkewTerm || t == ShiftTarget::kMuProximity || t == ShiftTarget::kMuProximityLiteral;
}
bool is_static(ValueTarget t) { return t == ValueTarget::kSkewTensor; }

std::string ShiftBound::key() const {
  return group + "/" + std::string(to_string(norm)) + ":" + std::string(to_string(target));
}

std::string ValueBound::key() const { return group + "/value:" + std::string(to_string(target)); }

bool gate_holds(double lhs, double rhs, bool strict) { return strict ? lhs < rhs : lhs <= rhs; }

Gate& BoundSet::add_gate(std::string name, std::string group, double lhs, double rhs, bool strict) {
  gates.push_back(Gate{std::move(name), std::move(group), lhs, rhs, strict, gate_holds(lhs, rhs, strict)});
  return gates.back();
}

ShiftBound& BoundSet::add_shift(std::string group, NormTag norm, ShiftTarget target, double radius,
                                std::vector<std::string> requires_groups) {
  ShiftBound b;
  b.group = std::move(group);
  b.norm = norm;
  b.target = target;
  b.radius = radius;
  b.requires_groups = std::move(requires_groups);
  shifts.push_back(std::move(b));
  return shifts.back();
}

ValueBound& BoundSet::add_value(std::string group, ValueTarget target, double lower, double upper,
                                std::vector<std::string> requires_groups) {
  ValueBound b;
  b.group = std::move(group);
  b.target = target;
  b.lower = lower;
  b.upper = upper;
  b.requires_groups = std::move(requires_groups);
  values.push_back(std::move(b));
  return values.back();
}

bool BoundSet::groups_pass(const std::vector<std::string>& groups) const {
  return std::all_of(gates.begin(), gates.end(), [&](const Gate& g) {
    return g.satisfied || std::find(groups.begin(), groups.end(), g.group) == groups.end();
  });
}

bool BoundSet::certifying() const {
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.satisfied; });
}

void BoundSet::finalize() {
  for (auto& b : shifts) b.certified = !b.advisory && groups_pass(b.requires_groups);
  for (auto& b : values) b.certified = groups_pass(b.requires_groups);
}

void BoundSet::append(const BoundSet& other) {
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  shifts.insert(shifts.end(), other.shifts.begin(), other.shifts.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
}

}  // namespace perturbex
