#pragma once

#include <string>

#include <perturbex/json.hpp>

#include "perturbex/diagnostics.hpp"
#include "perturbex/expand.hpp"
#include "perturbex/penalty.hpp"
#include "perturbex/smoothness.hpp"
#include "perturbex/solver.hpp"

namespace perturbex {

inline constexpr const char* kReportSchema = "perturbex.report.v1";

/// Non-finite numbers map to null so that infinite advisory radii survive
/// a round trip through strict JSON readers.
nlohmann::json number_to_json(double v);
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
Vector vector_from_json(const nlohmann::json& j);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SmoothnessCertificate& c);
nlohmann::json to_json(const BoundSet& b);
nlohmann::json to_json(const ExpansionReport& r);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const PenaltyBiasReport& r);
nlohmann::json to_json(const DiagnosticsRecord& r);
nlohmann::json to_json(const SolveResult& r);

/// Two-space indented dump with a trailing newline; key order is sorted, so
/// equal documents produce equal bytes.
std::string dump_report(const nlohmann::json& j);

}  // namespace perturbex
