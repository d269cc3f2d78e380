#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "perturbex/oracle.hpp"

namespace perturbex {

/// Worst observed ratio for one checked inequality or mismatch.
struct DiagnosticEntry {
  std::string name;
  double worst_ratio = 0.0;
  /// Pass threshold for worst_ratio; entries flagged advisory never fail.
  double threshold = 1.0;
  bool advisory = false;
  std::size_t evaluations = 0;
  /// Argmax witnesses (empty when nothing was evaluated).
  Vector witness_point;
  Vector witness_direction;
  Vector witness_direction2;
  /// Finite-difference step, when relevant.
  double step = std::numeric_limits<double>::quiet_NaN();

  static DiagnosticEntry named(std::string name, double threshold = 1.0, bool advisory = false) {
    DiagnosticEntry e;
    e.name = std::move(name);
    e.threshold = threshold;
    e.advisory = advisory;
    return e;
  }

  bool passed() const { return advisory || worst_ratio <= threshold; }
  void offer(double ratio, const Vector& point, const Vector& dir, const Vector& dir2 = Vector());
};

struct DiagnosticsRecord {
  std::string kind;
  std::vector<DiagnosticEntry> entries;

  bool all_passed() const;
  const DiagnosticEntry* find(const std::string& name) const;
};

/// Mixed relative mismatch ‖a - b‖ / max(‖a‖, ‖b‖, floor).
double relative_mismatch(const Vector& a, const Vector& b, double floor = 1e-6);

inline constexpr double kFdGradientTol = 1e-6;
inline constexpr double kFdHessianTol = 1e-5;
inline constexpr double kFdThirdTol = 1e-3;
inline constexpr double kFdFourthTol = 1e-3;

/// Compares each derivative order of f at x against central differences of
/// the order below, over `directions` seeded random unit directions.
/// Entries: gradient, hessian, third_dir, fourth_dir (the last two only when
/// the oracle provides them), plus third_dir_even / fourth_dir_odd parity.
DiagnosticsRecord fd_probe(const Oracle& f, const Vector& x, std::size_t directions,
                           std::uint64_t seed);

}  // namespace perturbex
