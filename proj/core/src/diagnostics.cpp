#include "perturbex/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "perturbex/zoo.hpp"

namespace perturbex {

void DiagnosticEntry::offer(double ratio, const Vector& point, const Vector& dir, const Vector& dir2) {
  ++evaluations;
  if (evaluations == 1 || ratio > worst_ratio || std::isnan(ratio)) {
    worst_ratio = ratio;
    witness_point = point;
    witness_direction = dir;
    witness_direction2 = dir2;
  }
}

bool DiagnosticsRecord::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const DiagnosticEntry& e) { return e.passed(); });
}

const DiagnosticEntry* DiagnosticsRecord::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

double relative_mismatch(const Vector& a, const Vector& b, double floor) {
  const double denom = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / denom;
}

namespace {

constexpr double kGradStep = 1e-5;
constexpr double kHessStep = 1e-5;

double step_for(const Vector& u) { return kFdHigherStep / (1.0 + u.norm()); }

}  // namespace

DiagnosticsRecord fd_probe(const Oracle& f, const Vector& x, std::size_t directions, std::uint64_t seed) {
  require_same_dim(f.dim(), x.size(), "fd_probe");
  require_finite(x, "probe point");
  Rng rng(seed);
  const Eigen::Index p = f.dim();

  DiagnosticsRecord rec;
  rec.kind = "fd_probe";

  DiagnosticEntry grad = DiagnosticEntry::named("gradient", kFdGradientTol);
  grad.step = kGradStep;
  {
    Vector fd(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double h = kGradStep * std::max(1.0, std::abs(x(i)));
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (f.value(xp) - f.value(xm)) / (2.0 * h);
    }
    grad.offer(relative_mismatch(f.gradient(x), fd), x, Vector());
  }

  DiagnosticEntry hess = DiagnosticEntry::named("hessian", kFdHessianTol);
  hess.step = kHessStep;
  DiagnosticEntry third = DiagnosticEntry::named("third_dir", kFdThirdTol);
  DiagnosticEntry fourth = DiagnosticEntry::named("fourth_dir", kFdFourthTol);
  DiagnosticEntry even = DiagnosticEntry::named("third_dir_even", 1e-12);
  DiagnosticEntry odd = DiagnosticEntry::named("fourth_dir_odd", 1e-12);

  const Matrix h0 = f.hessian(x);
  for (std::size_t k = 0; k < directions; ++k) {
    const Vector u = random_unit(p, rng);
    const Vector hd = (f.gradient(x + kHessStep * u) - f.gradient(x - kHessStep * u)) / (2.0 * kHessStep);
    hess.offer(relative_mismatch(h0 * u, hd), x, u);

    if (f.has_third()) {
      const double h = step_for(u);
      third.step = h;
      const Vector fd3 = (f.hessian(x + h * u) - f.hessian(x - h * u)) * u / (2.0 * h);
      const Vector t = f.third_dir(x, u);
      third.offer(relative_mismatch(t, fd3), x, u);
      even.offer(relative_mismatch(t, f.third_dir(x, -u), 1e-300), x, u);
      if (f.has_fourth()) {
        fourth.step = h;
        const Vector fd4 = (f.third_dir(x + h * u, u) - f.third_dir(x - h * u, u)) / (2.0 * h);
        const Vector q = f.fourth_dir(x, u);
        fourth.offer(relative_mismatch(q, fd4), x, u);
        odd.offer(relative_mismatch(q, -f.fourth_dir(x, -u), 1e-300), x, u);
      }
    }
  }

  rec.entries.push_back(std::move(grad));
  rec.entries.push_back(std::move(hess));
  if (f.has_third()) {
    rec.entries.push_back(std::move(third));
    rec.entries.push_back(std::move(even));
  }
  if (f.has_fourth() && f.has_third()) {
    rec.entries.push_back(std::move(fourth));
    rec.entries.push_back(std::move(odd));
  }
  return rec;
}

}  // namespace perturbex
