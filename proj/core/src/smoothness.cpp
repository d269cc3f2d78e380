#include "perturbex/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perturbex/errors.hpp"

namespace perturbex {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();

// max(lhs - floor, 0) / rhs with 0/0 read as 0 and x/0 as +inf.
double guarded_ratio(double lhs, double rhs, double floor) {
  const double excess = std::max(lhs - floor, 0.0);
  if (excess == 0.0) return 0.0;
  if (rhs <= 0.0) return std::numeric_limits<double>::infinity();
  return excess / rhs;
}

template <class Contract>
double estimate_tau(const Oracle& f, const Vector& x, const SpdOperator& d, double r, std::size_t samples,
                    std::uint64_t seed, std::size_t ascent_steps, int degree, Contract contract) {
  require_same_dim(f.dim(), x.size(), "estimate_tau");
  require_same_dim(d.dim(), x.size(), "estimate_tau metric");
  if (!(r >= 0.0)) throw Error(ErrorCode::kPreconditionViolated, "radius must be nonnegative");
  const Eigen::Index p = x.size();
  Rng rng(seed);
  double best = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector u = k == 0 ? Vector(Vector::Zero(p)) : sample_ball(d, r, rng);
    Vector vt = random_unit(p, rng);  // ṽ = Dv, unit
    for (std::size_t step = 0; step <= ascent_steps; ++step) {
      const Vector v = d.apply(Power::kInverse, vt);
      const Vector t = d.apply(Power::kInverse, contract(x + u, v));
      const double ratio = t.norm() / std::pow(d.apply(Power::kOne, v).norm(), degree);
      if (std::isfinite(ratio)) best = std::max(best, ratio);
      const double tn = t.norm();
      if (tn == 0.0 || !std::isfinite(tn)) break;
      vt = t / tn;
    }
  }
  return best;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return splitmix64(seed ^ h);
}

Vector sample_ball(const SpdOperator& d, double r, Rng& rng, bool on_sphere) {
  const Eigen::Index p = d.dim();
  const Vector z = random_unit(p, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rho = on_sphere ? 1.0 : std::pow(unit(rng), 1.0 / static_cast<double>(p));
  return d.apply(Power::kInverse, (r * rho) * z);
}

double estimate_omega(const Oracle& f, const Vector& xstar, const SpdOperator& d, const SpdOperator& fh,
                      double r, std::size_t samples, std::uint64_t seed) {
  require_same_dim(f.dim(), xstar.size(), "estimate_omega");
  require_same_dim(d.dim(), xstar.size(), "estimate_omega metric");
  require_same_dim(fh.dim(), xstar.size(), "estimate_omega hessian");
  if (!(r > 0.0)) throw Error(ErrorCode::kPreconditionViolated, "estimate_omega needs r > 0");
  const double f0 = f.value(xstar);
  const double gnorm = dual_norm(d, f.gradient(xstar));
  if (gnorm > 1e-8 * (1.0 + std::abs(f0))) {
    throw Error(ErrorCode::kNotAtMinimum, "‖D⁻¹∇f‖ = " + std::to_string(gnorm) + " at the anchor point");
  }
  const SpdOperator fhalf = fh.power(Power::kSqrt);
  Rng rng(seed);
  double best = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector u = sample_ball(fhalf, r, rng, k % 2 == 1);
    const double du = weighted_norm(d, u);
    if (du <= 1e-4 * r) continue;
    const double q = 0.5 * u.dot(fh.matrix() * u);
    const double fu = f.value(xstar + u);
    const double rem = std::abs(fu - f0 - q) - kRoundoff * (std::abs(fu) + std::abs(f0) + q);
    best = std::max(best, 2.0 * std::max(rem, 0.0) / (du * du));
  }
  return best;
}

double estimate_tau3(const Oracle& f, const Vector& x, const SpdOperator& d, double r, std::size_t samples,
                     std::uint64_t seed, std::size_t ascent_steps) {
  if (!f.has_third()) throw Error(ErrorCode::kMissingThirdDerivative, f.name());
  return estimate_tau(f, x, d, r, samples, seed, ascent_steps, 2,
                      [&f](const Vector& at, const Vector& v) { return f.third_dir(at, v); });
}

double estimate_tau4(const Oracle& f, const Vector& x, const SpdOperator& d, double r, std::size_t samples,
                     std::uint64_t seed, std::size_t ascent_steps) {
  if (!f.has_fourth()) throw Error(ErrorCode::kMissingFourthDerivative, f.name());
  return estimate_tau(f, x, d, r, samples, seed, ascent_steps, 3,
                      [&f](const Vector& at, const Vector& v) { return f.fourth_dir(at, v); });
}

SmoothnessCertificate estimate_certificate(const Oracle& f, const Vector& x, const SpdOperator& fh,
                                           const SpdOperator& d, double r, const EstimatorSettings& s,
                                           std::string anchor) {
  if (!(s.inflation >= 1.0)) throw Error(ErrorCode::kInvalidConfig, "inflation must be >= 1");
  SmoothnessCertificate c;
  c.D = d;
  c.r = r;
  c.kappa = kappa_between(d, fh);
  c.anchor = std::move(anchor);
  c.provenance.kind = Provenance::Kind::kEstimated;
  c.provenance.samples = s.samples;
  c.provenance.seed = s.seed;
  c.provenance.inflation = s.inflation;
  if (s.with_omega) {
    c.provenance.omega_raw = estimate_omega(f, x, d, fh, r, s.samples, derive_seed(s.seed, "omega"));
    c.omega = s.inflation * c.provenance.omega_raw;
  } else {
    c.provenance.omega_raw = std::numeric_limits<double>::quiet_NaN();
    c.omega = std::numeric_limits<double>::quiet_NaN();
  }
  if (f.has_third()) {
    c.provenance.tau3_raw = estimate_tau3(f, x, d, r, s.samples, derive_seed(s.seed, "tau3"), s.ascent_steps);
    c.tau3 = s.inflation * c.provenance.tau3_raw;
    if (f.has_fourth()) {
      c.provenance.tau4_raw = estimate_tau4(f, x, d, r, s.samples, derive_seed(s.seed, "tau4"), s.ascent_steps);
      c.tau4 = s.inflation * *c.provenance.tau4_raw;
    }
  }
  return c;
}

SmoothnessCertificate declared_certificate(const SpdOperator& d, double r, double kappa, double omega,
                                           std::optional<double> tau3, std::optional<double> tau4,
                                           std::string anchor) {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must be finite and nonnegative");
    }
  };
  nonneg(r, "r");
  nonneg(kappa, "kappa");
  nonneg(omega, "omega");
  if (tau3) nonneg(*tau3, "tau3");
  if (tau4) nonneg(*tau4, "tau4");
  SmoothnessCertificate c;
  c.D = d;
  c.r = r;
  c.kappa = kappa;
  c.omega = omega;
  c.tau3 = tau3;
  c.tau4 = tau4;
  c.anchor = std::move(anchor);
  return c;
}

DiagnosticsRecord taylor_diagnostics(const Oracle& f, const Vector& x, const SmoothnessCertificate& cert,
                                     std::size_t samples, std::uint64_t seed) {
  require_same_dim(f.dim(), x.size(), "taylor_diagnostics");
  const SpdOperator& d = cert.D;
  require_same_dim(d.dim(), x.size(), "taylor_diagnostics metric");
  const double r = cert.r;
  const Matrix dinv = d.power_matrix(Power::kInverse);
  auto dn = [&](const Vector& v) { return weighted_norm(d, v); };
  auto dual = [&](const Vector& v) { return (dinv * v).norm(); };

  DiagnosticsRecord rec;
  rec.kind = "taylor_diagnostics";
  DiagnosticEntry grad = DiagnosticEntry::named("gradient_remainder", kTaylorTolerance);
  DiagnosticEntry lip = DiagnosticEntry::named("hessian_lipschitz", kTaylorTolerance);
  DiagnosticEntry two = DiagnosticEntry::named("two_point_gradient", kTaylorTolerance);
  DiagnosticEntry literal = DiagnosticEntry::named("two_point_gradient_literal", kTaylorTolerance, true);
  DiagnosticEntry fourth = DiagnosticEntry::named("fourth_order_gradient_remainder", kTaylorTolerance);

  const double tau3 = cert.tau3.value_or(std::numeric_limits<double>::quiet_NaN());
  const bool with3 = cert.tau3.has_value();
  const bool with4 = cert.tau4.has_value() && f.has_third();
  const double tau4 = cert.tau4.value_or(0.0);

  const Vector g0 = f.gradient(x);
  const Matrix h0 = f.hessian(x);
  Rng rng(seed);
  std::uniform_int_distribution<int> decade(1, 8);
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector u = sample_ball(d, r, rng, k % 4 == 0);
    const double du = dn(u);
    const Vector gu = f.gradient(x + u);
    const Vector rem = gu - g0 - h0 * u;
    const double scale = dual(gu) + dual(g0) + dual(h0 * u);
    if (with3) grad.offer(guarded_ratio(dual(rem), 0.5 * tau3 * du * du, kRoundoff * scale), x, u);

    if (with4) {
      const Vector rem4 = rem - 0.5 * f.third_dir(x, u);
      fourth.offer(guarded_ratio(dual(rem4), tau4 / 6.0 * du * du * du, kRoundoff * scale), x, u);
    }

    // Second point: either independent in the ball or a small displacement of u.
    Vector u1;
    if (k % 2 == 0) {
      u1 = sample_ball(d, r, rng);
    } else {
      const double step = std::pow(10.0, -decade(rng)) * r;
      u1 = u + sample_ball(d, step, rng, true);
      const double n1 = dn(u1);
      if (n1 > r) u1 *= r / n1;
    }
    const Vector delta = u1 - u;
    const double dd = dn(delta);
    if (with3) {
      const Matrix hu = f.hessian(x + u);
      const Matrix hu1 = f.hessian(x + u1);
      const double hscale = symmetric_operator_norm(dinv * hu * dinv) + symmetric_operator_norm(dinv * hu1 * dinv);
      lip.offer(guarded_ratio(symmetric_operator_norm(dinv * (hu1 - hu) * dinv), tau3 * dd, kRoundoff * hscale), x, u,
                u1);
      const Vector gu1 = f.gradient(x + u1);
      const Vector lhs = gu1 - gu - h0 * delta;
      const double tscale = dual(gu1) + dual(gu) + dual(h0 * delta);
      two.offer(guarded_ratio(dual(lhs), tau3 * (0.5 * dd * dd + du * dd), kRoundoff * tscale), x, u, u1);
      literal.offer(guarded_ratio(dual(lhs), 1.5 * tau3 * dd * dd, kRoundoff * tscale), x, u, u1);
    }
  }
  if (with3) {
    rec.entries.push_back(std::move(grad));
    rec.entries.push_back(std::move(lip));
    rec.entries.push_back(std::move(two));
    rec.entries.push_back(std::move(literal));
  }
  if (with4) rec.entries.push_back(std::move(fourth));
  return rec;
}

}  // namespace perturbex
