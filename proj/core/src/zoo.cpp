#include "perturbex/zoo.hpp"

#include <cmath>
#include <set>

namespace perturbex {

Vector random_gaussian(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

Vector random_unit(Eigen::Index dim, Rng& rng) {
  Vector v = random_gaussian(dim, rng);
  while (v.norm() == 0.0) v = random_gaussian(dim, rng);
  return v / v.norm();
}

Matrix random_spd(Eigen::Index dim, double cond, Rng& rng) {
  if (!(cond >= 1.0)) throw Error(ErrorCode::kInvalidConfig, "cond must be >= 1");
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) g.col(j) = random_gaussian(dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector values(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    // Pin the extremes so the realized condition number equals cond.
    double t = unit(rng);
    if (i == 0) t = 0.0;
    if (i == 1) t = 1.0;
    values(i) = std::exp(t * std::log(cond));
  }
  Matrix m = q * values.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

namespace {

Problem with_higher(Problem p) {
  switch (p.descriptor.higher) {
    case HigherDerivatives::kAnalytic: break;
    case HigherDerivatives::kFiniteDifference: p.oracle = with_fd_higher_derivatives(p.oracle); break;
    case HigherDerivatives::kNone: p.oracle = without_higher_derivatives(p.oracle); break;
  }
  return p;
}

std::string_view to_string(HigherDerivatives h) {
  switch (h) {
    case HigherDerivatives::kAnalytic: return "analytic";
    case HigherDerivatives::kFiniteDifference: return "fd";
    case HigherDerivatives::kNone: return "none";
  }
  return "analytic";
}

}  // namespace

Problem make_problem(const ProblemDescriptor& d) {
  if (d.dim < 1) throw Error(ErrorCode::kInvalidConfig, "dim must be >= 1");
  Rng rng(d.seed);
  Problem p;
  p.descriptor = d;
  if (d.kind == "quadratic") {
    SpdOperator f = SpdOperator::from_dense(random_spd(d.dim, d.cond, rng));
    Vector c = random_gaussian(d.dim, rng);
    p.oracle = make_quadratic(f, c);
    p.minimizer = c;
    p.hessian = f;
  } else if (d.kind == "logistic") {
    if (d.n < 1) throw Error(ErrorCode::kInvalidConfig, "n must be >= 1");
    Matrix x(d.n, d.dim);
    for (Eigen::Index i = 0; i < d.n; ++i) x.row(i) = random_gaussian(d.dim, rng).transpose();
    const Vector theta = d.signal * random_unit(d.dim, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector y(d.n);
    for (Eigen::Index i = 0; i < d.n; ++i) {
      const double prob = 1.0 / (1.0 + std::exp(-x.row(i).dot(theta)));
      y(i) = unit(rng) < prob ? 1.0 : -1.0;
    }
    p.oracle = make_logistic(x, y, d.reg);
  } else if (d.kind == "logsumexp") {
    if (d.n < 1) throw Error(ErrorCode::kInvalidConfig, "n must be >= 1");
    Matrix x(d.n, d.dim);
    for (Eigen::Index i = 0; i < d.n; ++i) x.row(i) = random_gaussian(d.dim, rng).transpose();
    p.oracle = make_logsumexp(x, d.temp, d.reg);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown problem kind '" + d.kind + "'");
  }
  return with_higher(std::move(p));
}

ProblemDescriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "problem descriptor must be an object");
  static const std::set<std::string> kKeys{"kind", "dim", "n", "reg", "seed", "temp", "cond", "signal", "higher"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kInvalidConfig, "problem: unknown key '" + key + "'");
  }
  ProblemDescriptor d;
  try {
    d.kind = j.at("kind").get<std::string>();
    d.dim = j.at("dim").get<Eigen::Index>();
    d.n = j.value("n", d.n);
    d.reg = j.value("reg", d.reg);
    d.seed = j.value("seed", d.seed);
    d.temp = j.value("temp", d.temp);
    d.cond = j.value("cond", d.cond);
    d.signal = j.value("signal", d.signal);
    const std::string higher = j.value("higher", std::string("analytic"));
    if (higher == "analytic") {
      d.higher = HigherDerivatives::kAnalytic;
    } else if (higher == "fd") {
      d.higher = HigherDerivatives::kFiniteDifference;
    } else if (higher == "none") {
      d.higher = HigherDerivatives::kNone;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "higher must be analytic|fd|none");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("problem descriptor: ") + e.what());
  }
  if (d.kind != "quadratic" && d.kind != "logistic" && d.kind != "logsumexp") {
    throw Error(ErrorCode::kInvalidConfig, "unknown problem kind '" + d.kind + "'");
  }
  if (d.dim < 1 || d.n < 1) throw Error(ErrorCode::kInvalidConfig, "dim and n must be >= 1");
  if (d.reg < 0.0) throw Error(ErrorCode::kInvalidConfig, "reg must be nonnegative");
  return d;
}

nlohmann::json to_json(const ProblemDescriptor& d) {
  nlohmann::json j;
  j["kind"] = d.kind;
  j["dim"] = d.dim;
  j["n"] = d.n;
  j["reg"] = d.reg;
  j["seed"] = d.seed;
  j["temp"] = d.temp;
  j["cond"] = d.cond;
  j["signal"] = d.signal;
  j["higher"] = std::string(to_string(d.higher));
  return j;
}

}  // namespace perturbex
