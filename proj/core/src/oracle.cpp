#include "perturbex/oracle.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace perturbex {

Vector Oracle::third_dir(const Vector&, const Vector&) const {
  throw Error(ErrorCode::kMissingThirdDerivative, name() + " has no third derivative");
}

Vector Oracle::fourth_dir(const Vector&, const Vector&) const {
  throw Error(ErrorCode::kMissingFourthDerivative, name() + " has no fourth derivative");
}

namespace {

class LinearPerturbation final : public Oracle {
 public:
  LinearPerturbation(OraclePtr f, Vector a) : f_(std::move(f)), a_(std::move(a)) {}

  Eigen::Index dim() const override { return f_->dim(); }
  std::string name() const override { return f_->name() + "+linear"; }
  bool has_third() const override { return f_->has_third(); }
  bool has_fourth() const override { return f_->has_fourth(); }

  double value(const Vector& x) const override { return f_->value(x) + x.dot(a_); }
  Vector gradient(const Vector& x) const override { return f_->gradient(x) + a_; }
  Matrix hessian(const Vector& x) const override { return f_->hessian(x); }
  Vector third_dir(const Vector& x, const Vector& u) const override { return f_->third_dir(x, u); }
  Vector fourth_dir(const Vector& x, const Vector& u) const override { return f_->fourth_dir(x, u); }

 private:
  OraclePtr f_;
  Vector a_;
};

class QuadraticForm final : public Oracle {
 public:
  explicit QuadraticForm(Matrix m) : m_(std::move(m)) {}

  Eigen::Index dim() const override { return m_.rows(); }
  std::string name() const override { return "quadratic_form"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& x) const override { return 0.5 * x.dot(m_ * x); }
  Vector gradient(const Vector& x) const override { return m_ * x; }
  Matrix hessian(const Vector&) const override { return m_; }
  Vector third_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }
  Vector fourth_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }

 private:
  Matrix m_;
};

class Sum final : public Oracle {
 public:
  Sum(OraclePtr f, OraclePtr g) : f_(std::move(f)), g_(std::move(g)) {}

  Eigen::Index dim() const override { return f_->dim(); }
  std::string name() const override { return f_->name() + "+" + g_->name(); }
  bool has_third() const override { return f_->has_third() && g_->has_third(); }
  bool has_fourth() const override { return f_->has_fourth() && g_->has_fourth(); }

  double value(const Vector& x) const override { return f_->value(x) + g_->value(x); }
  Vector gradient(const Vector& x) const override { return f_->gradient(x) + g_->gradient(x); }
  Matrix hessian(const Vector& x) const override { return f_->hessian(x) + g_->hessian(x); }
  Vector third_dir(const Vector& x, const Vector& u) const override {
    if (!has_third()) return Oracle::third_dir(x, u);
    return f_->third_dir(x, u) + g_->third_dir(x, u);
  }
  Vector fourth_dir(const Vector& x, const Vector& u) const override {
    if (!has_fourth()) return Oracle::fourth_dir(x, u);
    return f_->fourth_dir(x, u) + g_->fourth_dir(x, u);
  }

 private:
  OraclePtr f_;
  OraclePtr g_;
};

class Scaled final : public Oracle {
 public:
  Scaled(OraclePtr f, double w) : f_(std::move(f)), w_(w) {}

  Eigen::Index dim() const override { return f_->dim(); }
  std::string name() const override { return std::to_string(w_) + "*" + f_->name(); }
  bool has_third() const override { return f_->has_third(); }
  bool has_fourth() const override { return f_->has_fourth(); }

  double value(const Vector& x) const override { return w_ * f_->value(x); }
  Vector gradient(const Vector& x) const override { return w_ * f_->gradient(x); }
  Matrix hessian(const Vector& x) const override { return w_ * f_->hessian(x); }
  Vector third_dir(const Vector& x, const Vector& u) const override { return w_ * f_->third_dir(x, u); }
  Vector fourth_dir(const Vector& x, const Vector& u) const override { return w_ * f_->fourth_dir(x, u); }

 private:
  OraclePtr f_;
  double w_;
};

class Quadratic final : public Oracle {
 public:
  Quadratic(SpdOperator f, Vector c) : f_(std::move(f)), c_(std::move(c)) {}

  Eigen::Index dim() const override { return f_.dim(); }
  std::string name() const override { return "quadratic"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& x) const override {
    const Vector d = x - c_;
    return 0.5 * d.dot(f_.matrix() * d);
  }
  Vector gradient(const Vector& x) const override { return f_.matrix() * (x - c_); }
  Matrix hessian(const Vector&) const override { return f_.matrix(); }
  Vector third_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }
  Vector fourth_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }

 private:
  SpdOperator f_;
  Vector c_;
};

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

class Logistic final : public Oracle {
 public:
  Logistic(Matrix x, Vector y, double reg) : x_(std::move(x)), y_(std::move(y)), reg_(reg) {}

  Eigen::Index dim() const override { return x_.cols(); }
  std::string name() const override { return "logistic"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& v) const override {
    const Vector m = margins(v);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) s += softplus_neg(m(i));
    return s / n() + 0.5 * reg_ * v.squaredNorm();
  }

  Vector gradient(const Vector& v) const override {
    const Vector m = margins(v);
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) w(i) = -sigmoid(-m(i)) * y_(i);
    return x_.transpose() * w / n() + reg_ * v;
  }

  Matrix hessian(const Vector& v) const override {
    const Vector m = margins(v);
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double s = sigmoid(m(i));
      w(i) = s * (1.0 - s);
    }
    Matrix h = x_.transpose() * w.asDiagonal() * x_ / n();
    h = 0.5 * (h + h.transpose()).eval();
    h.diagonal().array() += reg_;
    return h;
  }

  Vector third_dir(const Vector& v, const Vector& u) const override {
    const Vector m = margins(v);
    const Vector xu = x_ * u;
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double s = sigmoid(m(i));
      w(i) = s * (1.0 - s) * (1.0 - 2.0 * s) * y_(i) * xu(i) * xu(i);
    }
    return x_.transpose() * w / n();
  }

  Vector fourth_dir(const Vector& v, const Vector& u) const override {
    const Vector m = margins(v);
    const Vector xu = x_ * u;
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double s = sigmoid(m(i));
      w(i) = s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s) * xu(i) * xu(i) * xu(i);
    }
    return x_.transpose() * w / n();
  }

 private:
  double n() const { return static_cast<double>(x_.rows()); }
  Vector margins(const Vector& v) const { return y_.cwiseProduct(x_ * v); }

  Matrix x_;
  Vector y_;
  double reg_;
};

class LogSumExp final : public Oracle {
 public:
  LogSumExp(Matrix x, double temp, double reg) : x_(std::move(x)), temp_(temp), reg_(reg) {}

  Eigen::Index dim() const override { return x_.cols(); }
  std::string name() const override { return "logsumexp"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& v) const override {
    const Vector z = x_ * v / temp_;
    const double zmax = z.maxCoeff();
    const double s = (z.array() - zmax).exp().sum();
    return temp_ * (zmax + std::log(s)) + 0.5 * reg_ * v.squaredNorm();
  }

  Vector gradient(const Vector& v) const override { return x_.transpose() * softmax(v) + reg_ * v; }

  Matrix hessian(const Vector& v) const override {
    const Vector p = softmax(v);
    const Vector mean = x_.transpose() * p;
    Matrix h = x_.transpose() * p.asDiagonal() * x_ - mean * mean.transpose();
    h /= temp_;
    h = 0.5 * (h + h.transpose()).eval();
    h.diagonal().array() += reg_;
    return h;
  }

  // Directional derivatives of log Σ exp(z_i) along b are the cumulants of b
  // under the softmax weights; their z-gradients give the contractions below.
  Vector third_dir(const Vector& v, const Vector& u) const override {
    const Vector p = softmax(v);
    const Vector b = x_ * u;
    const double mean = p.dot(b);
    const Vector c = (b.array() - mean).matrix();
    const double var = p.dot(c.cwiseProduct(c));
    const Vector w = p.cwiseProduct((c.array().square() - var).matrix());
    return x_.transpose() * w / (temp_ * temp_);
  }

  Vector fourth_dir(const Vector& v, const Vector& u) const override {
    const Vector p = softmax(v);
    const Vector b = x_ * u;
    const double mean = p.dot(b);
    const Vector c = (b.array() - mean).matrix();
    const Vector c2 = c.cwiseProduct(c);
    const double var = p.dot(c2);
    const double k3 = p.dot(c2.cwiseProduct(c));
    const Vector w =
        p.cwiseProduct((c.array() * c2.array() - k3 - 3.0 * var * c.array()).matrix());
    return x_.transpose() * w / (temp_ * temp_ * temp_);
  }

 private:
  Vector softmax(const Vector& v) const {
    const Vector z = x_ * v / temp_;
    const double zmax = z.maxCoeff();
    Vector e = (z.array() - zmax).exp().matrix();
    return e / e.sum();
  }

  Matrix x_;
  double temp_;
  double reg_;
};

class SeparablePolynomial final : public Oracle {
 public:
  SeparablePolynomial(Eigen::Index dim, std::vector<double> coeffs)
      : dim_(dim), coeffs_(std::move(coeffs)) {}

  Eigen::Index dim() const override { return dim_; }
  std::string name() const override { return "separable_polynomial"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += derivative(x(i), 0);
    return s;
  }
  Vector gradient(const Vector& x) const override { return map(x, 1); }
  Matrix hessian(const Vector& x) const override { return map(x, 2).asDiagonal(); }
  Vector third_dir(const Vector& x, const Vector& u) const override {
    return map(x, 3).cwiseProduct(u.cwiseProduct(u));
  }
  Vector fourth_dir(const Vector& x, const Vector& u) const override {
    return map(x, 4).cwiseProduct(u.cwiseProduct(u).cwiseProduct(u));
  }

 private:
  Vector map(const Vector& x, int order) const {
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = derivative(x(i), order);
    return out;
  }

  // d^order/dt^order Σ_k c_k t^k.
  double derivative(double t, int order) const {
    double s = 0.0;
    for (std::size_t k = static_cast<std::size_t>(order); k < coeffs_.size(); ++k) {
      double falling = 1.0;
      for (int j = 0; j < order; ++j) falling *= static_cast<double>(k) - j;
      s += coeffs_[k] * falling * std::pow(t, static_cast<double>(k) - order);
    }
    return s;
  }

  Eigen::Index dim_;
  std::vector<double> coeffs_;
};

class Constant final : public Oracle {
 public:
  Constant(Eigen::Index dim, double c) : dim_(dim), c_(c) {}

  Eigen::Index dim() const override { return dim_; }
  std::string name() const override { return c_ == 0.0 ? "zero" : "constant"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector&) const override { return c_; }
  Vector gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  Matrix hessian(const Vector& x) const override { return Matrix::Zero(x.size(), x.size()); }
  Vector third_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }
  Vector fourth_dir(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }

 private:
  Eigen::Index dim_;
  double c_;
};

class FdHigher final : public Oracle {
 public:
  explicit FdHigher(OraclePtr f) : f_(std::move(f)) {}

  Eigen::Index dim() const override { return f_->dim(); }
  std::string name() const override { return f_->name() + "[fd]"; }
  bool has_third() const override { return true; }
  bool has_fourth() const override { return true; }

  double value(const Vector& x) const override { return f_->value(x); }
  Vector gradient(const Vector& x) const override { return f_->gradient(x); }
  Matrix hessian(const Vector& x) const override { return f_->hessian(x); }

  Vector third_dir(const Vector& x, const Vector& u) const override {
    const double h = kFdHigherStep / std::max(1.0, u.norm());
    return (f_->hessian(x + h * u) - f_->hessian(x - h * u)) * u / (2.0 * h);
  }

  // Second difference of the Hessian; a nested first difference of third_dir
  // would lose another factor of h to cancellation.
  Vector fourth_dir(const Vector& x, const Vector& u) const override {
    const double h = 10.0 * kFdHigherStep / std::max(1.0, u.norm());
    const Matrix second = f_->hessian(x + h * u) - 2.0 * f_->hessian(x) + f_->hessian(x - h * u);
    return second * u / (h * h);
  }

 private:
  OraclePtr f_;
};

class NoHigher final : public Oracle {
 public:
  explicit NoHigher(OraclePtr f) : f_(std::move(f)) {}

  Eigen::Index dim() const override { return f_->dim(); }
  std::string name() const override { return f_->name() + "[no-higher]"; }

  double value(const Vector& x) const override { return f_->value(x); }
  Vector gradient(const Vector& x) const override { return f_->gradient(x); }
  Matrix hessian(const Vector& x) const override { return f_->hessian(x); }

 private:
  OraclePtr f_;
};

void require_oracle(const OraclePtr& f, const char* what) {
  if (!f) throw Error(ErrorCode::kInvalidConfig, std::string(what) + ": null oracle");
}

}  // namespace

OraclePtr linearly_perturb(OraclePtr f, const Vector& a) {
  require_oracle(f, "linearly_perturb");
  require_same_dim(f->dim(), a.size(), "linearly_perturb");
  require_finite(a, "perturbation vector");
  return std::make_shared<LinearPerturbation>(std::move(f), a);
}

OraclePtr make_quadratic_form(const Matrix& m) {
  require_symmetric_psd(m);
  return std::make_shared<QuadraticForm>(0.5 * (m + m.transpose()));
}

OraclePtr quadratically_penalize(OraclePtr f, const Matrix& g2) {
  require_oracle(f, "quadratically_penalize");
  require_same_dim(f->dim(), g2.rows(), "quadratically_penalize");
  return std::make_shared<Sum>(std::move(f), make_quadratic_form(g2));
}

OraclePtr smoothly_penalize(OraclePtr f, OraclePtr pen) {
  require_oracle(f, "smoothly_penalize");
  require_oracle(pen, "smoothly_penalize");
  require_same_dim(f->dim(), pen->dim(), "smoothly_penalize");
  return std::make_shared<Sum>(std::move(f), std::move(pen));
}

OraclePtr scale_oracle(OraclePtr f, double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kInvalidConfig, "oracle weight must be finite and >= 0");
  return std::make_shared<Scaled>(std::move(f), w);
}

OraclePtr make_quadratic(const SpdOperator& f, const Vector& center) {
  require_same_dim(f.dim(), center.size(), "make_quadratic");
  require_finite(center, "quadratic center");
  return std::make_shared<Quadratic>(f, center);
}

OraclePtr make_logistic(const Matrix& x, const Vector& y, double reg) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorCode::kDimensionMismatch, "empty design");
  require_same_dim(x.rows(), y.size(), "make_logistic labels");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 1.0 && y(i) != -1.0) {
      std::ostringstream os;
      os << "label " << i << " is " << y(i) << ", expected +1 or -1";
      throw Error(ErrorCode::kBadLabels, os.str());
    }
  }
  if (!(reg >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "reg must be nonnegative");
  return std::make_shared<Logistic>(x, y, reg);
}

OraclePtr make_logsumexp(const Matrix& x, double temp, double reg) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorCode::kDimensionMismatch, "empty design");
  if (!(temp > 0.0)) throw Error(ErrorCode::kInvalidConfig, "temp must be positive");
  if (!(reg >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "reg must be nonnegative");
  return std::make_shared<LogSumExp>(x, temp, reg);
}

OraclePtr make_separable_polynomial(Eigen::Index dim, std::vector<double> coeffs) {
  return std::make_shared<SeparablePolynomial>(dim, std::move(coeffs));
}

OraclePtr make_zero(Eigen::Index dim) { return std::make_shared<Constant>(dim, 0.0); }

OraclePtr make_constant(Eigen::Index dim, double c) { return std::make_shared<Constant>(dim, c); }

OraclePtr with_fd_higher_derivatives(OraclePtr f) {
  require_oracle(f, "with_fd_higher_derivatives");
  return std::make_shared<FdHigher>(std::move(f));
}

OraclePtr without_higher_derivatives(OraclePtr f) {
  require_oracle(f, "without_higher_derivatives");
  return std::make_shared<NoHigher>(std::move(f));
}

}  // namespace perturbex
