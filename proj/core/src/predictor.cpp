#include "dislocore/predictor.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace dislocore {

double wrap_period(double t, double p) {
  return t - p * std::ceil(t / p - 0.5);
}

Predictor::Predictor(const Eigen::Vector2d& core, double burgers, int order, double c_lin,
                     double c_quad)
    : core_(core), b_(burgers), order_(order), c_lin_(c_lin), c_quad_(c_quad) {
  if (order_ < 0 || order_ > 2) throw std::invalid_argument("predictor order must be 0, 1 or 2");
  if (order_ >= 1 && c_lin_ <= 0.0)
    throw std::invalid_argument("corrected predictors require a positive linear coefficient");
  if (c_lin_ > 0.0) {
    k1_ = c_quad_ * b_ * b_ / (16.0 * M_PI * M_PI * c_lin_);
    // Fixed by -c_lin Lap u2 = forcing(u1, uhat) + forcing(uhat, u1).
    k2_ = -c_quad_ * c_quad_ * b_ * b_ * b_ /
          (64.0 * M_PI * M_PI * M_PI * c_lin_ * c_lin_);
  }
}

namespace {

Eigen::Vector2d rel(const Eigen::Vector2d& x, const Eigen::Vector2d& core) {
  const Eigen::Vector2d v = x - core;
  if (v.squaredNorm() == 0.0) throw std::domain_error("predictor evaluated at the core");
  return v;
}

}  // namespace

double Predictor::uhat(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d v = rel(x, core_);
  double phi = std::atan2(v.y(), v.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  return b_ / (2.0 * M_PI) * phi;
}

Eigen::Vector2d Predictor::uhat_gradient(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d v = rel(x, core_);
  const double r2 = v.squaredNorm();
  return b_ / (2.0 * M_PI) * Eigen::Vector2d(-v.y(), v.x()) / r2;
}

Eigen::Matrix2d Predictor::uhat_hessian(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d v = rel(x, core_);
  const double r4 = v.squaredNorm() * v.squaredNorm();
  Eigen::Matrix2d h;
  const double a = 2.0 * v.x() * v.y() / r4;
  const double b = (v.y() * v.y() - v.x() * v.x()) / r4;
  h << a, b, b, -a;
  return b_ / (2.0 * M_PI) * h;
}

double Predictor::correction(const Eigen::Vector2d& x, int level) const {
  if (level != 1 && level != 2) throw std::invalid_argument("correction level must be 1 or 2");
  if (c_lin_ <= 0.0) throw std::logic_error("corrections need Cauchy-Born coefficients");
  const Eigen::Vector2d v = rel(x, core_);
  const double r2 = v.squaredNorm();
  if (level == 1) {
    // cos(3 phi) / r in Cartesian form.
    return k1_ * (v.x() * v.x() * v.x() - 3.0 * v.x() * v.y() * v.y()) / (r2 * r2);
  }
  // sin(6 phi) / r^2 in Cartesian form.
  const double x1 = v.x(), x2 = v.y();
  const double num = 6.0 * std::pow(x1, 5) * x2 - 20.0 * std::pow(x1, 3) * std::pow(x2, 3) +
                     6.0 * x1 * std::pow(x2, 5);
  return k2_ * num / (r2 * r2 * r2 * r2);
}

Eigen::Vector2d Predictor::correction_gradient(const Eigen::Vector2d& x, int level) const {
  if (level != 1 && level != 2) throw std::invalid_argument("correction level must be 1 or 2");
  if (c_lin_ <= 0.0) throw std::logic_error("corrections need Cauchy-Born coefficients");
  const Eigen::Vector2d v = rel(x, core_);
  const double r = v.norm();
  const double phi = std::atan2(v.y(), v.x());
  const double c = v.x() / r, s = v.y() / r;
  double dr, dphi_over_r;
  if (level == 1) {
    dr = -k1_ * std::cos(3.0 * phi) / (r * r);
    dphi_over_r = -3.0 * k1_ * std::sin(3.0 * phi) / (r * r);
  } else {
    dr = -2.0 * k2_ * std::sin(6.0 * phi) / (r * r * r);
    dphi_over_r = 6.0 * k2_ * std::cos(6.0 * phi) / (r * r * r);
  }
  return Eigen::Vector2d(c * dr - s * dphi_over_r, s * dr + c * dphi_over_r);
}

double Predictor::smooth_part(const Eigen::Vector2d& x) const {
  double v = 0.0;
  if (order_ >= 1) v += correction(x, 1);
  if (order_ >= 2) v += correction(x, 2);
  return v;
}

Eigen::Vector2d Predictor::smooth_gradient(const Eigen::Vector2d& x) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  if (order_ >= 1) g += correction_gradient(x, 1);
  if (order_ >= 2) g += correction_gradient(x, 2);
  return g;
}

double Predictor::wrapped_difference(const Eigen::Vector2d& from, const Eigen::Vector2d& to) const {
  const double p = std::abs(b_);
  double d = uhat(to) - uhat(from);
  if (p > 0.0) d = wrap_period(d, p);
  return d + smooth_part(to) - smooth_part(from);
}

double helicoid_mean_curvature(const Predictor& pred, const Eigen::Vector2d& x) {
  const Eigen::Vector2d g = pred.uhat_gradient(x);
  const Eigen::Matrix2d h = pred.uhat_hessian(x);
  const double num = (1.0 + g.x() * g.x()) * h(1, 1) + (1.0 + g.y() * g.y()) * h(0, 0) -
                     2.0 * g.x() * g.y() * h(0, 1);
  const double den = 2.0 * std::pow(1.0 + g.squaredNorm(), 1.5);
  return num / den;
}

namespace {

using Scalar2d = std::function<double(const Eigen::Vector2d&)>;

double fd1(const Scalar2d& f, const Eigen::Vector2d& x, int axis, double h) {
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  e[axis] = 1.0;
  return (f(x - 2 * h * e) - 8.0 * f(x - h * e) + 8.0 * f(x + h * e) - f(x + 2 * h * e)) /
         (12.0 * h);
}

double fd2(const Scalar2d& f, const Eigen::Vector2d& x, int axis, double h) {
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  e[axis] = 1.0;
  return (-f(x - 2 * h * e) + 16.0 * f(x - h * e) - 30.0 * f(x) + 16.0 * f(x + h * e) -
          f(x + 2 * h * e)) /
         (12.0 * h * h);
}

double fd_mixed(const Scalar2d& f, const Eigen::Vector2d& x, double h) {
  auto g = [&](const Eigen::Vector2d& y) { return fd1(f, y, 1, h); };
  return fd1(g, x, 0, h);
}

struct SecondDerivs {
  Eigen::Vector2d grad;
  double d11, d22, d12;
};

SecondDerivs fd_all(const Scalar2d& f, const Eigen::Vector2d& x, double h) {
  SecondDerivs out;
  out.grad = Eigen::Vector2d(fd1(f, x, 0, h), fd1(f, x, 1, h));
  out.d11 = fd2(f, x, 0, h);
  out.d22 = fd2(f, x, 1, h);
  out.d12 = fd_mixed(f, x, h);
  return out;
}

double nonlinear_forcing(const SecondDerivs& a, const SecondDerivs& b) {
  // (d11 a - d22 a, -2 d12 a) . grad b
  return (a.d11 - a.d22) * b.grad.x() - 2.0 * a.d12 * b.grad.y();
}

}  // namespace

PdeCheckReport verify_corrector_pdes(const Predictor& pred, const std::vector<double>& radii,
                                     int angles_per_radius) {
  if (pred.c_lin() <= 0.0)
    throw std::invalid_argument("verify_corrector_pdes requires Cauchy-Born coefficients");
  const Scalar2d fhat = [&](const Eigen::Vector2d& y) { return pred.uhat(y); };
  const Scalar2d f1 = [&](const Eigen::Vector2d& y) { return pred.correction(y, 1); };
  const Scalar2d f2 = [&](const Eigen::Vector2d& y) { return pred.correction(y, 2); };

  PdeCheckReport rep;
  for (double r : radii) {
    const double h = r * 1e-3;
    for (int k = 0; k < angles_per_radius; ++k) {
      // Offset angles keep every stencil point away from the branch cut.
      const double phi = 2.0 * M_PI * (k + 0.5) / angles_per_radius;
      const Eigen::Vector2d x = pred.core() + r * Eigen::Vector2d(std::cos(phi), std::sin(phi));

      const SecondDerivs dhat = fd_all(fhat, x, h);
      const SecondDerivs d1 = fd_all(f1, x, h);
      const SecondDerivs d2 = fd_all(f2, x, h);

      const double lhs1 = -pred.c_lin() * (d1.d11 + d1.d22);
      const double rhs1 = pred.c_quad() * nonlinear_forcing(dhat, dhat);
      const double rel1 = std::abs(lhs1 - rhs1) / std::max({std::abs(lhs1), std::abs(rhs1), 1e-300});
      rep.max_rel_residual_u1 = std::max(rep.max_rel_residual_u1, rel1);

      const double lhs2 = -pred.c_lin() * (d2.d11 + d2.d22);
      const double rhs2 =
          pred.c_quad() * (nonlinear_forcing(d1, dhat) + nonlinear_forcing(dhat, d1));
      const double rel2 = std::abs(lhs2 - rhs2) / std::max({std::abs(lhs2), std::abs(rhs2), 1e-300});
      rep.max_rel_residual_u2 = std::max(rep.max_rel_residual_u2, rel2);
    }
  }
  rep.pass = rep.max_rel_residual_u1 < 1e-3 && rep.max_rel_residual_u2 < 1e-3;
  return rep;
}

}  // namespace dislocore
