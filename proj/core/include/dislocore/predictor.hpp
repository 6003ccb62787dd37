#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dislocore {

/// Reduce t modulo p to the representative in (-p/2, p/2].
double wrap_period(double t, double p);

/// Analytic far-field displacement of an anti-plane screw dislocation:
/// the multivalued angular solution plus optional explicit first- and
/// second-order corrections proportional to cos(3*phi)/r and sin(6*phi)/r^2.
/// The branch cut runs from the core along +x1; only the angular part jumps
/// across it (by -burgers), the corrections are smooth there.
class Predictor {
 public:
  Predictor(const Eigen::Vector2d& core, double burgers, int order = 0, double c_lin = 0.0,
            double c_quad = 0.0);

  const Eigen::Vector2d& core() const { return core_; }
  double burgers() const { return b_; }
  int order() const { return order_; }
  double c_lin() const { return c_lin_; }
  double c_quad() const { return c_quad_; }

  /// Angular part: (b / 2 pi) arg(x - core), arg in [0, 2 pi).
  double uhat(const Eigen::Vector2d& x) const;
  Eigen::Vector2d uhat_gradient(const Eigen::Vector2d& x) const;
  Eigen::Matrix2d uhat_hessian(const Eigen::Vector2d& x) const;

  /// Correction u_1 (level 1) or u_2 (level 2), independent of order().
  double correction(const Eigen::Vector2d& x, int level) const;
  Eigen::Vector2d correction_gradient(const Eigen::Vector2d& x, int level) const;

  /// Sum of the corrections enabled by order().
  double smooth_part(const Eigen::Vector2d& x) const;
  Eigen::Vector2d smooth_gradient(const Eigen::Vector2d& x) const;

  /// uhat + enabled corrections.
  double value(const Eigen::Vector2d& x) const { return uhat(x) + smooth_part(x); }
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const {
    return uhat_gradient(x) + smooth_gradient(x);
  }

  /// Predictor difference along a bond with the angular part wrapped modulo
  /// |burgers| into (-p/2, p/2]. Leaves any slip-periodic energy unchanged
  /// while staying continuous across the branch cut.
  double wrapped_difference(const Eigen::Vector2d& from, const Eigen::Vector2d& to) const;

 private:
  Eigen::Vector2d core_;
  double b_;
  int order_;
  double c_lin_;
  double c_quad_;
  double k1_ = 0.0;  // coefficient of cos(3 phi)/r
  double k2_ = 0.0;  // coefficient of sin(6 phi)/r^2
};

/// Mean curvature of the graph x3 = uhat(x1, x2), from analytic derivatives.
/// Vanishes identically: the graph is a helicoid.
double helicoid_mean_curvature(const Predictor& pred, const Eigen::Vector2d& x);

struct PdeCheckReport {
  double max_rel_residual_u1 = 0.0;
  double max_rel_residual_u2 = 0.0;
  bool pass = false;
};

/// Verifies by finite differences (five-point stencils, step r * 1e-3) that
/// the corrections solve their defining Poisson problems:
///   -c_lin Lap u1 = c_quad (d11 uhat - d22 uhat, -2 d12 uhat) . grad uhat
///   -c_lin Lap u2 = c_quad [(d11 u1 - d22 u1, -2 d12 u1) . grad uhat
///                           + (d11 uhat - d22 uhat, -2 d12 uhat) . grad u1]
/// at sample angles away from the branch cut. Residuals are relative;
/// pass means both stay below 1e-3.
PdeCheckReport verify_corrector_pdes(const Predictor& pred, const std::vector<double>& radii,
                                     int angles_per_radius = 12);

}  // namespace dislocore
