#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dislocore/lattice.hpp"
#include "dislocore/predictor.hpp"

using namespace dislocore;

namespace {
// Coefficients of a representative anisotropic model.
constexpr double kClin = 2.0;
constexpr double kCquad = 14.0;
}  // namespace

TEST_CASE("angular displacement: values, jump and error paths") {
  const Eigen::Vector2d core(0.5, 0.5);
  const double b = 1.0;
  const Predictor pred(core, b);

  CHECK(pred.uhat(core + Eigen::Vector2d(0.0, 2.0)) == doctest::Approx(b / 4.0));
  CHECK(pred.uhat(core + Eigen::Vector2d(-3.0, 0.0)) == doctest::Approx(b / 2.0));
  CHECK_THROWS_AS(pred.uhat(core), std::domain_error);

  // Jump of -b across the positive x1 half-line from the core.
  for (double x1 : {1.0, 5.0, 20.0}) {
    const double eps = 1e-9;
    const double above = pred.uhat(core + Eigen::Vector2d(x1, eps));
    const double below = pred.uhat(core + Eigen::Vector2d(x1, -eps));
    CHECK(above - below == doctest::Approx(-b).epsilon(1e-6));
    // The corrections are smooth across the cut.
    const Predictor pc(core, b, 2, kClin, kCquad);
    CHECK(pc.correction(core + Eigen::Vector2d(x1, eps), 1) ==
          doctest::Approx(pc.correction(core + Eigen::Vector2d(x1, -eps), 1)).epsilon(1e-6));
    CHECK(pc.correction(core + Eigen::Vector2d(x1, eps), 2) ==
          doctest::Approx(pc.correction(core + Eigen::Vector2d(x1, -eps), 2)).epsilon(1e-4));
  }
}

TEST_CASE("rotation about a symmetric core shifts the angular part by b/N") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> uni(-15, 15);
  for (LatticeKind kind : {LatticeKind::Square, LatticeKind::Triangular}) {
    const LatticeSpec spec = build_lattice(kind, CorePlacement::Symmetric);
    const double b = 1.0;
    const Predictor pred(spec.core, b);
    const double shift = b / spec.rot_order;
    for (int t = 0; t < 25; ++t) {
      const Coord x{uni(rng), uni(rng)};
      const Coord lx = rotate_site(spec, x);
      const double diff = pred.uhat(spec.position(lx)) - pred.uhat(spec.position(x));
      CHECK(std::abs(wrap_period(diff - shift, b)) < 1e-12);
    }
  }
}

TEST_CASE("corrections: closed-form samples and rotational invariance") {
  const Eigen::Vector2d core(0.0, 0.0);
  const double b = 1.2;
  const Predictor pred(core, b, 2, kClin, kCquad);

  // Level 1 at r=1, phi=0.
  const double k1 = kCquad * b * b / (16.0 * M_PI * M_PI * kClin);
  CHECK(pred.correction(Eigen::Vector2d(1.0, 0.0), 1) == doctest::Approx(k1).epsilon(1e-12));
  // Level 2 vanishes on the cut axis (sin(0) = 0) at any radius.
  for (double r : {0.5, 2.0, 17.0})
    CHECK(std::abs(pred.correction(Eigen::Vector2d(r, 0.0), 2)) < 1e-15);

  // Invariance under rotation by 2 pi / 3 about the core.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  Eigen::Matrix2d q;
  q << std::cos(2.0 * M_PI / 3.0), -std::sin(2.0 * M_PI / 3.0), std::sin(2.0 * M_PI / 3.0),
      std::cos(2.0 * M_PI / 3.0);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Vector2d x(g(rng) * 5.0, g(rng) * 5.0);
    if (x.norm() < 0.1) continue;
    CHECK(pred.correction(q * x, 1) == doctest::Approx(pred.correction(x, 1)).epsilon(1e-12));
    CHECK(pred.correction(q * x, 2) == doctest::Approx(pred.correction(x, 2)).epsilon(1e-10));
  }

  CHECK_THROWS_AS(Predictor(core, b, 1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pred.correction(Eigen::Vector2d(1.0, 0.0), 3), std::invalid_argument);
}

TEST_CASE("composite predictor inherits the b/N rotational shift") {
  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
  const double b = 1.06;
  const Predictor pred(tri.core, b, 2, kClin, kCquad);
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> uni(-12, 12);
  for (int t = 0; t < 25; ++t) {
    const Coord x{uni(rng), uni(rng)};
    const Coord lx = rotate_site(tri, x);
    const double diff = pred.value(tri.position(lx)) - pred.value(tri.position(x));
    CHECK(std::abs(wrap_period(diff - b / 3.0, b)) < 1e-10);
  }
}

TEST_CASE("wrapped differences stay bond-sized across the cut") {
  const Eigen::Vector2d core(0.5, 0.29);
  const double b = 1.0;
  const Predictor pred(core, b);

  // Far from the cut the wrap is a no-op.
  const Eigen::Vector2d a = core + Eigen::Vector2d(-3.0, 4.0);
  const Eigen::Vector2d c = a + Eigen::Vector2d(1.0, 0.0);
  CHECK(pred.wrapped_difference(a, c) == doctest::Approx(pred.uhat(c) - pred.uhat(a)));

  // Bonds crossing the cut: compare against the gradient-times-bond oracle.
  for (double r : {3.0, 10.0, 30.0, 100.0}) {
    const Eigen::Vector2d lo = core + Eigen::Vector2d(r, -0.5);
    const Eigen::Vector2d hi = core + Eigen::Vector2d(r, 0.5);
    const double wrapped = pred.wrapped_difference(lo, hi);
    CHECK(std::abs(wrapped) <= std::abs(b) * 1.0 / (2.0 * M_PI * r) + 2.0 / (r * r));
    const Eigen::Vector2d mid = core + Eigen::Vector2d(r, 0.0);
    // Gradient evaluated just off the cut, where uhat is smooth.
    const double oracle = pred.uhat_gradient(mid + Eigen::Vector2d(0, 1e-9)).dot(hi - lo);
    CHECK(wrapped == doctest::Approx(oracle).epsilon(0.05));
  }
}

TEST_CASE("gradient decay orders of the three predictor pieces") {
  const Eigen::Vector2d core(0.0, 0.0);
  const Predictor pred(core, 1.0, 2, kClin, kCquad);
  for (double r : {2.0, 8.0, 32.0, 128.0}) {
    double m0 = 0, m1 = 0, m2 = 0;
    for (int k = 0; k < 16; ++k) {
      const double phi = 2.0 * M_PI * (k + 0.5) / 16;
      const Eigen::Vector2d x = r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      m0 = std::max(m0, pred.uhat_gradient(x).norm());
      m1 = std::max(m1, pred.correction_gradient(x, 1).norm());
      m2 = std::max(m2, pred.correction_gradient(x, 2).norm());
    }
    CHECK(m0 * r == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-9));
    CHECK(m1 * r * r < 3.5 * std::abs(kCquad) / (16.0 * M_PI * M_PI * kClin) + 1e-12);
    CHECK(m2 * r * r * r <
          7.0 * kCquad * kCquad / (64.0 * M_PI * M_PI * M_PI * kClin * kClin) + 1e-12);
  }
}

TEST_CASE("corrections solve their Poisson problems (finite differences)") {
  const Eigen::Vector2d core(0.5, 0.29);
  const double b = -1.06;  // negative orientation exercised on purpose
  const Predictor pred(core, b, 2, kClin, kCquad);
  const PdeCheckReport rep = verify_corrector_pdes(pred, {5.0, 10.0, 20.0});
  CHECK(rep.pass);
  CHECK(rep.max_rel_residual_u1 < 1e-3);
  CHECK(rep.max_rel_residual_u2 < 1e-3);

  // Spot values of the Laplacians in polar form.
  auto lap = [&](int level, double r, double phi) {
    const double h = r * 1e-3;
    const Eigen::Vector2d x = core + r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
    auto f = [&](const Eigen::Vector2d& y) { return pred.correction(y, level); };
    const Eigen::Vector2d e1(1, 0), e2(0, 1);
    const double d11 = (-f(x - 2 * h * e1) + 16 * f(x - h * e1) - 30 * f(x) +
                        16 * f(x + h * e1) - f(x + 2 * h * e1)) /
                       (12 * h * h);
    const double d22 = (-f(x - 2 * h * e2) + 16 * f(x - h * e2) - 30 * f(x) +
                        16 * f(x + h * e2) - f(x + 2 * h * e2)) /
                       (12 * h * h);
    return d11 + d22;
  };
  {
    const double r = 10.0, phi = M_PI / 4.0;
    const double expect = kCquad * b * b / (kClin * 2.0 * M_PI * M_PI) * std::cos(3.0 * phi) /
                          (r * r * r);
    CHECK(-lap(1, r, phi) == doctest::Approx(expect).epsilon(1e-4));
  }
  {
    // The second correction balances the full cross forcing, which is -2x the
    // single-term polar reduction; see the level-2 coefficient.
    const double r = 10.0, phi = M_PI / 6.0;
    const double expect = -kCquad * kCquad * b * b * b /
                          (kClin * kClin * 2.0 * M_PI * M_PI * M_PI) * std::sin(6.0 * phi) /
                          (r * r * r * r);
    CHECK(-lap(2, r, phi) == doctest::Approx(expect).epsilon(1e-4));
  }
}

TEST_CASE("the angular graph is a minimal surface") {
  const Predictor pred(Eigen::Vector2d(0.5, 0.5), 1.0);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  int checked = 0;
  while (checked < 20) {
    const Eigen::Vector2d x = pred.core() + 10.0 * Eigen::Vector2d(g(rng), g(rng));
    if ((x - pred.core()).norm() < 0.5) continue;
    CHECK(std::abs(helicoid_mean_curvature(pred, x)) < 1e-10);
    ++checked;
  }
}

TEST_CASE("wrap_period lands in the half-open interval") {
  CHECK(wrap_period(0.6, 1.0) == doctest::Approx(-0.4));
  CHECK(wrap_period(0.5, 1.0) == doctest::Approx(0.5));
  CHECK(wrap_period(-0.5, 1.0) == doctest::Approx(0.5));
  CHECK(wrap_period(3.2, 1.0) == doctest::Approx(0.2));
  CHECK(wrap_period(-7.75, 1.0) == doctest::Approx(0.25));
}
