#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dislocore/lattice.hpp"

using namespace dislocore;

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

TEST_CASE("build_lattice produces the documented generators and cores") {
  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
  CHECK(tri.A(0, 0) == doctest::Approx(1.0));
  CHECK(tri.A(0, 1) == doctest::Approx(0.5));
  CHECK(tri.A(1, 0) == doctest::Approx(0.0));
  CHECK(tri.A(1, 1) == doctest::Approx(kSqrt3 / 2.0));
  CHECK(tri.core.x() == doctest::Approx(0.5));
  CHECK(tri.core.y() == doctest::Approx(kSqrt3 / 6.0));
  CHECK(tri.rot_order == 3);

  const LatticeSpec sq = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
  CHECK(sq.core.x() == doctest::Approx(0.5));
  CHECK(sq.core.y() == doctest::Approx(0.5));
  CHECK(sq.rot_order == 4);
  CHECK((sq.A - Eigen::Matrix2d::Identity()).norm() == doctest::Approx(0.0));

  const LatticeSpec asym = build_lattice(LatticeKind::Triangular, CorePlacement::Custom,
                                         Eigen::Vector2d(0.25, 0.125));
  CHECK(asym.core.x() == doctest::Approx(0.25));
  CHECK(asym.core.y() == doctest::Approx(0.125));
  CHECK((asym.A - tri.A).norm() == doctest::Approx(0.0));
  CHECK_FALSE(asym.symmetric_core);

  CHECK_THROWS_AS(build_lattice(LatticeKind::Square, CorePlacement::Custom,
                                Eigen::Vector2d(2.0, 3.0)),
                  std::invalid_argument);
}

TEST_CASE("rotation and reflection act integrally on lattice coordinates") {
  for (LatticeKind kind : {LatticeKind::Square, LatticeKind::Triangular}) {
    const LatticeSpec spec = build_lattice(kind, CorePlacement::Symmetric);
    const Eigen::Matrix2d qi = spec.Q_int.cast<double>();
    CHECK((spec.A * qi * spec.A_inv - spec.Q).norm() < 1e-12);
    Eigen::Matrix2d qpow = Eigen::Matrix2d::Identity();
    for (int k = 0; k < spec.rot_order; ++k) qpow = spec.Q * qpow;
    CHECK((qpow - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK((spec.S * spec.S - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("sites_in_ball: unit ball around the square core") {
  const LatticeSpec sq = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
  const Domain dom = sites_in_ball(sq, 1.0);
  REQUIRE(dom.size() == 4);
  const std::set<std::pair<int, int>> expect = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::set<std::pair<int, int>> got;
  for (const Coord& c : dom.sites) got.insert({c.i, c.j});
  CHECK(got == expect);
}

TEST_CASE("sites_in_ball: count matches brute-force enumeration at R=50") {
  const LatticeSpec sq = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
  const Domain dom = sites_in_ball(sq, 50.0);
  // Independent oracle: exhaustive scan of a bounding box.
  int count = 0;
  for (int i = -60; i <= 60; ++i)
    for (int j = -60; j <= 60; ++j) {
      const double dx = i - 0.5, dy = j - 0.5;
      if (std::sqrt(dx * dx + dy * dy) <= 50.0) ++count;
    }
  CHECK(dom.size() == count);
}

TEST_CASE("sites_in_ball: triangular density matches the area estimate") {
  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
  const Domain dom = sites_in_ball(tri, 50.0);
  const double expected = M_PI * 50.0 * 50.0 / tri.det();
  CHECK(std::abs(dom.size() - expected) / expected < 0.03);
}

TEST_CASE("sites_in_ball rejects radii that trap no site") {
  const LatticeSpec sq = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
  CHECK_THROWS_AS(sites_in_ball(sq, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(sites_in_ball(sq, -1.0), std::invalid_argument);
}

TEST_CASE("domain construction is deterministic") {
  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
  const Domain a = sites_in_ball(tri, 20.0);
  const Domain b = sites_in_ball(tri, 20.0);
  REQUIRE(a.size() == b.size());
  for (int k = 0; k < a.size(); ++k) CHECK(a.sites[k] == b.sites[k]);
}

TEST_CASE("nearest neighbor shells close under the point group") {
  for (LatticeKind kind : {LatticeKind::Square, LatticeKind::Triangular}) {
    const LatticeSpec spec = build_lattice(kind, CorePlacement::Symmetric);
    const NeighborSet ns = nearest_neighbors(spec);
    CHECK(ns.size() == (kind == LatticeKind::Square ? 4 : 6));
    CHECK_FALSE(ns.refl_perm.empty());
    for (int a = 0; a < ns.size(); ++a) {
      CHECK(ns.rot_perm[a] >= 0);
      CHECK(ns.dirs_int[ns.neg_perm[a]].i == -ns.dirs_int[a].i);
      CHECK(ns.dirs_int[ns.neg_perm[a]].j == -ns.dirs_int[a].j);
    }
  }
}

TEST_CASE("bcc projection: first shell has coordination 8") {
  // Oracle: brute-force enumeration of the 3D lattice.
  const double p = bcc_period();
  Eigen::Matrix3d gen;
  gen << 1.0, 0.5, 0.0, 0.0, kSqrt3 / 2.0, 0.0, p / 3.0, -p / 3.0, p;
  double min_dist = 1e9;
  std::vector<double> dists;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j)
      for (int k = -3; k <= 3; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        const double d = (gen * Eigen::Vector3d(i, j, k)).norm();
        dists.push_back(d);
        min_dist = std::min(min_dist, d);
      }
  CHECK(min_dist == doctest::Approx(bcc_first_shell_distance()).epsilon(1e-12));
  int at_min = 0;
  for (double d : dists)
    if (d < min_dist + 1e-9) ++at_min;
  CHECK(at_min == 8);
}

TEST_CASE("bcc_lifts: structure and symmetry of the projected stencil") {
  const NeighborSet ns = bcc_lifts(bcc_default_cutoff());
  CHECK(ns.size() == 6);  // unit hexagon
  CHECK(ns.period == doctest::Approx(bcc_period()));
  CHECK_FALSE(ns.refl_perm.empty());

  // Default cutoff captures first and second shells: 12 in-plane lifts + 2 vertical.
  int total_lifts = 0;
  for (const auto& zs : ns.lifts) total_lifts += static_cast<int>(zs.size());
  CHECK(total_lifts == 12);
  CHECK(ns.vertical_lifts.size() == 2);

  // Point symmetry: (-rho, -z) stored for every (rho, z); lift sum of rho vanishes.
  Eigen::Vector2d dir_sum = Eigen::Vector2d::Zero();
  for (int a = 0; a < ns.size(); ++a) {
    const int na = ns.neg_perm[a];
    REQUIRE(ns.lifts[a].size() == ns.lifts[na].size());
    for (double z : ns.lifts[a]) {
      bool found = false;
      for (double zn : ns.lifts[na])
        if (std::abs(zn + z) < 1e-12) found = true;
      CHECK(found);
      dir_sum += ns.dirs[a];
    }
  }
  CHECK(dir_sum.norm() < 1e-12);

  // Closure under rotation by 2 pi / 3 and under the line reflection.
  for (int a = 0; a < ns.size(); ++a) {
    CHECK(ns.rot_perm[a] >= 0);
    CHECK(ns.refl_perm[a] >= 0);
  }
  CHECK_THROWS_AS(bcc_lifts(0.5), std::invalid_argument);
}

TEST_CASE("rotate_site: square orbit and triangular identity") {
  const LatticeSpec sq = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
  Coord x{0, 0};
  x = rotate_site(sq, x);
  CHECK(x == Coord{1, 0});
  x = rotate_site(sq, x);
  CHECK(x == Coord{1, 1});
  x = rotate_site(sq, x);
  CHECK(x == Coord{0, 1});
  x = rotate_site(sq, x);
  CHECK(x == Coord{0, 0});

  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> uni(-20, 20);
  for (int t = 0; t < 20; ++t) {
    const Coord s{uni(rng), uni(rng)};
    Coord y = s;
    for (int k = 0; k < 3; ++k) y = rotate_site(tri, y);
    CHECK(y == s);
  }

  const LatticeSpec asym = build_lattice(LatticeKind::Triangular, CorePlacement::Custom,
                                         Eigen::Vector2d(0.25, 0.125));
  CHECK_THROWS_AS(rotate_site(asym, Coord{0, 0}), std::domain_error);
}

TEST_CASE("rotation is a bijection of every symmetric ball domain") {
  for (LatticeKind kind : {LatticeKind::Square, LatticeKind::Triangular}) {
    const LatticeSpec spec = build_lattice(kind, CorePlacement::Symmetric);
    const Domain dom = sites_in_ball(spec, 12.0);
    std::vector<int> hit(dom.sites.size(), 0);
    for (const Coord& c : dom.sites) {
      const Coord img = rotate_site(spec, c);
      const std::int32_t k = dom.find(img);
      REQUIRE(k >= 0);
      ++hit[static_cast<std::size_t>(k)];
    }
    for (int h : hit) CHECK(h == 1);
  }
}
