#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dislocore/tensors.hpp"

using namespace dislocore;

namespace {

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d q;
  q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return q;
}

SymTensor random_tensor(int order, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymTensor t(order);
  for (int k = 0; k < t.size(); ++k) t.flat(k) = g(rng);
  return t;
}

// Brute-force (B^{x m} A) via explicit nested index loops, independent of the
// bit-packed implementation.
SymTensor rotate_oracle(const SymTensor& a, const Eigen::Matrix2d& b) {
  const int m = a.order();
  SymTensor out(m);
  std::array<int, 4> l{}, k{};
  const int total = a.size();
  for (int lf = 0; lf < total; ++lf) {
    for (int pos = 0; pos < m; ++pos) l[pos] = (lf >> pos) & 1;
    double s = 0.0;
    for (int kf = 0; kf < total; ++kf) {
      for (int pos = 0; pos < m; ++pos) k[pos] = (kf >> pos) & 1;
      double w = a.flat(kf);
      for (int pos = 0; pos < m; ++pos) w *= b(l[pos], k[pos]);
      s += w;
    }
    out.flat(lf) = s;
  }
  return out;
}

SymTensor project_oracle(const SymTensor& a, const Eigen::Matrix2d& q, int n) {
  SymTensor acc(a.order());
  Eigen::Matrix2d qm = Eigen::Matrix2d::Identity();
  for (int M = 0; M < n; ++M) {
    acc += rotate_oracle(a, qm);
    qm = q * qm;
  }
  acc *= 1.0 / n;
  return acc;
}

int rank_of(std::vector<SymTensor> vecs) {
  // Gaussian elimination on flattened tensors.
  int rank = 0;
  const int dim = vecs.empty() ? 0 : vecs.front().size();
  for (int col = 0; col < dim && rank < static_cast<int>(vecs.size()); ++col) {
    int pivot = -1;
    double best = 1e-9;
    for (int r = rank; r < static_cast<int>(vecs.size()); ++r)
      if (std::abs(vecs[r].flat(col)) > best) {
        best = std::abs(vecs[r].flat(col));
        pivot = r;
      }
    if (pivot < 0) continue;
    std::swap(vecs[rank], vecs[pivot]);
    for (int r = 0; r < static_cast<int>(vecs.size()); ++r) {
      if (r == rank) continue;
      const double f = vecs[r].flat(col) / vecs[rank].flat(col);
      if (f != 0.0) vecs[r] -= f * vecs[rank];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("rotate_apply basics") {
  const SymTensor id = SymTensor::identity2();
  const SymTensor rot = rotate_apply(id, rotation(M_PI / 2.0));
  CHECK(max_abs(rot - id) < 1e-14);

  std::mt19937_64 rng(11);
  for (int m : {2, 3, 4}) {
    const SymTensor a = random_tensor(m, rng);
    CHECK(max_abs(rotate_apply(a, Eigen::Matrix2d::Identity()) - a) == 0.0);
  }
}

TEST_CASE("rotate_apply agrees with the nested-loop oracle") {
  std::mt19937_64 rng(13);
  const Eigen::Matrix2d q3 = rotation(2.0 * M_PI / 3.0);
  for (int m : {2, 3, 4})
    for (int t = 0; t < 25; ++t) {
      const SymTensor a = random_tensor(m, rng);
      CHECK(max_abs(rotate_apply(a, q3) - rotate_oracle(a, q3)) < 1e-13);
    }
  // The order-3 unit tensor case, against the same oracle.
  const SymTensor e111 = SymTensor::unit({0, 0, 0});
  CHECK(max_abs(rotate_apply(e111, q3) - rotate_oracle(e111, q3)) < 1e-14);
}

TEST_CASE("group average is an orthogonal projector") {
  std::mt19937_64 rng(17);
  for (int n : {3, 4}) {
    const Eigen::Matrix2d q = rotation(2.0 * M_PI / n);
    for (int m : {2, 3, 4}) {
      for (int t = 0; t < 50; ++t) {
        const SymTensor a = random_tensor(m, rng);
        const SymTensor pa = project_invariant(a, q, n);
        CHECK(max_abs(project_invariant(pa, q, n) - pa) < 1e-12);
        // Range characterization: Q-invariance holds exactly.
        CHECK(max_abs(rotate_apply(pa, q) - pa) < 1e-12);
        // Self-adjointness.
        const SymTensor b = random_tensor(m, rng);
        CHECK(dot(pa, b) == doctest::Approx(dot(a, project_invariant(b, q, n))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("group average matches the brute-force oracle to 1e-14") {
  std::mt19937_64 rng(19);
  const Eigen::Matrix2d q = rotation(2.0 * M_PI / 3.0);
  for (int t = 0; t < 100; ++t) {
    const int m = 2 + (t % 3);
    const SymTensor a = random_tensor(m, rng);
    CHECK(max_abs(project_invariant(a, q, 3) - project_oracle(a, q, 3)) < 1e-14);
  }
}

TEST_CASE("invariant projection of a symmetric 2-tensor is (tr A / 2) Id") {
  std::mt19937_64 rng(23);
  const Eigen::Matrix2d q = rotation(2.0 * M_PI / 3.0);
  for (int t = 0; t < 20; ++t) {
    SymTensor a = symmetrize(random_tensor(2, rng));
    const SymTensor pa = project_invariant(a, q, 3);
    const double tr = a.at({0, 0}) + a.at({1, 1});
    SymTensor expect = 0.5 * tr * SymTensor::identity2();
    CHECK(max_abs(pa - expect) < 1e-14);
  }
}

TEST_CASE("invariant projection of a symmetric 4-tensor has the isotropic form") {
  std::mt19937_64 rng(29);
  const Eigen::Matrix2d q = rotation(2.0 * M_PI / 3.0);
  for (int t = 0; t < 20; ++t) {
    const SymTensor a = symmetrize(random_tensor(4, rng));
    const SymTensor pa = project_invariant(a, q, 3);
    const double coeff =
        a.at({0, 0, 0, 0}) + 2.0 * a.at({0, 0, 1, 1}) + a.at({1, 1, 1, 1});
    // (1/8)(delta delta + delta delta + delta delta) * coeff
    SymTensor expect(4);
    for (int k = 0; k < 16; ++k) {
      const int i = k & 1, j = (k >> 1) & 1, s = (k >> 2) & 1, l = (k >> 3) & 1;
      const double ddd = (i == j && s == l ? 1.0 : 0.0) + (i == s && j == l ? 1.0 : 0.0) +
                         (i == l && j == s ? 1.0 : 0.0);
      expect.flat(k) = ddd / 8.0 * coeff;
    }
    CHECK(max_abs(pa - expect) < 1e-13);
  }
}

TEST_CASE("invariant bases: dimensions, symmetry and orthogonality") {
  const Eigen::Matrix2d q = rotation(2.0 * M_PI / 3.0);
  Eigen::Matrix2d s;
  const double r3 = std::sqrt(3.0);
  s << 0.5, r3 / 2.0, r3 / 2.0, -0.5;

  const struct {
    int m, n;
    bool refl;
    std::size_t dim;
  } combos[] = {{2, 3, false, 1}, {3, 3, false, 2}, {3, 3, true, 1}, {4, 3, false, 1}};
  for (const auto& c : combos) {
    const auto basis = invariant_basis(c.m, c.n, c.refl);
    REQUIRE(basis.size() == c.dim);
    for (const SymTensor& t : basis) {
      CHECK(is_symmetric(t));
      CHECK(max_abs(rotate_apply(t, q) - t) < 1e-12);
      if (c.refl) CHECK(max_abs(rotate_apply(t, s) + t) < 1e-12);
    }
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i + 1; j < basis.size(); ++j)
        CHECK(std::abs(dot(basis[i], basis[j])) < 1e-12);
  }
  CHECK_THROWS_AS(invariant_basis(4, 4, false), std::invalid_argument);
  CHECK_THROWS_AS(invariant_basis(2, 3, true), std::invalid_argument);
}

TEST_CASE("basis dimensions match the rank of the symmetrized projector") {
  const Eigen::Matrix2d q = rotation(2.0 * M_PI / 3.0);
  for (int m : {2, 3, 4}) {
    std::vector<SymTensor> images;
    for (int k = 0; k < (1 << m); ++k) {
      SymTensor e(m);
      e.flat(k) = 1.0;
      images.push_back(project_invariant(symmetrize(e), q, 3));
    }
    const int expected = m == 3 ? 2 : 1;
    CHECK(rank_of(images) == expected);
  }
}

TEST_CASE("group average rejects non-cyclic input") {
  Eigen::Matrix2d q = rotation(0.3);  // 0.3 rad is not 2 pi / N for N <= 4
  SymTensor a = SymTensor::identity2();
  CHECK_THROWS_AS(project_invariant(a, q, 3), std::invalid_argument);
  Eigen::Matrix2d notorth;
  notorth << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(project_invariant(a, notorth, 3), std::invalid_argument);
}
