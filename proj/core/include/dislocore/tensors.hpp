#pragma once

#include <Eigen/Dense>
#include <array>
#include <initializer_list>
#include <vector>

namespace dislocore {

/// Dense tensor over the plane of order 2, 3 or 4 (at most 16 entries).
/// Entries are addressed by multi-indices with values in {0, 1}.
class SymTensor {
 public:
  explicit SymTensor(int order);

  int order() const { return order_; }
  int size() const { return 1 << order_; }

  double& flat(int k) { return a_[static_cast<std::size_t>(k)]; }
  double flat(int k) const { return a_[static_cast<std::size_t>(k)]; }

  /// Multi-index access: idx.size() must equal order().
  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;

  /// Elementary tensor e_{i1} x ... x e_{im}.
  static SymTensor unit(std::initializer_list<int> idx);
  static SymTensor identity2();

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(double s);
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(double s, SymTensor a) { return a *= s; }

 private:
  int order_;
  std::array<double, 16> a_{};
};

/// Full scalar product A : B over all multi-indices.
double dot(const SymTensor& a, const SymTensor& b);
double norm(const SymTensor& a);
double max_abs(const SymTensor& a);

/// Symmetrization: average over all index permutations.
SymTensor symmetrize(const SymTensor& a);
bool is_symmetric(const SymTensor& a, double tol = 1e-12);

/// (B^{x m} A)_{l} = sum_k A_k prod_i B(l_i, k_i).
SymTensor rotate_apply(const SymTensor& a, const Eigen::Matrix2d& b);

/// Group average (1/N) sum_{M<N} (Q^M)^{x m} A. Requires Q^N = Id and
/// Q orthogonal to 1e-12; the result is the orthogonal projection onto
/// Q-invariant tensors.
SymTensor project_invariant(const SymTensor& a, const Eigen::Matrix2d& q, int n);

/// Orthogonal basis (paper-free scaling: unnormalized E-combinations) of
/// symmetric Q-invariant tensors, optionally intersected with the
/// reflection-odd subspace S^{x3} A = -A. Supported: (2, N>=3), (3, 3),
/// (3, 3, reflection), (4, 3).
std::vector<SymTensor> invariant_basis(int order, int n, bool reflection_odd = false);

}  // namespace dislocore
