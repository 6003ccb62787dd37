#include "dislocore/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dislocore {

namespace {

int check_order(int order) {
  if (order < 2 || order > 4) throw std::invalid_argument("tensor order must be 2, 3 or 4");
  return order;
}

inline int bit(int k, int pos) { return (k >> pos) & 1; }

}  // namespace

SymTensor::SymTensor(int order) : order_(check_order(order)) {}

double& SymTensor::at(std::initializer_list<int> idx) {
  if (static_cast<int>(idx.size()) != order_) throw std::invalid_argument("index arity mismatch");
  int k = 0, pos = 0;
  for (int v : idx) {
    if (v != 0 && v != 1) throw std::invalid_argument("tensor indices are 0 or 1");
    k |= v << pos++;
  }
  return a_[static_cast<std::size_t>(k)];
}

double SymTensor::at(std::initializer_list<int> idx) const {
  return const_cast<SymTensor*>(this)->at(idx);
}

SymTensor SymTensor::unit(std::initializer_list<int> idx) {
  SymTensor t(static_cast<int>(idx.size()));
  t.at(idx) = 1.0;
  return t;
}

SymTensor SymTensor::identity2() {
  SymTensor t(2);
  t.at({0, 0}) = 1.0;
  t.at({1, 1}) = 1.0;
  return t;
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  if (o.order_ != order_) throw std::invalid_argument("tensor order mismatch");
  for (int k = 0; k < size(); ++k) a_[k] += o.a_[k];
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  if (o.order_ != order_) throw std::invalid_argument("tensor order mismatch");
  for (int k = 0; k < size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

SymTensor& SymTensor::operator*=(double s) {
  for (int k = 0; k < size(); ++k) a_[k] *= s;
  return *this;
}

double dot(const SymTensor& a, const SymTensor& b) {
  if (a.order() != b.order()) throw std::invalid_argument("tensor order mismatch");
  double s = 0.0;
  for (int k = 0; k < a.size(); ++k) s += a.flat(k) * b.flat(k);
  return s;
}

double norm(const SymTensor& a) { return std::sqrt(dot(a, a)); }

double max_abs(const SymTensor& a) {
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.flat(k)));
  return m;
}

SymTensor symmetrize(const SymTensor& a) {
  const int m = a.order();
  std::array<int, 4> perm{};
  for (int i = 0; i < m; ++i) perm[i] = i;
  SymTensor out(m);
  int count = 0;
  do {
    for (int k = 0; k < a.size(); ++k) {
      int src = 0;
      for (int pos = 0; pos < m; ++pos) src |= bit(k, perm[pos]) << pos;
      out.flat(k) += a.flat(src);
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.begin() + m));
  out *= 1.0 / count;
  return out;
}

bool is_symmetric(const SymTensor& a, double tol) {
  SymTensor d = a - symmetrize(a);
  return max_abs(d) <= tol;
}

SymTensor rotate_apply(const SymTensor& a, const Eigen::Matrix2d& b) {
  const int m = a.order();
  SymTensor out(m);
  for (int l = 0; l < a.size(); ++l) {
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k) {
      double w = a.flat(k);
      for (int pos = 0; pos < m; ++pos) w *= b(bit(l, pos), bit(k, pos));
      s += w;
    }
    out.flat(l) = s;
  }
  return out;
}

SymTensor project_invariant(const SymTensor& a, const Eigen::Matrix2d& q, int n) {
  if (n < 1) throw std::invalid_argument("rotation order must be positive");
  if ((q.transpose() * q - Eigen::Matrix2d::Identity()).norm() > 1e-12)
    throw std::invalid_argument("rotation matrix is not orthogonal");
  Eigen::Matrix2d qn = Eigen::Matrix2d::Identity();
  for (int k = 0; k < n; ++k) qn = q * qn;
  if ((qn - Eigen::Matrix2d::Identity()).norm() > 1e-12)
    throw std::invalid_argument("Q^N differs from the identity");

  SymTensor acc = a;
  Eigen::Matrix2d qm = q;
  for (int M = 1; M < n; ++M) {
    acc += rotate_apply(a, qm);
    qm = q * qm;
  }
  acc *= 1.0 / n;
  return acc;
}

std::vector<SymTensor> invariant_basis(int order, int n, bool reflection_odd) {
  if (order == 2 && n >= 3 && !reflection_odd) {
    return {SymTensor::identity2()};
  }
  if (order == 3 && n == 3) {
    // E111 - 3 sym E122 and E222 - 3 sym E112 (unnormalized).
    SymTensor t1(3);
    t1.at({0, 0, 0}) = 1.0;
    t1.at({0, 1, 1}) = -1.0;
    t1.at({1, 0, 1}) = -1.0;
    t1.at({1, 1, 0}) = -1.0;
    if (reflection_odd) return {t1};
    SymTensor t2(3);
    t2.at({1, 1, 1}) = 1.0;
    t2.at({0, 0, 1}) = -1.0;
    t2.at({0, 1, 0}) = -1.0;
    t2.at({1, 0, 0}) = -1.0;
    return {t1, t2};
  }
  if (order == 4 && n == 3 && !reflection_odd) {
    SymTensor t = SymTensor::unit({0, 0, 0, 0}) + SymTensor::unit({1, 1, 1, 1}) +
                  2.0 * symmetrize(SymTensor::unit({0, 0, 1, 1}));
    return {t};
  }
  throw std::invalid_argument("unsupported (order, N, reflection) combination");
}

}  // namespace dislocore
