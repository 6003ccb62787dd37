#include "dislocore/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dislocore {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d q;
  q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return q;
}

Eigen::Matrix2i to_integer_matrix(const Eigen::Matrix2d& m, const char* what) {
  Eigen::Matrix2i out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double v = m(r, c);
      const double rv = std::round(v);
      if (std::abs(v - rv) > 1e-12)
        throw std::logic_error(std::string(what) + ": map is not integral on lattice coordinates");
      out(r, c) = static_cast<int>(rv);
    }
  return out;
}

bool is_lattice_site(const LatticeSpec& spec, const Eigen::Vector2d& pos, Coord* out) {
  const Eigen::Vector2d n = spec.A_inv * pos;
  const double ri = std::round(n.x());
  const double rj = std::round(n.y());
  if (std::abs(n.x() - ri) > 1e-9 || std::abs(n.y() - rj) > 1e-9) return false;
  if (out) *out = Coord{static_cast<std::int32_t>(ri), static_cast<std::int32_t>(rj)};
  return true;
}

}  // namespace

LatticeSpec build_lattice(LatticeKind kind, CorePlacement placement,
                          const Eigen::Vector2d& custom_core) {
  LatticeSpec spec;
  spec.kind = kind;
  if (kind == LatticeKind::Square) {
    spec.A = Eigen::Matrix2d::Identity();
    spec.rot_order = 4;
    spec.Q = rotation(M_PI / 2.0);
    spec.S = Eigen::Vector2d(1.0, -1.0).asDiagonal();  // reflection across e1
    spec.core = Eigen::Vector2d(0.5, 0.5);
  } else {
    spec.A << 1.0, 0.5, 0.0, kSqrt3 / 2.0;
    spec.rot_order = 3;
    spec.Q = rotation(2.0 * M_PI / 3.0);
    // Reflection across the line spanned by (sqrt(3)/2, 1/2).
    spec.S << 0.5, kSqrt3 / 2.0, kSqrt3 / 2.0, -0.5;
    spec.core = Eigen::Vector2d(0.5, kSqrt3 / 6.0);  // barycenter of a triangle
  }
  spec.A_inv = spec.A.inverse();
  spec.Q_int = to_integer_matrix(spec.A_inv * spec.Q * spec.A, "rotation");
  spec.S_int = to_integer_matrix(spec.A_inv * spec.S * spec.A, "reflection");

  if (placement == CorePlacement::Custom) {
    if (is_lattice_site(spec, custom_core, nullptr))
      throw std::invalid_argument("core placed on a lattice site");
    spec.core = custom_core;
    spec.symmetric_core = false;
  } else {
    spec.symmetric_core = true;
  }
  return spec;
}

double NeighborSet::max_length() const {
  double m = 0.0;
  for (const auto& d : dirs) m = std::max(m, d.norm());
  return m;
}

int NeighborSet::index_of(Coord c) const {
  for (int a = 0; a < size(); ++a)
    if (dirs_int[a] == c) return a;
  return -1;
}

namespace {

void build_permutations(const LatticeSpec& spec, NeighborSet& ns) {
  const int m = ns.size();
  ns.rot_perm.assign(m, -1);
  ns.neg_perm.assign(m, -1);
  ns.refl_perm.assign(m, -1);
  bool refl_ok = true;
  for (int a = 0; a < m; ++a) {
    const Eigen::Vector2i v(ns.dirs_int[a].i, ns.dirs_int[a].j);
    const Eigen::Vector2i q = spec.Q_int * v;
    const Eigen::Vector2i s = spec.S_int * v;
    ns.rot_perm[a] = ns.index_of(Coord{q.x(), q.y()});
    ns.neg_perm[a] = ns.index_of(Coord{-ns.dirs_int[a].i, -ns.dirs_int[a].j});
    const int ri = ns.index_of(Coord{s.x(), s.y()});
    if (ri < 0) refl_ok = false;
    ns.refl_perm[a] = ri;
    if (ns.rot_perm[a] < 0)
      throw std::logic_error("neighbor set is not closed under the lattice rotation");
    if (ns.neg_perm[a] < 0)
      throw std::logic_error("neighbor set is not closed under negation");
  }
  if (!refl_ok) ns.refl_perm.clear();
}

// Integer span check: some pair of directions must form a unimodular basis
// together with integer combinations; for our shells a gcd test suffices.
bool spans_lattice(const std::vector<Coord>& dirs) {
  int g = 0;
  for (std::size_t a = 0; a < dirs.size(); ++a)
    for (std::size_t b = a + 1; b < dirs.size(); ++b) {
      const int det = dirs[a].i * dirs[b].j - dirs[a].j * dirs[b].i;
      g = std::gcd(g, std::abs(det));
      if (g == 1) return true;
    }
  return g == 1;
}

}  // namespace

NeighborSet nearest_neighbors(const LatticeSpec& spec) {
  NeighborSet ns;
  if (spec.kind == LatticeKind::Square) {
    ns.dirs_int = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    ns.cutoff = 1.5;
  } else {
    ns.dirs_int = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
    ns.cutoff = 1.5;
  }
  std::sort(ns.dirs_int.begin(), ns.dirs_int.end(), [](Coord a, Coord b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (const auto& c : ns.dirs_int) ns.dirs.push_back(spec.position(c));
  build_permutations(spec, ns);
  if (!spans_lattice(ns.dirs_int)) throw std::logic_error("neighbor set does not span the lattice");
  return ns;
}

double bcc_period() { return 3.0 / (2.0 * std::sqrt(2.0)); }

double bcc_first_shell_distance() { return 3.0 / (2.0 * std::sqrt(2.0)); }

double bcc_default_cutoff() { return 1.3 * bcc_first_shell_distance(); }

NeighborSet bcc_lifts(double cutoff) {
  if (cutoff < 1.0)
    throw std::invalid_argument("bcc cutoff must be at least 1 (first projected shell)");
  const double p = bcc_period();

  // Generator of the rescaled, rotated BCC lattice; rows are Cartesian
  // components, columns the primitive vectors. Third row in units of p/3.
  Eigen::Matrix3d gen;
  gen << 1.0, 0.5, 0.0,
         0.0, kSqrt3 / 2.0, 0.0,
         p / 3.0, -p / 3.0, p;

  const LatticeSpec tri = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);

  NeighborSet ns;
  ns.cutoff = cutoff;
  ns.period = p;

  const int n12 = static_cast<int>(std::ceil(2.0 * cutoff)) + 1;
  const int n3 = static_cast<int>(std::ceil(cutoff / p)) + 2;

  struct Entry {
    Coord c;
    std::vector<double> zs;
  };
  std::vector<Entry> entries;
  for (int i = -n12; i <= n12; ++i)
    for (int j = -n12; j <= n12; ++j) {
      const Eigen::Vector2d rho = tri.A * Eigen::Vector2d(i, j);
      if (rho.norm() >= cutoff) continue;
      std::vector<double> zs;
      for (int k = -n3; k <= n3; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        const Eigen::Vector3d sigma = gen * Eigen::Vector3d(i, j, k);
        if (sigma.norm() < cutoff) zs.push_back(sigma.z());
      }
      if (i == 0 && j == 0) {
        ns.vertical_lifts = zs;
        continue;
      }
      if (!zs.empty()) entries.push_back({Coord{i, j}, std::move(zs)});
    }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.c.i != b.c.i ? a.c.i < b.c.i : a.c.j < b.c.j;
  });

  for (auto& e : entries) {
    std::sort(e.zs.begin(), e.zs.end());
    ns.dirs_int.push_back(e.c);
    ns.dirs.push_back(tri.position(e.c));
    ns.lifts.push_back(e.zs);
    // Column offset: the heights over a projected point form z0 + p*Z.
    const double z0 = (e.c.i - e.c.j) * (p / 3.0);
    ns.base_height.push_back(z0 - p * std::floor(z0 / p));
  }

  if (ns.dirs.empty()) throw std::invalid_argument("bcc cutoff excludes every projected direction");
  if (!spans_lattice(ns.dirs_int)) throw std::logic_error("projected directions do not span the lattice");
  build_permutations(tri, ns);
  return ns;
}

Domain sites_in_ball(const LatticeSpec& spec, double R) {
  if (R <= 0.0) throw std::invalid_argument("supercell radius must be positive");
  Domain dom;
  dom.spec = spec;
  dom.R = R;

  // Bounding box in integer coordinates.
  const Eigen::Vector2d c = spec.core;
  const double b1 = spec.A.col(1).y();  // A is upper triangular in both cases
  const int jlo = static_cast<int>(std::floor((c.y() - R) / b1)) - 1;
  const int jhi = static_cast<int>(std::ceil((c.y() + R) / b1)) + 1;
  for (int j = jlo; j <= jhi; ++j) {
    const double xoff = spec.A(0, 1) * j;
    const int ilo = static_cast<int>(std::floor(c.x() - R - xoff)) - 1;
    const int ihi = static_cast<int>(std::ceil(c.x() + R - xoff)) + 1;
    for (int i = ilo; i <= ihi; ++i) {
      const Coord s{i, j};
      if (spec.radius(s) <= R) dom.sites.push_back(s);
    }
  }
  std::sort(dom.sites.begin(), dom.sites.end(), [](Coord a, Coord b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  if (dom.sites.empty())
    throw std::invalid_argument("supercell radius too small: no lattice sites inside");
  dom.index.reserve(dom.sites.size());
  for (std::int32_t k = 0; k < static_cast<std::int32_t>(dom.sites.size()); ++k)
    dom.index.emplace(coord_key(dom.sites[k]), k);
  return dom;
}

Coord rotate_site(const LatticeSpec& spec, Coord x) {
  const Eigen::Vector2d image = spec.Q * (spec.position(x) - spec.core) + spec.core;
  Coord out;
  if (!is_lattice_site(spec, image, &out))
    throw std::domain_error("rotation about the core does not map this site into the lattice");
  return out;
}

}  // namespace dislocore
