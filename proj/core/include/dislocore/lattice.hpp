#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace dislocore {

/// Integer lattice coordinates; Cartesian position is A * (i, j).
struct Coord {
  std::int32_t i = 0;
  std::int32_t j = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

inline std::uint64_t coord_key(Coord c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.i)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.j));
}

enum class LatticeKind { Square, Triangular };

enum class CorePlacement { Symmetric, Custom };

/// A planar Bravais lattice with a dislocation core position and its
/// point-group data (rotation about the core, in-plane line reflection).
struct LatticeSpec {
  LatticeKind kind = LatticeKind::Square;
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();  // columns = primitive vectors
  Eigen::Matrix2d A_inv = Eigen::Matrix2d::Identity();
  Eigen::Vector2d core = Eigen::Vector2d::Zero();   // x-hat, off-lattice
  int rot_order = 4;                                // N: Q^N = Id
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();  // rotation by 2*pi/N
  Eigen::Matrix2i Q_int = Eigen::Matrix2i::Identity();  // A^-1 Q A, exact
  Eigen::Matrix2d S = Eigen::Matrix2d::Identity();  // line reflection
  Eigen::Matrix2i S_int = Eigen::Matrix2i::Identity();
  bool symmetric_core = true;

  Eigen::Vector2d position(Coord c) const {
    return A * Eigen::Vector2d(static_cast<double>(c.i), static_cast<double>(c.j));
  }
  double radius(Coord c) const { return (position(c) - core).norm(); }
  double det() const { return A.determinant(); }
};

LatticeSpec build_lattice(LatticeKind kind, CorePlacement placement,
                          const Eigen::Vector2d& custom_core = Eigen::Vector2d::Zero());

/// Interaction directions with, for projected 3D models, the out-of-plane
/// lift structure of each column of atoms.
struct NeighborSet {
  std::vector<Coord> dirs_int;
  std::vector<Eigen::Vector2d> dirs;
  double cutoff = 0.0;

  // Permutation tables on dirs: index of Q*rho, -rho, S*rho.
  std::vector<int> rot_perm;
  std::vector<int> neg_perm;
  std::vector<int> refl_perm;  // empty when S does not stabilize the set

  // Projected-lattice data (empty for in-plane pair models).
  // lifts[a]: all z with |(rho_a, z)| < cutoff; base_height[a]: the column
  // offset z0 in [0, period); vertical_lifts: the rho = 0 column.
  std::vector<std::vector<double>> lifts;
  std::vector<double> base_height;
  std::vector<double> vertical_lifts;
  double period = 0.0;

  int size() const { return static_cast<int>(dirs.size()); }
  bool has_lifts() const { return period > 0.0; }
  double max_length() const;
  int index_of(Coord c) const;  // -1 if absent
};

/// Nearest-neighbor shell: 4 directions on the square lattice, 6 on the
/// triangular one.
NeighborSet nearest_neighbors(const LatticeSpec& spec);

/// Burgers modulus of the projected BCC model: the vertical period 3/(2*sqrt(2)).
double bcc_period();
/// Nearest-neighbor distance of the rescaled 3D BCC lattice.
double bcc_first_shell_distance();
/// Default interaction cutoff: 1.3 * first shell (captures two shells).
double bcc_default_cutoff();

/// Projects the rescaled BCC lattice onto the triangular lattice, collecting
/// every 3D direction shorter than `cutoff` as an (in-plane dir, height) pair.
NeighborSet bcc_lifts(double cutoff);

/// Finite supercell: all sites within distance R of the core, ordered
/// lexicographically by integer coordinates.
struct Domain {
  LatticeSpec spec;
  double R = 0.0;
  std::vector<Coord> sites;
  std::unordered_map<std::uint64_t, std::int32_t> index;

  int size() const { return static_cast<int>(sites.size()); }
  std::int32_t find(Coord c) const {
    auto it = index.find(coord_key(c));
    return it == index.end() ? -1 : it->second;
  }
};

Domain sites_in_ball(const LatticeSpec& spec, double R);

/// L x = Q (x - core) + core restricted to lattice sites. Throws when the
/// image is not a lattice site (asymmetric core).
Coord rotate_site(const LatticeSpec& spec, Coord x);

}  // namespace dislocore
