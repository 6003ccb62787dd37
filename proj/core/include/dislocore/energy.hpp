#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "dislocore/lattice.hpp"
#include "dislocore/potentials.hpp"
#include "dislocore/predictor.hpp"

namespace dislocore {

/// Scalar corrector values on the free sites of a supercell; zero outside.
struct DisplacementField {
  const Domain* domain = nullptr;
  Eigen::VectorXd values;

  static DisplacementField zero(const Domain& dom) {
    return {&dom, Eigen::VectorXd::Zero(dom.size())};
  }
};

/// Linear residual values, with the radius beyond which boundary clamping
/// contaminates the data.
struct ResidualField {
  std::vector<Coord> sites;
  std::vector<Eigen::Vector2d> rel_pos;  // position - core
  std::vector<double> radius;
  Eigen::VectorXd values;
  Eigen::Vector2d core = Eigen::Vector2d::Zero();
  double valid_radius = 0.0;
};

struct Moments {
  double m0 = 0.0;
  Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
  double m2_anisotropy = 0.0;
  double abs_sum = 0.0;          // sum |f|
  // Outermost-annulus contributions, used as truncation yardsticks.
  double annulus_abs = 0.0;
  double bound_m1 = 0.0;
  double bound_m2 = 0.0;
  double bound_m2_anisotropy = 0.0;
  bool converged = true;         // outer annulus carries < 10% of sum |f| |x|^2
};

struct DecayPoint {
  Eigen::Vector2d pos;
  double r = 0.0;
  double mag = 0.0;
};

/// Binds a supercell, interaction stencil, site potential and (optionally)
/// a far-field predictor. Precomputes the evaluation halo, per-site neighbor
/// index tables and wrapped predictor strains; all energy operations run off
/// these tables with deterministic reductions.
class LatticeSystem {
 public:
  LatticeSystem(const Domain& domain, const SitePotential& pot, const Predictor* pred = nullptr,
                int threads = 0);

  const Domain& domain() const { return *domain_; }
  const SitePotential& potential() const { return *pot_; }
  const Predictor* predictor() const { return pred_; }
  int free_count() const { return domain_->size(); }
  int eval_count() const { return static_cast<int>(eval_sites_.size()); }

  /// Total energy difference relative to the bare predictor state.
  double energy_diff(const Eigen::VectorXd& u) const;

  /// Derivative of the energy with respect to each free value (atomistic
  /// force with reversed sign).
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;

  /// Matrix-free action of the state Hessian at displacement u.
  Eigen::VectorXd hessian_apply(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Sparse symmetric state Hessian on the free sites.
  Eigen::SparseMatrix<double> assemble_hessian(const Eigen::VectorXd& u) const;

  /// Hessian of the homogeneous lattice (zero predictor, zero displacement),
  /// clamped to the free sites.
  Eigen::SparseMatrix<double> homogeneous_hessian() const;

  /// (sum over sites |D u|^2)^(1/2) with u extended by zero.
  double h1_norm(const Eigen::VectorXd& u) const;

  /// f_u = -div(grad^2 V(0) [D u]) on the full support of the field.
  ResidualField linear_residual(const DisplacementField& u) const;

  /// Per-site (r, |D u|) samples for decay analysis.
  std::vector<DecayPoint> strain_points(const Eigen::VectorXd& u) const;
  /// Same for the wrapped predictor strain itself.
  std::vector<DecayPoint> predictor_strain_points() const;

  /// Total strain tuple (wrapped predictor + field differences) at an
  /// evaluation site; mainly for tests.
  Eigen::VectorXd total_strain(int eval_row, const Eigen::VectorXd& u) const;
  Coord eval_site(int eval_row) const { return eval_sites_[static_cast<std::size_t>(eval_row)]; }
  int eval_row_of_free(int free_index) const { return free_to_eval_[static_cast<std::size_t>(free_index)]; }

 private:
  void gather_strain(std::size_t row, const Eigen::VectorXd& u, double* out) const;

  const Domain* domain_;
  const SitePotential* pot_;
  const Predictor* pred_;
  int threads_;
  int m_;  // stencil arity

  std::vector<Coord> eval_sites_;
  std::vector<std::int32_t> eval_free_index_;   // -1 for halo sites
  std::vector<std::int32_t> free_to_eval_;
  std::vector<std::int32_t> nbr_free_;          // [row*m + a] free index of site+rho_a
  std::vector<std::int32_t> nbr_eval_;          // [row*m + a] eval row of site+rho_a
  std::vector<double> pred_strain_;             // [row*m + a]
  std::vector<double> base_energy_;             // value_delta at the predictor state
};

Moments moments(const ResidualField& f);

/// Orbit average over the rotation group about the core; the domain must be
/// rotation-closed (symmetric core).
DisplacementField symmetrize_rotational(const DisplacementField& u);

}  // namespace dislocore
