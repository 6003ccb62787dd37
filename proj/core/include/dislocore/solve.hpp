#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "dislocore/energy.hpp"

namespace dislocore {

enum class SolveMethod { Newton, Lbfgs };

struct SolveConfig {
  SolveMethod method = SolveMethod::Newton;
  double tol_inf = 0.0;   // 0 -> 1e-8 for Newton, 1e-6 for LBFGS
  int max_iter = 200;
  double cg_rtol = 1e-10;
  int cg_maxit_per_site = 10;
  int lbfgs_memory = 20;
  int threads = 0;
  bool verbose = false;

  double resolved_tol() const {
    if (tol_inf > 0.0) return tol_inf;
    return method == SolveMethod::Newton ? 1e-8 : 1e-6;
  }
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  double residual_inf = 0.0;
  double energy = 0.0;
  bool converged = false;
  double wall_seconds = 0.0;
  int inner_iterations = 0;  // CG iterations (Newton) or energy evaluations (LBFGS)
  std::string note;
  std::vector<double> energy_history;  // energy after each accepted step

  std::string to_json() const;
};

/// Solve the clamped supercell equilibration by a damped Newton scheme with
/// conjugate-gradient linear solves preconditioned by the homogeneous-lattice
/// Hessian. Falls back to LBFGS when CG detects an indefinite Hessian.
std::pair<DisplacementField, SolveReport> newton_solve(const LatticeSystem& sys, SolveConfig cfg,
                                                       const Eigen::VectorXd* initial = nullptr);

/// Preconditioned LBFGS with a strong-Wolfe line search. The preconditioner
/// applies the inverse homogeneous Hessian.
std::pair<DisplacementField, SolveReport> lbfgs_solve(const LatticeSystem& sys, SolveConfig cfg,
                                                      const Eigen::VectorXd* initial = nullptr);

std::pair<DisplacementField, SolveReport> solve(const LatticeSystem& sys, SolveConfig cfg);

struct StudyRow {
  double R = 0.0;
  double h1_error = 0.0;
  bool converged = false;
  double energy = 0.0;
  int iterations = 0;
};

struct SupercellStudy {
  std::vector<StudyRow> rows;
  double R_ref = 0.0;
  bool ref_converged = false;
  double window_radius = 0.0;  // error norms restricted to this ball
};

/// Solves the same problem on nested supercells plus a reference cell and
/// reports the H1 distance to the reference over a fixed observation window
/// (the ball of the largest study radius).
SupercellStudy supercell_study(const LatticeSpec& spec, const SitePotential& pot,
                               const Predictor* pred, const std::vector<double>& radii,
                               double R_ref, SolveConfig cfg);

}  // namespace dislocore
