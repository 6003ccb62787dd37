#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>

#include "dislocore/lattice.hpp"
#include "dislocore/tensors.hpp"

namespace dislocore {

struct SymmetryFlags {
  bool rotational = false;
  bool mirror = false;
  bool line_reflection = false;
};

/// Site energy V over strain tuples (D_rho u)_{rho in R}, smooth and
/// slip-periodic: shifting any single strain entry by the period leaves
/// the value unchanged.
class SitePotential {
 public:
  virtual ~SitePotential() = default;

  const NeighborSet& neighbors() const { return neighbors_; }
  double period() const { return period_; }
  const SymmetryFlags& declared_symmetries() const { return flags_; }
  const std::string& name() const { return name_; }
  int arity() const { return neighbors_.size(); }

  /// value / grad (length m) / hess (m*m row-major); null outputs are skipped.
  virtual void eval(const double* strain, double* value, double* grad,
                    double* hess) const = 0;

  /// V(A) - V(0), organized to avoid cancellation of the large constant part.
  virtual double value_delta(const double* strain) const;

  double value(const double* strain) const {
    double v = 0.0;
    eval(strain, &v, nullptr, nullptr);
    return v;
  }
  double value(const Eigen::VectorXd& strain) const { return value(strain.data()); }

 protected:
  SitePotential(NeighborSet neighbors, double period, SymmetryFlags flags, std::string name)
      : neighbors_(std::move(neighbors)), period_(period), flags_(flags), name_(std::move(name)) {}

  NeighborSet neighbors_;
  double period_;
  SymmetryFlags flags_;
  std::string name_;
};

/// Nearest-neighbor pair model sum_rho scale * sin^2(pi * D_rho u), period 1.
class PairSin2Potential : public SitePotential {
 public:
  PairSin2Potential(NeighborSet neighbors, double scale = 1.0);
  void eval(const double* strain, double* value, double* grad, double* hess) const override;
  double value_delta(const double* strain) const override;
  double scale() const { return scale_; }

 private:
  double scale_;
};

/// Projected anti-plane Finnis-Sinclair model on the triangular lattice:
///   V = -sqrt(sum rho_e(|sigma|)) + sum phi(|sigma|)
/// summed over the 3D neighbor columns, with
///   rho_e(r) = k_rho (d-r)^2 C(r/d),  phi(r) = k_phi (d-r)^3 C(r/d),
///   C(t) = exp(1 - 1/(1-t^2)) for t < 1, else 0.
/// The column sums are enumerated dynamically in the height coordinate, so
/// slip periodicity holds exactly for arbitrary strains.
class EamBccPotential : public SitePotential {
 public:
  struct Params {
    double cutoff = 0.0;  // 0 -> bcc_default_cutoff()
    double k_rho = 1.0;
    double k_phi = 8.0;
  };

  EamBccPotential() : EamBccPotential(Params{}) {}
  explicit EamBccPotential(Params params);
  void eval(const double* strain, double* value, double* grad, double* hess) const override;
  double value_delta(const double* strain) const override;
  const Params& params() const { return params_; }

 private:
  struct PairTerms {  // f, f', f'' of both radial functions along one column
    double rho = 0, drho = 0, ddrho = 0;
    double phi = 0, dphi = 0, ddphi = 0;
  };
  PairTerms column_sums(int dir, double strain) const;

  Params params_;
  double embed_const_ = 0.0;  // vertical-column contribution to the density sum
  double pair_const_ = 0.0;
  std::vector<double> zero_rho_;  // per-dir column density at zero strain
  std::vector<double> zero_phi_;
};

struct SymmetryReport {
  bool rotational = false;
  bool mirror = false;
  bool line_reflection = false;
  double max_violation = 0.0;
};

/// Tests the three symmetries on random strain tuples in [-p/2, p/2]^R at
/// tolerance 1e-10. Throws if a declared symmetry fails empirically.
SymmetryReport check_symmetries(const SitePotential& pot, int trials, std::uint64_t seed = 1234);

struct CauchyBornTensors {
  SymTensor W2 = SymTensor(2);
  SymTensor W3 = SymTensor(3);
  double c_lin = 0.0;
  double c_quad = 0.0;
};

/// Second/third gradients of the homogenized energy density
/// W(F) = V(F . R) / det A at F = 0, by fourth-order finite differences
/// with a Richardson step-halving check. Verifies the symmetry-implied
/// structure (W2 proportional to the identity; W3 zero under mirror
/// symmetry, proportional to E111 - 3 sym E122 under line reflection).
CauchyBornTensors cauchy_born(const SitePotential& pot, const LatticeSpec& spec);

/// Smallest Rayleigh quotient <H_hom u, u> / |u|_{H1}^2 over random compactly
/// supported fields; positive values are evidence of lattice stability.
double stability_estimate(const SitePotential& pot, const LatticeSpec& spec, int trial_fields,
                          double domain_R, std::uint64_t seed = 2024);

}  // namespace dislocore
