#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dislocore/solve.hpp"

namespace dislocore {

enum class CaseKind { SquareSym, TriSym, TriAsym, BccEasy, BccHard };

const char* to_string(CaseKind k);
CaseKind case_from_string(const std::string& s);

/// One experiment: a lattice/core case, a predictor order, the supercell
/// radius, optional convergence-study radii and solver/model parameters.
/// Serializes to a line-oriented `key = value` file; parsing then
/// serializing is idempotent (normal form).
struct ExperimentConfig {
  CaseKind kind = CaseKind::TriSym;
  int order = 0;
  double R = 64.0;
  std::vector<double> radii;   // empty: no convergence study
  double R_ref = 0.0;          // 0: 4 * max(radii)
  std::string solver;          // "newton" | "lbfgs"; empty: per-case default
  double tol = 0.0;            // 0: per-method default
  int max_iter = 200;
  std::string potential;       // "pair-sin2" | "eam-bcc"; empty: per-case default
  double cutoff = 0.0;         // 0: model default
  double k_rho = 0.0;          // 0: model default
  double k_phi = -1.0;         // <0: model default
  double pair_scale = 1.0;
  double fit_rmin = 10.0;
  double fit_rmax = 0.0;       // 0: R/3
  int bins = 12;
  std::string out = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
  bool plots = true;

  bool is_bcc() const { return kind == CaseKind::BccEasy || kind == CaseKind::BccHard; }
  std::string resolved_solver() const { return !solver.empty() ? solver : (is_bcc() ? "lbfgs" : "newton"); }
  std::string resolved_potential() const {
    return !potential.empty() ? potential : (is_bcc() ? "eam-bcc" : "pair-sin2");
  }
  double resolved_fit_rmax() const { return fit_rmax > 0.0 ? fit_rmax : R / 3.0; }
  SolveConfig solve_config() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a hash of the normalized serialization, for provenance stamps.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Throws std::invalid_argument on inconsistent settings; clamps the
/// predictor order to 0 for the mirror-symmetric cases.
void validate(ExperimentConfig& cfg);

}  // namespace dislocore
