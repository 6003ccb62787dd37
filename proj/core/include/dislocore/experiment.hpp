#pragma once

#include <optional>
#include <string>

#include "dislocore/analysis.hpp"
#include "dislocore/config.hpp"
#include "dislocore/energy.hpp"
#include "dislocore/lattice.hpp"
#include "dislocore/potentials.hpp"
#include "dislocore/predictor.hpp"
#include "dislocore/solve.hpp"

namespace dislocore {

/// Everything derived from a validated config before any solve runs:
/// lattice, stencil, potential, homogenized coefficients and predictor.
struct CaseSetup {
  LatticeSpec spec;
  std::unique_ptr<SitePotential> potential;
  CauchyBornTensors cb;
  Predictor predictor;
  SymmetryReport symmetry;
  double stability = 0.0;
};

CaseSetup build_case(const ExperimentConfig& cfg);

struct ExperimentResult {
  SolveReport report;
  FitResult decay_fit;
  FitResult decay_fit_mean;
  std::optional<FitResult> rate_fit;
  Moments residual_moments;
  double residual_slope = 0.0;
  int exit_code = 0;
};

/// Runs one experiment end to end and writes
///   solve_report.json, decay.csv, envelope.csv, residual.csv,
///   convergence.csv (with radii), summary.json and optional SVG plots
/// under cfg.out. Exit code 0: converged and all startup checks passed;
/// 1: solver failure (partial artifacts); 2: invalid configuration.
ExperimentResult run_experiment(ExperimentConfig cfg);

/// CSV writers with locale-independent, reproducible formatting.
std::string csv_decay(const std::vector<DecayPoint>& pts);
std::string csv_envelope(const DecaySeries& series);
std::string csv_convergence(const ConvergenceTable& table);

}  // namespace dislocore
