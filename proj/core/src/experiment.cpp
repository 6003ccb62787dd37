#include "dislocore/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dislocore/svg.hpp"
#include "dislocore/version.hpp"

namespace dislocore {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double target_decay_slope(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case CaseKind::SquareSym: return -3.0;
    case CaseKind::TriSym: return -4.0;
    case CaseKind::TriAsym: return -2.0;
    default: return -2.0 - cfg.order;
  }
}

double target_rate(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case CaseKind::SquareSym: return -2.0;
    case CaseKind::TriSym: return -3.0;
    case CaseKind::TriAsym: return -1.0;
    default: return -1.0 - cfg.order;
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

CaseSetup build_case(const ExperimentConfig& cfg) {
  LatticeSpec spec;
  switch (cfg.kind) {
    case CaseKind::SquareSym:
      spec = build_lattice(LatticeKind::Square, CorePlacement::Symmetric);
      break;
    case CaseKind::TriSym:
    case CaseKind::BccEasy:
    case CaseKind::BccHard:
      spec = build_lattice(LatticeKind::Triangular, CorePlacement::Symmetric);
      break;
    case CaseKind::TriAsym:
      spec = build_lattice(LatticeKind::Triangular, CorePlacement::Custom,
                           Eigen::Vector2d(0.25, 0.125));
      break;
  }

  std::unique_ptr<SitePotential> pot;
  if (cfg.resolved_potential() == "pair-sin2") {
    pot = std::make_unique<PairSin2Potential>(nearest_neighbors(spec), cfg.pair_scale);
  } else {
    EamBccPotential::Params p;
    if (cfg.cutoff > 0.0) p.cutoff = cfg.cutoff;
    if (cfg.k_rho > 0.0) p.k_rho = cfg.k_rho;
    if (cfg.k_phi >= 0.0) p.k_phi = cfg.k_phi;
    pot = std::make_unique<EamBccPotential>(p);
  }

  CaseSetup setup{std::move(spec), std::move(pot), {}, Predictor(Eigen::Vector2d::Zero(), 1.0),
                  {}, 0.0};

  // Startup gate: declared symmetries must hold empirically, the homogenized
  // tensors must have the symmetry-implied structure, and the homogeneous
  // lattice must test stable.
  setup.symmetry = check_symmetries(*setup.potential, 50, cfg.seed);
  setup.cb = cauchy_born(*setup.potential, setup.spec);
  setup.stability = stability_estimate(*setup.potential, setup.spec, 6, 8.0, cfg.seed);
  if (setup.stability <= 0.0)
    throw std::runtime_error("configured potential fails the lattice stability probe");
  if (cfg.is_bcc() && std::abs(setup.cb.c_quad) < 1e-8)
    throw std::runtime_error(
        "configured potential has |c_quad| < 1e-8; corrected predictors would test nothing");

  const double p = setup.potential->period();
  const double burgers = cfg.kind == CaseKind::BccEasy ? -p : p;
  setup.predictor =
      Predictor(setup.spec.core, burgers, cfg.order, setup.cb.c_lin, setup.cb.c_quad);
  return setup;
}

std::string csv_decay(const std::vector<DecayPoint>& pts) {
  std::ostringstream o;
  o << "x1,x2,r,du_norm\n";
  for (const auto& p : pts)
    o << fmt(p.pos.x()) << "," << fmt(p.pos.y()) << "," << fmt(p.r) << "," << fmt(p.mag) << "\n";
  return o.str();
}

std::string csv_envelope(const DecaySeries& s) {
  std::ostringstream o;
  o << "bin_center,env_max,env_mean,count\n";
  for (const auto& b : s.bins)
    o << fmt(b.center) << "," << fmt(b.max_mag) << "," << fmt(b.mean_mag) << "," << b.count << "\n";
  return o.str();
}

std::string csv_convergence(const ConvergenceTable& t) {
  std::ostringstream o;
  o << "R,h1_error,converged\n";
  for (const auto& row : t.rows)
    o << fmt(row.R) << "," << fmt(row.h1_error) << "," << (row.converged ? 1 : 0) << "\n";
  return o.str();
}

ExperimentResult run_experiment(ExperimentConfig cfg) {
  validate(cfg);
  const std::filesystem::path outdir(cfg.out);
  std::filesystem::create_directories(outdir);

  CaseSetup setup = build_case(cfg);
  ExperimentResult result;

  const Domain dom = sites_in_ball(setup.spec, cfg.R);
  const LatticeSystem sys(dom, *setup.potential, &setup.predictor, cfg.jobs);
  SolveConfig scfg = cfg.solve_config();
  auto [u, rep] = solve(sys, scfg);
  result.report = rep;

  const auto points = sys.strain_points(u.values);
  const double rmax = cfg.resolved_fit_rmax();
  const DecaySeries series = decay_envelope(points, cfg.fit_rmin, rmax, cfg.bins);
  result.decay_fit = series.fit_max;
  result.decay_fit_mean = series.fit_mean;

  const ResidualField resid = sys.linear_residual(u);
  result.residual_moments = moments(resid);
  std::vector<DecayPoint> rpts;
  rpts.reserve(resid.sites.size());
  for (std::size_t k = 0; k < resid.sites.size(); ++k)
    rpts.push_back({resid.rel_pos[k] + resid.core, resid.radius[k],
                    std::abs(resid.values[static_cast<Eigen::Index>(k)])});
  const double resid_rmax = std::min(rmax, resid.valid_radius);
  const DecaySeries rseries = decay_envelope(rpts, cfg.fit_rmin, resid_rmax, cfg.bins);
  result.residual_slope = rseries.fit_max.slope;

  write_file(outdir / "solve_report.json", rep.to_json() + "\n");
  write_file(outdir / "decay.csv", csv_decay(points));
  write_file(outdir / "envelope.csv", csv_envelope(series));
  write_file(outdir / "residual.csv", csv_decay(rpts));

  std::optional<ConvergenceTable> table;
  if (!cfg.radii.empty()) {
    const SupercellStudy study =
        supercell_study(setup.spec, *setup.potential, &setup.predictor, cfg.radii, cfg.R_ref, scfg);
    table = to_table(study);
    write_file(outdir / "convergence.csv", csv_convergence(*table));
    int usable = 0;
    for (const auto& row : table->rows)
      if (row.converged && row.h1_error > 0.0) ++usable;
    if (usable >= 3) result.rate_fit = fit_rate(*table);
  }

  nlohmann::json j;
  j["case"] = to_string(cfg.kind);
  j["order"] = cfg.order;
  j["R"] = cfg.R;
  j["slope"] = result.decay_fit.slope;
  j["slope_mean"] = result.decay_fit_mean.slope;
  j["slope_target"] = target_decay_slope(cfg);
  j["residual_slope"] = result.residual_slope;
  if (result.rate_fit) {
    j["rate"] = result.rate_fit->slope;
    j["rate_target"] = target_rate(cfg);
  }
  j["m0"] = result.residual_moments.m0;
  j["m1"] = {result.residual_moments.m1.x(), result.residual_moments.m1.y()};
  j["m2_anisotropy"] = result.residual_moments.m2_anisotropy;
  j["moment_bounds"] = {{"m1", result.residual_moments.bound_m1},
                        {"m2_anisotropy", result.residual_moments.bound_m2_anisotropy},
                        {"abs_sum", result.residual_moments.abs_sum}};
  j["c_lin"] = setup.cb.c_lin;
  j["c_quad"] = setup.cb.c_quad;
  j["stability_estimate"] = setup.stability;
  j["burgers"] = setup.predictor.burgers();
  j["iterations"] = rep.iterations;
  j["residual_inf"] = rep.residual_inf;
  j["energy"] = rep.energy;
  j["converged"] = rep.converged;
  {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    j["config_hash"] = hash;
  }
  j["version"] = kVersion;
  write_file(outdir / "summary.json", j.dump(2) + "\n");

  if (cfg.plots) {
    PlotSeries dots{"|Du|", "#3366cc", false, 0.25, {}};
    for (const auto& p : points)
      if (p.r > 0 && p.mag > 0) dots.xy.emplace_back(p.r, p.mag);
    PlotSeries env{"envelope", "#cc3322", true, 1.0, {}};
    for (const auto& b : series.bins) env.xy.emplace_back(b.center, b.max_mag);
    GuideLine guide;
    guide.slope = target_decay_slope(cfg);
    if (!series.bins.empty()) {
      guide.x0 = series.bins.front().center;
      guide.y0 = series.bins.front().max_mag;
    }
    char lbl[48];
    std::snprintf(lbl, sizeof(lbl), "slope %.1f", guide.slope);
    guide.label = lbl;
    write_file(outdir / "decay.svg",
               svg_loglog(std::string("corrector decay: ") + to_string(cfg.kind), "r", "|Du|",
                          {dots, env}, {guide}));
    if (table) {
      PlotSeries err{"H1 error", "#228833", true, 1.0, {}};
      for (const auto& row : table->rows)
        if (row.h1_error > 0) err.xy.emplace_back(row.R, row.h1_error);
      GuideLine g2;
      g2.slope = target_rate(cfg);
      if (!err.xy.empty()) {
        g2.x0 = err.xy.front().first;
        g2.y0 = err.xy.front().second;
      }
      std::snprintf(lbl, sizeof(lbl), "rate %.1f", g2.slope);
      g2.label = lbl;
      write_file(outdir / "convergence.svg",
                 svg_loglog(std::string("supercell convergence: ") + to_string(cfg.kind), "R",
                            "H1 error", {err}, {g2}));
    }
  }

  result.exit_code = rep.converged ? 0 : 1;
  return result;
}

}  // namespace dislocore
