// Command-line driver: experiment runner, convergence studies, homogenized
// coefficient inspection, symmetry checks and SVG plotting of emitted CSVs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dislocore/experiment.hpp"
#include "dislocore/svg.hpp"
#include "dislocore/version.hpp"

namespace {

using namespace dislocore;

struct CliOptions {
  std::string config_path;
  std::string case_name;
  int order = -1;
  double R = 0.0;
  std::string radii;
  double Rref = 0.0;
  std::string solver;
  double tol = 0.0;
  std::string potential;
  double cutoff = 0.0;
  double k_rho = 0.0;
  double k_phi = -1.0;
  std::string out;
  long long seed = -1;
  int jobs = 0;
  bool no_plots = false;
};

void add_common(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--config", o.config_path, "preset/config file (key = value lines)");
  cmd->add_option("--case", o.case_name, "square-sym|tri-sym|tri-asym|bcc-easy|bcc-hard");
  cmd->add_option("--order", o.order, "predictor order 0|1|2");
  cmd->add_option("--R", o.R, "supercell radius");
  cmd->add_option("--radii", o.radii, "comma-separated study radii");
  cmd->add_option("--Rref", o.Rref, "reference radius for studies");
  cmd->add_option("--solver", o.solver, "newton|lbfgs");
  cmd->add_option("--tol", o.tol, "residual tolerance (infinity norm)");
  cmd->add_option("--potential", o.potential, "pair-sin2|eam-bcc");
  cmd->add_option("--cutoff", o.cutoff, "eam-bcc interaction cutoff");
  cmd->add_option("--k-rho", o.k_rho, "eam-bcc density prefactor");
  cmd->add_option("--k-phi", o.k_phi, "eam-bcc repulsion prefactor");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "rng seed");
  cmd->add_option("--jobs", o.jobs, "worker threads / concurrent solves");
  cmd->add_flag("--no-plots", o.no_plots, "skip SVG output");
}

ExperimentConfig merge(const CliOptions& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = parse_config_file(o.config_path);
  if (!o.case_name.empty()) cfg.kind = case_from_string(o.case_name);
  if (o.order >= 0) cfg.order = o.order;
  if (o.R > 0.0) cfg.R = o.R;
  if (!o.radii.empty()) {
    cfg.radii.clear();
    std::stringstream ss(o.radii);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.radii.push_back(std::stod(item));
  }
  if (o.Rref > 0.0) cfg.R_ref = o.Rref;
  if (!o.solver.empty()) cfg.solver = o.solver;
  if (o.tol > 0.0) cfg.tol = o.tol;
  if (!o.potential.empty()) cfg.potential = o.potential;
  if (o.cutoff > 0.0) cfg.cutoff = o.cutoff;
  if (o.k_rho > 0.0) cfg.k_rho = o.k_rho;
  if (o.k_phi >= 0.0) cfg.k_phi = o.k_phi;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (o.no_plots) cfg.plots = false;
  return cfg;
}

int do_run(const CliOptions& o, bool require_radii) {
  ExperimentConfig cfg = merge(o);
  if (require_radii && cfg.radii.empty()) {
    std::cerr << "converge: --radii is required\n";
    return 2;
  }
  ExperimentResult res = run_experiment(cfg);
  std::printf("case=%s order=%d R=%g solver=%s converged=%d iterations=%d residual=%.3e\n",
              to_string(cfg.kind), cfg.order, cfg.R, cfg.resolved_solver().c_str(),
              res.report.converged ? 1 : 0, res.report.iterations, res.report.residual_inf);
  std::printf("decay slope = %+.3f (envelope), %+.3f (mean)\n", res.decay_fit.slope,
              res.decay_fit_mean.slope);
  if (res.rate_fit) std::printf("convergence rate = %+.3f\n", res.rate_fit->slope);
  std::printf("artifacts in %s\n", cfg.out.c_str());
  return res.exit_code;
}

int do_tensors(const CliOptions& o, bool dump_bases) {
  ExperimentConfig cfg = merge(o);
  if (!o.case_name.empty() || !o.potential.empty()) {
    // fallthrough: case/potential resolved below
  }
  // Allow `--potential pair-sin2 --lattice square` style selection via --case.
  CaseSetup setup = build_case(cfg);
  std::printf("potential = %s\n", setup.potential->name().c_str());
  std::printf("c_lin  = %.12g\n", setup.cb.c_lin);
  std::printf("c_quad = %.12g\n", setup.cb.c_quad);
  std::printf("stability_estimate = %.6g\n", setup.stability);
  if (dump_bases) {
    const struct {
      int m, n;
      bool refl;
    } combos[] = {{2, 3, false}, {3, 3, false}, {3, 3, true}, {4, 3, false}};
    for (const auto& c : combos) {
      const auto basis = invariant_basis(c.m, c.n, c.refl);
      std::printf("invariant basis m=%d N=%d%s: dimension %zu\n", c.m, c.n,
                  c.refl ? " reflection-odd" : "", basis.size());
      for (const auto& t : basis) {
        std::printf(" ");
        for (int k = 0; k < t.size(); ++k) std::printf(" %+.3f", t.flat(k));
        std::printf("\n");
      }
    }
  }
  return 0;
}

int do_check_symmetry(const CliOptions& o, int trials) {
  ExperimentConfig cfg = merge(o);
  CaseSetup setup = build_case(cfg);
  const SymmetryReport rep = check_symmetries(*setup.potential, trials, cfg.seed);
  std::printf("potential = %s (trials = %d)\n", setup.potential->name().c_str(), trials);
  std::printf("rotational      = %s\n", rep.rotational ? "true" : "false");
  std::printf("mirror          = %s\n", rep.mirror ? "true" : "false");
  std::printf("line_reflection = %s\n", rep.line_reflection ? "true" : "false");
  std::printf("max violation   = %.3e\n", rep.max_violation);
  return 0;
}

int do_plot(const std::string& input, const std::string& output) {
  std::ifstream in(input);
  if (!in) {
    std::cerr << "plot: cannot open " << input << "\n";
    return 2;
  }
  std::string header;
  std::getline(in, header);
  const bool convergence = header.rfind("R,", 0) == 0;
  PlotSeries s;
  s.label = convergence ? "H1 error" : "|Du|";
  s.line = convergence;
  s.opacity = convergence ? 1.0 : 0.3;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (...) {
        vals.push_back(0.0);
      }
    }
    if (convergence && vals.size() >= 2) s.xy.emplace_back(vals[0], vals[1]);
    if (!convergence && vals.size() >= 4) s.xy.emplace_back(vals[2], vals[3]);
  }
  const std::string svg = svg_loglog(input, convergence ? "R" : "r",
                                     convergence ? "H1 error" : "|Du|", {s});
  std::ofstream out(output, std::ios::binary);
  out << svg;
  std::printf("wrote %s\n", output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anti-plane screw dislocation lattice statics"};
  app.set_version_flag("--version", dislocore::kVersion);
  app.require_subcommand(1);

  CliOptions opt;
  auto* run = app.add_subcommand("run", "equilibrate one case and analyze decay");
  add_common(run, opt);
  auto* conv = app.add_subcommand("converge", "supercell convergence study");
  add_common(conv, opt);

  auto* tensors = app.add_subcommand("tensors", "print homogenized coefficients");
  bool dump_bases = false;
  add_common(tensors, opt);
  tensors->add_flag("--bases", dump_bases, "also dump the invariant tensor bases");
  std::string lattice_name;
  tensors->add_option("--lattice", lattice_name, "square|triangular (alias for --case)");

  auto* chk = app.add_subcommand("check-symmetry", "verify declared symmetries on random strains");
  int trials = 200;
  add_common(chk, opt);
  chk->add_option("--trials", trials, "number of random strain tuples");

  auto* plot = app.add_subcommand("plot", "render an emitted CSV as a log-log SVG");
  std::string plot_in, plot_out = "plot.svg";
  plot->add_option("input", plot_in, "decay.csv or convergence.csv")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(opt, false);
    if (*conv) return do_run(opt, true);
    if (*tensors) {
      if (!lattice_name.empty() && opt.case_name.empty())
        opt.case_name = lattice_name == "square" ? "square-sym" : "tri-sym";
      return do_tensors(opt, dump_bases);
    }
    if (*chk) return do_check_symmetry(opt, trials);
    if (*plot) return do_plot(plot_in, plot_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
