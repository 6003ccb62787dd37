#include "dislocore/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dislocore {

const char* to_string(CaseKind k) {
  switch (k) {
    case CaseKind::SquareSym: return "square-sym";
    case CaseKind::TriSym: return "tri-sym";
    case CaseKind::TriAsym: return "tri-asym";
    case CaseKind::BccEasy: return "bcc-easy";
    case CaseKind::BccHard: return "bcc-hard";
  }
  return "?";
}

CaseKind case_from_string(const std::string& s) {
  if (s == "square-sym") return CaseKind::SquareSym;
  if (s == "tri-sym") return CaseKind::TriSym;
  if (s == "tri-asym") return CaseKind::TriAsym;
  if (s == "bcc-easy") return CaseKind::BccEasy;
  if (s == "bcc-hard") return CaseKind::BccHard;
  throw std::invalid_argument("unknown case: " + s +
                              " (expected square-sym|tri-sym|tri-asym|bcc-easy|bcc-hard)");
}

SolveConfig ExperimentConfig::solve_config() const {
  SolveConfig sc;
  const std::string m = resolved_solver();
  if (m == "newton")
    sc.method = SolveMethod::Newton;
  else if (m == "lbfgs")
    sc.method = SolveMethod::Lbfgs;
  else
    throw std::invalid_argument("unknown solver: " + m);
  sc.tol_inf = tol;
  sc.max_iter = max_iter;
  sc.threads = jobs;
  return sc;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "case") cfg.kind = case_from_string(val);
      else if (key == "order") cfg.order = std::stoi(val);
      else if (key == "R") cfg.R = std::stod(val);
      else if (key == "radii") cfg.radii = parse_list(val);
      else if (key == "Rref") cfg.R_ref = std::stod(val);
      else if (key == "solver") cfg.solver = val;
      else if (key == "tol") cfg.tol = std::stod(val);
      else if (key == "max_iter") cfg.max_iter = std::stoi(val);
      else if (key == "potential") cfg.potential = val;
      else if (key == "cutoff") cfg.cutoff = std::stod(val);
      else if (key == "k_rho") cfg.k_rho = std::stod(val);
      else if (key == "k_phi") cfg.k_phi = std::stod(val);
      else if (key == "pair_scale") cfg.pair_scale = std::stod(val);
      else if (key == "fit_rmin") cfg.fit_rmin = std::stod(val);
      else if (key == "fit_rmax") cfg.fit_rmax = std::stod(val);
      else if (key == "bins") cfg.bins = std::stoi(val);
      else if (key == "out") cfg.out = val;
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "jobs") cfg.jobs = std::stoi(val);
      else if (key == "plots") cfg.plots = (val == "true" || val == "1");
      else throw std::invalid_argument("unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return parse_config(in);
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "case = " << to_string(cfg.kind) << "\n";
  out << "order = " << cfg.order << "\n";
  out << "R = " << fmt_double(cfg.R) << "\n";
  if (!cfg.radii.empty()) {
    out << "radii = ";
    for (std::size_t k = 0; k < cfg.radii.size(); ++k)
      out << (k ? "," : "") << fmt_double(cfg.radii[k]);
    out << "\n";
  }
  if (cfg.R_ref > 0.0) out << "Rref = " << fmt_double(cfg.R_ref) << "\n";
  if (!cfg.solver.empty()) out << "solver = " << cfg.solver << "\n";
  if (cfg.tol > 0.0) out << "tol = " << fmt_double(cfg.tol) << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  if (!cfg.potential.empty()) out << "potential = " << cfg.potential << "\n";
  if (cfg.cutoff > 0.0) out << "cutoff = " << fmt_double(cfg.cutoff) << "\n";
  if (cfg.k_rho > 0.0) out << "k_rho = " << fmt_double(cfg.k_rho) << "\n";
  if (cfg.k_phi >= 0.0) out << "k_phi = " << fmt_double(cfg.k_phi) << "\n";
  out << "pair_scale = " << fmt_double(cfg.pair_scale) << "\n";
  out << "fit_rmin = " << fmt_double(cfg.fit_rmin) << "\n";
  if (cfg.fit_rmax > 0.0) out << "fit_rmax = " << fmt_double(cfg.fit_rmax) << "\n";
  out << "bins = " << cfg.bins << "\n";
  out << "out = " << cfg.out << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  out << "plots = " << (cfg.plots ? "true" : "false") << "\n";
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void validate(ExperimentConfig& cfg) {
  if (cfg.order < 0 || cfg.order > 2)
    throw std::invalid_argument("order must be 0, 1 or 2");
  if (!cfg.is_bcc() && cfg.order != 0)
    cfg.order = 0;  // mirror symmetry kills both corrections
  if (cfg.R <= 0.0) throw std::invalid_argument("R must be positive");
  if (cfg.max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
  if (cfg.bins < 2) throw std::invalid_argument("bins must be at least 2");
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  const std::string solver = cfg.resolved_solver();
  if (solver != "newton" && solver != "lbfgs")
    throw std::invalid_argument("solver must be newton or lbfgs");
  const std::string pot = cfg.resolved_potential();
  if (pot != "pair-sin2" && pot != "eam-bcc")
    throw std::invalid_argument("potential must be pair-sin2 or eam-bcc");
  if (cfg.is_bcc() && pot != "eam-bcc")
    throw std::invalid_argument("bcc cases require the eam-bcc potential");
  if (!cfg.is_bcc() && pot != "pair-sin2")
    throw std::invalid_argument("square/triangular cases use the pair-sin2 potential");
  if (!cfg.radii.empty()) {
    const double maxr = *std::max_element(cfg.radii.begin(), cfg.radii.end());
    if (cfg.R_ref <= 0.0) cfg.R_ref = 4.0 * maxr;
    if (cfg.R_ref < 4.0 * maxr)
      throw std::invalid_argument("Rref must be at least 4x the largest study radius");
  }
  if (!(cfg.fit_rmin > 0.0)) throw std::invalid_argument("fit_rmin must be positive");
  if (cfg.resolved_fit_rmax() <= cfg.fit_rmin)
    throw std::invalid_argument("fit window is empty; increase R or fit_rmax");
}

}  // namespace dislocore
