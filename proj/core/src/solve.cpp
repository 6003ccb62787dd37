#include "dislocore/solve.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace dislocore {

std::string SolveReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["iterations"] = iterations;
  j["residual_inf"] = residual_inf;
  j["energy"] = energy;
  j["converged"] = converged;
  j["wall_seconds"] = wall_seconds;
  j["inner_iterations"] = inner_iterations;
  j["note"] = note;
  return j.dump(2);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  bool indefinite = false;
};

// Preconditioned conjugate gradients; detects loss of positive definiteness.
CgResult pcg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
             const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond, double rtol,
             int maxit) {
  CgResult out;
  out.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = precond(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < maxit; ++it) {
    const Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) {
      out.indefinite = true;
      return out;
    }
    const double alpha = rz / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    ++out.iterations;
    if (r.norm() <= rtol * bnorm) {
      out.converged = true;
      return out;
    }
    z = precond(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return out;
}

// Inverse of the homogeneous-lattice Hessian, used both as the CG
// preconditioner for Newton systems and as the LBFGS metric. The sparse
// factorization backs a short verification CG pass per application.
class HhomSolver {
 public:
  explicit HhomSolver(const Eigen::SparseMatrix<double>& hhom) : hhom_(hhom) {
    llt_.compute(hhom_);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("homogeneous Hessian is not positive definite");
  }

  Eigen::VectorXd factor_solve(const Eigen::VectorXd& r) const { return llt_.solve(r); }

  // Full solve H_hom z = r by CG with the factorization as preconditioner.
  Eigen::VectorXd cg_solve(const Eigen::VectorXd& r) const {
    CgResult res = pcg(
        hhom_, r, [&](const Eigen::VectorXd& v) { return llt_.solve(v); }, 1e-12, 25);
    if (!res.converged && !res.indefinite)
      throw std::runtime_error("preconditioner solve did not converge");
    return res.x;
  }

 private:
  Eigen::SparseMatrix<double> hhom_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

}  // namespace

std::pair<DisplacementField, SolveReport> newton_solve(const LatticeSystem& sys, SolveConfig cfg,
                                                       const Eigen::VectorXd* initial) {
  const auto t0 = Clock::now();
  cfg.method = SolveMethod::Newton;
  const double tol = cfg.resolved_tol();
  const int n = sys.free_count();

  SolveReport rep;
  rep.method = "newton";

  Eigen::VectorXd u = initial ? *initial : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = sys.gradient(u);
  double res = g.lpNorm<Eigen::Infinity>();
  double energy = sys.energy_diff(u);

  if (res <= tol) {
    rep.converged = true;
    rep.residual_inf = res;
    rep.energy = energy;
    rep.wall_seconds = seconds_since(t0);
    return {DisplacementField{&sys.domain(), std::move(u)}, rep};
  }

  const HhomSolver hhom(sys.homogeneous_hessian());
  const int cg_maxit = std::max(50, cfg.cg_maxit_per_site * n);

  while (rep.iterations < cfg.max_iter) {
    const Eigen::SparseMatrix<double> H = sys.assemble_hessian(u);
    CgResult lin = pcg(
        H, -g, [&](const Eigen::VectorXd& r) { return hhom.factor_solve(r); }, cfg.cg_rtol,
        cg_maxit);
    rep.inner_iterations += lin.iterations;
    if (lin.indefinite) {
      rep.note = "cg detected an indefinite Hessian; restarted with lbfgs";
      SolveConfig fb = cfg;
      fb.method = SolveMethod::Lbfgs;
      fb.tol_inf = tol;
      auto [field, sub] = lbfgs_solve(sys, fb, &u);
      sub.method = "newton+lbfgs-fallback";
      sub.note = sub.note.empty() ? rep.note : rep.note + "; " + sub.note;
      sub.iterations += rep.iterations;
      sub.wall_seconds = seconds_since(t0);
      return {std::move(field), sub};
    }
    if (!lin.converged) {
      rep.note = "inner cg hit the iteration cap";
    }

    // Damped step: backtrack until both the residual and the energy improve.
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      Eigen::VectorXd u_t = u + t * lin.x;
      Eigen::VectorXd g_t = sys.gradient(u_t);
      const double res_t = g_t.lpNorm<Eigen::Infinity>();
      const double e_t = sys.energy_diff(u_t);
      if (res_t < res && e_t <= energy + 1e-12 * std::max(1.0, std::abs(energy))) {
        u.swap(u_t);
        g.swap(g_t);
        res = res_t;
        energy = e_t;
        rep.energy_history.push_back(energy);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++rep.iterations;
    if (!accepted) {
      rep.note = "newton step rejected by the damping loop";
      break;
    }
    if (res <= tol) break;
  }

  rep.converged = res <= tol;
  rep.residual_inf = res;
  rep.energy = energy;
  rep.wall_seconds = seconds_since(t0);
  return {DisplacementField{&sys.domain(), std::move(u)}, rep};
}

namespace {

struct LbfgsPair {
  Eigen::VectorXd s, y, minv_y;
  double rho = 0.0;
};

Eigen::VectorXd lbfgs_direction(const std::vector<LbfgsPair>& pairs, const HhomSolver& hhom,
                                const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  const int k = static_cast<int>(pairs.size());
  std::vector<double> alpha(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  Eigen::VectorXd z = hhom.cg_solve(q);
  if (k > 0) {
    const LbfgsPair& last = pairs.back();
    const double gamma = last.s.dot(last.y) / last.y.dot(last.minv_y);
    z *= gamma;
  }
  for (int i = 0; i < k; ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(z);
    z += (alpha[i] - beta) * pairs[i].s;
  }
  return -z;
}

}  // namespace

std::pair<DisplacementField, SolveReport> lbfgs_solve(const LatticeSystem& sys, SolveConfig cfg,
                                                      const Eigen::VectorXd* initial) {
  const auto t0 = Clock::now();
  cfg.method = SolveMethod::Lbfgs;
  const double tol = cfg.resolved_tol();
  const int n = sys.free_count();

  SolveReport rep;
  rep.method = "lbfgs";

  Eigen::VectorXd u = initial ? *initial : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = sys.gradient(u);
  double energy = sys.energy_diff(u);
  double res = g.lpNorm<Eigen::Infinity>();
  rep.inner_iterations = 1;

  if (res <= tol) {
    rep.converged = true;
    rep.residual_inf = res;
    rep.energy = energy;
    rep.wall_seconds = seconds_since(t0);
    return {DisplacementField{&sys.domain(), std::move(u)}, rep};
  }

  const HhomSolver hhom(sys.homogeneous_hessian());
  std::vector<LbfgsPair> pairs;
  int memory = std::max(1, cfg.lbfgs_memory);
  bool restarted = false;

  const double c1 = 1e-4, c2 = 0.9;

  while (rep.iterations < cfg.max_iter && res > tol) {
    Eigen::VectorXd d = lbfgs_direction(pairs, hhom, g);
    double dphi0 = g.dot(d);
    if (dphi0 >= 0.0) {
      pairs.clear();
      d = -hhom.cg_solve(g);
      dphi0 = g.dot(d);
    }
    const double phi0 = energy;

    // Strong-Wolfe line search (bracket + zoom). Energy comparisons carry a
    // machine-noise allowance: near convergence the true decrease per step
    // drops below the resolution of the energy sum while gradients remain
    // meaningful, so sufficient-decrease tests must not chase noise.
    const double noise = 1e-13 * std::max(1.0, std::abs(phi0));
    double alpha = 1.0, alpha_prev = 0.0;
    double phi_prev = phi0;
    Eigen::VectorXd u_a, g_a;
    double phi_a = 0.0, dphi_a = 0.0;
    bool found = false;
    double lo = 0.0, hi = 0.0, phi_lo = 0.0;
    bool bracketed = false;

    auto eval_at = [&](double a) {
      u_a = u + a * d;
      g_a = sys.gradient(u_a);
      phi_a = sys.energy_diff(u_a);
      dphi_a = g_a.dot(d);
      ++rep.inner_iterations;
    };

    for (int ls = 0; ls < 12; ++ls) {
      eval_at(alpha);
      if (phi_a > phi0 + c1 * alpha * dphi0 + noise || (ls > 0 && phi_a >= phi_prev + noise)) {
        lo = alpha_prev;
        hi = alpha;
        phi_lo = phi_prev;
        bracketed = true;
        break;
      }
      if (std::abs(dphi_a) <= -c2 * dphi0) {
        found = true;
        break;
      }
      if (dphi_a >= 0.0) {
        lo = alpha;
        hi = alpha_prev;
        phi_lo = phi_a;
        bracketed = true;
        break;
      }
      alpha_prev = alpha;
      phi_prev = phi_a;
      alpha = std::min(2.0 * alpha, 1e4);
    }
    if (bracketed && !found) {
      for (int z = 0; z < 30; ++z) {
        const double mid = 0.5 * (lo + hi);
        eval_at(mid);
        if (phi_a > phi0 + c1 * mid * dphi0 + noise || phi_a >= phi_lo + noise) {
          hi = mid;
        } else {
          if (std::abs(dphi_a) <= -c2 * dphi0) {
            found = true;
            break;
          }
          if (dphi_a * (hi - lo) >= 0.0) hi = lo;
          lo = mid;
          phi_lo = phi_a;
        }
        if (std::abs(hi - lo) < 1e-14) break;
      }
    }

    if (!found && !(bracketed && phi_a < phi0)) {
      if (!restarted) {
        // One restart with halved memory before giving up.
        restarted = true;
        memory = std::max(1, memory / 2);
        pairs.clear();
        continue;
      }
      rep.note = "line search failed twice; aborting";
      break;
    }

    Eigen::VectorXd s = u_a - u;
    Eigen::VectorXd y = g_a - g;
    const double sy = s.dot(y);
    u.swap(u_a);
    g.swap(g_a);
    energy = phi_a;
    rep.energy_history.push_back(energy);
    res = g.lpNorm<Eigen::Infinity>();
    ++rep.iterations;

    if (sy > 1e-12 * s.norm() * y.norm()) {
      LbfgsPair pr;
      pr.minv_y = hhom.cg_solve(y);
      pr.s = std::move(s);
      pr.y = std::move(y);
      pr.rho = 1.0 / sy;
      pairs.push_back(std::move(pr));
      if (static_cast<int>(pairs.size()) > memory)
        pairs.erase(pairs.begin());
    }
  }

  rep.converged = res <= tol;
  rep.residual_inf = res;
  rep.energy = energy;
  rep.wall_seconds = seconds_since(t0);
  return {DisplacementField{&sys.domain(), std::move(u)}, rep};
}

std::pair<DisplacementField, SolveReport> solve(const LatticeSystem& sys, SolveConfig cfg) {
  return cfg.method == SolveMethod::Newton ? newton_solve(sys, cfg) : lbfgs_solve(sys, cfg);
}

SupercellStudy supercell_study(const LatticeSpec& spec, const SitePotential& pot,
                               const Predictor* pred, const std::vector<double>& radii,
                               double R_ref, SolveConfig cfg) {
  if (radii.size() < 1) throw std::invalid_argument("supercell study needs at least one radius");
  const double max_radius = *std::max_element(radii.begin(), radii.end());
  if (R_ref < 4.0 * max_radius)
    throw std::invalid_argument("reference radius must be at least 4x the largest study radius");

  SupercellStudy study;
  study.R_ref = R_ref;
  study.window_radius = max_radius;

  const Domain ref_dom = sites_in_ball(spec, R_ref);
  const LatticeSystem ref_sys(ref_dom, pot, pred, cfg.threads);
  auto [ref_u, ref_rep] = solve(ref_sys, cfg);
  study.ref_converged = ref_rep.converged;

  const NeighborSet& ns = pot.neighbors();
  for (double R : radii) {
    const Domain dom = sites_in_ball(spec, R);
    const LatticeSystem sys(dom, pot, pred, cfg.threads);
    auto [u, rep] = solve(sys, cfg);

    // Difference field in H1 over bonds rooted inside the observation window.
    double sq = 0.0;
    for (std::int32_t k = 0; k < ref_dom.size(); ++k) {
      const Coord x = ref_dom.sites[static_cast<std::size_t>(k)];
      if (spec.radius(x) > max_radius) continue;
      const auto diff_at = [&](Coord c) {
        const std::int32_t ir = ref_dom.find(c);
        const std::int32_t is = dom.find(c);
        return (is >= 0 ? u.values[is] : 0.0) - (ir >= 0 ? ref_u.values[ir] : 0.0);
      };
      const double vx = diff_at(x);
      for (int a = 0; a < ns.size(); ++a) {
        const Coord nb{x.i + ns.dirs_int[a].i, x.j + ns.dirs_int[a].j};
        const double d = diff_at(nb) - vx;
        sq += d * d;
      }
    }
    study.rows.push_back({R, std::sqrt(sq), rep.converged && study.ref_converged, rep.energy,
                          rep.iterations});
  }
  return study;
}

}  // namespace dislocore
