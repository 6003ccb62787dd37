#include "dislocore/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "dislocore/parallel.hpp"

namespace dislocore {

namespace {

struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

}  // namespace

LatticeSystem::LatticeSystem(const Domain& domain, const SitePotential& pot,
                             const Predictor* pred, int threads)
    : domain_(&domain), pot_(&pot), pred_(pred), threads_(threads), m_(pot.arity()) {
  const NeighborSet& ns = pot.neighbors();
  const LatticeSpec& spec = domain.spec;
  const double rcut = ns.max_length();
  if (domain.R < 2.0 * rcut)
    throw std::invalid_argument("supercell radius too small for the interaction stencil");

  // Evaluation set: every site whose energy term can see a free value.
  const Domain extended = sites_in_ball(spec, domain.R + rcut + 0.125);
  eval_sites_.reserve(extended.sites.size());
  for (const Coord& x : extended.sites) {
    bool touches = domain.find(x) >= 0;
    for (int a = 0; !touches && a < m_; ++a) {
      const Coord nb{x.i + ns.dirs_int[a].i, x.j + ns.dirs_int[a].j};
      touches = domain.find(nb) >= 0;
    }
    if (touches) eval_sites_.push_back(x);
  }

  const std::size_t ne = eval_sites_.size();
  std::unordered_map<std::uint64_t, std::int32_t> eval_index;
  eval_index.reserve(ne);
  for (std::size_t r = 0; r < ne; ++r)
    eval_index.emplace(coord_key(eval_sites_[r]), static_cast<std::int32_t>(r));

  eval_free_index_.resize(ne);
  nbr_free_.assign(ne * m_, -1);
  nbr_eval_.assign(ne * m_, -1);
  pred_strain_.assign(ne * m_, 0.0);
  free_to_eval_.assign(domain.size(), -1);

  for (std::size_t r = 0; r < ne; ++r) {
    const Coord x = eval_sites_[r];
    const std::int32_t fi = domain.find(x);
    eval_free_index_[r] = fi;
    if (fi >= 0) free_to_eval_[fi] = static_cast<std::int32_t>(r);
    const Eigen::Vector2d px = spec.position(x);
    for (int a = 0; a < m_; ++a) {
      const Coord nb{x.i + ns.dirs_int[a].i, x.j + ns.dirs_int[a].j};
      nbr_free_[r * m_ + a] = domain.find(nb);
      auto it = eval_index.find(coord_key(nb));
      nbr_eval_[r * m_ + a] = it == eval_index.end() ? -1 : it->second;
      if (pred_)
        pred_strain_[r * m_ + a] = pred_->wrapped_difference(px, spec.position(nb));
    }
  }

  base_energy_.assign(ne, 0.0);
  parallel_chunks(
      ne, kDefaultGrain,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r)
          base_energy_[r] = pot_->value_delta(&pred_strain_[r * m_]);
      },
      threads_);
}

void LatticeSystem::gather_strain(std::size_t row, const Eigen::VectorXd& u, double* out) const {
  const std::int32_t self = eval_free_index_[row];
  const double us = self >= 0 ? u[self] : 0.0;
  for (int a = 0; a < m_; ++a) {
    const std::int32_t nf = nbr_free_[row * m_ + a];
    out[a] = pred_strain_[row * m_ + a] + (nf >= 0 ? u[nf] : 0.0) - us;
  }
}

Eigen::VectorXd LatticeSystem::total_strain(int eval_row, const Eigen::VectorXd& u) const {
  Eigen::VectorXd s(m_);
  gather_strain(static_cast<std::size_t>(eval_row), u, s.data());
  return s;
}

double LatticeSystem::energy_diff(const Eigen::VectorXd& u) const {
  return deterministic_sum(
      eval_sites_.size(), kDefaultGrain,
      [&](std::size_t r) {
        double strain[8];
        gather_strain(r, u, strain);
        return pot_->value_delta(strain) - base_energy_[r];
      },
      threads_);
}

Eigen::VectorXd LatticeSystem::gradient(const Eigen::VectorXd& u) const {
  const std::size_t ne = eval_sites_.size();
  std::vector<double> gv(ne * m_);
  parallel_chunks(
      ne, kDefaultGrain,
      [&](std::size_t b, std::size_t e) {
        double strain[8], grad[8];
        for (std::size_t r = b; r < e; ++r) {
          gather_strain(r, u, strain);
          pot_->eval(strain, nullptr, grad, nullptr);
          for (int a = 0; a < m_; ++a) gv[r * m_ + a] = grad[a];
        }
      },
      threads_);

  const NeighborSet& ns = pot_->neighbors();
  Eigen::VectorXd out(domain_->size());
  parallel_chunks(
      static_cast<std::size_t>(domain_->size()), kDefaultGrain,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t y = b; y < e; ++y) {
          const std::size_t row = static_cast<std::size_t>(free_to_eval_[y]);
          double s = 0.0;
          for (int a = 0; a < m_; ++a) {
            const std::int32_t up = nbr_eval_[row * m_ + ns.neg_perm[a]];
            s += gv[static_cast<std::size_t>(up) * m_ + a] - gv[row * m_ + a];
          }
          out[static_cast<Eigen::Index>(y)] = s;
        }
      },
      threads_);
  return out;
}

Eigen::VectorXd LatticeSystem::hessian_apply(const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& v) const {
  const std::size_t ne = eval_sites_.size();
  std::vector<double> tv(ne * m_);
  parallel_chunks(
      ne, kDefaultGrain,
      [&](std::size_t b, std::size_t e) {
        double strain[8], dv[8];
        Eigen::MatrixXd h(m_, m_);
        for (std::size_t r = b; r < e; ++r) {
          gather_strain(r, u, strain);
          pot_->eval(strain, nullptr, nullptr, h.data());
          const std::int32_t self = eval_free_index_[r];
          const double vs = self >= 0 ? v[self] : 0.0;
          for (int a = 0; a < m_; ++a) {
            const std::int32_t nf = nbr_free_[r * m_ + a];
            dv[a] = (nf >= 0 ? v[nf] : 0.0) - vs;
          }
          for (int a = 0; a < m_; ++a) {
            double s = 0.0;
            // eval fills row-major [a*m+b]; h is column-major m x m, so
            // h(b, a) = hess[a*m+b]; the tuple Hessian is symmetric anyway.
            for (int b2 = 0; b2 < m_; ++b2) s += h(b2, a) * dv[b2];
            tv[r * m_ + a] = s;
          }
        }
      },
      threads_);

  const NeighborSet& ns = pot_->neighbors();
  Eigen::VectorXd out(domain_->size());
  parallel_chunks(
      static_cast<std::size_t>(domain_->size()), kDefaultGrain,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t y = b; y < e; ++y) {
          const std::size_t row = static_cast<std::size_t>(free_to_eval_[y]);
          double s = 0.0;
          for (int a = 0; a < m_; ++a) {
            const std::int32_t up = nbr_eval_[row * m_ + ns.neg_perm[a]];
            s += tv[static_cast<std::size_t>(up) * m_ + a] - tv[row * m_ + a];
          }
          out[static_cast<Eigen::Index>(y)] = s;
        }
      },
      threads_);
  return out;
}

namespace {

void add_site_hessian(std::vector<Eigen::Triplet<double>>& trips, const Eigen::MatrixXd& h,
                      const std::int32_t* nbr_free, std::int32_t self, int m) {
  for (int a = 0; a < m; ++a) {
    const std::int32_t ia = nbr_free[a];
    for (int b = 0; b < m; ++b) {
      const std::int32_t ib = nbr_free[b];
      const double val = h(b, a);  // row-major [a*m+b] seen column-major
      if (val == 0.0) continue;
      if (ia >= 0 && ib >= 0) trips.emplace_back(ia, ib, val);
      if (ia >= 0 && self >= 0) trips.emplace_back(ia, self, -val);
      if (self >= 0 && ib >= 0) trips.emplace_back(self, ib, -val);
      if (self >= 0) trips.emplace_back(self, self, val);
    }
  }
}

}  // namespace

Eigen::SparseMatrix<double> LatticeSystem::assemble_hessian(const Eigen::VectorXd& u) const {
  const std::size_t ne = eval_sites_.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(ne * static_cast<std::size_t>((m_ + 1) * (m_ + 1)));
  Eigen::MatrixXd h(m_, m_);
  double strain[8];
  for (std::size_t r = 0; r < ne; ++r) {
    gather_strain(r, u, strain);
    pot_->eval(strain, nullptr, nullptr, h.data());
    add_site_hessian(trips, h, &nbr_free_[r * m_], eval_free_index_[r], m_);
  }
  Eigen::SparseMatrix<double> out(domain_->size(), domain_->size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::SparseMatrix<double> LatticeSystem::homogeneous_hessian() const {
  const std::size_t ne = eval_sites_.size();
  Eigen::MatrixXd h(m_, m_);
  std::vector<double> zero(static_cast<std::size_t>(m_), 0.0);
  pot_->eval(zero.data(), nullptr, nullptr, h.data());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(ne * static_cast<std::size_t>((m_ + 1) * (m_ + 1)));
  for (std::size_t r = 0; r < ne; ++r)
    add_site_hessian(trips, h, &nbr_free_[r * m_], eval_free_index_[r], m_);
  Eigen::SparseMatrix<double> out(domain_->size(), domain_->size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double LatticeSystem::h1_norm(const Eigen::VectorXd& u) const {
  const double sq = deterministic_sum(
      eval_sites_.size(), kDefaultGrain,
      [&](std::size_t r) {
        const std::int32_t self = eval_free_index_[r];
        const double us = self >= 0 ? u[self] : 0.0;
        double s = 0.0;
        for (int a = 0; a < m_; ++a) {
          const std::int32_t nf = nbr_free_[r * m_ + a];
          const double d = (nf >= 0 ? u[nf] : 0.0) - us;
          s += d * d;
        }
        return s;
      },
      threads_);
  return std::sqrt(sq);
}

ResidualField LatticeSystem::linear_residual(const DisplacementField& u) const {
  const NeighborSet& ns = pot_->neighbors();
  const LatticeSpec& spec = u.domain->spec;
  const double rcut = ns.max_length();

  Eigen::MatrixXd h0(m_, m_);
  {
    std::vector<double> zero(static_cast<std::size_t>(m_), 0.0);
    pot_->eval(zero.data(), nullptr, nullptr, h0.data());
  }

  // f is supported within two stencils of the field support.
  const Domain support = sites_in_ball(spec, u.domain->R + 2.0 * rcut + 0.25);
  const auto value_at = [&](Coord c) {
    const std::int32_t k = u.domain->find(c);
    return k >= 0 ? u.values[k] : 0.0;
  };
  const auto flux = [&](Coord y, int a) {
    // h_a(y) = sum_b H0_ab D_b u(y)
    const double uy = value_at(y);
    double s = 0.0;
    for (int b = 0; b < m_; ++b) {
      const Coord nb{y.i + ns.dirs_int[b].i, y.j + ns.dirs_int[b].j};
      s += h0(b, a) * (value_at(nb) - uy);
    }
    return s;
  };

  ResidualField out;
  out.core = spec.core;
  out.valid_radius = u.domain->R - 2.0 * rcut;
  out.sites.reserve(support.sites.size());
  std::vector<double> vals;
  vals.reserve(support.sites.size());
  for (const Coord& x : support.sites) {
    double f = 0.0;
    for (int a = 0; a < m_; ++a) {
      const Coord back{x.i - ns.dirs_int[a].i, x.j - ns.dirs_int[a].j};
      f += flux(back, a) - flux(x, a);
    }
    out.sites.push_back(x);
    out.rel_pos.push_back(spec.position(x) - spec.core);
    out.radius.push_back(spec.radius(x));
    vals.push_back(f);
  }
  out.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

std::vector<DecayPoint> LatticeSystem::strain_points(const Eigen::VectorXd& u) const {
  const LatticeSpec& spec = domain_->spec;
  std::vector<DecayPoint> pts;
  pts.reserve(static_cast<std::size_t>(domain_->size()));
  for (std::int32_t y = 0; y < domain_->size(); ++y) {
    const std::size_t row = static_cast<std::size_t>(free_to_eval_[y]);
    double s = 0.0;
    for (int a = 0; a < m_; ++a) {
      const std::int32_t nf = nbr_free_[row * m_ + a];
      const double d = (nf >= 0 ? u[nf] : 0.0) - u[y];
      s += d * d;
    }
    const Coord x = domain_->sites[static_cast<std::size_t>(y)];
    pts.push_back({spec.position(x), spec.radius(x), std::sqrt(s)});
  }
  return pts;
}

std::vector<DecayPoint> LatticeSystem::predictor_strain_points() const {
  const LatticeSpec& spec = domain_->spec;
  std::vector<DecayPoint> pts;
  for (std::size_t r = 0; r < eval_sites_.size(); ++r) {
    if (eval_free_index_[r] < 0) continue;
    double s = 0.0;
    for (int a = 0; a < m_; ++a) s += pred_strain_[r * m_ + a] * pred_strain_[r * m_ + a];
    const Coord x = eval_sites_[r];
    pts.push_back({spec.position(x), spec.radius(x), std::sqrt(s)});
  }
  return pts;
}

Moments moments(const ResidualField& f) {
  Moments out;
  double rmax = 0.0;
  for (double r : f.radius) rmax = std::max(rmax, r);
  const double r_ann = 0.85 * rmax;

  Kahan m0, m1x, m1y, m2xx, m2xy, m2yy, absf;
  double ann_abs = 0.0, ann_m1 = 0.0, ann_m2 = 0.0, tot_m2abs = 0.0;
  const Eigen::Index n = f.values.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = f.values[k];
    const Eigen::Vector2d& x = f.rel_pos[static_cast<std::size_t>(k)];
    const double r = f.radius[static_cast<std::size_t>(k)];
    m0.add(v);
    m1x.add(v * x.x());
    m1y.add(v * x.y());
    m2xx.add(v * x.x() * x.x());
    m2xy.add(v * x.x() * x.y());
    m2yy.add(v * x.y() * x.y());
    absf.add(std::abs(v));
    tot_m2abs += std::abs(v) * r * r;
    if (r >= r_ann) {
      ann_abs += std::abs(v);
      ann_m1 += std::abs(v) * r;
      ann_m2 += std::abs(v) * r * r;
    }
  }
  out.m0 = m0.get();
  out.m1 = Eigen::Vector2d(m1x.get(), m1y.get());
  out.m2 << m2xx.get(), m2xy.get(), m2xy.get(), m2yy.get();
  const double m2norm = out.m2.norm();
  const Eigen::Matrix2d dev = out.m2 - 0.5 * out.m2.trace() * Eigen::Matrix2d::Identity();
  out.m2_anisotropy = m2norm > 0.0 ? dev.norm() / m2norm : 0.0;
  out.abs_sum = absf.get();
  out.annulus_abs = ann_abs;
  out.bound_m1 = ann_m1;
  out.bound_m2 = ann_m2;
  out.bound_m2_anisotropy = m2norm > 0.0 ? ann_m2 / m2norm : 0.0;
  out.converged = tot_m2abs <= 0.0 || ann_m2 <= 0.1 * tot_m2abs;
  return out;
}

DisplacementField symmetrize_rotational(const DisplacementField& u) {
  const Domain& dom = *u.domain;
  const LatticeSpec& spec = dom.spec;
  DisplacementField out = DisplacementField::zero(dom);
  for (std::int32_t k = 0; k < dom.size(); ++k) {
    Coord x = dom.sites[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (int step = 0; step < spec.rot_order; ++step) {
      const std::int32_t idx = dom.find(x);
      if (idx < 0) throw std::logic_error("domain is not closed under the core rotation");
      acc += u.values[idx];
      x = rotate_site(spec, x);
    }
    out.values[k] = acc / spec.rot_order;
  }
  return out;
}

}  // namespace dislocore
