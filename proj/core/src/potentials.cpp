#include "dislocore/potentials.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dislocore {

namespace {

// Compensated (Neumaier) accumulator for small stencil sums.
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

double SitePotential::value_delta(const double* strain) const {
  std::vector<double> zero(static_cast<std::size_t>(arity()), 0.0);
  return value(strain) - value(zero.data());
}

// ---------------------------------------------------------------------------
// Pair model

PairSin2Potential::PairSin2Potential(NeighborSet neighbors, double scale)
    : SitePotential(std::move(neighbors), 1.0,
                    SymmetryFlags{true, true, true}, "pair-sin2"),
      scale_(scale) {}

void PairSin2Potential::eval(const double* strain, double* value, double* grad,
                             double* hess) const {
  const int m = arity();
  double v = 0.0;
  for (int a = 0; a < m; ++a) {
    const double s = std::sin(M_PI * strain[a]);
    v += scale_ * s * s;
    if (grad) grad[a] = scale_ * M_PI * std::sin(2.0 * M_PI * strain[a]);
  }
  if (value) *value = v;
  if (hess) {
    for (int k = 0; k < m * m; ++k) hess[k] = 0.0;
    for (int a = 0; a < m; ++a)
      hess[a * m + a] = scale_ * 2.0 * M_PI * M_PI * std::cos(2.0 * M_PI * strain[a]);
  }
}

double PairSin2Potential::value_delta(const double* strain) const {
  double v = 0.0;
  for (int a = 0; a < arity(); ++a) {
    const double s = std::sin(M_PI * strain[a]);
    v += scale_ * s * s;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Projected EAM model

namespace {

struct Radial {
  double f = 0.0, df = 0.0, ddf = 0.0;  // derivatives with respect to r
};

// C(t) = exp(1 - 1/(1-t^2)) on [0,1), extended by zero.
void cutoff_fn(double t, double& c, double& dc, double& ddc) {
  if (t >= 1.0) {
    c = dc = ddc = 0.0;
    return;
  }
  const double u = 1.0 - t * t;
  c = std::exp(1.0 - 1.0 / u);
  const double g = -2.0 * t / (u * u);
  dc = c * g;
  ddc = c * (g * g - 2.0 / (u * u) - 8.0 * t * t / (u * u * u));
}

Radial radial_poly(double r, double d, double k, int power) {
  Radial out;
  if (r >= d) return out;
  double c, dc, ddc;
  cutoff_fn(r / d, c, dc, ddc);
  dc /= d;
  ddc /= d * d;
  const double e = d - r;
  if (power == 2) {
    out.f = k * e * e * c;
    out.df = k * (-2.0 * e * c + e * e * dc);
    out.ddf = k * (2.0 * c - 4.0 * e * dc + e * e * ddc);
  } else {
    out.f = k * e * e * e * c;
    out.df = k * (-3.0 * e * e * c + e * e * e * dc);
    out.ddf = k * (6.0 * e * c - 6.0 * e * e * dc + e * e * e * ddc);
  }
  return out;
}

}  // namespace

EamBccPotential::EamBccPotential(Params params)
    : SitePotential(bcc_lifts(params.cutoff > 0.0 ? params.cutoff : bcc_default_cutoff()),
                    bcc_period(), SymmetryFlags{true, false, true}, "eam-bcc"),
      params_(params) {
  if (params_.cutoff <= 0.0) params_.cutoff = bcc_default_cutoff();
  if (params_.k_rho <= 0.0 || params_.k_phi < 0.0)
    throw std::invalid_argument("eam-bcc: k_rho must be positive, k_phi nonnegative");

  for (double z : neighbors_.vertical_lifts) {
    const double r = std::abs(z);
    embed_const_ += radial_poly(r, params_.cutoff, params_.k_rho, 2).f;
    pair_const_ += radial_poly(r, params_.cutoff, params_.k_phi, 3).f;
  }
  const int m = arity();
  zero_rho_.resize(m);
  zero_phi_.resize(m);
  for (int a = 0; a < m; ++a) {
    const PairTerms t = column_sums(a, 0.0);
    zero_rho_[a] = t.rho;
    zero_phi_[a] = t.phi;
  }
}

EamBccPotential::PairTerms EamBccPotential::column_sums(int dir, double strain) const {
  const double d = params_.cutoff;
  const double p = neighbors_.period;
  const double q = neighbors_.dirs[static_cast<std::size_t>(dir)].squaredNorm();
  const double z0 = neighbors_.base_height[static_cast<std::size_t>(dir)];
  PairTerms out;
  if (q >= d * d) return out;
  const double zmax = std::sqrt(d * d - q);
  // All heights z0 + k*p with |z0 + k*p + strain| <= zmax contribute.
  const long klo = static_cast<long>(std::ceil((-zmax - z0 - strain) / p));
  const long khi = static_cast<long>(std::floor((zmax - z0 - strain) / p));
  for (long k = klo; k <= khi; ++k) {
    const double w = z0 + static_cast<double>(k) * p + strain;
    const double r = std::sqrt(q + w * w);
    if (r >= d || r == 0.0) continue;
    const Radial re = radial_poly(r, d, params_.k_rho, 2);
    const Radial ph = radial_poly(r, d, params_.k_phi, 3);
    const double drds = w / r;
    const double curv = q / (r * r * r);
    out.rho += re.f;
    out.drho += re.df * drds;
    out.ddrho += re.ddf * drds * drds + re.df * curv;
    out.phi += ph.f;
    out.dphi += ph.df * drds;
    out.ddphi += ph.ddf * drds * drds + ph.df * curv;
  }
  return out;
}

void EamBccPotential::eval(const double* strain, double* value, double* grad,
                           double* hess) const {
  const int m = arity();
  double g = embed_const_;
  double pair = pair_const_;
  std::array<double, 8> drho{}, ddrho{}, dphi{}, ddphi{};
  for (int a = 0; a < m; ++a) {
    const PairTerms t = column_sums(a, strain[a]);
    g += t.rho;
    pair += t.phi;
    drho[a] = t.drho;
    ddrho[a] = t.ddrho;
    dphi[a] = t.dphi;
    ddphi[a] = t.ddphi;
  }
  if (g <= 0.0)
    throw std::domain_error("eam-bcc: electron density sum is not positive");
  const double sq = std::sqrt(g);
  const double F1 = -0.5 / sq;              // dF/dg for F = -sqrt(g)
  const double F2 = 0.25 / (sq * g);        // d2F/dg2
  if (value) *value = -sq + pair;
  if (grad)
    for (int a = 0; a < m; ++a) grad[a] = F1 * drho[a] + dphi[a];
  if (hess) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double h = F2 * drho[a] * drho[b];
        if (a == b) h += F1 * ddrho[a] + ddphi[a];
        hess[a * m + b] = h;
      }
  }
}

double EamBccPotential::value_delta(const double* strain) const {
  const int m = arity();
  double g = embed_const_;
  Kahan dg, dpair;
  for (int a = 0; a < m; ++a) {
    const PairTerms t = column_sums(a, strain[a]);
    g += t.rho;
    dg.add(t.rho - zero_rho_[a]);
    dpair.add(t.phi - zero_phi_[a]);
  }
  double g0 = embed_const_;
  for (double z : zero_rho_) g0 += z;
  if (g <= 0.0 || g0 <= 0.0)
    throw std::domain_error("eam-bcc: electron density sum is not positive");
  // -(sqrt(g) - sqrt(g0)) without cancellation of the O(1) constant.
  return -dg.get() / (std::sqrt(g) + std::sqrt(g0)) + dpair.get();
}

// ---------------------------------------------------------------------------
// Symmetry verification

SymmetryReport check_symmetries(const SitePotential& pot, int trials, std::uint64_t seed) {
  const NeighborSet& ns = pot.neighbors();
  const int m = ns.size();
  const double p = pot.period();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-p / 2.0, p / 2.0);

  double viol_rot = 0.0, viol_mirror = 0.0, viol_refl = 0.0, scale = 1.0;
  const bool refl_applicable = !ns.refl_perm.empty();
  std::vector<double> a(m), b(m);
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < m; ++i) a[i] = uni(rng);
    const double va = pot.value(a.data());
    scale = std::max(scale, std::abs(va));

    for (int i = 0; i < m; ++i) b[i] = a[ns.rot_perm[i]];
    viol_rot = std::max(viol_rot, std::abs(va - pot.value(b.data())));

    for (int i = 0; i < m; ++i) b[i] = -a[i];
    viol_mirror = std::max(viol_mirror, std::abs(va - pot.value(b.data())));

    if (refl_applicable) {
      for (int i = 0; i < m; ++i) b[i] = -a[ns.refl_perm[i]];
      viol_refl = std::max(viol_refl, std::abs(va - pot.value(b.data())));
    }
  }
  const double tol = 1e-10 * scale;
  SymmetryReport rep;
  rep.rotational = viol_rot <= tol;
  rep.mirror = viol_mirror <= tol;
  rep.line_reflection = refl_applicable && viol_refl <= tol;
  rep.max_violation = std::max({viol_rot, viol_mirror, refl_applicable ? viol_refl : 0.0});

  const SymmetryFlags& declared = pot.declared_symmetries();
  if (declared.rotational && !rep.rotational)
    throw std::runtime_error(pot.name() + ": declared rotational symmetry fails empirically");
  if (declared.mirror && !rep.mirror)
    throw std::runtime_error(pot.name() + ": declared mirror symmetry fails empirically");
  if (declared.line_reflection && !rep.line_reflection)
    throw std::runtime_error(pot.name() + ": declared line reflection symmetry fails empirically");
  return rep;
}

// ---------------------------------------------------------------------------
// Homogenized (Cauchy-Born) coefficients

namespace {

struct StencilNode {
  int offset;
  double coeff;
};

// Fourth-order central stencils; coefficients exclude the 1/h^k factor.
const std::vector<StencilNode>& stencil(int deriv) {
  static const std::vector<StencilNode> d0 = {{0, 1.0}};
  static const std::vector<StencilNode> d1 = {
      {-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
  static const std::vector<StencilNode> d2 = {{-2, -1.0 / 12},
                                              {-1, 16.0 / 12},
                                              {0, -30.0 / 12},
                                              {1, 16.0 / 12},
                                              {2, -1.0 / 12}};
  static const std::vector<StencilNode> d3 = {{-3, 1.0 / 8}, {-2, -1.0},    {-1, 13.0 / 8},
                                              {1, -13.0 / 8}, {2, 1.0},     {3, -1.0 / 8}};
  switch (deriv) {
    case 0: return d0;
    case 1: return d1;
    case 2: return d2;
    default: return d3;
  }
}

class HomogenizedEnergy {
 public:
  HomogenizedEnergy(const SitePotential& pot, double det)
      : pot_(pot), det_(det), strain_(static_cast<std::size_t>(pot.arity())) {}

  double operator()(double f1, double f2) const {
    const auto& dirs = pot_.neighbors().dirs;
    for (int a = 0; a < pot_.arity(); ++a)
      strain_[static_cast<std::size_t>(a)] = f1 * dirs[a].x() + f2 * dirs[a].y();
    return pot_.value_delta(strain_.data()) / det_;
  }

  // Mixed partial d^(k1+k2) W / dF1^k1 dF2^k2 at 0.
  double derivative(int k1, int k2, double h) const {
    const auto& s1 = stencil(k1);
    const auto& s2 = stencil(k2);
    Kahan acc;
    for (const auto& n1 : s1)
      for (const auto& n2 : s2)
        acc.add(n1.coeff * n2.coeff * (*this)(n1.offset * h, n2.offset * h));
    return acc.get() / std::pow(h, k1 + k2);
  }

 private:
  const SitePotential& pot_;
  double det_;
  mutable std::vector<double> strain_;
};

SymTensor w2_at(const HomogenizedEnergy& w, double h) {
  SymTensor t(2);
  t.at({0, 0}) = w.derivative(2, 0, h);
  t.at({1, 1}) = w.derivative(0, 2, h);
  const double mixed = w.derivative(1, 1, h);
  t.at({0, 1}) = mixed;
  t.at({1, 0}) = mixed;
  return t;
}

SymTensor w3_at(const HomogenizedEnergy& w, double h) {
  const double c111 = w.derivative(3, 0, h);
  const double c112 = w.derivative(2, 1, h);
  const double c122 = w.derivative(1, 2, h);
  const double c222 = w.derivative(0, 3, h);
  SymTensor t(3);
  for (int k = 0; k < 8; ++k) {
    const int ones = ((k >> 0) & 1) + ((k >> 1) & 1) + ((k >> 2) & 1);
    t.flat(k) = (ones == 0) ? c111 : (ones == 1) ? c112 : (ones == 2) ? c122 : c222;
  }
  return t;
}

}  // namespace

CauchyBornTensors cauchy_born(const SitePotential& pot, const LatticeSpec& spec) {
  const HomogenizedEnergy w(pot, spec.det());
  const double h0 = 1e-3 * pot.period();

  const SymTensor w2_c = w2_at(w, h0);
  const SymTensor w2_f = w2_at(w, h0 / 2.0);
  if (max_abs(w2_c - w2_f) > 1e-6 * std::max(1.0, max_abs(w2_f)))
    throw std::runtime_error("cauchy_born: second derivative of W did not stabilize under step halving");

  const SymTensor w3_c = w3_at(w, h0);
  const SymTensor w3_f = w3_at(w, h0 / 2.0);
  if (max_abs(w3_c - w3_f) > 1e-6 * std::max(1.0, max_abs(w3_f)))
    throw std::runtime_error("cauchy_born: third derivative of W did not stabilize under step halving");

  CauchyBornTensors out;
  out.W2 = w2_f;
  out.W3 = w3_f;
  out.c_lin = 0.5 * (w2_f.at({0, 0}) + w2_f.at({1, 1}));
  out.c_quad = 0.25 * (w3_f.at({0, 0, 0}) - 3.0 * w3_f.at({0, 1, 1}));

  SymTensor dev = out.W2 - out.c_lin * SymTensor::identity2();
  if (max_abs(dev) > 1e-8 * std::abs(out.c_lin))
    throw std::domain_error("cauchy_born: W2 is not proportional to the identity (symmetry violated)");

  const SymmetryFlags& flags = pot.declared_symmetries();
  if (flags.mirror) {
    if (max_abs(out.W3) > 1e-8)
      throw std::domain_error("cauchy_born: W3 does not vanish for a mirror-symmetric model");
  } else if (flags.line_reflection) {
    const SymTensor basis = invariant_basis(3, 3, true).front();
    SymTensor resid = out.W3 - out.c_quad * basis;
    if (max_abs(resid) > 1e-6 * std::max(std::abs(out.c_quad), 1.0))
      throw std::domain_error(
          "cauchy_born: W3 is not proportional to the reflection-odd invariant");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lattice stability probe

double stability_estimate(const SitePotential& pot, const LatticeSpec& spec, int trial_fields,
                          double domain_R, std::uint64_t seed) {
  const NeighborSet& ns = pot.neighbors();
  const int m = ns.size();
  if (domain_R < 2.0 * ns.max_length())
    throw std::invalid_argument("stability_estimate: domain cannot hold one interaction stencil");

  Eigen::MatrixXd h0(m, m);
  {
    std::vector<double> zero(static_cast<std::size_t>(m), 0.0);
    std::vector<double> h(static_cast<std::size_t>(m * m));
    pot.eval(zero.data(), nullptr, nullptr, h.data());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) h0(a, b) = h[static_cast<std::size_t>(a * m + b)];
  }

  const Domain inner = sites_in_ball(spec, domain_R);
  const Domain outer = sites_in_ball(spec, domain_R + ns.max_length() + 0.1);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u(inner.size());
  Eigen::VectorXd du(m);
  for (int t = 0; t < trial_fields; ++t) {
    for (int k = 0; k < u.size(); ++k) u[k] = gauss(rng);
    double num = 0.0, den = 0.0;
    for (const Coord& x : outer.sites) {
      const std::int32_t xi = inner.find(x);
      const double ux = xi >= 0 ? u[xi] : 0.0;
      for (int a = 0; a < m; ++a) {
        const Coord nb{x.i + ns.dirs_int[a].i, x.j + ns.dirs_int[a].j};
        const std::int32_t ni = inner.find(nb);
        du[a] = (ni >= 0 ? u[ni] : 0.0) - ux;
      }
      num += du.dot(h0 * du);
      den += du.squaredNorm();
    }
    if (den > 0.0) best = std::min(best, num / den);
  }
  return best;
}

}  // namespace dislocore
