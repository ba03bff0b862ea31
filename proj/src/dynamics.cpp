#include "hams/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

namespace hams {
namespace {

constexpr std::complex<double> I(0.0, 1.0);
using cd = std::complex<double>;

void check_params(const SystemParams& p) {
  if (p.cavity_dim < 2)
    throw error("configuration-error: cavity_dim must be at least 2");
  if (p.qubit_dim < 2)
    throw error("configuration-error: qubit_dim must be at least 2");
  for (double t :
       {p.t1_cavity, p.tphi_cavity, p.t1_qubit, p.tphi_qubit}) {
    if (!(t > 0.0)) throw error("invalid-rates: lifetimes must be positive");
  }
}

void check_drive(const DriveSpec& d) {
  if (d.teeth.empty()) throw error("configuration-error: drive has no teeth");
  if (!d.trims.empty() && d.trims.size() != d.teeth.size())
    throw error("configuration-error: trims must match teeth");
  if (d.envelope.rise < 0.0 || d.envelope.fall < 0.0 || d.envelope.flat < 0.0)
    throw error("configuration-error: negative envelope segment");
  if ((d.envelope.rise > 0.0 || d.envelope.fall > 0.0) &&
      !(d.envelope.sigma > 0.0))
    throw error("configuration-error: envelope edges need a positive sigma");
  if (!std::isfinite(d.base_rate))
    throw error("configuration-error: drive rate must be finite");
}

// Static diagonal energy of |q, n| in the rotating frame.
double static_energy(const SystemParams& p, int q, int n) {
  return p.chi * n * q + 0.5 * p.kerr * n * (n - 1.0) +
         0.5 * p.alpha_anh * q * (q - 1.0) +
         0.5 * p.chi_prime * n * (n - 1.0) * q;
}

// One lowering-operator matrix element of a drive tooth. Its instantaneous
// phase is an integer combination of the four static rates (plus the
// drive's extra detuning), so evaluation reduces to table lookups.
struct Triplet {
  int row = 0;
  int col = 0;
  cd coef;  // amplitude and constant phase, rad/s
  int e_chi = 0;
  int e_alpha = 0;
  int e_kerr = 0;
  int e_chip = 0;
  int drive = 0;
};

// Collapse-operator matrix element with its interaction-picture exponents.
struct Edge {
  int row = 0;
  int col = 0;
  double value = 0.0;
  int e_chi = 0;
  int e_alpha = 0;
  int e_kerr = 0;
  int e_chip = 0;
};

// Integer powers of the four base phasors e^{i rate t}, rebuilt per
// evaluation; negative powers are conjugates of positive ones.
class PhaseTables {
 public:
  void configure(int rate_index, int lo, int hi) {
    lo_[rate_index] = std::min(lo_[rate_index], lo);
    hi_[rate_index] = std::max(hi_[rate_index], hi);
  }

  void allocate() {
    for (int r = 0; r < 4; ++r)
      pow_[r].assign(hi_[r] - lo_[r] + 1, cd(1.0, 0.0));
  }

  void fill(const double rates[4], double t) {
    for (int r = 0; r < 4; ++r) {
      const cd u = std::polar(1.0, rates[r] * t);
      std::vector<cd>& p = pow_[r];
      const int off = -lo_[r];
      p[off] = cd(1.0, 0.0);
      for (int e = 1; e <= hi_[r]; ++e) p[off + e] = p[off + e - 1] * u;
      const cd v = std::conj(u);
      for (int e = -1; e >= lo_[r]; --e) p[off + e] = p[off + e + 1] * v;
    }
  }

  cd value(int e_chi, int e_alpha, int e_kerr, int e_chip) const {
    return pow_[0][e_chi - lo_[0]] * pow_[1][e_alpha - lo_[1]] *
           pow_[2][e_kerr - lo_[2]] * pow_[3][e_chip - lo_[3]];
  }

 private:
  int lo_[4] = {0, 0, 0, 0};
  int hi_[4] = {0, 0, 0, 0};
  std::vector<cd> pow_[4];
};

// All precomputed structure for one integration.
struct System {
  SystemParams params;
  std::vector<DriveSpec> drives;
  int cd_ = 0, qd_ = 0, dim = 0;
  std::vector<double> energy;          // static diagonal, rad/s
  std::vector<Triplet> triplets;       // drive elements
  std::vector<Edge> cavity_edges, qubit_edges;  // decay channels
  double gamma_cavity = 0.0, gamma_qubit = 0.0;
  Eigen::MatrixXd lambda;              // elementwise decay/dephasing rates
  bool lossy = false;
  mutable PhaseTables tables;
  double rates[4] = {0, 0, 0, 0};

  // scratch, sized once
  mutable std::vector<double> amp;     // per-drive envelope value
  mutable std::vector<cd> detune;      // per-drive extra-detuning phasor
  mutable std::vector<cd> wc, wq;      // per-edge phased elements

  void build(const SystemParams& p, const std::vector<DriveSpec>& ds,
             bool interaction);
  void refresh(double t) const;        // tables + envelopes at time t
  void rhs_density(const Eigen::VectorXd& x, Eigen::VectorXd& dx,
                   double t) const;
  void rhs_pure(const Eigen::VectorXd& x, Eigen::VectorXd& dx,
                double t) const;
};

void System::build(const SystemParams& p, const std::vector<DriveSpec>& ds,
                   bool interaction) {
  check_params(p);
  params = p;
  drives = ds;
  cd_ = p.cavity_dim;
  qd_ = p.qubit_dim;
  dim = cd_ * qd_;
  rates[0] = p.chi;
  rates[1] = p.alpha_anh;
  rates[2] = p.kerr;
  rates[3] = p.chi_prime;

  energy.resize(dim);
  for (int q = 0; q < qd_; ++q)
    for (int n = 0; n < cd_; ++n)
      energy[q * cd_ + n] = static_energy(p, q, n);

  for (size_t di = 0; di < ds.size(); ++di) {
    const DriveSpec& d = ds[di];
    check_drive(d);
    for (size_t ti = 0; ti < d.teeth.size(); ++ti) {
      const int tooth = d.teeth[ti].first;
      const double phase = d.teeth[ti].second + d.carrier_phase;
      const double trim = d.trims.empty() ? 1.0 : d.trims[ti];
      const cd coef0 = 0.5 * d.base_rate * trim * std::polar(1.0, phase);
      if (d.target == DriveTarget::qubit) {
        for (int q = 1; q < qd_; ++q)
          for (int n = 0; n < cd_; ++n) {
            Triplet tr;
            tr.row = (q - 1) * cd_ + n;
            tr.col = q * cd_ + n;
            tr.coef = coef0 * std::sqrt(double(q));
            tr.e_chi = tooth;
            if (interaction) {
              tr.e_chi += -n;
              tr.e_alpha = -(q - 1);
              tr.e_chip = -(n * (n - 1)) / 2;
            }
            tr.drive = int(di);
            triplets.push_back(tr);
          }
      } else {
        for (int q = 0; q < qd_; ++q)
          for (int n = 1; n < cd_; ++n) {
            Triplet tr;
            tr.row = q * cd_ + (n - 1);
            tr.col = q * cd_ + n;
            tr.coef = coef0 * std::sqrt(double(n));
            tr.e_chi = tooth;
            if (interaction) {
              tr.e_chi += -q;
              tr.e_kerr = -(n - 1);
              tr.e_chip = -q * (n - 1);
            }
            tr.drive = int(di);
            triplets.push_back(tr);
          }
      }
    }
  }
  for (const Triplet& tr : triplets) {
    tables.configure(0, tr.e_chi, tr.e_chi);
    tables.configure(1, tr.e_alpha, tr.e_alpha);
    tables.configure(2, tr.e_kerr, tr.e_kerr);
    tables.configure(3, tr.e_chip, tr.e_chip);
  }

  // Collapse channels: sqrt(1/t1) lowering and sqrt(1/tphi) number ops.
  const double gphi_c = 1.0 / p.tphi_cavity;  // 0 when infinite
  const double gphi_q = 1.0 / p.tphi_qubit;
  gamma_cavity = 1.0 / p.t1_cavity;
  gamma_qubit = 1.0 / p.t1_qubit;
  lossy = gamma_cavity > 0.0 || gamma_qubit > 0.0 || gphi_c > 0.0 ||
          gphi_q > 0.0;

  if (interaction && lossy) {
    if (gamma_cavity > 0.0)
      for (int q = 0; q < qd_; ++q)
        for (int n = 1; n < cd_; ++n) {
          Edge e;
          e.row = q * cd_ + (n - 1);
          e.col = q * cd_ + n;
          e.value = std::sqrt(double(n));
          e.e_chi = -q;
          e.e_kerr = -(n - 1);
          e.e_chip = -q * (n - 1);
          cavity_edges.push_back(e);
        }
    if (gamma_qubit > 0.0)
      for (int q = 1; q < qd_; ++q)
        for (int n = 0; n < cd_; ++n) {
          Edge e;
          e.row = (q - 1) * cd_ + n;
          e.col = q * cd_ + n;
          e.value = std::sqrt(double(q));
          e.e_chi = -n;
          e.e_alpha = -(q - 1);
          e.e_chip = -(n * (n - 1)) / 2;
          qubit_edges.push_back(e);
        }
    for (const Edge& e : cavity_edges) {
      tables.configure(0, e.e_chi, e.e_chi);
      tables.configure(2, e.e_kerr, e.e_kerr);
      tables.configure(3, e.e_chip, e.e_chip);
    }
    for (const Edge& e : qubit_edges) {
      tables.configure(0, e.e_chi, e.e_chi);
      tables.configure(1, e.e_alpha, e.e_alpha);
      tables.configure(3, e.e_chip, e.e_chip);
    }

    // Elementwise rates: -1/2 sum_k gamma_k [(C'C)_j + (C'C)_l]
    //                    -1/2 sum_k gphi_k (d_j - d_l)^2.
    lambda.setZero(dim, dim);
    for (int j = 0; j < dim; ++j) {
      const int qj = j / cd_, nj = j % cd_;
      for (int l = 0; l < dim; ++l) {
        const int ql = l / cd_, nl = l % cd_;
        double r = 0.0;
        r -= 0.5 * gamma_cavity * (nj + nl);
        r -= 0.5 * gamma_qubit * (qj + ql);
        r -= 0.5 * gphi_c * double(nj - nl) * double(nj - nl);
        r -= 0.5 * gphi_q * double(qj - ql) * double(qj - ql);
        lambda(j, l) = r;
      }
    }
  }

  tables.allocate();
  amp.resize(ds.size());
  detune.resize(ds.size());
  wc.resize(cavity_edges.size());
  wq.resize(qubit_edges.size());
}

void System::refresh(double t) const {
  tables.fill(rates, t);
  for (size_t di = 0; di < drives.size(); ++di) {
    const DriveSpec& d = drives[di];
    amp[di] = d.envelope.amplitude(t - d.t_start);
    detune[di] = d.extra_detuning == 0.0
                     ? cd(1.0, 0.0)
                     : std::polar(1.0, d.extra_detuning * t);
  }
  for (size_t e = 0; e < cavity_edges.size(); ++e) {
    const Edge& ed = cavity_edges[e];
    wc[e] = ed.value * tables.value(ed.e_chi, 0, ed.e_kerr, ed.e_chip);
  }
  for (size_t e = 0; e < qubit_edges.size(); ++e) {
    const Edge& ed = qubit_edges[e];
    wq[e] = ed.value * tables.value(ed.e_chi, ed.e_alpha, 0, ed.e_chip);
  }
}

void System::rhs_density(const Eigen::VectorXd& x, Eigen::VectorXd& dx,
                         double t) const {
  refresh(t);
  Eigen::Map<const Eigen::MatrixXcd> rho(
      reinterpret_cast<const cd*>(x.data()), dim, dim);
  dx.resize(x.size());
  Eigen::Map<Eigen::MatrixXcd> drho(reinterpret_cast<cd*>(dx.data()), dim,
                                    dim);
  if (lossy) {
    drho = rho.cwiseProduct(lambda);
    for (size_t a = 0; a < wc.size(); ++a)
      for (size_t b = 0; b < wc.size(); ++b)
        drho(cavity_edges[a].row, cavity_edges[b].row) +=
            gamma_cavity * wc[a] * std::conj(wc[b]) *
            rho(cavity_edges[a].col, cavity_edges[b].col);
    for (size_t a = 0; a < wq.size(); ++a)
      for (size_t b = 0; b < wq.size(); ++b)
        drho(qubit_edges[a].row, qubit_edges[b].row) +=
            gamma_qubit * wq[a] * std::conj(wq[b]) *
            rho(qubit_edges[a].col, qubit_edges[b].col);
  } else {
    drho.setZero();
  }
  for (const Triplet& tr : triplets) {
    const double a = amp[tr.drive];
    if (a == 0.0) continue;
    const cd h = tr.coef * a * detune[tr.drive] *
                 tables.value(tr.e_chi, tr.e_alpha, tr.e_kerr, tr.e_chip);
    const cd ih = I * h;
    drho.row(tr.row) -= ih * rho.row(tr.col);
    drho.row(tr.col) += std::conj(ih) * rho.row(tr.row);
    drho.col(tr.col) += ih * rho.col(tr.row);
    drho.col(tr.row) -= std::conj(ih) * rho.col(tr.col);
  }
}

void System::rhs_pure(const Eigen::VectorXd& x, Eigen::VectorXd& dx,
                      double t) const {
  refresh(t);
  Eigen::Map<const Eigen::VectorXcd> psi(
      reinterpret_cast<const cd*>(x.data()), dim);
  dx.resize(x.size());
  Eigen::Map<Eigen::VectorXcd> dpsi(reinterpret_cast<cd*>(dx.data()), dim);
  dpsi.setZero();
  for (const Triplet& tr : triplets) {
    const double a = amp[tr.drive];
    if (a == 0.0) continue;
    const cd h = tr.coef * a * detune[tr.drive] *
                 tables.value(tr.e_chi, tr.e_alpha, tr.e_kerr, tr.e_chip);
    dpsi(tr.row) -= I * h * psi(tr.col);
    dpsi(tr.col) -= I * std::conj(h) * psi(tr.row);
  }
}

using Stepper =
    boost::numeric::odeint::runge_kutta_dopri5<Eigen::VectorXd, double,
                                               Eigen::VectorXd, double,
                                               boost::numeric::odeint::vector_space_algebra>;

// Integrates dx = f(x, t) from t = 0 through the grid, calling observe at
// every grid time. Adaptive dopri5; the 1e-11 per-step tolerance keeps the
// accumulated global error beyond the 1e-9 control target even on
// million-step runs.
template <typename Rhs, typename Observe>
void integrate_grid(const Rhs& rhs, Eigen::VectorXd& x,
                    const std::vector<double>& grid, const Observe& observe) {
  namespace ode = boost::numeric::odeint;
  auto ctrl = ode::make_controlled(1e-11, 1e-11, Stepper());
  double t = 0.0;
  double dt = 1e-10;
  for (double tg : grid) {
    while (tg - t > 1e-16) {
      double step = std::min(dt, tg - t);
      const auto res = ctrl.try_step(rhs, x, t, step);
      if (res == ode::fail) {
        if (step < 1e-18)
          throw error("stiffness-error: step size underflow");
        dt = step;
      } else {
        dt = step;
      }
    }
    observe(tg, x);
  }
}

void check_grid(const std::vector<double>& t_grid) {
  double prev = -1.0;
  for (double t : t_grid) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw error("configuration-error: grid times must be finite and >= 0");
    if (t <= prev && prev >= 0.0)
      throw error("configuration-error: grid times must increase");
    prev = t;
  }
}

}  // namespace

bool SystemParams::lossless() const {
  return std::isinf(t1_cavity) && std::isinf(tphi_cavity) &&
         std::isinf(t1_qubit) && std::isinf(tphi_qubit);
}

double tphi_from_t1_t2(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0))
    throw error("invalid-rates: lifetimes must be positive");
  const double rate = 2.0 * (1.0 / t2 - 0.5 / t1);
  if (rate < -1e-12)
    throw error("invalid-rates: t2 exceeds 2 t1");
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

double Envelope::amplitude(double t) const {
  const double len = support();
  if (t < 0.0 || t > len) return 0.0;
  if (t < rise) {
    const double d = t - rise;
    return std::exp(-0.5 * d * d / (sigma * sigma));
  }
  if (t <= rise + flat) return 1.0;
  const double d = t - (rise + flat);
  return std::exp(-0.5 * d * d / (sigma * sigma));
}

Operator build_hamiltonian(const SystemParams& params,
                           const std::vector<DriveSpec>& drives, double t) {
  System sys;
  sys.build(params, drives, /*interaction=*/false);
  sys.refresh(t);
  Operator h = Operator::Zero(sys.dim, sys.dim);
  for (int j = 0; j < sys.dim; ++j) h(j, j) = sys.energy[j];
  for (const Triplet& tr : sys.triplets) {
    const double a = sys.amp[tr.drive];
    if (a == 0.0) continue;
    const cd v = tr.coef * a * sys.detune[tr.drive] *
                 sys.tables.value(tr.e_chi, tr.e_alpha, tr.e_kerr, tr.e_chip);
    h(tr.row, tr.col) += v;
    h(tr.col, tr.row) += std::conj(v);
  }
  return h;
}

Trajectory lindblad_evolve(const SystemParams& params,
                           const std::vector<DriveSpec>& drives,
                           const DensityMatrix& rho0,
                           const std::vector<double>& t_grid) {
  System sys;
  sys.build(params, drives, /*interaction=*/true);
  const int dim = sys.dim;
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw error("configuration-error: initial state dimension mismatch");
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw error("configuration-error: initial state must be Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-8 ||
      std::abs(rho0.trace().imag()) > 1e-10)
    throw error("configuration-error: initial state must have unit trace");
  check_grid(t_grid);

  Trajectory out;
  const size_t nt = t_grid.size();
  out.times = t_grid;
  out.states.reserve(nt);
  out.fock_populations.setZero(long(nt), sys.cd_);
  out.ground_population.resize(nt);
  out.keep_probability.resize(nt);
  if (nt == 0) return out;

  const bool pure = !sys.lossy &&
                    (rho0 * rho0 - rho0).cwiseAbs().maxCoeff() < 1e-10;

  size_t idx = 0;
  auto store = [&](const Eigen::MatrixXcd& rho_lab) {
    out.states.push_back(rho_lab);
    double ground = 0.0;
    for (int q = 0; q < sys.qd_; ++q)
      for (int n = 0; n < sys.cd_; ++n) {
        const double pop = rho_lab(q * sys.cd_ + n, q * sys.cd_ + n).real();
        out.fock_populations(long(idx), n) += pop;
        if (q == 0) ground += pop;
      }
    out.ground_population[idx] = ground;
    out.keep_probability[idx] = ground;
    ++idx;
  };

  if (pure) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho0);
    Eigen::VectorXcd psi0 = es.eigenvectors().col(dim - 1);
    Eigen::VectorXd x(2 * dim);
    Eigen::Map<Eigen::VectorXcd>(reinterpret_cast<cd*>(x.data()), dim) = psi0;
    auto rhs = [&sys](const Eigen::VectorXd& v, Eigen::VectorXd& dv,
                      double t) { sys.rhs_pure(v, dv, t); };
    integrate_grid(rhs, x, t_grid, [&](double tg, const Eigen::VectorXd& v) {
      Eigen::Map<const Eigen::VectorXcd> psi(
          reinterpret_cast<const cd*>(v.data()), dim);
      const double norm2 = psi.squaredNorm();
      if (std::abs(norm2 - 1.0) > 1e-6)
        throw error("integrator-failure: norm drift exceeds 1e-6");
      Eigen::VectorXcd lab(dim);
      for (int j = 0; j < dim; ++j)
        lab(j) = psi(j) * std::polar(1.0, -sys.energy[j] * tg);
      store(lab * lab.adjoint());
    });
  } else {
    Eigen::VectorXd x(2 * dim * dim);
    Eigen::Map<Eigen::MatrixXcd>(reinterpret_cast<cd*>(x.data()), dim, dim) =
        rho0;
    auto rhs = [&sys](const Eigen::VectorXd& v, Eigen::VectorXd& dv,
                      double t) { sys.rhs_density(v, dv, t); };
    integrate_grid(rhs, x, t_grid, [&](double tg, const Eigen::VectorXd& v) {
      Eigen::Map<const Eigen::MatrixXcd> rho(
          reinterpret_cast<const cd*>(v.data()), dim, dim);
      if (std::abs(rho.trace().real() - 1.0) > 1e-6 ||
          std::abs(rho.trace().imag()) > 1e-8)
        throw error("integrator-failure: trace drift exceeds 1e-6");
      Eigen::MatrixXcd lab(dim, dim);
      for (int j = 0; j < dim; ++j)
        for (int l = 0; l < dim; ++l)
          lab(j, l) = rho(j, l) *
                      std::polar(1.0, -(sys.energy[j] - sys.energy[l]) * tg);
      store(lab);
    });
  }
  return out;
}

Trajectory effective_evolve(const PhaseComb& comb, double eps, double varphi,
                            int manifold, const std::vector<double>& t_grid) {
  comb.validate();
  if (manifold < 2 || manifold > comb.manifold_size())
    throw error("configuration-error: manifold outside comb range");
  check_grid(t_grid);
  const Operator m = generator_from_phases(comb, -varphi)
                         .topLeftCorner(manifold, manifold);
  Eigen::SelfAdjointEigenSolver<Operator> es(m);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Operator v = es.eigenvectors();
  const Eigen::VectorXcd c0 = v.adjoint().col(0);  // overlaps with |0>

  Trajectory out;
  out.times = t_grid;
  out.states.reserve(t_grid.size());
  out.fock_populations.setZero(long(t_grid.size()), manifold);
  out.ground_population.assign(t_grid.size(), 1.0);
  out.keep_probability.assign(t_grid.size(), 1.0);
  for (size_t i = 0; i < t_grid.size(); ++i) {
    Eigen::VectorXcd phased(manifold);
    for (int k = 0; k < manifold; ++k)
      phased(k) = std::polar(1.0, -0.5 * eps * lam(k) * t_grid[i]) * c0(k);
    const Eigen::VectorXcd psi = v * phased;
    out.states.push_back(psi * psi.adjoint());
    for (int n = 0; n < manifold; ++n)
      out.fock_populations(long(i), n) = std::norm(psi(n));
  }
  return out;
}

std::pair<DensityMatrix, double> postselect_ground(const DensityMatrix& rho,
                                                   int cavity_dim) {
  if (cavity_dim < 1 || rho.rows() != rho.cols() ||
      rho.rows() % cavity_dim != 0 || rho.rows() < cavity_dim)
    throw error("configuration-error: state does not factor over the qubit");
  const DensityMatrix block = rho.topLeftCorner(cavity_dim, cavity_dim);
  const double keep = block.trace().real();
  if (keep < 1e-12) throw error("empty-branch: ground weight vanishes");
  return {block / keep, keep};
}

std::vector<double> measurement_model(const std::vector<double>& populations,
                                      double misassign,
                                      double pi_infidelity) {
  if (!(misassign >= 0.0 && misassign <= 0.5) ||
      !(pi_infidelity >= 0.0 && pi_infidelity <= 0.5))
    throw error("invalid-rates: readout errors must lie in [0, 0.5]");
  std::vector<double> out;
  out.reserve(populations.size());
  for (double p : populations)
    out.push_back((1.0 - pi_infidelity) *
                  ((1.0 - misassign) * p + misassign * (1.0 - p)));
  return out;
}

Schedule schedule_spin_experiment(SpinQuantum J, const SystemParams& params,
                                  double eps, double omega, double t_cavity,
                                  double t_cavity_max,
                                  double comb_flat_extra) {
  check_params(params);
  if (!(eps >= 0.0) || !(omega > 0.0))
    throw error("configuration-error: drive rates must be positive");
  if (t_cavity < 0.0)
    throw error("configuration-error: negative cavity duration");
  if (params.cavity_dim < J.dim())
    throw error("configuration-error: cavity_dim below the spin manifold");
  if (t_cavity_max < 0.0) t_cavity_max = t_cavity;
  if (t_cavity > t_cavity_max * (1.0 + 1e-12) + 1e-15)
    throw error("schedule-overflow: cavity flat exceeds the scheduled maximum");

  const double qubit_edge = 150e-9, qubit_sigma = 60e-9;
  const double cavity_edge = 400e-9, cavity_sigma = 160e-9;
  const double cavity_support = t_cavity + 2.0 * cavity_edge;
  const double flat =
      t_cavity_max + 2.0 * cavity_edge + comb_flat_extra;
  if (flat < cavity_support - 1e-15)
    throw error("schedule-overflow: comb flat top cannot hold the cavity pulse");

  Schedule sched;
  sched.comb = su2_phases(J);

  DriveSpec comb_drive;
  comb_drive.base_rate = omega;
  comb_drive.target = DriveTarget::qubit;
  for (int n = 0; n < sched.comb.manifold_size(); ++n)
    comb_drive.teeth.emplace_back(n, sched.comb.phases[size_t(n)]);
  comb_drive.envelope = {qubit_edge, qubit_edge, flat, qubit_sigma, 2.5};
  comb_drive.t_start = 0.0;
  sched.drives.push_back(comb_drive);

  sched.comb_flat_end = qubit_edge + flat;
  sched.total_time = qubit_edge + flat + qubit_edge;
  sched.cavity_start = sched.comb_flat_end - cavity_support;

  if (t_cavity > 0.0 && eps > 0.0) {
    DriveSpec cav;
    cav.base_rate = eps;
    cav.target = DriveTarget::cavity;
    cav.teeth = {{0, 0.0}, {1, 0.0}};
    cav.envelope = {cavity_edge, cavity_edge, t_cavity, cavity_sigma, 2.5};
    cav.t_start = sched.cavity_start;
    sched.drives.push_back(cav);
  }

  sched.snap_phases = decoder_snap_phases(sched.comb);
  return sched;
}

}  // namespace hams
