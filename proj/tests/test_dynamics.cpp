#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "hams/dynamics.hpp"
#include "hams/mem.hpp"
#include "hams/operators.hpp"

namespace {

constexpr std::complex<double> I(0.0, 1.0);
constexpr double pi = 3.14159265358979323846;
constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

hams::SystemParams bare_qubit() {
  hams::SystemParams p;
  p.cavity_dim = 2;
  p.qubit_dim = 2;
  return p;
}

// Dense fixed-step RK4 master-equation integrator built directly on
// build_hamiltonian; the production integrator must agree with it.
Eigen::MatrixXcd brute_lindblad(const hams::SystemParams& p,
                                const std::vector<hams::DriveSpec>& drives,
                                Eigen::MatrixXcd rho, double t_final,
                                double h) {
  const int qd = p.qubit_dim, cd = p.cavity_dim;
  std::vector<std::pair<double, Eigen::MatrixXcd>> collapse;
  auto iq = Eigen::MatrixXcd::Identity(qd, qd);
  auto ic = Eigen::MatrixXcd::Identity(cd, cd);
  if (std::isfinite(p.t1_cavity))
    collapse.push_back({1.0 / p.t1_cavity, hams::tensor(iq, hams::annihilation(cd))});
  if (std::isfinite(p.tphi_cavity))
    collapse.push_back({1.0 / p.tphi_cavity, hams::tensor(iq, hams::number_op(cd))});
  if (std::isfinite(p.t1_qubit))
    collapse.push_back({1.0 / p.t1_qubit, hams::tensor(hams::annihilation(qd), ic)});
  if (std::isfinite(p.tphi_qubit))
    collapse.push_back({1.0 / p.tphi_qubit, hams::tensor(hams::number_op(qd), ic)});
  auto rhs = [&](const Eigen::MatrixXcd& r, double t) -> Eigen::MatrixXcd {
    const hams::Operator ham = hams::build_hamiltonian(p, drives, t);
    Eigen::MatrixXcd d = -I * (ham * r - r * ham);
    for (const auto& [g, c] : collapse)
      d += g * (c * r * c.adjoint() -
                0.5 * (c.adjoint() * c * r + r * c.adjoint() * c));
    return d;
  };
  const int steps = int(std::round(t_final / h));
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Eigen::MatrixXcd k1 = rhs(rho, t);
    const Eigen::MatrixXcd k2 = rhs(rho + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::MatrixXcd k3 = rhs(rho + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::MatrixXcd k4 = rhs(rho + h * k3, t + h);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

}  // namespace

TEST_CASE("envelope: flat top with truncated Gaussian edges") {
  hams::Envelope env{200e-9, 200e-9, 1e-6, 80e-9, 2.5};
  CHECK(env.support() == doctest::Approx(1.4e-6));
  CHECK(env.amplitude(-1e-9) == 0.0);
  CHECK(env.amplitude(1.5e-6) == 0.0);
  CHECK(env.amplitude(300e-9) == 1.0);
  CHECK(env.amplitude(1.2e-6) == 1.0);
  // edge value at support boundary: exp(-truncation^2/2)
  CHECK(env.amplitude(0.0) == doctest::Approx(std::exp(-0.5 * 2.5 * 2.5)));
  CHECK(env.amplitude(1.4e-6) == doctest::Approx(std::exp(-0.5 * 2.5 * 2.5)));
  // symmetric edges
  CHECK(env.amplitude(100e-9) == doctest::Approx(env.amplitude(1.3e-6)));
  // halfway up the rise
  CHECK(env.amplitude(120e-9) ==
        doctest::Approx(std::exp(-0.5 * std::pow(80e-9 / 80e-9, 2))));
}

TEST_CASE("pure-dephasing time from measured lifetimes") {
  // transmon: t1 = 90 us, t2 = 40 us
  CHECK(hams::tphi_from_t1_t2(90e-6, 40e-6) ==
        doctest::Approx(2.5714285714285714e-5).epsilon(1e-12));
  // cavity: t1 = 132 us, t2 = 150 us
  CHECK(hams::tphi_from_t1_t2(132e-6, 150e-6) ==
        doctest::Approx(1.7368421052631578e-4).epsilon(1e-12));
  // t2 at the 2 t1 limit: no pure dephasing
  CHECK(std::isinf(hams::tphi_from_t1_t2(50e-6, 100e-6)));
  CHECK_THROWS_WITH_AS(hams::tphi_from_t1_t2(50e-6, 101e-6),
                       doctest::Contains("invalid-rates"), hams::error);
}

TEST_CASE("hamiltonian: ground-qubit block is free when kerr terms vanish") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 2.54e6;
  p.alpha_anh = -2.0 * pi * 180e6;
  p.cavity_dim = 5;
  p.qubit_dim = 3;
  const hams::Operator h = hams::build_hamiltonian(p, {}, 0.0);
  CHECK(h.rows() == 15);
  // q = 0 block: no dispersive shift, no anharmonicity
  CHECK(h.topLeftCorner(5, 5).cwiseAbs().maxCoeff() == 0.0);
  // q = 1, n = 3: chi * 3
  CHECK(h(5 + 3, 5 + 3).real() == doctest::Approx(3.0 * p.chi));
  // q = 2, n = 2: 2 chi * 2 + alpha
  CHECK(h(10 + 2, 10 + 2).real() ==
        doctest::Approx(4.0 * p.chi + p.alpha_anh));
}

TEST_CASE("hamiltonian: static diagonal matches the dispersive expansion") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 3.56e6;
  p.chi_prime = 2.0 * pi * 7e3;
  p.kerr = -2.0 * pi * 11e3;
  p.alpha_anh = -2.0 * pi * 180e6;
  p.cavity_dim = 6;
  p.qubit_dim = 4;
  const hams::Operator h = hams::build_hamiltonian(p, {}, 1.7e-6);
  for (int q = 0; q < 4; ++q)
    for (int n = 0; n < 6; ++n) {
      const double expect = p.chi * n * q + 0.5 * p.kerr * n * (n - 1) +
                            0.5 * p.alpha_anh * q * (q - 1) +
                            0.5 * p.chi_prime * n * (n - 1) * q;
      CHECK(h(q * 6 + n, q * 6 + n).real() == doctest::Approx(expect));
    }
  CHECK(h.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("hamiltonian: drive teeth rotate and stay Hermitian") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 1e6;
  p.cavity_dim = 4;
  p.qubit_dim = 2;
  hams::DriveSpec d;
  d.base_rate = 2.0 * pi * 0.5e6;
  d.teeth = {{0, 0.3}, {1, -0.2}};
  d.target = hams::DriveTarget::qubit;
  d.envelope = {0.0, 0.0, 1e-5, 0.0, 2.5};
  const hams::Operator h0 = hams::build_hamiltonian(p, {d}, 0.0);
  hams::require_hermitian(h0, 1e-12);
  // at t = 0 both teeth add coherently with their static phases
  const std::complex<double> expect =
      0.5 * d.base_rate *
      (std::polar(1.0, 0.3) + std::polar(1.0, -0.2));
  CHECK(std::abs(h0(0, 4) - expect) < 1e-9);
  // one full chi period later the tooth factors return to themselves
  const double tau = 2.0 * pi / std::abs(p.chi);
  const hams::Operator h1 = hams::build_hamiltonian(p, {d}, tau);
  CHECK((h1 - h0).cwiseAbs().maxCoeff() < 1e-6 * d.base_rate);
  hams::require_hermitian(h1, 1e-12);
}

TEST_CASE("resonant Rabi oscillation matches the analytic solution") {
  hams::SystemParams p = bare_qubit();
  hams::DriveSpec d;
  const double omega = 2.0 * pi * 1e6;
  d.base_rate = omega;
  d.teeth = {{0, 0.0}};
  d.envelope = {0.0, 0.0, 3e-6, 0.0, 2.5};
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(0, 0) = 1.0;
  const auto grid = linspace(0.0, 2e-6, 21);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {d}, rho0, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double pe = 1.0 - tr.ground_population[i];
    const double expect = std::pow(std::sin(0.5 * omega * grid[i]), 2);
    CHECK(std::abs(pe - expect) < 1e-8);
  }
  // cavity stays in vacuum
  CHECK(tr.fock_populations.col(0).minCoeff() > 1.0 - 1e-10);
}

TEST_CASE("detuned Rabi: chevron amplitude and frequency") {
  hams::SystemParams p = bare_qubit();
  const double omega = 2.0 * pi * 1e6;
  const double delta = 2.0 * pi * 0.7e6;
  hams::DriveSpec d;
  d.base_rate = omega;
  d.teeth = {{0, 0.0}};
  d.envelope = {0.0, 0.0, 4e-6, 0.0, 2.5};
  d.extra_detuning = delta;
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(0, 0) = 1.0;
  const auto grid = linspace(0.0, 3e-6, 16);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {d}, rho0, grid);
  const double generalized = std::hypot(omega, delta);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double expect = (omega * omega) / (generalized * generalized) *
                          std::pow(std::sin(0.5 * generalized * grid[i]), 2);
    CHECK(std::abs((1.0 - tr.ground_population[i]) - expect) < 1e-7);
  }
}

TEST_CASE("incoherent mixture takes the density path: constant excitation") {
  hams::SystemParams p = bare_qubit();
  hams::DriveSpec d;
  d.base_rate = 2.0 * pi * 1e6;
  d.teeth = {{0, 0.0}};
  d.envelope = {0.0, 0.0, 3e-6, 0.0, 2.5};
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(0, 0) = 0.5;  // |g,0>
  rho0(2, 2) = 0.5;  // |e,0>
  const auto grid = linspace(0.0, 2e-6, 9);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {d}, rho0, grid);
  for (double g : tr.ground_population) CHECK(std::abs(g - 0.5) < 1e-8);
}

TEST_CASE("amplitude damping reproduces exponential decay") {
  hams::SystemParams p = bare_qubit();
  p.t1_qubit = 50e-6;
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(2, 2) = 1.0;  // |e,0>
  const auto grid = linspace(0.0, 120e-6, 13);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {}, rho0, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double pe = 1.0 - tr.ground_population[i];
    CHECK(std::abs(pe - std::exp(-grid[i] / 50e-6)) < 1e-6);
  }

  hams::SystemParams pc = bare_qubit();
  pc.cavity_dim = 3;
  pc.t1_cavity = 80e-6;
  hams::DensityMatrix rc = hams::DensityMatrix::Zero(6, 6);
  rc(1, 1) = 1.0;  // |g,1>
  const hams::Trajectory tc = hams::lindblad_evolve(pc, {}, rc, grid);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(tc.fock_populations(long(i), 1) -
                   std::exp(-grid[i] / 80e-6)) < 1e-6);
}

TEST_CASE("qubit coherence decays at the Ramsey rate") {
  hams::SystemParams p = bare_qubit();
  const double t1 = 60e-6, t2 = 35e-6;
  p.t1_qubit = t1;
  p.tphi_qubit = hams::tphi_from_t1_t2(t1, t2);
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(0, 0) = 0.5;
  rho0(2, 2) = 0.5;
  rho0(0, 2) = 0.5;
  rho0(2, 0) = 0.5;
  const auto grid = linspace(0.0, 60e-6, 7);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {}, rho0, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double coh = std::abs(tr.states[i](0, 2));
    CHECK(std::abs(coh - 0.5 * std::exp(-grid[i] / t2)) < 1e-8);
  }
}

TEST_CASE("resonant cavity drive builds the expected coherent state") {
  hams::SystemParams p;
  p.cavity_dim = 14;
  p.qubit_dim = 2;
  const double eps = 2.0 * pi * 100e3;
  const double t_final = 2.0 / eps;  // |beta| = 1
  hams::DriveSpec d;
  d.base_rate = eps;
  d.teeth = {{0, 0.0}};
  d.target = hams::DriveTarget::cavity;
  d.envelope = {0.0, 0.0, 1.1 * t_final, 0.0, 2.5};
  d.carrier_phase = 0.3;
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(28, 28);
  rho0(0, 0) = 1.0;
  const hams::Trajectory tr = hams::lindblad_evolve(p, {d}, rho0, {t_final});
  const std::complex<double> beta =
      -I * 0.5 * eps * t_final * std::polar(1.0, -0.3);
  const Eigen::VectorXcd coherent =
      hams::displacement(beta, 14).col(0);
  Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(28);
  expect.head(14) = coherent;  // qubit stays in |g>
  const double overlap =
      (expect.adjoint() * tr.states[0] * expect).real()(0, 0);
  CHECK(overlap > 1.0 - 1e-7);
  CHECK(std::abs(tr.fock_populations.row(0).sum() - 1.0) < 1e-6);
}

TEST_CASE("interaction-picture integrator agrees with a dense brute force") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 400e3;
  p.chi_prime = 2.0 * pi * 30e3;
  p.kerr = -2.0 * pi * 50e3;
  p.alpha_anh = -2.0 * pi * 5e6;
  p.t1_qubit = 40e-6;
  p.tphi_qubit = 30e-6;
  p.t1_cavity = 100e-6;
  p.tphi_cavity = 80e-6;
  p.cavity_dim = 3;
  p.qubit_dim = 3;

  // edges truncated at 6 sigma: smooth enough for the fixed-step oracle
  // to converge at full order
  hams::DriveSpec comb;
  comb.base_rate = 2.0 * pi * 250e3;
  comb.teeth = {{0, 0.2}, {1, -0.4}};
  comb.envelope = {100e-9, 100e-9, 300e-9, 100e-9 / 6.0, 6.0};
  comb.trims = {1.0, 0.97};

  hams::DriveSpec cav;
  cav.base_rate = 2.0 * pi * 150e3;
  cav.teeth = {{0, 0.1}, {1, 0.0}};
  cav.target = hams::DriveTarget::cavity;
  cav.envelope = {60e-9, 60e-9, 430e-9, 10e-9, 6.0};
  cav.extra_detuning = 2.0 * pi * 25e3;
  cav.carrier_phase = 0.15;
  cav.t_start = 50e-9;

  // mixed, correlated initial state
  Eigen::VectorXcd psi(9);
  psi << 1.0, 0.5, 0.0, std::complex<double>(0.3, 0.1), 0.0, 0.2, 0.0, 0.1,
      0.05;
  psi.normalize();
  hams::DensityMatrix rho0 =
      0.8 * psi * psi.adjoint() +
      0.2 * hams::DensityMatrix::Identity(9, 9) / 9.0;

  const double t_final = 600e-9;
  const hams::Trajectory tr =
      hams::lindblad_evolve(p, {comb, cav}, rho0, {t_final});
  const Eigen::MatrixXcd brute =
      brute_lindblad(p, {comb, cav}, rho0, t_final, 0.2e-9);
  CHECK((tr.states[0] - brute).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("driven lossy evolution keeps density-matrix invariants") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 1e6;
  p.chi_prime = 2.0 * pi * 5e3;
  p.kerr = -2.0 * pi * 10e3;
  p.alpha_anh = -2.0 * pi * 20e6;
  p.t1_qubit = 30e-6;
  p.tphi_qubit = 20e-6;
  p.t1_cavity = 80e-6;
  p.tphi_cavity = 60e-6;
  p.cavity_dim = 4;
  p.qubit_dim = 3;

  const hams::PhaseComb comb3 = hams::su2_phases(hams::SpinQuantum{2});
  hams::DriveSpec comb;
  comb.base_rate = 2.0 * pi * 300e3;
  for (int n = 0; n < 3; ++n)
    comb.teeth.emplace_back(n, comb3.phases[size_t(n)]);
  comb.envelope = {150e-9, 150e-9, 18e-6, 60e-9, 2.5};

  hams::DriveSpec cav;
  cav.base_rate = 2.0 * pi * 40e3;
  cav.teeth = {{0, 0.0}, {1, 0.0}};
  cav.target = hams::DriveTarget::cavity;
  cav.envelope = {400e-9, 400e-9, 15e-6, 160e-9, 2.5};
  cav.t_start = 1.5e-6;

  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(12, 12);
  rho0(0, 0) = 1.0;
  const auto grid = linspace(0.0, 20e-6, 11);
  const hams::Trajectory tr = hams::lindblad_evolve(p, {comb, cav}, rho0, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const hams::DensityMatrix& rho = tr.states[i];
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
    CHECK(std::abs(rho.trace().imag()) < 1e-10);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<hams::DensityMatrix> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-7);
    // populations consistent and normalized
    CHECK(tr.fock_populations.row(long(i)).minCoeff() > -1e-12);
    CHECK(std::abs(tr.fock_populations.row(long(i)).sum() - 1.0) < 1e-6);
    CHECK(tr.keep_probability[i] == tr.ground_population[i]);
  }
}

TEST_CASE("effective comb evolution: spin rotations on the Fock ladder") {
  const hams::SpinQuantum J{3};  // J = 3/2
  const hams::PhaseComb comb = hams::su2_phases(J);
  const double eps = 2.0 * pi * 10e3;
  const double t_half = pi * std::sqrt(3.0) / eps;
  const auto grid = linspace(0.0, t_half, 5);
  const hams::Trajectory tr = hams::effective_evolve(comb, eps, 0.0, 4, grid);

  // binomial populations at the Bloch angle theta(t) = eps t / sqrt(2J)
  for (size_t i = 0; i < grid.size(); ++i) {
    const double theta = eps * grid[i] / std::sqrt(3.0);
    const double s2 = std::pow(std::sin(0.5 * theta), 2);
    const double c2 = std::pow(std::cos(0.5 * theta), 2);
    const double binom[4] = {1.0, 3.0, 3.0, 1.0};
    for (int n = 0; n < 4; ++n) {
      const double expect =
          binom[n] * std::pow(s2, n) * std::pow(c2, 3 - n);
      CHECK(std::abs(tr.fock_populations(long(i), n) - expect) < 1e-10);
    }
  }
  // half period maps |0> to the top rung |3>
  CHECK(tr.fock_populations(4, 3) > 1.0 - 1e-10);
  CHECK(tr.ground_population[4] == 1.0);
}

TEST_CASE("uniform-phase comb is blockaded: no early vacuum revival") {
  // all-zero phases over a 6-state manifold: three incommensurate ladder
  // frequencies (the 5-state ladder has a near-coincidence at a frequency
  // ratio of about 19/9 and partially revives)
  hams::PhaseComb comb;
  comb.phases = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const double eps = 2.0 * pi * 50e3;
  // slowest mode of the truncated ladder (sqrt 2 times the smallest
  // positive degree-6 Hermite zero)
  const double lam_min = std::sqrt(2.0) * 0.43607741192761651;
  const double t_f = 2.0 * pi / (0.5 * eps * lam_min);
  const auto grid = linspace(0.0, 10.0 * t_f, 20001);
  const hams::Trajectory tr = hams::effective_evolve(comb, eps, 0.0, 6, grid);
  CHECK(tr.fock_populations(0, 0) == doctest::Approx(1.0));
  double max_revival = 0.0;
  for (size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] < 0.05 * t_f) continue;
    max_revival = std::max(max_revival, tr.fock_populations(long(i), 0));
  }
  CHECK(max_revival < 0.999);
  // near-revivals do occur; they just never complete
  CHECK(max_revival > 0.95);

  // contrast: the spin comb has an equally spaced spectrum and revives
  const hams::PhaseComb spin = hams::su2_phases(hams::SpinQuantum{4});
  const double t_rev = 4.0 * pi / eps;
  const hams::Trajectory rev =
      hams::effective_evolve(spin, eps, 0.0, 5, {t_rev});
  CHECK(rev.fock_populations(0, 0) > 1.0 - 1e-9);
}

TEST_CASE("full comb simulation tracks the effective spin rotation") {
  // spin-1/2 ladder at a soft drive hierarchy: eps << omega << |chi|
  const hams::SpinQuantum J{1};
  const hams::PhaseComb comb = hams::su2_phases(J);
  hams::SystemParams p;
  p.chi = -2.0 * pi * 2.54e6;
  p.cavity_dim = 4;
  p.qubit_dim = 2;
  const double omega = 0.02 * std::abs(p.chi);
  const double eps = 0.02 * omega;

  hams::DriveSpec qd;
  qd.base_rate = omega;
  for (int n = 0; n < 2; ++n) qd.teeth.emplace_back(n, comb.phases[size_t(n)]);
  qd.envelope = {0.0, 0.0, 1.2e-3, 0.0, 2.5};

  hams::DriveSpec cd;
  cd.base_rate = eps;
  cd.teeth = {{0, 0.0}, {1, 0.0}};
  cd.target = hams::DriveTarget::cavity;
  cd.envelope = {0.0, 0.0, 1.2e-3, 0.0, 2.5};

  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(8, 8);
  rho0(0, 0) = 1.0;
  const double period = 2.0 * pi / eps;  // theta(t) = eps t for 2J = 1
  const auto grid = linspace(0.0, 0.8 * period, 9);
  const hams::Trajectory full = hams::lindblad_evolve(p, {qd, cd}, rho0, grid);
  const hams::Trajectory ideal = hams::effective_evolve(comb, eps, 0.0, 2, grid);

  for (size_t i = 0; i < grid.size(); ++i) {
    for (int n = 0; n < 2; ++n)
      CHECK(std::abs(full.fock_populations(long(i), n) -
                     ideal.fock_populations(long(i), n)) < 0.02);
    // guard levels stay essentially empty, qubit stays near its ground state
    CHECK(full.fock_populations(long(i), 2) < 5e-3);
    CHECK(full.fock_populations(long(i), 3) < 5e-3);
    CHECK(full.ground_population[i] > 0.98);
  }
}

TEST_CASE("ground-state postselection splits a product state") {
  // rho_q x rho_c with qubit weights (0.7, 0.3)
  Eigen::MatrixXcd rho_q = Eigen::MatrixXcd::Zero(2, 2);
  rho_q(0, 0) = 0.7;
  rho_q(1, 1) = 0.3;
  Eigen::VectorXcd psi(3);
  psi << std::sqrt(0.5), std::complex<double>(0.0, std::sqrt(0.3)),
      std::sqrt(0.2);
  const Eigen::MatrixXcd rho_c = psi * psi.adjoint();
  const hams::DensityMatrix joint = hams::tensor(rho_q, rho_c);
  const auto [cav, keep] = hams::postselect_ground(joint, 3);
  CHECK(keep == doctest::Approx(0.7).epsilon(1e-12));
  CHECK((cav - rho_c).cwiseAbs().maxCoeff() < 1e-12);

  // excited qubit leaves nothing in the ground branch
  Eigen::MatrixXcd excited = Eigen::MatrixXcd::Zero(6, 6);
  excited(3 + 1, 3 + 1) = 1.0;
  CHECK_THROWS_WITH_AS(hams::postselect_ground(excited, 3),
                       doctest::Contains("empty-branch"), hams::error);
  CHECK_THROWS_WITH_AS(hams::postselect_ground(joint, 4),
                       doctest::Contains("configuration-error"), hams::error);
}

TEST_CASE("readout model: frozen value and rate validation") {
  const auto mapped = hams::measurement_model({1.0, 0.0, 0.5}, 0.065, 0.05);
  CHECK(mapped[0] == doctest::Approx(0.88825).epsilon(1e-12));
  CHECK(mapped[1] == doctest::Approx(0.95 * 0.065).epsilon(1e-12));
  CHECK(mapped[2] == doctest::Approx(0.95 * 0.5).epsilon(1e-12));
  // identity when error-free
  const auto clean = hams::measurement_model({0.25}, 0.0, 0.0);
  CHECK(clean[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(hams::measurement_model({0.5}, 0.6, 0.0),
                       doctest::Contains("invalid-rates"), hams::error);
  CHECK_THROWS_WITH_AS(hams::measurement_model({0.5}, 0.0, -0.01),
                       doctest::Contains("invalid-rates"), hams::error);
}

TEST_CASE("spin-experiment schedule: alignment, reuse, and overflow") {
  hams::SystemParams p;
  p.chi = -2.0 * pi * 3.56e6;
  p.cavity_dim = 7;
  p.qubit_dim = 4;
  const hams::SpinQuantum J{3};
  const double eps = 2.0 * pi * 80e3;
  const double omega = 2.0 * pi * 732e3;

  const hams::Schedule a =
      hams::schedule_spin_experiment(J, p, eps, omega, 2e-6, 5e-6);
  const hams::Schedule b =
      hams::schedule_spin_experiment(J, p, eps, omega, 5e-6, 5e-6);
  // every schedule of a sweep ends at the same wall-clock time
  CHECK(a.total_time == doctest::Approx(b.total_time).epsilon(1e-15));

  // the comb carries one tooth per manifold state with the spin phases
  const hams::PhaseComb comb = hams::su2_phases(J);
  REQUIRE(a.drives.size() == 2);
  REQUIRE(a.drives[0].teeth.size() == 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(a.drives[0].teeth[size_t(n)].first == n);
    CHECK(a.drives[0].teeth[size_t(n)].second ==
          doctest::Approx(comb.phases[size_t(n)]).epsilon(1e-15));
  }
  CHECK(a.drives[0].base_rate == omega);

  // cavity pulse sits inside the comb flat top and ends exactly at its end
  const hams::DriveSpec& cav = a.drives[1];
  CHECK(cav.base_rate == eps);
  CHECK(cav.t_start == doctest::Approx(a.cavity_start));
  CHECK(cav.t_start >= a.drives[0].envelope.rise - 1e-15);
  CHECK(cav.t_start + cav.envelope.support() ==
        doctest::Approx(a.comb_flat_end).epsilon(1e-12));
  // shorter pulses start later
  CHECK(a.cavity_start > b.cavity_start);

  // decoder phases are half the comb phases
  REQUIRE(a.snap_phases.size() == 4);
  for (int n = 0; n < 4; ++n)
    CHECK(a.snap_phases[size_t(n)] ==
          doctest::Approx(0.5 * comb.phases[size_t(n)]).epsilon(1e-15));

  // no cavity drive when the cavity pulse has zero length
  const hams::Schedule c =
      hams::schedule_spin_experiment(J, p, eps, omega, 0.0, 5e-6);
  CHECK(c.drives.size() == 1);
  CHECK(c.total_time == doctest::Approx(a.total_time).epsilon(1e-15));

  CHECK_THROWS_WITH_AS(
      hams::schedule_spin_experiment(J, p, eps, omega, 6e-6, 5e-6),
      doctest::Contains("schedule-overflow"), hams::error);
  CHECK_THROWS_WITH_AS(
      hams::schedule_spin_experiment(J, p, eps, omega, 2e-6, 5e-6, -7e-6),
      doctest::Contains("schedule-overflow"), hams::error);
  hams::SystemParams small = p;
  small.cavity_dim = 3;
  CHECK_THROWS_WITH_AS(
      hams::schedule_spin_experiment(J, small, eps, omega, 2e-6, 5e-6),
      doctest::Contains("configuration-error"), hams::error);
}

TEST_CASE("input validation: grids, states, and drives") {
  hams::SystemParams p = bare_qubit();
  hams::DensityMatrix rho0 = hams::DensityMatrix::Zero(4, 4);
  rho0(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {}, rho0, {1e-6, 0.5e-6}),
                       doctest::Contains("configuration-error"), hams::error);
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {}, rho0, {-1e-6}),
                       doctest::Contains("configuration-error"), hams::error);

  hams::DensityMatrix bad = rho0;
  bad(0, 1) = 0.3;  // not Hermitian
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {}, bad, {1e-6}),
                       doctest::Contains("configuration-error"), hams::error);
  hams::DensityMatrix scaled = 2.0 * rho0;
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {}, scaled, {1e-6}),
                       doctest::Contains("configuration-error"), hams::error);
  CHECK_THROWS_WITH_AS(
      hams::lindblad_evolve(p, {}, hams::DensityMatrix::Identity(3, 3), {1e-6}),
      doctest::Contains("configuration-error"), hams::error);

  hams::DriveSpec no_teeth;
  no_teeth.base_rate = 1e5;
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {no_teeth}, rho0, {1e-6}),
                       doctest::Contains("configuration-error"), hams::error);
  hams::DriveSpec bad_trims;
  bad_trims.base_rate = 1e5;
  bad_trims.teeth = {{0, 0.0}};
  bad_trims.trims = {1.0, 1.0};
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(p, {bad_trims}, rho0, {1e-6}),
                       doctest::Contains("configuration-error"), hams::error);

  hams::SystemParams neg = p;
  neg.t1_qubit = -5.0;
  CHECK_THROWS_WITH_AS(hams::lindblad_evolve(neg, {}, rho0, {1e-6}),
                       doctest::Contains("invalid-rates"), hams::error);

  // a grid starting at zero hands back the initial state exactly
  const hams::Trajectory tr = hams::lindblad_evolve(p, {}, rho0, {0.0});
  CHECK((tr.states[0] - rho0).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_WITH_AS(
      hams::effective_evolve(hams::su2_phases(hams::SpinQuantum{2}), 1e4, 0.0,
                             7, {1e-6}),
      doctest::Contains("configuration-error"), hams::error);
}
