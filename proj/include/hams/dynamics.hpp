#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "hams/mem.hpp"
#include "hams/operators.hpp"

namespace hams {

// Device parameters in the joint rotating frame at the qubit and cavity
// frequencies. Rates are angular (rad/s); times in seconds, with
// infinity meaning the channel is off.
struct SystemParams {
  double chi = 0.0;        // dispersive shift (signed)
  double chi_prime = 0.0;  // second-order dispersive shift
  double kerr = 0.0;       // cavity self-Kerr
  double alpha_anh = 0.0;  // transmon anharmonicity
  double t1_cavity = std::numeric_limits<double>::infinity();
  double tphi_cavity = std::numeric_limits<double>::infinity();
  double t1_qubit = std::numeric_limits<double>::infinity();
  double tphi_qubit = std::numeric_limits<double>::infinity();
  int cavity_dim = 0;
  int qubit_dim = 2;

  bool lossless() const;
};

// Pure-dephasing time from measured T1/T2: 1/tphi = 2 (1/t2 - 1/(2 t1)),
// so that a simulated Ramsey decay with the number-operator collapse channel
// reproduces t2. Throws invalid-rates when t2 > 2 t1.
double tphi_from_t1_t2(double t1, double t2);

// Flat-top pulse with Gaussian edges truncated at `truncation` sigma
// (the amplitude starts and ends abruptly at exp(-truncation^2/2)).
struct Envelope {
  double rise = 0.0;
  double fall = 0.0;
  double flat = 0.0;
  double sigma = 0.0;
  double truncation = 2.5;

  double support() const { return rise + flat + fall; }
  double amplitude(double t) const;  // in [0, 1]; 1 on the flat top
};

enum class DriveTarget { qubit, cavity };

// One comb drive: teeth at detunings n*chi with per-tooth phases, a shared
// envelope placed at t_start, optional per-tooth amplitude trims (defaults
// to 1), a carrier phase added to every tooth (the cavity drive phase
// varphi), and a continuous extra detuning applied to all teeth (chevron
// scans).
struct DriveSpec {
  double base_rate = 0.0;  // Omega-bar or epsilon-bar, rad/s
  std::vector<std::pair<int, double>> teeth;  // (detuning multiple n, phase)
  DriveTarget target = DriveTarget::qubit;
  Envelope envelope;
  std::vector<double> trims;  // empty = all 1
  double carrier_phase = 0.0;
  double extra_detuning = 0.0;  // rad/s
  double t_start = 0.0;
};

// Time series from an integration: cavity Fock populations (traced over the
// qubit), qubit ground-state population, and the post-selection keep
// probability (equal to the ground population for ground-state selection).
// States are stored in the rotating frame.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  Eigen::MatrixXd fock_populations;  // row per time, column per Fock state
  std::vector<double> ground_population;
  std::vector<double> keep_probability;
};

// Full drive schedule for one spin experiment: the qubit comb over the whole
// window, the cavity double drive right-aligned inside the comb flat top,
// and the decoder SNAP phases applied (instantaneously) after the comb.
struct Schedule {
  std::vector<DriveSpec> drives;
  double total_time = 0.0;
  std::vector<double> snap_phases;
  PhaseComb comb;
  double cavity_start = 0.0;  // support start of the cavity pulse, if any
  double comb_flat_end = 0.0;
};

// Rotating-frame Hamiltonian at time t: diagonal static part
//   chi n_c n_q + (kerr/2) c'c'cc + (alpha/2) q'q'qq + (chi'/2) c'c'cc n_q
// plus every active drive term
//   sum_k (rate_k/2) e^{i(n_k chi t + phi_k)} (lowering op) + h.c.
// Basis is qubit-major: index = q * cavity_dim + n. Throws
// configuration-error on dimension mismatch.
Operator build_hamiltonian(const SystemParams& params,
                           const std::vector<DriveSpec>& drives, double t);

// Integrates the master equation with collapse operators
// sqrt(1/t1_cavity) c, sqrt(1/tphi_cavity) n_c, sqrt(1/t1_qubit) q,
// sqrt(1/tphi_qubit) n_q, on the given time grid (starting from t = 0).
// Internally works in the interaction picture of the static diagonal part,
// so the integrator only resolves drive and collapse frequencies. Adaptive
// embedded Runge-Kutta with local error control tighter than 1e-9 (1e-11
// per step); lossless pure-state input takes a state-vector fast path.
// Throws stiffness-error on step-size underflow and integrator-failure if
// the trace drifts beyond 1e-6.
Trajectory lindblad_evolve(const SystemParams& params,
                           const std::vector<DriveSpec>& drives,
                           const DensityMatrix& rho0,
                           const std::vector<double>& t_grid);

// Ideal-limit oracle: closed-system evolution of |0> under the effective
// comb Hamiltonian (eps/2) M_{-varphi} restricted to the lowest `manifold`
// Fock states, evaluated exactly by diagonalization.
Trajectory effective_evolve(const PhaseComb& comb, double eps, double varphi,
                            int manifold, const std::vector<double>& t_grid);

// Projects the qubit of a composite state onto its ground level and
// renormalizes. Returns the cavity reduced state and the keep probability.
// Throws empty-branch when the ground branch has vanishing weight.
std::pair<DensityMatrix, double> postselect_ground(const DensityMatrix& rho,
                                                   int cavity_dim);

// Readout model applied per Fock probe channel:
//   p' = (1 - pi_infidelity) * [(1 - misassign) p + misassign (1 - p)].
// Throws invalid-rates outside [0, 0.5].
std::vector<double> measurement_model(const std::vector<double>& populations,
                                      double misassign, double pi_infidelity);

// Assembles the spin-J experiment: qubit comb with su2_phases, cavity
// double drive of flat length t_cavity ending right-aligned at the comb
// flat end, decoder SNAP phases. The comb flat top is sized for
// t_cavity_max (pass the sweep maximum so every schedule of a sweep ends at
// the same wall-clock time; negative means t_cavity itself), plus
// comb_flat_extra for return-timing calibration. Throws schedule-overflow
// when the cavity pulse does not fit.
Schedule schedule_spin_experiment(SpinQuantum J, const SystemParams& params,
                                  double eps, double omega, double t_cavity,
                                  double t_cavity_max = -1.0,
                                  double comb_flat_extra = 0.0);

}  // namespace hams
