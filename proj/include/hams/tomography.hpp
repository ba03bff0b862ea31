#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hams/operators.hpp"

namespace hams {

// Point on the unit sphere in the measurement parametrization (theta, phi)
// of the rotation exp(i theta (cos phi Jx + sin phi Jy)).
struct SpherePoint {
  double theta = 0.0;
  double phi = 0.0;
};

// Phase-space samples of a Wigner function. Exactly one axis vector is
// populated: alphas for the bosonic plane, sphere for the spin sphere.
// values(i) belongs to the i-th point of whichever axis is present.
struct WignerGrid {
  std::vector<std::complex<double>> alphas;
  std::vector<SpherePoint> sphere;
  Eigen::VectorXd values;
  // set when the input state carries more than 1e-4 population in the
  // highest retained Fock level (bosonic evaluation only)
  bool truncation_warning = false;
};

// Diagonal phase-point kernel data for spin J, plus the Fock-conditioned
// qubit angles realizing its two measurement decompositions.
// delta_diag(n) = Delta_m with m = n - J (Fock ordering), and
//   cos^2(theta_angles(n)/2) = (Delta_m - delta_min) / (delta_max - delta_min)
//   cos^2(beta_angles(n)/2)  = (delta_max - Delta_m) / (delta_max - delta_min)
struct SpinKernel {
  SpinQuantum J;
  Eigen::VectorXd delta_diag;
  Eigen::VectorXd theta_angles;
  Eigen::VectorXd beta_angles;
  double delta_min = 0.0;
  double delta_max = 0.0;
};

// Product quadrature on the sphere: n_theta Gauss-Legendre nodes in
// cos(theta) crossed with n_phi uniform phi samples, weights summing to
// 4 pi. Integrates spherical harmonics exactly up to degree
// min(2 n_theta - 1, n_phi - 1); n_theta = 2J+1, n_phi = 4J+1 suffices for
// products of two degree-2J Wigner functions.
struct SphereQuadrature {
  std::vector<SpherePoint> points;
  Eigen::VectorXd weights;
};
SphereQuadrature sphere_quadrature(int n_theta, int n_phi);

// SU(2) rotation exp(i theta (cos phi Jx + sin phi Jy)) on the spin
// manifold, embedded as the top-left block of a dim x dim identity.
// dim = 0 means the bare manifold dimension 2J+1.
Operator spin_rotation(SpinQuantum J, double theta, double phi, int dim = 0);

// Displaced-parity Wigner function W(alpha) = 2 Tr[D(alpha) P D^dag(alpha)
// rho] in the factor-2 convention: vacuum reads +2 at the origin, |1> reads
// -2. Requires a truncation margin of at least 6 photons beyond max
// |alpha|^2 (truncation-margin otherwise); sets truncation_warning when the
// top Fock population exceeds 1e-4.
WignerGrid bosonic_wigner(const DensityMatrix& rho_c,
                          const std::vector<std::complex<double>>& alphas);

// Diagonal kernel Delta_m = sum_{l=0}^{2J} (2l+1)/(2J+1) C^{Jm}_{Jm,l0}
// together with the two channel angle sets. The 1/(2J+1) constant is the
// unique normalization satisfying both the standardization identity
// Tr rho = (2J+1)/(4 pi) int W dOmega and the traciality identity; the
// kernel extremes approach the bosonic values +-2 as J grows. two_j >= 1.
SpinKernel spin_kernel(SpinQuantum J);

// Spin Wigner function W(theta, phi) = Tr[R Delta R^dag rho] with R the
// spin_rotation above. rho may live in a larger Fock space; population
// outside the 2J+1 manifold above 1e-6 raises manifold-leakage.
WignerGrid spin_wigner(const DensityMatrix& rho, SpinQuantum J,
                       const std::vector<SpherePoint>& points);

// Emulated two-channel measurement of the spin Wigner function on a joint
// qubit (x) cavity state (composite index qubit_level * cavity_dim + fock).
// Per point: undo the spin rotation, apply the Fock-conditioned qubit
// rotations (theta_angles for channel 1, beta_angles for channel 2), read
// the ground-state probability through the misassignment model, and map
//   W1 = delta_min + P_g (delta_max - delta_min)
//   W2 = delta_max - P_g (delta_max - delta_min),
// returning the symmetrized average (W1 + W2)/2. The average cancels the
// state-independent readout offset that each single channel carries.
// Optional channel1/channel2 receive the per-channel grids.
WignerGrid simulated_spin_wigner_measurement(
    const DensityMatrix& rho_joint, int cavity_dim, const SpinKernel& kernel,
    const std::vector<SpherePoint>& points, double misassign = 0.0,
    double pi_infidelity = 0.0, WignerGrid* channel1 = nullptr,
    WignerGrid* channel2 = nullptr);

}  // namespace hams
