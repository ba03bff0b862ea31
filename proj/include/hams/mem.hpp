#pragma once

#include <vector>

#include "hams/operators.hpp"

namespace hams {

// Per-tooth drive phases phi_0..phi_N of a qubit frequency comb. Tooth n sits
// at the qubit frequency shifted by n*chi; the phase differences
// dphi_n = phi_n - phi_{n-1} rescale the cavity ladder elements
// <n-1|a|n> -> sqrt(n) cos(dphi_n/2).
struct PhaseComb {
  std::vector<double> phases;  // phi_0 = 0 by convention

  int manifold_size() const { return static_cast<int>(phases.size()); }
  void validate() const;  // throws invalid-comb on length < 2
};

// Coefficients c_1..c_{2J} of the nonlinear decomposition
// M = sum_k c_k [J_-, J_z^k] over the spin-J manifold.
struct NonlinearCoeffs {
  std::vector<double> c;
};

// Comb that embeds spin J into the lowest 2J+1 Fock states:
// phi_0 = phi_1 = 0, phi_n = phi_{n-1} + 2 acos(sqrt((2J+1-n)/(2J))).
// The resulting generator is J_-/sqrt(2J). Phases are monotone
// non-decreasing; throws degenerate-spin for two_j = 0.
PhaseComb su2_phases(SpinQuantum J);

// Hermitian comb generator
//   M_varphi = e^{-i varphi} M + e^{+i varphi} M^dag,
//   M = sum_n sqrt(n) cos(dphi_n/2) |n-1><n|,
// where varphi is the cavity-drive phase selecting the rotation axis.
Operator generator_from_phases(const PhaseComb& comb, double varphi = 0.0);

// Inverts the element map: given target sub-diagonal elements e_1..e_N
// (e_n replaces sqrt(n)), returns a comb with dphi_n = 2 acos(e_n/sqrt(n)).
// Throws unreachable-matrix-element when |e_n| > sqrt(n): the comb can only
// shrink ladder elements, never grow them.
PhaseComb phases_from_matrix_elements(const std::vector<double>& elements);

// M_varphi built from the nonlinear expansion M = sum_k c_k [J_-, J_z^k].
// Requires c.size() == two_j.
Operator nonlinear_generator(const NonlinearCoeffs& c, SpinQuantum J,
                             double varphi = 0.0);

// Expands a strictly lower-bidiagonal M of size 2J+1 in the commutator basis
// {[J_-, J_z^k]}. Round-trips with nonlinear_generator within 1e-10. Throws
// decomposition-failure if the basis solve degenerates.
NonlinearCoeffs coeffs_from_generator(const Operator& m, SpinQuantum J);

// Fock-state phases phi_n/2 applied by the decoder SNAP gate to disentangle
// qubit and cavity after the final comb half-pulse.
std::vector<double> decoder_snap_phases(const PhaseComb& comb);

// Rotation-angle convention: theta = epsilon * t for cavity drive amplitude
// epsilon (rad/s) held for time t, with the unitary defined as
//   U(theta) = exp(-i (theta/2) M_varphi).
// For an SU(2) comb this is a Bloch-sphere rotation by theta/sqrt(2J).
double rotation_angle(double epsilon_rad_per_s, double t_s);

// U(theta) = exp(-i (theta/2) M_varphi) for a Hermitian comb generator.
Operator rotation_unitary(const Operator& m_varphi, double theta);

}  // namespace hams
