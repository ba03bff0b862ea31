#pragma once

#include <string>

#include "hams/dynamics.hpp"
#include "hams/synthesis.hpp"

namespace hams {

// Polar two-legged spin-cat code on the spin-J manifold:
//   |0_L> = (|0> + |N>)/sqrt(2), |1_L> = (|0> - |N>)/sqrt(2), N = 2J,
// so |+_L> = |0> and |-_L> = |N> sit at the poles of the spin sphere.
struct SpinCatCode {
  SpinQuantum J;
  StateVector codeword_zero;
  StateVector codeword_one;
};

SpinCatCode spin_cat_code(SpinQuantum J);

// Logical unitaries reachable by a single SU(2) rotation of the host spin.
// Type I (rx and the X instance): z-axis rotations,
//   R_z(-(theta + 2 pi k)/(2J)) acts as the logical R_x(theta).
// Type II (type_ii and the Y, Z, SdagHS instances): pi rotations about the
// equatorial axis phi' = (phi + pi k)/(2J), acting as the logical pi
// rotation about sin(phi) y + cos(phi) z.
enum class LogicalGate { x, y, z, sdag_h_s, rx, type_ii };

// axis: equatorial = false means rotation about Jz; equatorial = true means
// rotation about cos(axis_phi) Jx + sin(axis_phi) Jy. The realized spin
// unitary is exp(-i angle (axis . J)).
struct GateRecipe {
  LogicalGate gate = LogicalGate::x;
  SpinQuantum J{2};
  int k = 0;
  bool equatorial = false;
  double axis_phi = 0.0;
  double angle = 0.0;
};

// Catalog lookup. `parameter` is the logical rotation angle theta for rx and
// the logical axis angle phi for type_ii; ignored for the named gates.
// Branch index k in [0, 2J) selects among the 2J equivalent rotations.
GateRecipe gate_recipe(LogicalGate gate, SpinQuantum J, int k = 0,
                       double parameter = 0.0);

// Parses "X", "Y", "Z", "SdagHS", "Rx", "TypeII" (case as written); throws
// unknown-gate otherwise.
LogicalGate logical_gate_from_name(const std::string& name);

// Exact exponential of the recipe's rotation, embedded top-left in a
// dim x dim identity (dim = 0 means the bare 2J+1 manifold).
Operator recipe_unitary(const GateRecipe& recipe, int dim = 0);

// Applies the recipe to a state confined to the 2J+1 manifold. Throws
// manifold-leakage when the state has weight above it.
StateVector apply_recipe(const GateRecipe& recipe, const StateVector& state);

// Nonlinear rotation acting as the logical Hadamard on the spin-1 cat
// embedded in a spin-3/2 manifold: the gamma = pi/4 parity-preserving
// involution reflects the {|0>, |2>} block through the axis midway between
// the cat poles. Requires two_j = 3; search failures propagate.
ParityRotation hadamard_via_nonlinear(SpinQuantum J);

// Kitten preparation schedule: a blockade comb tooth at n = 2 with a
// resonant cavity pulse of pi area takes |0> to |1>; a spin-J comb with a
// cavity double drive then rotates by pi/2 about the equatorial axis
// axis_phi (pi/2 = Jy, the default, targeting (|0> - |2>)/sqrt(2) for
// J = 1; 0 = Jx). Validated for J = 1; other J build but are unvalidated.
Schedule prep_sequence(SpinQuantum J, const SystemParams& params, double eps,
                       double omega, double axis_phi = 1.5707963267948966);

// <psi|rho|psi> for a normalized target, clamped to [0, 1].
double state_fidelity(const DensityMatrix& rho, const StateVector& target);

// True iff n photon losses move both codewords entirely out of the
// codespace (detectable but uncorrectable): a^n |mu_L> is checked for zero
// codespace overlap within 1e-12. Holds exactly for 0 < n < N.
bool photon_loss_syndrome(const SpinCatCode& code, int n_losses);

}  // namespace hams
