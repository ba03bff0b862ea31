#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace hams {

// Dense complex square matrix over a (possibly composite) Hilbert space.
// The universal currency for Hamiltonians, unitaries, observables and states.
// dim == rows() == cols().
using Operator = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

// All contract violations in the library throw this; the message starts with a
// stable kebab-case tag (e.g. "invalid-dimension: ...").
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Spin-J manifold label. J = two_j/2, manifold dimension two_j + 1,
// m = -J..+J in integer steps.
struct SpinQuantum {
  int two_j = 0;
  constexpr double j() const { return two_j / 2.0; }
  constexpr int dim() const { return two_j + 1; }
  // Oscillator-to-spin index convention |n> = |J, m = n-J| (flipped
  // Holstein-Primakoff): Fock index n <-> m = n - J.
  constexpr double m_of(int n) const { return n - j(); }
};

// Fock-space lowering operator: entries[n-1][n] = sqrt(n). dim >= 2.
Operator annihilation(int dim);

// Number operator diag(0..dim-1).
Operator number_op(int dim);

// Photon parity exp(i pi a^dag a) = diag((-1)^n).
Operator parity_op(int dim);

// J_- on the (2J+1)-dim manifold in the |n> = |J, m = n-J> Fock ordering:
// <n-1|J_-|n> = sqrt(J(J+1) - m(m-1)) with m = n-J.
// two_j = 0 yields the 1x1 zero matrix (degenerate spin).
Operator spin_lowering(SpinQuantum J);

// Jx, Jy, Jz in the same Fock ordering. Jz = diag(n - J).
Operator spin_jx(SpinQuantum J);
Operator spin_jy(SpinQuantum J);
Operator spin_jz(SpinQuantum J);

// Kronecker product; composite index is (row of a)*b.dim + (row of b).
// Throughout the library the qubit factor comes first, the cavity second:
// composite index = qubit_level * cavity_dim + fock.
Operator tensor(const Operator& a, const Operator& b);

// exp(-i t H) for Hermitian H, via eigendecomposition. Throws
// hermiticity-violation if H deviates from H^dag by more than 1e-10.
Operator unitary_exp(const Operator& H, double t);

// Truncated displacement exp(alpha a^dag - alpha^* a).
Operator displacement(std::complex<double> alpha, int dim);

// Clebsch-Gordan coefficient <J M | j1 m1; j2 m2> in the Condon-Shortley
// convention, computed by the Racah closed-form sum with log-factorial
// stabilization. Arguments must be half-integers (else
// invalid-quantum-numbers); selection-rule violations return 0.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M);

// Irreducible spherical tensor
//   T_q^(k)(J) = sqrt((2k+1)/(2J+1)) sum_m C^{J,m+q}_{k,q;J,m} |J,m+q><J,m|
// emitted in the |n> = |J, m = n-J> Fock ordering. 0 <= k <= 2J, |q| <= k.
Operator spherical_tensor(int k, int q, SpinQuantum J);

// Contract checks; throw hermiticity-violation / unitarity-violation.
void require_hermitian(const Operator& H, double tol = 1e-10);
void require_unitary(const Operator& U, double tol = 1e-10);

}  // namespace hams
