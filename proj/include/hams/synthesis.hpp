#pragma once

#include <vector>

#include "hams/mem.hpp"
#include "hams/operators.hpp"

namespace hams {

// Spectrum analysis of a comb generator: eigenvalues, magnitude ratios
// relative to the smallest nonzero magnitude, and how hard those ratios are
// to mistake for rationals.
struct EigenReport {
  std::vector<double> eigenvalues;  // ascending
  double min_magnitude = 0.0;       // smallest nonzero |lambda|
  std::vector<double> ratios;       // distinct magnitudes / min_magnitude
  bool is_integer_ratio = false;
  // Decimal digits (numerator plus denominator) of the smallest rational
  // indistinguishable from each nontrivial ratio at 50-digit working
  // precision, minimized over ratios and capped by the caller's budget.
  // 0 when there is at most one distinct magnitude.
  int rationalization_digits = 0;
};

// A nearest-neighbor two-level rotation: on Fock levels (level-1, level),
//   G = [[cos(theta/2), -i e^{-i phase} sin(theta/2)],
//        [-i e^{+i phase} sin(theta/2), cos(theta/2)]].
// Realizable as a comb pulse with dphi_level = 0 and all other dphi = pi.
struct GivensStep {
  int level;
  double theta;
  double phase;
};

// Ordered product steps[0] * steps[1] * ... * diag(e^{i diagonal_phases}).
struct GivensFactorization {
  std::vector<GivensStep> steps;
  std::vector<double> diagonal_phases;
};

struct UniversalityWitness {
  bool universal = false;
  int witness_q = 0;  // q of the rank-2 component with the largest overlap
};

// Eigenvalues of a Hermitian M with the ratio test |lambda_j|/|lambda_min|
// close to integers within tol. Zero eigenvalues (relative magnitude below
// 1e-9) are excluded from ratios. Throws degenerate-generator when the whole
// spectrum vanishes.
EigenReport eigenvalue_integer_check(const Operator& m, double tol);

// Searches for nonlinear coefficients whose generator M_0 has an
// integer-ratio spectrum and whose involution exp(-i theta* M_0) acts on the
// even-parity pair {|0>, |2>} as the reflection
//   [[cos(gamma), sin(gamma)], [sin(gamma), -cos(gamma)]].
// Derivative-free simplex over the sub-diagonal elements, 32 restarts seeded
// deterministically, integer-ratio penalty annealed upward, then a
// closed-form polish onto the exact integer-ratio family. The returned
// coefficients are normalized so |lambda_min| = 1 and theta = 2pi/|lambda_min|
// in the U(theta) = exp(-i (theta/2) M) convention: the eigenphases pi*k_j
// make this 2pi rotation a parity-preserving involution, and the 4pi
// rotation (angle 2*theta) is the identity.
// Requires odd two_j (even-dimensional generator) and gamma in [0, pi/2].
// Throws synthesis-failure carrying the best fidelity found if no candidate
// reaches block fidelity 0.999.
struct ParityRotation {
  NonlinearCoeffs coeffs;
  double theta;
};
ParityRotation parity_preserving_search(SpinQuantum J, double gamma,
                                        unsigned seed);

// True iff M has a rank-2 spherical tensor component:
// |Tr(M T_q^(2))| > 1e-10 for some q in {-2..2}. Pure SU(2) generators
// (Jx-type combs) fail; almost any other comb passes, which is what makes
// the modified oscillator universally controllable.
UniversalityWitness check_universality(const Operator& m, SpinQuantum J);

// Factors a unitary into nearest-neighbor Givens rotations (at most
// d(d-1)/2) followed by a diagonal phase stage. Each step is realizable as
// a single comb pulse; the ordered product reconstructs U within 1e-8.
// Throws invalid-target for non-unitary input.
GivensFactorization givens_factorization(const Operator& u);

// Multiplies a factorization back out (verification aid).
Operator givens_reconstruct(const GivensFactorization& f, int dim);

// Spectrum report for the truncated quadrature x_J = (a + a^dag)/sqrt(2) on
// 2J+1 levels. The eigenvalues are the zeros of the Hermite polynomial
// H_{2J+1} (verified internally within 1e-9). Ratios of distinct magnitudes
// are pushed through continued-fraction rationalization at 50-digit working
// precision; a blockade evolution is periodic only when those ratios are
// rational, and for 1 < J <= 25 every ratio needs at least 18 digits.
EigenReport blockade_aperiodicity(SpinQuantum J, int max_digits);

// All real zeros of the physicists' Hermite polynomial H_order, ascending,
// computed as eigenvalues of the symmetric Jacobi matrix with off-diagonal
// sqrt(n/2).
std::vector<double> hermite_zeros(int order);

}  // namespace hams
