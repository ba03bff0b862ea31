#include "hams/mem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace hams {

namespace {
constexpr std::complex<double> I(0.0, 1.0);
}

void PhaseComb::validate() const {
  if (phases.size() < 2)
    throw error("invalid-comb: need at least two teeth, got " +
                std::to_string(phases.size()));
}

PhaseComb su2_phases(SpinQuantum J) {
  if (J.two_j < 1) throw error("degenerate-spin: two_j must be >= 1");
  int n_teeth = J.two_j + 1;
  PhaseComb comb;
  comb.phases.resize(n_teeth, 0.0);
  double two_j = J.two_j;
  for (int n = 1; n < n_teeth; ++n) {
    double ratio = (two_j + 1.0 - n) / two_j;
    comb.phases[n] = comb.phases[n - 1] + 2.0 * std::acos(std::sqrt(ratio));
  }
  return comb;
}

Operator generator_from_phases(const PhaseComb& comb, double varphi) {
  comb.validate();
  int dim = comb.manifold_size();
  Operator m = Operator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    double dphi = comb.phases[n] - comb.phases[n - 1];
    m(n - 1, n) = std::sqrt(double(n)) * std::cos(dphi / 2.0);
  }
  Operator lower = m.adjoint();
  return std::exp(-I * varphi) * m + std::exp(I * varphi) * lower;
}

PhaseComb phases_from_matrix_elements(const std::vector<double>& elements) {
  PhaseComb comb;
  comb.phases.resize(elements.size() + 1, 0.0);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    double n = double(k + 1);
    double root = std::sqrt(n);
    if (std::abs(elements[k]) > root + 1e-12)
      throw error("unreachable-matrix-element: |e_" + std::to_string(k + 1) +
                  "| exceeds sqrt(n); the comb can only shrink elements");
    double ratio = std::clamp(elements[k] / root, -1.0, 1.0);
    double dphi = 2.0 * std::acos(ratio);
    comb.phases[k + 1] = comb.phases[k] + dphi;
  }
  return comb;
}

Operator nonlinear_generator(const NonlinearCoeffs& c, SpinQuantum J,
                             double varphi) {
  if (static_cast<int>(c.c.size()) != J.two_j)
    throw error("invalid-coefficients: expected " + std::to_string(J.two_j) +
                " coefficients, got " + std::to_string(c.c.size()));
  int dim = J.dim();
  Operator jm = spin_lowering(J);
  Operator jz = spin_jz(J);
  Operator m = Operator::Zero(dim, dim);
  Operator jzk = Operator::Identity(dim, dim);
  for (int k = 1; k <= J.two_j; ++k) {
    jzk = jzk * jz;
    m += c.c[k - 1] * (jm * jzk - jzk * jm);
  }
  Operator lower = m.adjoint();
  return std::exp(-I * varphi) * m + std::exp(I * varphi) * lower;
}

NonlinearCoeffs coeffs_from_generator(const Operator& m, SpinQuantum J) {
  int dim = J.dim();
  if (m.rows() != dim || m.cols() != dim)
    throw error("invalid-dimension: generator must be " + std::to_string(dim) +
                "x" + std::to_string(dim));
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      if (r != c - 1 && std::abs(m(r, c)) > 1e-12)
        throw error("invalid-generator: expected strictly lower-bidiagonal "
                    "sub-diagonal structure");
  // Sub-diagonal of [J_-, J_z^k] at row n (0-based, coupling |n-1><n|):
  // el_n (m_n^k - m_{n-1}^k) with el_n the J_- element and m_n = n - J.
  int nc = J.two_j;
  Eigen::MatrixXd a(nc, nc);
  Eigen::VectorXd v(nc);
  double j = J.j();
  for (int n = 1; n <= nc; ++n) {
    double el = std::sqrt(double(n) * (J.two_j + 1.0 - n));
    double mn = n - j, mp = n - 1 - j;
    double pn = mn, pp = mp;
    for (int k = 1; k <= nc; ++k) {
      a(n - 1, k - 1) = el * (pn - pp);
      pn *= mn;
      pp *= mp;
    }
    if (std::abs(m(n - 1, n).imag()) > 1e-10)
      throw error("invalid-generator: sub-diagonal must be real to expand in "
                  "the commutator basis");
    v(n - 1) = m(n - 1, n).real();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw error("decomposition-failure: commutator basis is singular");
  Eigen::VectorXd c = lu.solve(v);
  NonlinearCoeffs out;
  out.c.assign(c.data(), c.data() + nc);
  return out;
}

std::vector<double> decoder_snap_phases(const PhaseComb& comb) {
  comb.validate();
  std::vector<double> half(comb.phases.size());
  for (std::size_t n = 0; n < half.size(); ++n) half[n] = comb.phases[n] / 2.0;
  return half;
}

double rotation_angle(double epsilon_rad_per_s, double t_s) {
  return epsilon_rad_per_s * t_s;
}

Operator rotation_unitary(const Operator& m_varphi, double theta) {
  return unitary_exp(m_varphi, theta / 2.0);
}

}  // namespace hams
