#include "hams/operators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

namespace hams {

namespace {
constexpr std::complex<double> I(0.0, 1.0);

// Rounds a half-integer quantum number to its doubled integer value;
// throws if the argument is not a half-integer.
int doubled(double x, const char* name) {
  double t = 2.0 * x;
  double r = std::round(t);
  if (std::abs(t - r) > 1e-9)
    throw error(std::string("invalid-quantum-numbers: ") + name +
                " is not a half-integer");
  return static_cast<int>(r);
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }
}  // namespace

Operator annihilation(int dim) {
  if (dim < 2) throw error("invalid-dimension: annihilation needs dim >= 2");
  Operator a = Operator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Operator number_op(int dim) {
  Operator n = Operator::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = double(k);
  return n;
}

Operator parity_op(int dim) {
  Operator p = Operator::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

Operator spin_lowering(SpinQuantum J) {
  int d = J.dim();
  Operator jm = Operator::Zero(d, d);
  double j = J.j();
  for (int n = 1; n < d; ++n) {
    double m = J.m_of(n);
    jm(n - 1, n) = std::sqrt(j * (j + 1) - m * (m - 1));
  }
  return jm;
}

Operator spin_jx(SpinQuantum J) {
  Operator jm = spin_lowering(J);
  return 0.5 * (jm + jm.adjoint().eval());
}

Operator spin_jy(SpinQuantum J) {
  Operator jm = spin_lowering(J);
  return 0.5 * I * (jm - jm.adjoint().eval());
}

Operator spin_jz(SpinQuantum J) {
  int d = J.dim();
  Operator jz = Operator::Zero(d, d);
  for (int n = 0; n < d; ++n) jz(n, n) = J.m_of(n);
  return jz;
}

Operator tensor(const Operator& a, const Operator& b) {
  Eigen::Index da = a.rows(), db = b.rows();
  Operator out(da * db, a.cols() * b.cols());
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * db, j * b.cols(), db, b.cols()) = a(i, j) * b;
  return out;
}

Operator unitary_exp(const Operator& H, double t) {
  require_hermitian(H);
  Eigen::SelfAdjointEigenSolver<Operator> es(H);
  Eigen::VectorXcd phases =
      (-I * t * es.eigenvalues().array().cast<std::complex<double>>()).exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator displacement(std::complex<double> alpha, int dim) {
  // exp(alpha a^dag - alpha^* a) = exp(-i H) with Hermitian
  // H = i(alpha a^dag - alpha^* a).
  Operator a = annihilation(dim);
  Operator h = I * (alpha * a.adjoint() - std::conj(alpha) * a);
  return unitary_exp(h, 1.0);
}

double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M) {
  int tj1 = doubled(j1, "j1"), tm1 = doubled(m1, "m1");
  int tj2 = doubled(j2, "j2"), tm2 = doubled(m2, "m2");
  int tJ = doubled(J, "J"), tM = doubled(M, "M");
  if (tj1 < 0 || tj2 < 0 || tJ < 0)
    throw error("invalid-quantum-numbers: negative j");
  // j and m must have the same parity (m = -j..j in integer steps).
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0)
    return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ)
    return 0.0;
  if (tm1 + tm2 != tM) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
  if ((tj1 + tj2 + tJ) % 2 != 0) return 0.0;

  // Racah's closed form. All combinations below are integers (doubled values
  // are even after the triangle/projection checks).
  auto half = [](int t) { return t / 2; };
  int a1 = half(tj1 + tj2 - tJ);
  int a2 = half(tj1 - tj2 + tJ);
  int a3 = half(-tj1 + tj2 + tJ);
  int a4 = half(tj1 + tj2 + tJ) + 1;
  double log_pref = 0.5 * (std::log(tJ + 1.0) + log_factorial(a1) +
                           log_factorial(a2) + log_factorial(a3) -
                           log_factorial(a4));
  int b1 = half(tj1 + tm1), b2 = half(tj1 - tm1);
  int b3 = half(tj2 + tm2), b4 = half(tj2 - tm2);
  int b5 = half(tJ + tM), b6 = half(tJ - tM);
  log_pref += 0.5 * (log_factorial(b1) + log_factorial(b2) +
                     log_factorial(b3) + log_factorial(b4) +
                     log_factorial(b5) + log_factorial(b6));

  int kmin = std::max({0, half(tj2 - tJ - tm1), half(tj1 + tm2 - tJ)});
  int kmax = std::min({a1, b2, b3});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    double log_den = log_factorial(k) + log_factorial(a1 - k) +
                     log_factorial(b2 - k) + log_factorial(b3 - k) +
                     log_factorial(half(tJ - tj2 + tm1) + k) +
                     log_factorial(half(tJ - tj1 - tm2) + k);
    double term = std::exp(log_pref - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

Operator spherical_tensor(int k, int q, SpinQuantum J) {
  if (k < 0 || k > J.two_j || std::abs(q) > k)
    throw error("invalid-rank: spherical_tensor needs 0 <= k <= 2J, |q| <= k");
  int d = J.dim();
  double j = J.j();
  Operator t = Operator::Zero(d, d);
  double norm = std::sqrt((2.0 * k + 1) / (2.0 * j + 1));
  for (int n = 0; n < d; ++n) {
    double m = J.m_of(n);
    int np = n + q;  // row index of |J, m+q>
    if (np < 0 || np >= d) continue;
    t(np, n) = norm * clebsch_gordan(k, q, j, m, j, m + q);
  }
  return t;
}

void require_hermitian(const Operator& H, double tol) {
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw error("hermiticity-violation: operator is not Hermitian");
}

void require_unitary(const Operator& U, double tol) {
  Operator d = U * U.adjoint() - Operator::Identity(U.rows(), U.cols());
  if (d.norm() > tol) throw error("unitarity-violation: operator is not unitary");
}

}  // namespace hams
