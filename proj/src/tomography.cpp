#include "hams/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "hams/dynamics.hpp"

namespace hams {
namespace {

constexpr double pi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on [-1, 1]: Newton iteration on P_n with the
// three-term recurrence, symmetric pairs filled from one half.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double xi = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      double p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * xi * p1 - k * p2) / (k + 1);
      }
      dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      const double dx = p0 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;
    x[n - 1 - i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    w[n - 1 - i] = w[i];
  }
}

void require_state_like(const DensityMatrix& rho, const char* who) {
  if (rho.rows() < 1 || rho.rows() != rho.cols())
    throw error(std::string("invalid-dimension: ") + who +
                " needs a square density matrix");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw error(std::string("hermiticity-violation: ") + who +
                " input deviates from Hermitian beyond 1e-8");
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

SphereQuadrature sphere_quadrature(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw error("configuration-error: sphere_quadrature orders must be >= 1");
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  SphereQuadrature q;
  q.points.reserve(size_t(n_theta) * n_phi);
  q.weights.resize(Eigen::Index(n_theta) * n_phi);
  const double wphi = 2.0 * pi / n_phi;
  Eigen::Index idx = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(std::min(1.0, std::max(-1.0, x[i])));
    for (int j = 0; j < n_phi; ++j) {
      q.points.push_back({theta, 2.0 * pi * j / n_phi});
      q.weights(idx++) = w[i] * wphi;
    }
  }
  return q;
}

Operator spin_rotation(SpinQuantum J, double theta, double phi, int dim) {
  if (J.two_j < 0)
    throw error("invalid-quantum-numbers: spin_rotation needs two_j >= 0");
  const int man = J.dim();
  if (dim == 0) dim = man;
  if (dim < man)
    throw error("invalid-dimension: spin_rotation embedding smaller than "
                "the 2J+1 manifold");
  const Operator axis =
      std::cos(phi) * spin_jx(J) + std::sin(phi) * spin_jy(J);
  // exp(+i theta axis) through the Hermitian exponential
  Operator block = unitary_exp(axis, -theta);
  Operator full = Operator::Identity(dim, dim);
  full.topLeftCorner(man, man) = block;
  return full;
}

WignerGrid bosonic_wigner(const DensityMatrix& rho_c,
                          const std::vector<std::complex<double>>& alphas) {
  require_state_like(rho_c, "bosonic_wigner");
  const int dim = int(rho_c.rows());
  double max_abs2 = 0.0;
  for (const auto& a : alphas) max_abs2 = std::max(max_abs2, std::norm(a));
  if (double(dim - 1) < max_abs2 + 6.0)
    throw error("truncation-margin: bosonic_wigner needs at least 6 photons "
                "of headroom beyond max |alpha|^2");

  WignerGrid grid;
  grid.alphas = alphas;
  grid.values.resize(Eigen::Index(alphas.size()));
  grid.truncation_warning = rho_c(dim - 1, dim - 1).real() > 1e-4;

  Eigen::VectorXd parity_sign(dim);
  for (int n = 0; n < dim; ++n) parity_sign(n) = (n % 2 == 0) ? 1.0 : -1.0;

  for (size_t p = 0; p < alphas.size(); ++p) {
    const Operator d = displacement(alphas[p], dim);
    // 2 sum_n (-1)^n <n| D^dag rho D |n>
    const Eigen::VectorXcd diag = (d.adjoint() * rho_c * d).diagonal();
    grid.values(Eigen::Index(p)) = 2.0 * parity_sign.dot(diag.real());
  }
  return grid;
}

SpinKernel spin_kernel(SpinQuantum J) {
  if (J.two_j < 1)
    throw error("configuration-error: spin_kernel needs two_j >= 1");
  const int man = J.dim();
  SpinKernel k;
  k.J = J;
  k.delta_diag.resize(man);
  const double j = J.j();
  for (int n = 0; n < man; ++n) {
    const double m = J.m_of(n);
    double sum = 0.0;
    for (int l = 0; l <= J.two_j; ++l)
      sum += (2.0 * l + 1.0) * clebsch_gordan(j, m, double(l), 0.0, j, m);
    k.delta_diag(n) = sum / (J.two_j + 1.0);
  }
  k.delta_min = k.delta_diag.minCoeff();
  k.delta_max = k.delta_diag.maxCoeff();
  const double span = k.delta_max - k.delta_min;
  k.theta_angles.resize(man);
  k.beta_angles.resize(man);
  for (int n = 0; n < man; ++n) {
    const double gamma = clamp01((k.delta_diag(n) - k.delta_min) / span);
    k.theta_angles(n) = 2.0 * std::acos(std::sqrt(gamma));
    k.beta_angles(n) = 2.0 * std::acos(std::sqrt(1.0 - gamma));
  }
  return k;
}

WignerGrid spin_wigner(const DensityMatrix& rho, SpinQuantum J,
                       const std::vector<SpherePoint>& points) {
  require_state_like(rho, "spin_wigner");
  const int man = J.dim();
  if (rho.rows() < man)
    throw error("invalid-dimension: spin_wigner state smaller than the "
                "2J+1 manifold");
  double outside = 0.0;
  for (int n = man; n < rho.rows(); ++n) outside += rho(n, n).real();
  if (outside > 1e-6)
    throw error("manifold-leakage: population outside the 2J+1 manifold "
                "exceeds 1e-6");

  const SpinKernel kernel = spin_kernel(J);
  const DensityMatrix block = rho.topLeftCorner(man, man);
  WignerGrid grid;
  grid.sphere = points;
  grid.values.resize(Eigen::Index(points.size()));
  for (size_t p = 0; p < points.size(); ++p) {
    const Operator r = spin_rotation(J, points[p].theta, points[p].phi);
    const Eigen::VectorXcd diag = (r.adjoint() * block * r).diagonal();
    grid.values(Eigen::Index(p)) = kernel.delta_diag.dot(diag.real());
  }
  return grid;
}

WignerGrid simulated_spin_wigner_measurement(
    const DensityMatrix& rho_joint, int cavity_dim, const SpinKernel& kernel,
    const std::vector<SpherePoint>& points, double misassign,
    double pi_infidelity, WignerGrid* channel1, WignerGrid* channel2) {
  require_state_like(rho_joint, "simulated_spin_wigner_measurement");
  if (cavity_dim < 2 || rho_joint.rows() % cavity_dim != 0)
    throw error("invalid-dimension: joint state is not qubit (x) cavity "
                "with the given cavity_dim");
  const int qubit_dim = int(rho_joint.rows()) / cavity_dim;
  if (qubit_dim < 2)
    throw error("invalid-dimension: joint state needs a qubit factor of "
                "dimension >= 2");
  const int man = kernel.J.dim();
  if (man > cavity_dim)
    throw error("invalid-dimension: kernel manifold exceeds cavity_dim");
  if (misassign < 0.0 || misassign > 0.5 || pi_infidelity < 0.0 ||
      pi_infidelity > 0.5)
    throw error("invalid-rates: readout error rates must lie in [0, 0.5]");

  double outside = 0.0;
  for (int q = 0; q < qubit_dim; ++q)
    for (int n = man; n < cavity_dim; ++n)
      outside += rho_joint(q * cavity_dim + n, q * cavity_dim + n).real();
  if (outside > 1e-6)
    throw error("manifold-leakage: population outside the 2J+1 manifold "
                "exceeds 1e-6");

  const double span = kernel.delta_max - kernel.delta_min;
  const Operator iq = Operator::Identity(qubit_dim, qubit_dim);

  WignerGrid sym, w1, w2;
  sym.sphere = points;
  w1.sphere = points;
  w2.sphere = points;
  sym.values.resize(Eigen::Index(points.size()));
  w1.values.resize(Eigen::Index(points.size()));
  w2.values.resize(Eigen::Index(points.size()));

  for (size_t p = 0; p < points.size(); ++p) {
    const Operator rc =
        spin_rotation(kernel.J, points[p].theta, points[p].phi, cavity_dim);
    const Operator u = tensor(iq, rc);
    const DensityMatrix rot = u.adjoint() * rho_joint * u;

    // P_g after U = sum_n Rx(angle_n) (x) |n><n| acting on qubit levels
    // {0, 1}: per Fock column, cos^2 rho_gg + sin^2 rho_ee - sin * Im rho_ge
    auto ground_prob = [&](const Eigen::VectorXd& angles) {
      double pg = 0.0;
      for (int n = 0; n < cavity_dim; ++n) {
        const int g = n, e = cavity_dim + n;
        const double a = n < man ? angles(n) : 0.0;
        const double c = std::cos(0.5 * a), s = std::sin(0.5 * a);
        pg += c * c * rot(g, g).real() + s * s * rot(e, e).real() -
              std::sin(a) * rot(g, e).imag();
      }
      return pg;
    };

    const std::vector<double> read = measurement_model(
        {ground_prob(kernel.theta_angles), ground_prob(kernel.beta_angles)},
        misassign, pi_infidelity);
    const double v1 = kernel.delta_min + read[0] * span;
    const double v2 = kernel.delta_max - read[1] * span;
    w1.values(Eigen::Index(p)) = v1;
    w2.values(Eigen::Index(p)) = v2;
    sym.values(Eigen::Index(p)) = 0.5 * (v1 + v2);
  }
  if (channel1) *channel1 = w1;
  if (channel2) *channel2 = w2;
  return sym;
}

}  // namespace hams
