#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hams/operators.hpp"
#include "hams/tomography.hpp"

using namespace hams;
using cd = std::complex<double>;
static const cd I(0.0, 1.0);
static const double pi = 3.14159265358979323846;

namespace {

DensityMatrix random_density(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = cd(gauss(rng), gauss(rng));
  DensityMatrix rho = g * g.adjoint();
  return rho / rho.trace();
}

// Pauli vector in the library's ascending-m Fock ordering (|m=-1/2>, |m=+1/2>)
Eigen::MatrixXcd pauli(int k) {
  const SpinQuantum half{1};
  if (k == 0) return 2.0 * spin_jx(half);
  if (k == 1) return 2.0 * spin_jy(half);
  return 2.0 * spin_jz(half);
}

// Bloch-sphere action of a 2x2 unitary: v(U rho U^dag) = M v(rho)
Eigen::Matrix3d bloch_rotation(const Eigen::MatrixXcd& u) {
  Eigen::Matrix3d m;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      m(k, l) = 0.5 * (pauli(k) * u * pauli(l) * u.adjoint()).trace().real();
  return m;
}

// sphere direction labeled by (theta, phi): the Bloch vector of
// R(theta, phi)|J, +J> (the rotated kernel-maximum state)
Eigen::Vector3d point_direction(double theta, double phi) {
  return {-std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi),
          std::cos(theta)};
}

}  // namespace

TEST_CASE("sphere_quadrature: weights and low-order moments") {
  const SphereQuadrature q = sphere_quadrature(6, 9);
  CHECK(q.weights.size() == 54);
  CHECK(q.weights.sum() == doctest::Approx(4.0 * pi).epsilon(1e-12));
  CHECK(q.weights.minCoeff() > 0.0);
  double cos2 = 0.0, x2 = 0.0;
  for (size_t i = 0; i < q.points.size(); ++i) {
    const double c = std::cos(q.points[i].theta);
    const double x = std::sin(q.points[i].theta) * std::cos(q.points[i].phi);
    cos2 += q.weights(long(i)) * c * c;
    x2 += q.weights(long(i)) * x * x;
  }
  CHECK(cos2 == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
  CHECK(x2 == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(sphere_quadrature(0, 4),
                       doctest::Contains("configuration-error"), error);
}

TEST_CASE("spin_rotation: unitarity, identity, qubit block form") {
  const SpinQuantum half{1};
  CHECK(spin_rotation(half, 0.0, 1.3).isIdentity(1e-14));

  const double th = 0.7, ph = 2.1;
  const Operator r = spin_rotation(SpinQuantum{4}, th, ph);
  require_unitary(r);

  // J = 1/2 closed form in the ascending-m ordering:
  // cos(th/2) I + i sin(th/2) (cos ph sx + sin ph sy), (0,1) entry phase +ph
  const Operator r2 = spin_rotation(half, th, ph);
  CHECK(r2(0, 0).real() == doctest::Approx(std::cos(th / 2)).epsilon(1e-12));
  const cd off = I * std::sin(th / 2) * std::exp(I * ph);
  CHECK(std::abs(r2(0, 1) - off) < 1e-12);

  // embedding pads with identity
  const Operator re = spin_rotation(half, th, ph, 4);
  CHECK(re(2, 2) == cd(1.0, 0.0));
  CHECK(std::abs(re(3, 2)) == 0.0);
  CHECK(std::abs(re(0, 2)) == 0.0);
  CHECK_THROWS_WITH_AS(spin_rotation(SpinQuantum{4}, 0.1, 0.0, 3),
                       doctest::Contains("invalid-dimension"), error);
}

TEST_CASE("bosonic_wigner: parity values at the origin") {
  const int dim = 8;
  DensityMatrix vac = DensityMatrix::Zero(dim, dim);
  vac(0, 0) = 1.0;
  const WignerGrid wv = bosonic_wigner(vac, {cd(0.0, 0.0)});
  CHECK(wv.values(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(wv.truncation_warning);

  DensityMatrix one = DensityMatrix::Zero(dim, dim);
  one(1, 1) = 1.0;
  const WignerGrid w1 = bosonic_wigner(one, {cd(0.0, 0.0)});
  CHECK(w1.values(0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("bosonic_wigner: coherent state peaks at its own amplitude") {
  const int dim = 20;
  const cd beta(2.0, 0.0);
  const Operator d = displacement(beta, dim);
  DensityMatrix rho = d.col(0) * d.col(0).adjoint();

  std::vector<cd> line;
  for (int k = 0; k <= 60; ++k) line.push_back(cd(0.05 * k, 0.0));
  const WignerGrid w = bosonic_wigner(rho, line);
  Eigen::Index at = 0;
  w.values.maxCoeff(&at);
  CHECK(std::abs(line[size_t(at)].real() - 2.0) < 0.051);
  // displaced-parity overlap at the center is the full +2
  CHECK(w.values(40) == doctest::Approx(2.0).epsilon(1e-6));
  // Gaussian falloff W = 2 exp(-2|alpha - beta|^2)
  CHECK(w.values(30) ==
        doctest::Approx(2.0 * std::exp(-2.0 * 0.25)).epsilon(1e-6));
}

TEST_CASE("bosonic_wigner: bounds, linearity, reality on random states") {
  const int dim = 12;
  const DensityMatrix rho = random_density(dim, 71);
  const DensityMatrix sig = random_density(dim, 72);
  std::vector<cd> pts;
  for (int k = 0; k < 25; ++k)
    pts.push_back(0.3 * cd(std::cos(0.7 * k), std::sin(1.1 * k)) * double(k % 5));

  const WignerGrid wr = bosonic_wigner(rho, pts);
  const WignerGrid ws = bosonic_wigner(sig, pts);
  for (Eigen::Index i = 0; i < wr.values.size(); ++i) {
    CHECK(wr.values(i) <= 2.0 + 1e-6);
    CHECK(wr.values(i) >= -2.0 - 1e-6);
  }

  const DensityMatrix mix = 0.35 * rho + 0.65 * sig;
  const WignerGrid wm = bosonic_wigner(mix, pts);
  CHECK((wm.values - 0.35 * wr.values - 0.65 * ws.values).cwiseAbs().maxCoeff() <
        1e-12);

  // independently recompute one point as a complex trace
  const Operator d = displacement(pts[7], dim);
  const Operator kernel = 2.0 * d * parity_op(dim) * d.adjoint();
  const cd tr = (kernel * rho).trace();
  CHECK(std::abs(tr.imag()) < 1e-10);
  CHECK(wr.values(7) == doctest::Approx(tr.real()).epsilon(1e-10));
}

TEST_CASE("bosonic_wigner: truncated-plane normalization") {
  // rim points displace the state support out to (|alpha| + |beta|)^2
  // photons, so the 6-photon contract floor is far from enough here
  const int dim = 44;
  const cd beta(1.2, 0.5);
  const Operator d = displacement(beta, dim);
  const DensityMatrix rho = d.col(0) * d.col(0).adjoint();

  // |alpha| <= 4 disk; the state is far inside, the clipped tail negligible
  const double h = 0.125;
  std::vector<cd> grid;
  for (int ix = -32; ix <= 32; ++ix)
    for (int iy = -32; iy <= 32; ++iy) {
      const cd a(h * ix, h * iy);
      if (std::abs(a) <= 4.0) grid.push_back(a);
    }
  const WignerGrid w = bosonic_wigner(rho, grid);
  // (1/pi) int (W/2) dq dp = 1 in the (q,p) units of the displacement,
  // alpha = (q + ip)/sqrt(2): each alpha cell has qp-area 2 h^2
  const double integral = w.values.sum() * h * h / pi;
  CHECK(integral == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("bosonic_wigner: truncation margin and top-population warning") {
  DensityMatrix vac5 = DensityMatrix::Zero(6, 6);
  vac5(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(bosonic_wigner(vac5, {cd(0.0, 0.0)}),
                       doctest::Contains("truncation-margin"), error);

  DensityMatrix far = DensityMatrix::Zero(10, 10);
  far(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(bosonic_wigner(far, {cd(1.5, 1.2)}),
                       doctest::Contains("truncation-margin"), error);

  DensityMatrix top = DensityMatrix::Zero(8, 8);
  top(0, 0) = 0.5;
  top(7, 7) = 0.5;
  const WignerGrid w = bosonic_wigner(top, {cd(0.0, 0.0)});
  CHECK(w.truncation_warning);
}

TEST_CASE("spin_kernel: closed-form values at J = 1/2 and J = 1") {
  const SpinKernel k2 = spin_kernel(SpinQuantum{1});
  // Delta_m = (1 -+ sqrt(3))/2 in the Fock order m = -1/2, +1/2
  CHECK(k2.delta_diag(0) ==
        doctest::Approx(0.5 * (1.0 - std::sqrt(3.0))).epsilon(1e-12));
  CHECK(k2.delta_diag(1) ==
        doctest::Approx(0.5 * (1.0 + std::sqrt(3.0))).epsilon(1e-12));
  // trace 1 makes the flat-state Wigner function integrate to Tr rho
  CHECK(k2.delta_diag.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const SpinKernel k3 = spin_kernel(SpinQuantum{2});
  const double s2 = 3.0 / std::sqrt(2.0), s10 = 5.0 / std::sqrt(10.0);
  CHECK(k3.delta_diag(0) == doctest::Approx((1.0 - s2 + s10) / 3.0).epsilon(1e-12));
  CHECK(k3.delta_diag(1) ==
        doctest::Approx((1.0 - std::sqrt(10.0)) / 3.0).epsilon(1e-12));
  CHECK(k3.delta_diag(2) == doctest::Approx((1.0 + s2 + s10) / 3.0).epsilon(1e-12));
  CHECK(k3.delta_diag.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k3.delta_max == doctest::Approx(k3.delta_diag(2)));
  CHECK(k3.delta_min == doctest::Approx(k3.delta_diag(1)));

  CHECK_THROWS_WITH_AS(spin_kernel(SpinQuantum{0}),
                       doctest::Contains("configuration-error"), error);
}

TEST_CASE("spin_kernel: channel angles invert to the kernel eigenvalues") {
  for (int two_j : {1, 2, 3, 4, 5, 8}) {
    const SpinKernel k = spin_kernel(SpinQuantum{two_j});
    const double span = k.delta_max - k.delta_min;
    for (int n = 0; n <= two_j; ++n) {
      const double gamma = (k.delta_diag(n) - k.delta_min) / span;
      const double c1 = std::cos(0.5 * k.theta_angles(n));
      const double c2 = std::cos(0.5 * k.beta_angles(n));
      CHECK(c1 * c1 == doctest::Approx(gamma).epsilon(1e-12));
      CHECK(c2 * c2 == doctest::Approx(1.0 - gamma).epsilon(1e-12));
    }
  }
}

TEST_CASE("spin_kernel: extremes approach the bosonic +-2 at large J") {
  const SpinKernel k = spin_kernel(SpinQuantum{50});
  Eigen::Index imax = 0, imin = 0;
  k.delta_diag.maxCoeff(&imax);
  k.delta_diag.minCoeff(&imin);
  CHECK(imax == 50);
  CHECK(imin == 49);
  CHECK(k.delta_max == doctest::Approx(1.980192).epsilon(1e-5));
  CHECK(k.delta_min == doctest::Approx(-1.940166).epsilon(1e-5));
  CHECK(std::abs(k.delta_max - 2.0) < 0.1);
  CHECK(std::abs(k.delta_min + 2.0) < 0.1);
}

TEST_CASE("spin_wigner: pole values and qubit closed form") {
  const SpinQuantum J{2};
  const SpinKernel k = spin_kernel(J);
  DensityMatrix low = DensityMatrix::Zero(3, 3);
  low(0, 0) = 1.0;
  const WignerGrid w =
      spin_wigner(low, J, {{0.0, 0.0}, {0.0, 2.0}, {pi, 0.0}});
  CHECK(w.values(0) == doctest::Approx(k.delta_diag(0)).epsilon(1e-12));
  CHECK(w.values(1) == doctest::Approx(k.delta_diag(0)).epsilon(1e-12));
  // a pi rotation carries |J,-J> to |J,+J>
  CHECK(w.values(2) == doctest::Approx(k.delta_diag(2)).epsilon(1e-10));

  // J = 1/2, rho = |up><up|: W = (1 + sqrt(3) cos theta)/2
  DensityMatrix up = DensityMatrix::Zero(2, 2);
  up(1, 1) = 1.0;
  for (double th : {0.0, 0.4, 1.3, 2.2, pi}) {
    const WignerGrid wq = spin_wigner(up, SpinQuantum{1}, {{th, 0.9}});
    CHECK(wq.values(0) ==
          doctest::Approx(0.5 * (1.0 + std::sqrt(3.0) * std::cos(th)))
              .epsilon(1e-10));
  }
}

TEST_CASE("spin_wigner: standardization on random states up to J = 3") {
  for (int two_j : {1, 2, 3, 4, 5, 6}) {
    const SpinQuantum J{two_j};
    const DensityMatrix rho = random_density(J.dim(), 100 + unsigned(two_j));
    const SphereQuadrature q = sphere_quadrature(two_j + 1, 2 * two_j + 1);
    const WignerGrid w = spin_wigner(rho, J, q.points);
    const double tr = (two_j + 1) / (4.0 * pi) * q.weights.dot(w.values);
    CHECK(tr == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("spin_wigner: traciality on random pairs up to J = 2") {
  for (int two_j : {1, 2, 3, 4}) {
    const SpinQuantum J{two_j};
    const DensityMatrix rho = random_density(J.dim(), 200 + unsigned(two_j));
    const DensityMatrix sig = random_density(J.dim(), 300 + unsigned(two_j));
    const SphereQuadrature q = sphere_quadrature(2 * two_j + 1, 4 * two_j + 1);
    const WignerGrid wr = spin_wigner(rho, J, q.points);
    const WignerGrid ws = spin_wigner(sig, J, q.points);
    double overlap = 0.0;
    for (Eigen::Index i = 0; i < q.weights.size(); ++i)
      overlap += q.weights(i) * wr.values(i) * ws.values(i);
    overlap *= (two_j + 1) / (4.0 * pi);
    const double exact = (rho * sig).trace().real();
    CHECK(overlap == doctest::Approx(exact).epsilon(1e-4));
    CHECK(std::abs(overlap - exact) < 1e-10);
  }
}

TEST_CASE("spin_wigner: linearity and reality for Hermitian operators") {
  const SpinQuantum J{3};
  const DensityMatrix rho = random_density(J.dim(), 55);
  const DensityMatrix sig = random_density(J.dim(), 56);
  std::vector<SpherePoint> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({0.27 * i, 0.53 * i});

  const WignerGrid wr = spin_wigner(rho, J, pts);
  const WignerGrid ws = spin_wigner(sig, J, pts);
  // arbitrary Hermitian combination (not trace normalized)
  const DensityMatrix comb = 0.8 * rho + 0.5 * sig;
  const WignerGrid wc = spin_wigner(comb, J, pts);
  CHECK((wc.values - 0.8 * wr.values - 0.5 * ws.values).cwiseAbs().maxCoeff() <
        1e-12);

  // reality: the complex trace against the rotated kernel has no imaginary
  // part beyond roundoff
  const SpinKernel k = spin_kernel(J);
  const Operator r = spin_rotation(J, pts[5].theta, pts[5].phi);
  const Operator delta_rot =
      r * k.delta_diag.cast<cd>().asDiagonal() * r.adjoint();
  const cd tr = (delta_rot * rho).trace();
  CHECK(std::abs(tr.imag()) < 1e-10);
  CHECK(wr.values(5) == doctest::Approx(tr.real()).epsilon(1e-10));

  // kernel-bound invariant
  for (Eigen::Index i = 0; i < wr.values.size(); ++i) {
    CHECK(wr.values(i) <= k.delta_max + 1e-6);
    CHECK(wr.values(i) >= k.delta_min - 1e-6);
  }
}

TEST_CASE("spin_wigner: covariance under random rotations, J <= 2") {
  std::mt19937 rng(909);
  std::uniform_real_distribution<double> uth(0.15, pi - 0.15);
  std::uniform_real_distribution<double> uph(0.0, 2.0 * pi);
  for (int two_j : {1, 2, 3, 4}) {
    const SpinQuantum J{two_j};
    const DensityMatrix rho = random_density(J.dim(), 400 + unsigned(two_j));
    for (int trial = 0; trial < 5; ++trial) {
      const double alpha = uth(rng), beta = uph(rng);
      const Operator u = spin_rotation(J, alpha, beta);
      const DensityMatrix rot = u * rho * u.adjoint();

      const Eigen::Matrix3d so3 =
          bloch_rotation(spin_rotation(SpinQuantum{1}, alpha, beta));
      const double th = uth(rng), ph = uph(rng);
      const Eigen::Vector3d moved = so3.transpose() * point_direction(th, ph);
      const double thp = std::acos(std::min(1.0, std::max(-1.0, moved(2))));
      const double php = std::atan2(-moved(0), moved(1));

      const WignerGrid lhs = spin_wigner(rot, J, {{th, ph}});
      const WignerGrid rhs = spin_wigner(rho, J, {{thp, php}});
      CHECK(lhs.values(0) == doctest::Approx(rhs.values(0)).epsilon(1e-8));
      CHECK(std::abs(lhs.values(0) - rhs.values(0)) < 1e-8);
    }
  }
}

TEST_CASE("spin_wigner: manifold leakage raises") {
  DensityMatrix rho = DensityMatrix::Zero(4, 4);
  rho(0, 0) = 0.999;
  rho(3, 3) = 0.001;
  CHECK_THROWS_WITH_AS(spin_wigner(rho, SpinQuantum{2}, {{0.0, 0.0}}),
                       doctest::Contains("manifold-leakage"), error);
  CHECK_THROWS_WITH_AS(spin_wigner(rho.topLeftCorner(2, 2), SpinQuantum{2},
                                   {{0.0, 0.0}}),
                       doctest::Contains("invalid-dimension"), error);
}

TEST_CASE("simulated measurement: lossless channels reproduce spin_wigner") {
  const SpinQuantum J{2};
  const SpinKernel k = spin_kernel(J);
  const DensityMatrix rho_c = random_density(3, 77);
  DensityMatrix gg = DensityMatrix::Zero(2, 2);
  gg(0, 0) = 1.0;
  const DensityMatrix joint = tensor(gg, rho_c);

  const SphereQuadrature q = sphere_quadrature(3, 5);
  WignerGrid c1, c2;
  const WignerGrid sim =
      simulated_spin_wigner_measurement(joint, 3, k, q.points, 0.0, 0.0, &c1, &c2);
  const WignerGrid exact = spin_wigner(rho_c, J, q.points);
  CHECK((sim.values - exact.values).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((c1.values - exact.values).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((c2.values - exact.values).cwiseAbs().maxCoeff() < 1e-8);

  // vacuum at the theta = 0 point reads the |0>-mapped kernel value
  DensityMatrix vac = DensityMatrix::Zero(3, 3);
  vac(0, 0) = 1.0;
  const WignerGrid pole = simulated_spin_wigner_measurement(
      tensor(gg, vac), 3, k, {{0.0, 0.0}});
  CHECK(pole.values(0) == doctest::Approx(k.delta_diag(0)).epsilon(1e-12));
}

TEST_CASE("simulated measurement: symmetrization cancels the readout offset") {
  const SpinQuantum J{2};
  const SpinKernel k = spin_kernel(J);
  const double mis = 0.065, p_inf = 0.05;
  const double span = k.delta_max - k.delta_min;
  const double mid = 0.5 * (k.delta_max + k.delta_min);
  const double contrast = (1.0 - p_inf) * (1.0 - 2.0 * mis);

  const Operator r = spin_rotation(J, 1.1, 0.4);
  DensityMatrix rho_c = DensityMatrix::Zero(3, 3);
  rho_c(0, 0) = 1.0;
  rho_c = r * rho_c * r.adjoint();
  DensityMatrix gg = DensityMatrix::Zero(2, 2);
  gg(0, 0) = 1.0;
  const DensityMatrix joint = tensor(gg, rho_c);

  const SphereQuadrature q = sphere_quadrature(3, 5);
  WignerGrid c1, c2;
  const WignerGrid sym = simulated_spin_wigner_measurement(
      joint, 3, k, q.points, mis, p_inf, &c1, &c2);
  const WignerGrid ideal = spin_wigner(rho_c, J, q.points);

  for (Eigen::Index i = 0; i < sym.values.size(); ++i) {
    const double scaled = mid + contrast * (ideal.values(i) - mid);
    // the symmetrized estimator is a pure contrast rescale about the
    // midpoint: zero state-independent offset
    CHECK(std::abs(sym.values(i) - scaled) < 1e-10);
    // each single channel carries a constant offset -+ p_inf * span / 2
    CHECK(std::abs(c1.values(i) - (scaled - 0.5 * p_inf * span)) < 1e-10);
    CHECK(std::abs(c2.values(i) - (scaled + 0.5 * p_inf * span)) < 1e-10);
  }
  CHECK(0.5 * p_inf * span > 0.05);
}

TEST_CASE("simulated measurement: input validation") {
  const SpinKernel k = spin_kernel(SpinQuantum{2});
  DensityMatrix gg = DensityMatrix::Zero(2, 2);
  gg(0, 0) = 1.0;
  DensityMatrix leaky = DensityMatrix::Zero(4, 4);
  leaky(0, 0) = 0.999;
  leaky(3, 3) = 0.001;
  const DensityMatrix joint = tensor(gg, leaky);

  CHECK_THROWS_WITH_AS(
      simulated_spin_wigner_measurement(joint, 4, k, {{0.0, 0.0}}),
      doctest::Contains("manifold-leakage"), error);
  CHECK_THROWS_WITH_AS(
      simulated_spin_wigner_measurement(joint, 3, k, {{0.0, 0.0}}),
      doctest::Contains("invalid-dimension"), error);
  CHECK_THROWS_WITH_AS(
      simulated_spin_wigner_measurement(joint, 2, k, {{0.0, 0.0}}),
      doctest::Contains("invalid-dimension"), error);
  DensityMatrix clean = DensityMatrix::Zero(4, 4);
  clean(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(
      simulated_spin_wigner_measurement(tensor(gg, clean), 4, k, {{0.0, 0.0}},
                                        0.6, 0.0),
      doctest::Contains("invalid-rates"), error);
}
