#include "hams/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace hams {

namespace {

constexpr std::complex<double> I(0.0, 1.0);

using Real50 = boost::multiprecision::cpp_bin_float_50;
using BigInt = boost::multiprecision::cpp_int;

int decimal_digits(const BigInt& v) {
  return static_cast<int>(v.str().size());
}

// Decimal digits (numerator + denominator) of the smallest rational
// indistinguishable from r at relative precision eps_rel, via continued
// fractions. Returns cap when no rational that small fits within cap digits:
// the ratio did not rationalize within the budget.
int rational_digits(const Real50& r, const Real50& eps_rel, int cap) {
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Real50 val = r;
  for (int iter = 0; iter < 200; ++iter) {
    Real50 fl = boost::multiprecision::floor(val);
    BigInt a = fl.convert_to<BigInt>();
    BigInt p2 = a * p1 + p0, q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    int digits = decimal_digits(p1) + decimal_digits(q1);
    if (digits > cap) return cap;
    Real50 err = boost::multiprecision::abs(r - Real50(p1) / Real50(q1));
    if (err < eps_rel * r) return digits;
    Real50 frac = val - fl;
    if (frac < Real50("1e-48")) return digits;
    val = 1 / frac;
  }
  return cap;
}

// Zeros of physicists' H_n refined to ~48 digits by Newton iteration on the
// three-term recurrence, seeded from the double-precision Jacobi spectrum.
std::vector<Real50> hermite_zeros_refined(int order) {
  std::vector<double> seed = hermite_zeros(order);
  std::vector<Real50> out;
  out.reserve(seed.size());
  for (double z0 : seed) {
    Real50 z = z0;
    for (int it = 0; it < 8; ++it) {
      Real50 hm1 = 0, h = 1;  // H_{k-1}, H_k starting at k = 0
      for (int k = 0; k < order; ++k) {
        Real50 hp = 2 * z * h - 2 * k * hm1;
        hm1 = h;
        h = hp;
      }
      Real50 deriv = 2 * order * hm1;
      z -= h / deriv;
    }
    out.push_back(z);
  }
  return out;
}

std::vector<double> distinct_magnitudes(const Eigen::VectorXd& ev) {
  double maxmag = ev.cwiseAbs().maxCoeff();
  std::vector<double> mags;
  for (int i = 0; i < ev.size(); ++i) {
    double m = std::abs(ev(i));
    if (m > 1e-9 * maxmag) mags.push_back(m);
  }
  std::sort(mags.begin(), mags.end());
  std::vector<double> out;
  for (double m : mags)
    if (out.empty() || m - out.back() > 1e-9 * maxmag) out.push_back(m);
  return out;
}

// Even-block reflection target [[cos g, sin g], [sin g, -cos g]].
Eigen::Matrix2d reflection_target(double gamma) {
  Eigen::Matrix2d r;
  r << std::cos(gamma), std::sin(gamma), std::sin(gamma), -std::cos(gamma);
  return r;
}

Operator tridiagonal_from(const Eigen::VectorXd& v) {
  int d = static_cast<int>(v.size()) + 1;
  Operator m = Operator::Zero(d, d);
  for (int n = 1; n < d; ++n) m(n - 1, n) = m(n, n - 1) = v(n - 1);
  return m;
}

struct InvolutionProbe {
  double fidelity;      // to the gamma reflection on {|0>, |2>}
  double int_penalty;   // sum of squared distances of ratios to integers
  double min_mag;       // |lambda|_min
  double max_ratio;     // largest |lambda| ratio
  Eigen::Matrix2cd even_block;
};

InvolutionProbe probe_involution(const Eigen::VectorXd& v, double gamma) {
  Operator m = tridiagonal_from(v);
  Eigen::SelfAdjointEigenSolver<Operator> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  double maxmag = ev.cwiseAbs().maxCoeff();
  InvolutionProbe pr{0.0, 1e6, 0.0, 0.0, Eigen::Matrix2cd::Zero()};
  if (maxmag < 1e-12) return pr;
  double minmag = maxmag;
  for (int i = 0; i < ev.size(); ++i) {
    double a = std::abs(ev(i));
    if (a > 1e-6 * maxmag) minmag = std::min(minmag, a);
  }
  pr.min_mag = minmag;
  pr.int_penalty = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    double r = std::abs(ev(i)) / minmag;
    if (r < 1e-6) continue;
    double d = r - std::round(r);
    pr.int_penalty += d * d;
    pr.max_ratio = std::max(pr.max_ratio, r);
  }
  Eigen::VectorXcd phases(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    phases(i) = std::exp(-I * M_PI * ev(i) / minmag);
  Operator u = es.eigenvectors() * phases.asDiagonal() *
               es.eigenvectors().adjoint();
  pr.even_block << u(0, 0), u(0, 2), u(2, 0), u(2, 2);
  Eigen::Matrix2d tgt = reflection_target(gamma);
  pr.fidelity = 0.5 * std::abs((tgt.cast<std::complex<double>>() *
                                pr.even_block)
                                   .trace());
  return pr;
}

// Minimal Nelder-Mead simplex: deterministic, no restarts of its own.
Eigen::VectorXd nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    Eigen::VectorXd x0, double step, int max_iter) {
  int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (int i = 0; i <= n; ++i) fv[i] = f(pts[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> sp(n + 1);
    std::vector<double> sf(n + 1);
    for (int i = 0; i <= n; ++i) {
      sp[i] = pts[idx[i]];
      sf[i] = fv[idx[i]];
    }
    pts = sp;
    fv = sf;
    if (fv[n] - fv[0] < 1e-14) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[i];
    centroid /= n;
    Eigen::VectorXd xr = centroid + (centroid - pts[n]);
    double fr = f(xr);
    if (fr < fv[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[n]);
      double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        fv[n] = fe;
      } else {
        pts[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      pts[n] = xr;
      fv[n] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (pts[n] - centroid);
      double fc = f(xc);
      if (fc < fv[n]) {
        pts[n] = xc;
        fv[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  return pts[best];
}

// Exact integer-ratio family for the 4-level generator, |lambda| = {1, k}:
// sub-diagonal (a, b, c) with a^2 + b^2 + c^2 = 1 + k^2, a^2 c^2 = k^2.
// Parameterized by u = a^2 in [1, k^2]; the even-block reflection angle
// sweeps continuously from pi (u = 1) to 0 (u = k^2).
Eigen::VectorXd family_point(double u, int k) {
  double a = std::sqrt(u);
  double b2 = -(u - 1.0) * (u - double(k) * k) / u;
  double b = std::sqrt(std::max(0.0, b2));
  double c = double(k) / a;
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

double family_gamma(double u, int k) {
  InvolutionProbe pr = probe_involution(family_point(u, k), 0.0);
  return std::atan2(pr.even_block(0, 1).real(), pr.even_block(0, 0).real());
}

}  // namespace

EigenReport eigenvalue_integer_check(const Operator& m, double tol) {
  require_hermitian(m, 1e-10);
  Eigen::SelfAdjointEigenSolver<Operator> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.cwiseAbs().maxCoeff() < 1e-12)
    throw error("degenerate-generator: spectrum is identically zero");
  EigenReport rep;
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::vector<double> mags = distinct_magnitudes(ev);
  rep.min_magnitude = mags.front();
  rep.is_integer_ratio = true;
  for (double m2 : mags) {
    double r = m2 / rep.min_magnitude;
    rep.ratios.push_back(r);
    if (std::abs(r - std::round(r)) > tol) rep.is_integer_ratio = false;
  }
  // Inputs are double precision, so rationals are resolved to ~1e-15.
  int digits_min = 0;
  for (double r : rep.ratios) {
    if (r < 1.0 + 1e-12) continue;
    int d = rational_digits(Real50(r), Real50("1e-15"), 30);
    digits_min = digits_min == 0 ? d : std::min(digits_min, d);
  }
  rep.rationalization_digits = digits_min;
  return rep;
}

ParityRotation parity_preserving_search(SpinQuantum J, double gamma,
                                        unsigned seed) {
  if (J.two_j % 2 == 0 || J.two_j < 3)
    throw error("invalid-spin: parity-preserving family needs odd two_j >= 3");
  if (gamma < 0.0 || gamma > M_PI / 2 + 1e-12)
    throw error("invalid-angle: gamma must lie in [0, pi/2]");
  int npar = J.two_j;

  auto objective = [&](const Eigen::VectorXd& v, double w) {
    InvolutionProbe pr = probe_involution(v, gamma);
    if (pr.min_mag <= 0.0) return 1e9;
    return (1.0 - pr.fidelity) + w * pr.int_penalty;
  };

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd best;
  double best_loss = 1e18;
  for (int restart = 0; restart < 32; ++restart) {
    Eigen::VectorXd v(npar);
    for (int i = 0; i < npar; ++i)
      v(i) = unif(rng) * (coin(rng) ? 1.0 : -1.0);
    for (double w : {1e-2, 1.0, 1e2, 1e4}) {
      auto f = [&](const Eigen::VectorXd& x) { return objective(x, w); };
      v = nelder_mead(f, v, 0.25, 400);
    }
    double loss = objective(v, 1e4);
    if (loss < best_loss) {
      best_loss = loss;
      best = v;
    }
  }

  InvolutionProbe best_probe = probe_involution(best, gamma);
  Eigen::VectorXd solution = best / best_probe.min_mag;

  if (J.two_j == 3) {
    // Snap onto the closed-form family: bracket the reflection angle on a
    // fine grid in u, then bisect. Falls back to the raw search result if
    // the bracket fails (it cannot for gamma in [0, pi/2]).
    int k = std::max(2, std::min(12, int(std::lround(best_probe.max_ratio))));
    const int grid = 256;
    double lo = 1.0, hi = double(k) * k;
    double ulo = lo, uhi = hi;
    bool bracketed = false;
    double prev_u = lo, prev_g = family_gamma(lo + 1e-12, k);
    for (int i = 1; i <= grid; ++i) {
      double u = lo + (hi - lo) * double(i) / grid;
      double g = family_gamma(std::min(u, hi - 1e-12), k);
      if ((prev_g - gamma) * (g - gamma) <= 0.0) {
        ulo = prev_u;
        uhi = u;
        bracketed = true;
        break;
      }
      prev_u = u;
      prev_g = g;
    }
    if (bracketed) {
      double glo = family_gamma(std::max(ulo, lo + 1e-12), k);
      for (int it = 0; it < 200; ++it) {
        double um = 0.5 * (ulo + uhi);
        double gm = family_gamma(um, k);
        if ((glo - gamma) * (gm - gamma) <= 0.0) {
          uhi = um;
        } else {
          ulo = um;
          glo = gm;
        }
      }
      solution = family_point(0.5 * (ulo + uhi), k);
    }
  }

  InvolutionProbe final_probe = probe_involution(solution, gamma);
  if (final_probe.fidelity < 0.999) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "synthesis-failure: best block fidelity %.6f below 0.999 "
                  "(integer penalty %.3e)",
                  final_probe.fidelity, final_probe.int_penalty);
    throw error(buf);
  }
  Eigen::VectorXd norm = solution / final_probe.min_mag;
  EigenReport rep = eigenvalue_integer_check(tridiagonal_from(norm), 1e-3);
  if (!rep.is_integer_ratio)
    throw error("synthesis-failure: candidate spectrum is not integer-ratio "
                "within 1e-3");
  Operator bare = Operator::Zero(J.dim(), J.dim());
  for (int n = 1; n < J.dim(); ++n) bare(n - 1, n) = norm(n - 1);
  return ParityRotation{coeffs_from_generator(bare, J), 2 * M_PI};
}

UniversalityWitness check_universality(const Operator& m, SpinQuantum J) {
  if (m.rows() != J.dim() || m.cols() != J.dim())
    throw error("invalid-dimension: generator size must match the manifold");
  require_hermitian(m, 1e-10);
  UniversalityWitness w;
  double best = 0.0;
  for (int q = -2; q <= 2; ++q) {
    double overlap = std::abs((m * spherical_tensor(2, q, J)).trace());
    if (overlap > best) {
      best = overlap;
      w.witness_q = q;
    }
  }
  w.universal = best > 1e-10;
  return w;
}

GivensFactorization givens_factorization(const Operator& u) {
  int d = static_cast<int>(u.rows());
  if (u.cols() != d ||
      (u * u.adjoint() - Operator::Identity(d, d)).cwiseAbs().maxCoeff() >
          1e-10)
    throw error("invalid-target: input is not unitary within 1e-10");
  Operator work = u;
  GivensFactorization f;
  for (int col = 0; col + 1 < d; ++col) {
    for (int row = d - 1; row > col; --row) {
      std::complex<double> a = work(row - 1, col), b = work(row, col);
      if (std::abs(b) < 1e-14) continue;
      double r = std::hypot(std::abs(a), std::abs(b));
      double c;
      std::complex<double> s;
      if (std::abs(a) < 1e-14) {
        c = 0.0;
        s = std::conj(b) / std::abs(b);
      } else {
        c = std::abs(a) / r;
        s = c * std::conj(b) / std::conj(a);
      }
      // Rows (row-1, row) <- [[c, s], [-conj(s), c]] * rows.
      Eigen::RowVectorXcd top = c * work.row(row - 1) + s * work.row(row);
      Eigen::RowVectorXcd bot =
          -std::conj(s) * work.row(row - 1) + c * work.row(row);
      work.row(row - 1) = top;
      work.row(row) = bot;
      // Store the inverse rotation G = R^dag = [[c, -s], [conj(s), c]]:
      // matching -i e^{-i phase} sin(theta/2) = -s fixes the step.
      double theta = 2.0 * std::atan2(std::abs(s), c);
      double phase = M_PI / 2 - std::arg(s);
      f.steps.push_back({row, theta, phase});
    }
  }
  f.diagonal_phases.resize(d);
  for (int k = 0; k < d; ++k) f.diagonal_phases[k] = std::arg(work(k, k));
  return f;
}

Operator givens_reconstruct(const GivensFactorization& f, int dim) {
  Operator u = Operator::Identity(dim, dim);
  for (const GivensStep& st : f.steps) {
    if (st.level < 1 || st.level >= dim)
      throw error("invalid-step: level out of range");
    Operator g = Operator::Identity(dim, dim);
    double ch = std::cos(st.theta / 2), sh = std::sin(st.theta / 2);
    g(st.level - 1, st.level - 1) = ch;
    g(st.level, st.level) = ch;
    g(st.level - 1, st.level) = -I * std::exp(-I * st.phase) * sh;
    g(st.level, st.level - 1) = -I * std::exp(I * st.phase) * sh;
    u = u * g;
  }
  if (static_cast<int>(f.diagonal_phases.size()) != dim)
    throw error("invalid-step: diagonal phase stage size mismatch");
  for (int k = 0; k < dim; ++k)
    u.col(k) *= std::exp(I * f.diagonal_phases[k]);
  return u;
}

EigenReport blockade_aperiodicity(SpinQuantum J, int max_digits) {
  if (J.two_j < 1) throw error("degenerate-spin: two_j must be >= 1");
  int d = J.dim();
  Operator a = d >= 2 ? annihilation(d) : Operator::Zero(1, 1);
  Operator x = (a + Operator(a.adjoint())) / std::sqrt(2.0);
  Eigen::SelfAdjointEigenSolver<Operator> es(x);
  Eigen::VectorXd ev = es.eigenvalues();

  std::vector<double> zeros = hermite_zeros(d);
  for (int i = 0; i < d; ++i)
    if (std::abs(ev(i) - zeros[i]) > 1e-9)
      throw error("spectral-mismatch: x_J spectrum deviates from the Hermite "
                  "zeros beyond 1e-9");

  EigenReport rep;
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::vector<double> mags = distinct_magnitudes(ev);
  rep.min_magnitude = mags.front();
  rep.is_integer_ratio = true;
  for (double m : mags) {
    double r = m / rep.min_magnitude;
    rep.ratios.push_back(r);
    if (std::abs(r - std::round(r)) > 1e-9) rep.is_integer_ratio = false;
  }

  // Ratios of refined zeros carry ~48 correct digits, enough to push the
  // rationalization budget well past the double-precision floor.
  if (rep.ratios.size() > 1) {
    std::vector<Real50> rz = hermite_zeros_refined(d);
    std::vector<Real50> rmags;
    for (const Real50& z : rz) {
      Real50 m = boost::multiprecision::abs(z);
      if (m > Real50("1e-12")) rmags.push_back(m);
    }
    std::sort(rmags.begin(), rmags.end());
    std::vector<Real50> dedup;
    for (const Real50& m : rmags)
      if (dedup.empty() || m - dedup.back() > Real50("1e-12"))
        dedup.push_back(m);
    int digits_min = 0;
    for (std::size_t i = 1; i < dedup.size(); ++i) {
      Real50 r = dedup[i] / dedup.front();
      int dg = rational_digits(r, Real50("1e-45"), max_digits);
      digits_min = digits_min == 0 ? dg : std::min(digits_min, dg);
    }
    rep.rationalization_digits = digits_min;
  }
  return rep;
}

std::vector<double> hermite_zeros(int order) {
  if (order < 1) throw error("invalid-order: need order >= 1");
  if (order == 1) return {0.0};
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int n = 1; n < order; ++n)
    jac(n - 1, n) = jac(n, n - 1) = std::sqrt(n / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Eigen::VectorXd ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + order);
}

}  // namespace hams
