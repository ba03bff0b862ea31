#include "hams/logical.hpp"

#include <cmath>
#include <complex>

namespace hams {

namespace {

constexpr double pi = 3.14159265358979323846;

void require_code_spin(SpinQuantum J) {
  if (J.two_j < 1)
    throw error("configuration-error: spin-cat code needs two_j >= 1");
}

// Area under one truncated-Gaussian envelope edge, so flat lengths can be
// chosen to hit an exact pulse area.
double edge_area(double sigma, double truncation) {
  return sigma * std::sqrt(pi / 2.0) * std::erf(truncation / std::sqrt(2.0));
}

}  // namespace

SpinCatCode spin_cat_code(SpinQuantum J) {
  require_code_spin(J);
  const int dim = J.dim();
  SpinCatCode code;
  code.J = J;
  code.codeword_zero = StateVector::Zero(dim);
  code.codeword_one = StateVector::Zero(dim);
  const double amp = 1.0 / std::sqrt(2.0);
  code.codeword_zero(0) = amp;
  code.codeword_zero(dim - 1) = amp;
  code.codeword_one(0) = amp;
  code.codeword_one(dim - 1) = -amp;
  return code;
}

GateRecipe gate_recipe(LogicalGate gate, SpinQuantum J, int k,
                       double parameter) {
  require_code_spin(J);
  if (k < 0 || k >= J.two_j)
    throw error("configuration-error: branch index k outside [0, 2J)");

  GateRecipe r;
  r.gate = gate;
  r.J = J;
  r.k = k;
  const double two_j = J.two_j;

  // Type I: logical R_x(theta) from a z-axis rotation.
  auto type_one = [&](double theta) {
    r.equatorial = false;
    r.axis_phi = 0.0;
    r.angle = -(theta + 2.0 * pi * k) / two_j;
  };
  // Type II: logical pi rotation about sin(phi) y + cos(phi) z from an
  // equatorial pi rotation at phi' = (phi + pi k)/(2J).
  auto type_two = [&](double phi) {
    r.equatorial = true;
    r.axis_phi = (phi + pi * k) / two_j;
    r.angle = pi;
  };

  switch (gate) {
    case LogicalGate::x:
      type_one(pi);
      break;
    case LogicalGate::rx:
      type_one(parameter);
      break;
    case LogicalGate::z:
      type_two(0.0);
      break;
    case LogicalGate::y:
      type_two(pi / 2.0);
      break;
    case LogicalGate::sdag_h_s:
      type_two(3.0 * pi / 4.0);
      break;
    case LogicalGate::type_ii:
      type_two(parameter);
      break;
    default:
      throw error("unknown-gate: unsupported gate label");
  }
  return r;
}

LogicalGate logical_gate_from_name(const std::string& name) {
  if (name == "X") return LogicalGate::x;
  if (name == "Y") return LogicalGate::y;
  if (name == "Z") return LogicalGate::z;
  if (name == "SdagHS") return LogicalGate::sdag_h_s;
  if (name == "Rx") return LogicalGate::rx;
  if (name == "TypeII") return LogicalGate::type_ii;
  throw error("unknown-gate: " + name);
}

Operator recipe_unitary(const GateRecipe& recipe, int dim) {
  require_code_spin(recipe.J);
  const int man = recipe.J.dim();
  if (dim == 0) dim = man;
  if (dim < man)
    throw error("invalid-dimension: embedding below the spin manifold");
  const Operator axis =
      recipe.equatorial
          ? Operator(std::cos(recipe.axis_phi) * spin_jx(recipe.J) +
                     std::sin(recipe.axis_phi) * spin_jy(recipe.J))
          : spin_jz(recipe.J);
  Operator u = Operator::Identity(dim, dim);
  u.topLeftCorner(man, man) = unitary_exp(axis, recipe.angle);
  return u;
}

StateVector apply_recipe(const GateRecipe& recipe, const StateVector& state) {
  const int man = recipe.J.dim();
  if (state.size() < man)
    throw error("invalid-dimension: state smaller than the spin manifold");
  const double norm2 = state.squaredNorm();
  if (!(norm2 > 0.0)) throw error("configuration-error: zero-norm state");
  double above = 0.0;
  for (int n = man; n < state.size(); ++n) above += std::norm(state(n));
  if (above > 1e-6 * norm2)
    throw error("manifold-leakage: state has weight above the manifold");
  return recipe_unitary(recipe, int(state.size())) * state;
}

ParityRotation hadamard_via_nonlinear(SpinQuantum J) {
  if (J.two_j != 3)
    throw error(
        "configuration-error: the nonlinear Hadamard lives on the spin-3/2 "
        "manifold");
  ParityRotation sol = parity_preserving_search(J, pi / 4.0, 42);
  // The gamma = pi/4 reflection of the {|0>, |2>} block is the Hadamard in
  // the Fock basis and therefore on the logical Bloch sphere; confirm the
  // |+X_L> -> |0_L> action before handing the coefficients out.
  const Operator u =
      rotation_unitary(nonlinear_generator(sol.coeffs, J, 0.0), sol.theta);
  StateVector plus_x = StateVector::Zero(J.dim());
  plus_x(0) = 1.0;
  StateVector zero_l = StateVector::Zero(J.dim());
  zero_l(0) = 1.0 / std::sqrt(2.0);
  zero_l(2) = 1.0 / std::sqrt(2.0);
  const double fid = std::norm(zero_l.dot(u * plus_x));
  if (fid < 0.999)
    throw error("synthesis-failure: nonlinear Hadamard fidelity below 0.999");
  return sol;
}

Schedule prep_sequence(SpinQuantum J, const SystemParams& params, double eps,
                       double omega, double axis_phi) {
  require_code_spin(J);
  if (!(eps > 0.0) || !(omega > 0.0))
    throw error("configuration-error: drive rates must be positive");
  if (params.cavity_dim < J.dim() || params.cavity_dim < 3)
    throw error("configuration-error: cavity_dim below the prep manifold");

  const double qubit_edge = 150e-9, qubit_sigma = 60e-9;
  const double cavity_edge = 400e-9, cavity_sigma = 160e-9;
  const double truncation = 2.5;
  const double cav_edge_area = edge_area(cavity_sigma, truncation);

  // Stage A: tooth at n = 2 blockades 1 -> 2 while a resonant cavity pulse
  // of exact pi area performs the two-level |0> -> |1> rotation.
  const double flat_a = pi / eps - 2.0 * cav_edge_area;
  if (flat_a <= 0.0)
    throw error(
        "configuration-error: cavity pi pulse shorter than its envelope "
        "edges");
  const double comb_flat_a = flat_a + 2.0 * cavity_edge;

  DriveSpec blockade;
  blockade.base_rate = omega;
  blockade.teeth = {{2, 0.0}};
  blockade.target = DriveTarget::qubit;
  blockade.envelope = {qubit_edge, qubit_edge, comb_flat_a, qubit_sigma,
                       truncation};
  blockade.t_start = 0.0;

  DriveSpec cav_a;
  cav_a.base_rate = eps;
  cav_a.teeth = {{0, 0.0}};
  cav_a.target = DriveTarget::cavity;
  cav_a.envelope = {cavity_edge, cavity_edge, flat_a, cavity_sigma,
                    truncation};
  cav_a.t_start = qubit_edge;
  // The off-resonant blockade tooth light-shifts the 0 -> 1 transition by
  // omega^2/(8 chi); follow it so the pi pulse stays resonant.
  cav_a.extra_detuning = omega * omega / (8.0 * params.chi);

  const double stage_a_end = 2.0 * qubit_edge + comb_flat_a;

  // Stage B: spin-J comb with the cavity double drive sized for a Bloch
  // rotation of pi/2; the cavity carrier phase selects the equatorial axis.
  const double flat_b =
      pi / 2.0 * std::sqrt(double(J.two_j)) / eps - 2.0 * cav_edge_area;
  if (flat_b <= 0.0)
    throw error(
        "configuration-error: cavity pi/2 pulse shorter than its envelope "
        "edges");
  // Return timing: the comb Rabi-drives the occupied teeth resonantly, so
  // the qubit disentangles into its ground state only when the comb pulse
  // area is a 2 pi multiple. Pad the flat top to the next multiple.
  const double qubit_edge_area = edge_area(qubit_sigma, truncation);
  const double area_min =
      omega * (flat_b + 2.0 * cavity_edge + 2.0 * qubit_edge_area);
  const double turns = std::ceil(area_min / (2.0 * pi) - 1e-9);
  const double comb_flat_extra = (2.0 * pi * turns - area_min) / omega;
  Schedule spin = schedule_spin_experiment(J, params, eps, omega, flat_b, -1.0,
                                           comb_flat_extra);
  for (DriveSpec& d : spin.drives) {
    d.t_start += stage_a_end;
    if (d.target == DriveTarget::cavity) d.carrier_phase = axis_phi;
  }

  Schedule sched;
  sched.comb = spin.comb;
  sched.snap_phases = spin.snap_phases;
  sched.comb_flat_end = spin.comb_flat_end + stage_a_end;
  sched.cavity_start = spin.cavity_start + stage_a_end;
  sched.total_time = spin.total_time + stage_a_end;
  sched.drives.push_back(blockade);
  sched.drives.push_back(cav_a);
  for (const DriveSpec& d : spin.drives) sched.drives.push_back(d);
  return sched;
}

double state_fidelity(const DensityMatrix& rho, const StateVector& target) {
  if (rho.rows() != rho.cols() || rho.rows() != target.size())
    throw error("invalid-dimension: state and target sizes differ");
  const double norm = target.norm();
  if (!(norm > 0.0)) throw error("configuration-error: zero-norm target");
  const StateVector psi = target / norm;
  const double fid = (psi.adjoint() * rho * psi)(0, 0).real();
  return std::min(1.0, std::max(0.0, fid));
}

bool photon_loss_syndrome(const SpinCatCode& code, int n_losses) {
  if (n_losses < 0) throw error("configuration-error: negative loss count");
  if (n_losses == 0) return false;
  const int dim = code.J.dim();
  const Operator a = annihilation(dim);
  bool all_outside = true;
  for (const StateVector* cw : {&code.codeword_zero, &code.codeword_one}) {
    StateVector v = *cw;
    for (int i = 0; i < n_losses; ++i) v = a * v;
    const double norm = v.norm();
    if (norm < 1e-12) return false;  // codeword annihilated, no syndrome state
    v /= norm;
    const double overlap = std::norm(code.codeword_zero.dot(v)) +
                           std::norm(code.codeword_one.dot(v));
    all_outside = all_outside && overlap < 1e-12;
  }
  return all_outside;
}

}  // namespace hams
