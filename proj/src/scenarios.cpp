#include "hams/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hams/logical.hpp"
#include "hams/mem.hpp"
#include "hams/synthesis.hpp"
#include "hams/tomography.hpp"

namespace hams {
namespace {

using json = nlohmann::json;
using cd = std::complex<double>;
static const cd I(0.0, 1.0);
constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;
constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // normalize the sign of zero
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    out[size_t(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  return out;
}

// Dispatches n independent jobs to a worker pool. Results are written by the
// caller into pre-sized slots, so output order never depends on scheduling.
template <typename F>
void parallel_for(int n, int threads, F&& body) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct CsvBuilder {
  std::string text;
  size_t columns = 0;

  explicit CsvBuilder(const std::vector<std::string>& headers) {
    columns = headers.size();
    for (size_t i = 0; i < headers.size(); ++i) {
      if (i) text += ',';
      text += headers[i];
    }
    text += '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += cells[i];
    }
    text += '\n';
  }
};

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

struct DevicePreset {
  double chi, chi_prime, kerr, alpha;
  double t1q, t2q, t1c, t2c;
  double eps, omega;
};

// Published device columns: the first was used for the comparison figures,
// the second for the spin-cat preparation and gate data.
const DevicePreset col1{-two_pi * 2.54e6, two_pi * 6.5e3, -two_pi * 9e3,
                        -two_pi * 180e6,  90e-6,          40e-6,
                        132e-6,           150e-6,         two_pi * 72e3,
                        two_pi * 690e3};
const DevicePreset col2{-two_pi * 3.56e6, two_pi * 7e3, -two_pi * 11e3,
                        -two_pi * 180e6,  90e-6,        40e-6,
                        396e-6,           160e-6,       two_pi * 80e3,
                        two_pi * 732e3};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw error("configuration-error: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) fail(path.empty() ? it.key() : path + "." + it.key(),
                     "unknown field");
  }
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path, const std::string& key,
                  double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(path + "." + key, "expected a number");
  return v->get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key,
            int fallback, int lo, int hi) {
  const json* v = find(j, key);
  int out = fallback;
  if (v) {
    if (!v->is_number_integer()) fail(path + "." + key, "expected an integer");
    out = v->get<int>();
  }
  if (out < lo || out > hi)
    fail(path + "." + key, "must be in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
  return out;
}

std::string get_string(const json& j, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path + "." + key, "expected a string");
  return v->get<std::string>();
}

bool is_dynamics_scenario(const std::string& s) {
  return s == "spin-dynamics" || s == "blockade-compare" || s == "chevron" ||
         s == "phase-variation" || s == "error-budget" || s == "wigner";
}

void parse_system(const json& root, ScenarioConfig& cfg) {
  const bool custom = cfg.fidelity_mode == "custom";
  const bool lossless = cfg.fidelity_mode == "lossless";
  const DevicePreset& base = cfg.fidelity_mode == "table-s1-col2" ? col2 : col1;

  SystemParams& p = cfg.params;
  p.chi = custom ? 0.0 : base.chi;
  p.chi_prime = custom ? 0.0 : base.chi_prime;
  p.kerr = custom ? 0.0 : base.kerr;
  p.alpha_anh = custom ? 0.0 : base.alpha;
  double t1q = (custom || lossless) ? inf : base.t1q;
  double t2q = (custom || lossless) ? inf : base.t2q;
  double t1c = (custom || lossless) ? inf : base.t1c;
  double t2c = (custom || lossless) ? inf : base.t2c;

  const json* sys = find(root, "system");
  if (sys) {
    if (!sys->is_object()) fail("system", "expected an object");
    check_keys(*sys, "system",
               {"cavity_dim", "qubit_dim", "chi_hz", "chi_prime_hz", "kerr_hz",
                "alpha_hz", "t1_qubit_s", "t2_qubit_s", "t1_cavity_s",
                "t2_cavity_s"});
    p.chi = two_pi * get_number(*sys, "system", "chi_hz", p.chi / two_pi);
    p.chi_prime =
        two_pi * get_number(*sys, "system", "chi_prime_hz", p.chi_prime / two_pi);
    p.kerr = two_pi * get_number(*sys, "system", "kerr_hz", p.kerr / two_pi);
    p.alpha_anh =
        two_pi * get_number(*sys, "system", "alpha_hz", p.alpha_anh / two_pi);
    t1q = get_number(*sys, "system", "t1_qubit_s", t1q);
    t2q = get_number(*sys, "system", "t2_qubit_s", t2q);
    t1c = get_number(*sys, "system", "t1_cavity_s", t1c);
    t2c = get_number(*sys, "system", "t2_cavity_s", t2c);
  }
  if (p.chi == 0.0)
    fail("system.chi_hz", "the protocol needs a nonzero dispersive shift");
  for (auto [v, name] : {std::pair<double, const char*>{t1q, "t1_qubit_s"},
                         {t2q, "t2_qubit_s"},
                         {t1c, "t1_cavity_s"},
                         {t2c, "t2_cavity_s"}})
    if (!(v > 0.0)) fail(std::string("system.") + name, "must be positive");

  p.t1_qubit = t1q;
  p.t1_cavity = t1c;
  try {
    p.tphi_qubit = std::isfinite(t2q) ? tphi_from_t1_t2(t1q, t2q) : inf;
  } catch (const error& e) {
    fail("system.t2_qubit_s", e.what());
  }
  try {
    p.tphi_cavity = std::isfinite(t2c) ? tphi_from_t1_t2(t1c, t2c) : inf;
  } catch (const error& e) {
    fail("system.t2_cavity_s", e.what());
  }

  p.qubit_dim = sys ? get_int(*sys, "system", "qubit_dim", 2, 2, 5) : 2;
  int default_cavity =
      cfg.scenario == "error-budget" ? cfg.two_j + 4 : cfg.two_j + 3;
  p.cavity_dim = sys ? get_int(*sys, "system", "cavity_dim", default_cavity, 2, 64)
                     : default_cavity;
  if (is_dynamics_scenario(cfg.scenario) && p.cavity_dim < cfg.two_j + 2)
    fail("system.cavity_dim",
         "needs at least one guard level above the spin manifold (>= two_j + 2)");
  if (cfg.scenario == "error-budget" && p.cavity_dim < 5)
    fail("system.cavity_dim",
         "the loss budget reports Fock levels 3 and 4 (>= 5)");
}

void parse_drive(const json& root, ScenarioConfig& cfg) {
  const bool custom = cfg.fidelity_mode == "custom";
  const DevicePreset& base = cfg.fidelity_mode == "table-s1-col2" ? col2 : col1;
  cfg.eps = custom ? 0.0 : base.eps;
  cfg.omega = custom ? 0.0 : base.omega;

  const json* drv = find(root, "drive");
  if (drv) {
    if (!drv->is_object()) fail("drive", "expected an object");
    check_keys(*drv, "drive",
               {"two_j", "eps_hz", "omega_hz", "varphi_rad", "trims"});
    cfg.two_j = get_int(*drv, "drive", "two_j", cfg.two_j, 1, 50);
    cfg.eps = two_pi * get_number(*drv, "drive", "eps_hz", cfg.eps / two_pi);
    cfg.omega = two_pi * get_number(*drv, "drive", "omega_hz", cfg.omega / two_pi);
    cfg.varphi = get_number(*drv, "drive", "varphi_rad", 0.0);
    if (const json* tr = find(*drv, "trims")) {
      if (!tr->is_array()) fail("drive.trims", "expected an array of numbers");
      for (size_t i = 0; i < tr->size(); ++i) {
        const json& e = (*tr)[i];
        if (!e.is_number())
          fail("drive.trims[" + std::to_string(i) + "]", "expected a number");
        double v = e.get<double>();
        if (!(v > 0.0 && v <= 2.0))
          fail("drive.trims[" + std::to_string(i) + "]", "must be in (0, 2]");
        cfg.trims.push_back(v);
      }
      if (int(cfg.trims.size()) != cfg.two_j + 1)
        fail("drive.trims", "needs one entry per comb tooth (two_j + 1 = " +
                                std::to_string(cfg.two_j + 1) + ")");
    }
  }
  if (is_dynamics_scenario(cfg.scenario) || cfg.scenario == "spin-lock") {
    if (!(cfg.eps > 0.0))
      fail("drive.eps_hz", "must be positive for this scenario");
    if (!(cfg.omega > 0.0))
      fail("drive.omega_hz", "must be positive for this scenario");
  }
  if (cfg.scenario == "nonlinear-rotation" &&
      (cfg.two_j % 2 == 0 || cfg.two_j < 3 || cfg.two_j > 9))
    fail("drive.two_j",
         "the parity-preserving search needs an odd two_j in [3, 9]");
  if (cfg.scenario == "phase-variation" && cfg.two_j != 2)
    fail("drive.two_j", "the tooth-phase sweep runs the three-tooth spin-1 comb");
}

void parse_options(const json& root, ScenarioConfig& cfg) {
  const json* opt = find(root, "options");
  if (!opt) return;
  if (!opt->is_object()) fail("options", "expected an object");
  check_keys(*opt, "options",
             {"gamma_rad", "duration_s", "trajectory_points", "state",
              "max_digits", "budget_points", "budget_t_min_s", "budget_t_max_s"});
  ScenarioOptions& o = cfg.options;
  o.gamma = get_number(*opt, "options", "gamma_rad", o.gamma);
  if (!(o.gamma >= 0.0 && o.gamma <= pi / 2))
    fail("options.gamma_rad", "must be in [0, pi/2]");
  o.duration = get_number(*opt, "options", "duration_s", o.duration);
  if (o.duration < 0.0) fail("options.duration_s", "must be non-negative");
  o.trajectory_points =
      get_int(*opt, "options", "trajectory_points", o.trajectory_points, 2, 2001);
  o.state = get_string(*opt, "options", "state", o.state);
  o.max_digits = get_int(*opt, "options", "max_digits", o.max_digits, 4, 200);
  o.budget_points =
      get_int(*opt, "options", "budget_points", o.budget_points, 3, 201);
  o.budget_t_min = get_number(*opt, "options", "budget_t_min_s", 0.0);
  o.budget_t_max = get_number(*opt, "options", "budget_t_max_s", 0.0);
  if (o.budget_t_min < 0.0 || o.budget_t_max < 0.0)
    fail("options.budget_t_min_s", "probe window bounds must be non-negative");
  if (o.budget_t_max > 0.0 && o.budget_t_max <= o.budget_t_min)
    fail("options.budget_t_max_s", "must exceed budget_t_min_s");
}

std::vector<double> parse_grid_axis(const json& axis, const std::string& path,
                                    const char* lo_key, const char* hi_key,
                                    double lo_def, double hi_def, int pts_def,
                                    double unit) {
  if (!axis.is_object()) fail(path, "expected an object");
  check_keys(axis, path, {"points", lo_key, hi_key});
  int points = get_int(axis, path, "points", pts_def, 2, 100001);
  double lo = get_number(axis, path, lo_key, lo_def);
  double hi = get_number(axis, path, hi_key, hi_def);
  if (!(hi > lo)) fail(path + "." + hi_key, "must exceed the lower bound");
  std::vector<double> grid = linspace(lo, hi, points);
  for (double& g : grid) g *= unit;
  return grid;
}

std::vector<int> parse_two_j_list(const json& axis, const std::string& path) {
  if (!axis.is_array() || axis.empty())
    fail(path, "expected a non-empty array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < axis.size(); ++i) {
    const json& e = axis[i];
    if (!e.is_number_integer())
      fail(path + "[" + std::to_string(i) + "]", "expected an integer");
    int v = e.get<int>();
    if (v < 1 || v > 50)
      fail(path + "[" + std::to_string(i) + "]", "must be in [1, 50]");
    out.push_back(v);
  }
  return out;
}

void default_sweep(ScenarioConfig& cfg) {
  SweepSpec& s = cfg.sweep;
  const double period = two_pi * std::sqrt(double(cfg.two_j)) / cfg.eps;
  if (cfg.scenario == "spin-dynamics") {
    s.times = linspace(0.0, period, 41);
  } else if (cfg.scenario == "blockade-compare") {
    s.times = linspace(0.0, 1.5 * period, 31);
  } else if (cfg.scenario == "chevron") {
    s.detunings = linspace(-two_pi * 60e3, two_pi * 60e3, 13);
  } else if (cfg.scenario == "phase-variation") {
    s.phases = linspace(0.0, two_pi, 9);
  } else if (cfg.scenario == "spin-lock") {
    s.phases = linspace(0.0, 4.0 * pi * std::sqrt(double(cfg.two_j)), 101);
  } else if (cfg.scenario == "nonlinear-rotation") {
    s.phases = linspace(0.0, 0.0, 81);  // materialized at the search angle
  } else if (cfg.scenario == "spincat-gates") {
    s.two_j_list = {2, 3, 4, 5};
  } else if (cfg.scenario == "aperiodicity-report") {
    s.two_j_list = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  } else if (cfg.scenario == "universality-report") {
    s.two_j_list = {2, 3, 4, 5, 6};
  } else if (cfg.scenario == "error-budget") {
    s.loss_toggles = {{true, true, true, true},
                      {true, false, false, false},
                      {false, true, false, false},
                      {false, false, true, false},
                      {false, false, false, true},
                      {false, false, false, false}};
  } else if (cfg.scenario == "wigner") {
    s.re_points = 41;
    s.im_points = 41;
    s.alpha_max = 2.4;
  } else if (cfg.scenario == "spin-wigner") {
    s.theta_points = 25;
    s.phi_points = 49;
  }
}

void parse_sweep(const json& root, ScenarioConfig& cfg) {
  const json* sw = find(root, "sweep");
  if (!sw) {
    default_sweep(cfg);
    return;
  }
  if (!sw->is_object()) fail("sweep", "expected an object");
  const std::string& sc = cfg.scenario;
  auto require_axis = [&](const char* axis) -> const json& {
    check_keys(*sw, "sweep", {axis});
    const json* a = find(*sw, axis);
    if (!a)
      fail("sweep", "scenario '" + sc + "' takes the single axis '" +
                        std::string(axis) + "'");
    return *a;
  };
  SweepSpec& s = cfg.sweep;
  if (sc == "spin-dynamics" || sc == "blockade-compare") {
    const json& a = require_axis("time");
    double auto_max = two_pi * std::sqrt(double(cfg.two_j)) / cfg.eps;
    s.times = parse_grid_axis(a, "sweep.time", "min_s", "max_s", 0.0, auto_max,
                              41, 1.0);
    if (s.times.front() < 0.0) fail("sweep.time.min_s", "must be non-negative");
  } else if (sc == "chevron") {
    const json& a = require_axis("detuning");
    s.detunings = parse_grid_axis(a, "sweep.detuning", "min_hz", "max_hz",
                                  -60e3, 60e3, 13, two_pi);
  } else if (sc == "phase-variation") {
    const json& a = require_axis("phase");
    s.phases = parse_grid_axis(a, "sweep.phase", "min_rad", "max_rad", 0.0,
                               two_pi, 9, 1.0);
  } else if (sc == "spin-lock" || sc == "nonlinear-rotation") {
    const json& a = require_axis("angle");
    double auto_max = sc == "spin-lock"
                          ? 4.0 * pi * std::sqrt(double(cfg.two_j))
                          : 0.0;  // nonlinear search angle, known at run time
    s.phases = parse_grid_axis(a, "sweep.angle", "min_rad", "max_rad", 0.0,
                               auto_max, sc == "spin-lock" ? 101 : 81, 1.0);
    if (auto_max == 0.0 && !find(a, "max_rad"))
      s.phases = linspace(0.0, 0.0, get_int(a, "sweep.angle", "points",
                                            81, 2, 100001));
    if (s.phases.front() < 0.0)
      fail("sweep.angle.min_rad", "must be non-negative");
  } else if (sc == "spincat-gates" || sc == "aperiodicity-report" ||
             sc == "universality-report") {
    const json& a = require_axis("two_j");
    s.two_j_list = parse_two_j_list(a, "sweep.two_j");
    if (sc == "spincat-gates")
      for (size_t i = 0; i < s.two_j_list.size(); ++i)
        if (s.two_j_list[i] > 9)
          fail("sweep.two_j[" + std::to_string(i) + "]",
               "gate catalog rows are tabulated for two_j <= 9");
  } else if (sc == "error-budget") {
    const json& a = require_axis("loss_toggles");
    if (!a.is_array() || a.empty())
      fail("sweep.loss_toggles", "expected a non-empty array of toggle rows");
    for (size_t i = 0; i < a.size(); ++i) {
      const std::string path = "sweep.loss_toggles[" + std::to_string(i) + "]";
      const json& row = a[i];
      if (!row.is_object()) fail(path, "expected an object of channel switches");
      check_keys(row, path, {"qubit_t1", "qubit_t2", "cavity_t1", "cavity_t2"});
      std::array<bool, 4> t{};
      const char* names[4] = {"qubit_t1", "qubit_t2", "cavity_t1", "cavity_t2"};
      for (int c = 0; c < 4; ++c) {
        const json* v = find(row, names[c]);
        if (!v || !v->is_boolean()) fail(path + "." + names[c],
                                         "expected a boolean");
        t[size_t(c)] = v->get<bool>();
      }
      s.loss_toggles.push_back(t);
    }
  } else if (sc == "wigner") {
    const json& a = require_axis("plane");
    if (!a.is_object()) fail("sweep.plane", "expected an object");
    check_keys(a, "sweep.plane", {"re_points", "im_points", "max"});
    s.re_points = get_int(a, "sweep.plane", "re_points", 41, 2, 501);
    s.im_points = get_int(a, "sweep.plane", "im_points", 41, 2, 501);
    s.alpha_max = get_number(a, "sweep.plane", "max", 2.4);
    if (!(s.alpha_max > 0.0 && s.alpha_max <= 8.0))
      fail("sweep.plane.max", "must be in (0, 8]");
  } else if (sc == "spin-wigner") {
    const json& a = require_axis("sphere");
    if (!a.is_object()) fail("sweep.sphere", "expected an object");
    check_keys(a, "sweep.sphere", {"theta_points", "phi_points"});
    s.theta_points = get_int(a, "sweep.sphere", "theta_points", 25, 2, 501);
    s.phi_points = get_int(a, "sweep.sphere", "phi_points", 49, 2, 1001);
  } else {
    fail("sweep", "scenario '" + sc + "' takes no sweep block");
  }
}

void parse_output(const json& root, ScenarioConfig& cfg) {
  std::string def = cfg.scenario;
  std::replace(def.begin(), def.end(), '-', '_');
  cfg.prefix = def;
  const json* out = find(root, "output");
  if (!out) return;
  if (!out->is_object()) fail("output", "expected an object");
  check_keys(*out, "output", {"prefix"});
  cfg.prefix = get_string(*out, "output", "prefix", cfg.prefix);
  if (cfg.prefix.empty()) fail("output.prefix", "must be non-empty");
  for (char c : cfg.prefix)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
          c == '.'))
      fail("output.prefix", "may only contain [A-Za-z0-9_.-]");
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = {
      {"spin-dynamics",
       "Fock populations of a driven synthetic spin versus cavity drive length",
       "population dynamics of a driven synthetic spin hosted in the cavity"},
      {"blockade-compare",
       "phase-tuned spin dynamics against a plain blockade with untuned phases",
       "synthetic-spin periodicity contrasted with the aperiodic plain blockade"},
      {"nonlinear-rotation",
       "parity-preserving nonlinear rotation synthesized for a codespace reflection",
       "nonlinear rotation whose full turn reflects the even-parity codespace"},
      {"spincat-gates",
       "exact logical-gate catalog fidelities for polar spin-cat codes",
       "logical gate catalog of polar spin-cat codes across spins and branches"},
      {"spin-lock",
       "spin locking on the equator versus continued rotation and plain blockade",
       "spin-locking contrast between phase-tuned drives and a plain blockade"},
      {"chevron",
       "cavity-drive detuning chevron of the synthetic spin",
       "detuned cavity-drive chevron pattern for synthetic spins"},
      {"phase-variation",
       "sweep of the top comb tooth phase, reducing spin 1 to spin 1/2 at pi",
       "comb tooth-phase sweep interpolating spin-1 and spin-1/2 dynamics"},
      {"wigner",
       "displaced-parity Wigner map of a prepared cavity state",
       "bosonic Wigner map of the prepared spin-kitten cavity state"},
      {"spin-wigner",
       "spin Wigner map of a codeword or prepared state on the spin sphere",
       "spin Wigner map over the spin sphere"},
      {"aperiodicity-report",
       "eigenvalue rationalization evidence that plain blockades are aperiodic",
       "rationalization digits of blockade spectra versus spin size"},
      {"universality-report",
       "rank-2 tensor witness and Givens depth for comb generators",
       "universality witness of modified combs and Givens factorization depth"},
      {"error-budget",
       "peak Fock-3/Fock-4 populations of a driven spin 3/2 per loss channel",
       "loss-channel budget for the driven spin-3/2 population peaks"},
  };
  return catalog;
}

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& source_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw error("configuration-error: " + source_name +
                ": not valid JSON: " + e.what());
  }
  if (!root.is_object()) fail(source_name, "top level must be an object");
  check_keys(root, "",
             {"schema_version", "scenario", "seed", "fidelity_mode", "system",
              "drive", "sweep", "options", "output"});

  ScenarioConfig cfg;
  cfg.config_text = json_text;

  const json* ver = find(root, "schema_version");
  if (!ver) fail("schema_version", "required field is missing");
  if (!ver->is_number_integer() || ver->get<int>() != 1)
    fail("schema_version", "this build reads schema version 1");

  const json* sc = find(root, "scenario");
  if (!sc) fail("scenario", "required field is missing");
  if (!sc->is_string()) fail("scenario", "expected a string");
  cfg.scenario = sc->get<std::string>();
  bool known = false;
  for (const auto& info : scenario_catalog())
    if (info.name == cfg.scenario) known = true;
  if (!known)
    fail("scenario", "unknown scenario '" + cfg.scenario +
                         "' (see list-scenarios)");

  if (const json* seed = find(root, "seed")) {
    if (!seed->is_number_unsigned())
      fail("seed", "expected a non-negative integer");
    cfg.seed = seed->get<std::uint64_t>();
  }

  cfg.fidelity_mode = get_string(root, "", "fidelity_mode", "lossless");
  if (cfg.fidelity_mode != "lossless" && cfg.fidelity_mode != "table-s1-col1" &&
      cfg.fidelity_mode != "table-s1-col2" && cfg.fidelity_mode != "custom")
    fail("fidelity_mode",
         "expected lossless | table-s1-col1 | table-s1-col2 | custom");
  if (cfg.fidelity_mode == "custom") {
    if (!find(root, "system"))
      fail("system", "fidelity_mode 'custom' needs an explicit system block");
    if (is_dynamics_scenario(cfg.scenario) && !find(root, "drive"))
      fail("drive", "fidelity_mode 'custom' needs an explicit drive block");
  }

  if (cfg.scenario == "error-budget") cfg.two_j = 3;
  parse_drive(root, cfg);
  parse_system(root, cfg);
  parse_options(root, cfg);
  parse_sweep(root, cfg);
  parse_output(root, cfg);

  if (cfg.scenario == "error-budget") {
    bool any_loss = false;
    for (const auto& row : cfg.sweep.loss_toggles)
      for (bool b : row) any_loss |= b;
    if (any_loss && cfg.params.lossless())
      fail("sweep.loss_toggles",
           "a row enables a loss channel but the resolved coherence times are "
           "all infinite (fidelity_mode '" + cfg.fidelity_mode + "')");
    if (cfg.trims.empty())
      cfg.trims = {1.0, 1.03, 1.03, 0.97};  // published tooth amplitude trims
    if (int(cfg.trims.size()) != cfg.two_j + 1)
      fail("drive.trims", "needs one entry per comb tooth");
  }
  if ((cfg.scenario == "wigner" || cfg.scenario == "spin-wigner")) {
    std::string def = cfg.scenario == "wigner" ? "prepared-minus-cat"
                                               : "minus-cat";
    if (cfg.options.state.empty()) cfg.options.state = def;
    const std::string& st = cfg.options.state;
    bool prepared = st.rfind("prepared-", 0) == 0;
    if (prepared && cfg.two_j != 2)
      fail("options.state",
           "prepared states run the validated spin-1 kitten sequence (two_j = 2)");
    bool ok;
    if (cfg.scenario == "wigner")
      ok = st == "vacuum" || st == "fock-1" || st == "ideal-plus-cat" ||
           st == "ideal-minus-cat" || st == "prepared-plus-cat" ||
           st == "prepared-minus-cat";
    else
      ok = st == "pole" || st == "equator" || st == "plus-cat" ||
           st == "minus-cat" || st == "prepared-minus-cat";
    if (!ok) fail("options.state", "unknown state '" + st + "'");
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw error("configuration-error: " + path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

namespace {

// ---------------------------------------------------------------------------
// Runner helpers
// ---------------------------------------------------------------------------

DensityMatrix vacuum_state(const SystemParams& p) {
  int dim = p.qubit_dim * p.cavity_dim;
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return rho;
}

int comb_index(const Schedule& sched) {
  for (size_t i = 0; i < sched.drives.size(); ++i)
    if (sched.drives[i].target == DriveTarget::qubit) return int(i);
  throw error("configuration-error: schedule has no qubit comb drive");
}

int cavity_index(const Schedule& sched) {
  for (size_t i = 0; i < sched.drives.size(); ++i)
    if (sched.drives[i].target == DriveTarget::cavity) return int(i);
  return -1;
}

struct FinalPoint {
  std::vector<double> pops;
  double keep = 0.0;
};

// Runs a schedule from vacuum and reports the qubit-ground postselected
// cavity populations at the end of the sequence.
FinalPoint run_schedule_final(const SystemParams& params,
                              const Schedule& sched) {
  std::vector<double> grid = {0.0, sched.total_time};
  Trajectory traj =
      lindblad_evolve(params, sched.drives, vacuum_state(params), grid);
  auto [cavity, keep] =
      postselect_ground(traj.states.back(), params.cavity_dim);
  FinalPoint out;
  out.keep = keep;
  out.pops.resize(size_t(params.cavity_dim));
  for (int n = 0; n < params.cavity_dim; ++n)
    out.pops[size_t(n)] = cavity(n, n).real();
  return out;
}

std::vector<std::string> fock_headers(int dim, const std::string& prefix) {
  std::vector<std::string> h;
  for (int n = 0; n < dim; ++n)
    h.push_back(prefix + "p_fock_" + std::to_string(n));
  return h;
}

// The comb Rabi-drives the occupied teeth resonantly, so the qubit
// disentangles into its ground state only when the comb pulse area is a
// 2 pi multiple. Same padding rule as the kitten preparation sequence.
double comb_return_padding(double omega, double t_cavity_max) {
  const double qubit_sigma = 60e-9, cavity_edge = 400e-9, truncation = 2.5;
  const double edge_area = qubit_sigma * std::sqrt(pi / 2.0) *
                           std::erf(truncation / std::sqrt(2.0));
  const double area_min =
      omega * (t_cavity_max + 2.0 * cavity_edge + 2.0 * edge_area);
  const double turns = std::ceil(area_min / (2.0 * pi) - 1e-9);
  return (2.0 * pi * turns - area_min) / omega;
}

Schedule spin_schedule(const ScenarioConfig& cfg, double t_cavity,
                       double t_cavity_max) {
  Schedule sched = schedule_spin_experiment(
      SpinQuantum{cfg.two_j}, cfg.params, cfg.eps, cfg.omega, t_cavity,
      t_cavity_max, comb_return_padding(cfg.omega, t_cavity_max));
  if (!cfg.trims.empty()) sched.drives[size_t(comb_index(sched))].trims = cfg.trims;
  int cav = cavity_index(sched);
  if (cav >= 0) sched.drives[size_t(cav)].carrier_phase = cfg.varphi;
  return sched;
}

void zero_comb_phases(Schedule& sched) {
  int ci = comb_index(sched);
  for (auto& tooth : sched.drives[size_t(ci)].teeth) tooth.second = 0.0;
  for (double& p : sched.comb.phases) p = 0.0;
  sched.snap_phases = decoder_snap_phases(sched.comb);
}

// Sampled postselected populations while the cavity pulse runs: one
// integration per sweep value, sampled at times relative to the pulse start.
struct TrajectorySamples {
  std::vector<double> rel_times;
  std::vector<FinalPoint> points;
};

TrajectorySamples run_schedule_sampled(const SystemParams& params,
                                       const Schedule& sched,
                                       int trajectory_points) {
  double support = sched.comb_flat_end - sched.cavity_start;
  TrajectorySamples out;
  out.rel_times = linspace(0.0, support, trajectory_points);
  std::vector<double> grid = {0.0};
  for (double s : out.rel_times) grid.push_back(sched.cavity_start + s);
  Trajectory traj =
      lindblad_evolve(params, sched.drives, vacuum_state(params), grid);
  for (size_t i = 1; i < traj.states.size(); ++i) {
    auto [cavity, keep] = postselect_ground(traj.states[i], params.cavity_dim);
    FinalPoint pt;
    pt.keep = keep;
    pt.pops.resize(size_t(params.cavity_dim));
    for (int n = 0; n < params.cavity_dim; ++n)
      pt.pops[size_t(n)] = cavity(n, n).real();
    out.points.push_back(std::move(pt));
  }
  return out;
}

double auto_duration(const ScenarioConfig& cfg) {
  if (cfg.options.duration > 0.0) return cfg.options.duration;
  return 1.5 * two_pi * std::sqrt(double(cfg.two_j)) / cfg.eps;
}

json to_json_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

struct Artifact {
  std::string filename;
  std::string content;
};

using Details = json;

// ---------------------------------------------------------------------------
// Scenario runners
// ---------------------------------------------------------------------------

void run_spin_dynamics(const ScenarioConfig& cfg, const RunOptions& opt,
                       std::vector<Artifact>& files, Details& details) {
  const auto& times = cfg.sweep.times;
  const double t_max = times.back();
  std::vector<FinalPoint> rows(times.size());
  parallel_for(int(times.size()), opt.threads, [&](int i) {
    rows[size_t(i)] =
        run_schedule_final(cfg.params, spin_schedule(cfg, times[size_t(i)], t_max));
  });
  std::vector<std::string> headers = {"t_s"};
  for (const auto& h : fock_headers(cfg.params.cavity_dim, "")) headers.push_back(h);
  headers.push_back("keep_prob");
  CsvBuilder csv(headers);
  for (size_t i = 0; i < times.size(); ++i) {
    std::vector<std::string> cells = {fmt_num(times[i])};
    for (double p : rows[i].pops) cells.push_back(fmt_num(p));
    cells.push_back(fmt_num(rows[i].keep));
    csv.row(cells);
  }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["points"] = times.size();
  details["t_max_s"] = t_max;
}

void run_blockade_compare(const ScenarioConfig& cfg, const RunOptions& opt,
                          std::vector<Artifact>& files, Details& details) {
  const auto& times = cfg.sweep.times;
  const double t_max = times.back();
  const int n = int(times.size());
  std::vector<FinalPoint> spin_rows(times.size()), blockade_rows(times.size());
  parallel_for(2 * n, opt.threads, [&](int job) {
    int i = job % n;
    Schedule sched = spin_schedule(cfg, times[size_t(i)], t_max);
    if (job >= n) zero_comb_phases(sched);
    FinalPoint pt = run_schedule_final(cfg.params, sched);
    (job < n ? spin_rows : blockade_rows)[size_t(i)] = std::move(pt);
  });
  std::vector<std::string> headers = {"t_s"};
  for (const auto& h : fock_headers(cfg.params.cavity_dim, "")) headers.push_back(h);
  headers.push_back("keep_prob");
  for (auto [name, rows] :
       {std::pair<const char*, std::vector<FinalPoint>*>{"_spin.csv", &spin_rows},
        {"_blockade.csv", &blockade_rows}}) {
    CsvBuilder csv(headers);
    for (size_t i = 0; i < times.size(); ++i) {
      std::vector<std::string> cells = {fmt_num(times[i])};
      for (double p : (*rows)[i].pops) cells.push_back(fmt_num(p));
      cells.push_back(fmt_num((*rows)[i].keep));
      csv.row(cells);
    }
    files.push_back({cfg.prefix + name, csv.text});
  }
  details["points"] = times.size();
  details["comb_phases"] = su2_phases(SpinQuantum{cfg.two_j}).phases;
}

void run_chevron(const ScenarioConfig& cfg, const RunOptions& opt,
                 std::vector<Artifact>& files, Details& details) {
  const auto& dets = cfg.sweep.detunings;
  const double duration = auto_duration(cfg);
  std::vector<TrajectorySamples> rows(dets.size());
  parallel_for(int(dets.size()), opt.threads, [&](int i) {
    Schedule sched = spin_schedule(cfg, duration, duration);
    int cav = cavity_index(sched);
    sched.drives[size_t(cav)].extra_detuning = dets[size_t(i)];
    rows[size_t(i)] =
        run_schedule_sampled(cfg.params, sched, cfg.options.trajectory_points);
  });
  std::vector<std::string> headers = {"detuning_hz", "t_s"};
  for (const auto& h : fock_headers(cfg.params.cavity_dim, "")) headers.push_back(h);
  headers.push_back("keep_prob");
  CsvBuilder csv(headers);
  for (size_t d = 0; d < dets.size(); ++d)
    for (size_t i = 0; i < rows[d].rel_times.size(); ++i) {
      std::vector<std::string> cells = {fmt_num(dets[d] / two_pi),
                                        fmt_num(rows[d].rel_times[i])};
      for (double p : rows[d].points[i].pops) cells.push_back(fmt_num(p));
      cells.push_back(fmt_num(rows[d].points[i].keep));
      csv.row(cells);
    }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["duration_s"] = duration;
  details["trajectory_points"] = cfg.options.trajectory_points;
}

void run_phase_variation(const ScenarioConfig& cfg, const RunOptions& opt,
                         std::vector<Artifact>& files, Details& details) {
  const auto& phases = cfg.sweep.phases;
  const double duration = auto_duration(cfg);
  std::vector<TrajectorySamples> rows(phases.size());
  parallel_for(int(phases.size()), opt.threads, [&](int i) {
    Schedule sched = spin_schedule(cfg, duration, duration);
    int ci = comb_index(sched);
    sched.drives[size_t(ci)].teeth[2].second = phases[size_t(i)];
    sched.comb.phases[2] = phases[size_t(i)];
    sched.snap_phases = decoder_snap_phases(sched.comb);
    rows[size_t(i)] =
        run_schedule_sampled(cfg.params, sched, cfg.options.trajectory_points);
  });
  std::vector<std::string> headers = {"phi_2_rad", "t_s"};
  for (const auto& h : fock_headers(cfg.params.cavity_dim, "")) headers.push_back(h);
  headers.push_back("keep_prob");
  CsvBuilder csv(headers);
  for (size_t p = 0; p < phases.size(); ++p)
    for (size_t i = 0; i < rows[p].rel_times.size(); ++i) {
      std::vector<std::string> cells = {fmt_num(phases[p]),
                                        fmt_num(rows[p].rel_times[i])};
      for (double v : rows[p].points[i].pops) cells.push_back(fmt_num(v));
      cells.push_back(fmt_num(rows[p].points[i].keep));
      csv.row(cells);
    }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["duration_s"] = duration;
}

struct EigenSystem {
  Eigen::VectorXd evals;
  Operator evecs;
};

EigenSystem diagonalize(const Operator& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<Operator> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

StateVector evolve_exact(const EigenSystem& sys, const StateVector& psi,
                         double theta) {
  StateVector coeffs = sys.evecs.adjoint() * psi;
  for (int k = 0; k < coeffs.size(); ++k)
    coeffs(k) *= std::exp(-I * 0.5 * theta * sys.evals(k));
  return sys.evecs * coeffs;
}

// First revival angle of the ground population under exp(-i theta/2 M).
double first_revival_angle(const EigenSystem& sys) {
  StateVector e0 = StateVector::Zero(sys.evals.size());
  e0(0) = 1.0;
  Eigen::VectorXd weights =
      (sys.evecs.adjoint() * e0).cwiseAbs2().real();
  double lam_max = std::max(std::abs(sys.evals(0)),
                            std::abs(sys.evals(sys.evals.size() - 1)));
  auto p0 = [&](double theta) {
    cd amp = 0.0;
    for (int k = 0; k < sys.evals.size(); ++k)
      amp += weights(k) * std::exp(-I * 0.5 * theta * sys.evals(k));
    return std::norm(amp);
  };
  double period_guess = 4.0 * pi / lam_max;
  double lo = 0.35 * period_guess, hi = 3.0 * period_guess;
  double best_theta = lo, best = -1.0;
  const int coarse = 20000;
  for (int i = 0; i <= coarse; ++i) {
    double th = lo + (hi - lo) * i / coarse;
    double v = p0(th);
    if (v > best) {
      best = v;
      best_theta = th;
    }
  }
  double a = best_theta - (hi - lo) / coarse, b = best_theta + (hi - lo) / coarse;
  for (int it = 0; it < 80; ++it) {
    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (p0(m1) < p0(m2))
      a = m1;
    else
      b = m2;
  }
  return 0.5 * (a + b);
}

void run_spin_lock(const ScenarioConfig& cfg, const RunOptions&,
                   std::vector<Artifact>& files, Details& details) {
  SpinQuantum J{cfg.two_j};
  PhaseComb su2 = su2_phases(J);
  PhaseComb zeros{std::vector<double>(size_t(cfg.two_j + 1), 0.0)};
  EigenSystem spin_x = diagonalize(generator_from_phases(su2, 0.0));
  EigenSystem spin_lock = diagonalize(generator_from_phases(su2, -pi / 2));
  EigenSystem blk_x = diagonalize(generator_from_phases(zeros, 0.0));
  EigenSystem blk_lock = diagonalize(generator_from_phases(zeros, -pi / 2));

  StateVector e0 = StateVector::Zero(J.dim());
  e0(0) = 1.0;
  // Quarter turn on the spin Bloch sphere lands on the equator; the plain
  // blockade is prepared at one quarter of its ground-population revival.
  double theta_spin = 0.5 * pi * std::sqrt(double(cfg.two_j));
  double theta_blk = 0.25 * first_revival_angle(blk_x);
  StateVector prep_spin = evolve_exact(spin_x, e0, theta_spin);
  StateVector prep_blk = evolve_exact(blk_x, e0, theta_blk);

  struct Case {
    const char* tag;
    const EigenSystem* gen;
    const StateVector* prep;
  };
  const Case cases[4] = {{"spin_lock_", &spin_lock, &prep_spin},
                         {"spin_cont_", &spin_x, &prep_spin},
                         {"blockade_rot_", &blk_lock, &prep_blk},
                         {"blockade_cont_", &blk_x, &prep_blk}};

  std::vector<std::string> headers = {"angle_rad"};
  for (const Case& c : cases)
    for (const auto& h : fock_headers(J.dim(), c.tag)) headers.push_back(h);
  CsvBuilder csv(headers);
  for (double theta : cfg.sweep.phases) {
    std::vector<std::string> cells = {fmt_num(theta)};
    for (const Case& c : cases) {
      StateVector psi = evolve_exact(*c.gen, *c.prep, theta);
      for (int n = 0; n < J.dim(); ++n) cells.push_back(fmt_num(std::norm(psi(n))));
    }
    csv.row(cells);
  }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["prep_angle_spin_rad"] = theta_spin;
  details["prep_angle_blockade_rad"] = theta_blk;
  details["blockade_revival_angle_rad"] = 4.0 * theta_blk;
}

void run_nonlinear_rotation(const ScenarioConfig& cfg, const RunOptions&,
                            std::vector<Artifact>& files, Details& details) {
  SpinQuantum J{cfg.two_j};
  ParityRotation rot =
      parity_preserving_search(J, cfg.options.gamma, unsigned(cfg.seed));
  Operator m0 = nonlinear_generator(rot.coeffs, J, 0.0);
  EigenSystem sys = diagonalize(m0);

  std::vector<double> grid = cfg.sweep.phases;
  if (grid.back() <= grid.front())
    grid = linspace(0.0, 2.0 * rot.theta, int(grid.size()));

  StateVector e0 = StateVector::Zero(J.dim());
  e0(0) = 1.0;
  std::vector<std::string> headers = {"angle_rad"};
  for (const auto& h : fock_headers(J.dim(), "")) headers.push_back(h);
  headers.push_back("parity");
  CsvBuilder csv(headers);
  for (double theta : grid) {
    StateVector psi = evolve_exact(sys, e0, theta);
    std::vector<std::string> cells = {fmt_num(theta)};
    double parity = 0.0;
    for (int n = 0; n < J.dim(); ++n) {
      double p = std::norm(psi(n));
      parity += (n % 2 == 0 ? p : -p);
      cells.push_back(fmt_num(p));
    }
    cells.push_back(fmt_num(parity));
    csv.row(cells);
  }
  files.push_back({cfg.prefix + ".csv", csv.text});

  Operator u_star = rotation_unitary(m0, rot.theta);
  Operator parity = parity_op(J.dim());
  double commutator = (u_star * parity - parity * u_star).cwiseAbs().maxCoeff();
  json block = json::array();
  for (int r : {0, 2})
    for (int c : {0, 2})
      block.push_back({{"row", r},
                       {"col", c},
                       {"re", u_star(r, c).real()},
                       {"im", u_star(r, c).imag()}});
  EigenReport report = eigenvalue_integer_check(m0, 1e-6);

  // Comb realization: shrink the sub-diagonal uniformly until every element
  // fits under sqrt(n), then read off the tooth phases.
  std::vector<double> elements;
  double scale = 1.0;
  for (int n = 1; n < J.dim(); ++n) {
    double e = m0(n - 1, n).real();
    elements.push_back(e);
    if (std::abs(e) > 1e-12)
      scale = std::min(scale, std::sqrt(double(n)) / std::abs(e));
  }
  std::vector<double> scaled = elements;
  for (double& e : scaled) e *= scale;
  PhaseComb comb = phases_from_matrix_elements(scaled);

  json rep;
  rep["two_j"] = cfg.two_j;
  rep["gamma_rad"] = cfg.options.gamma;
  rep["theta_star_rad"] = rot.theta;
  rep["coefficients"] = rot.coeffs.c;
  rep["eigenvalues"] = report.eigenvalues;
  rep["integer_ratio_spectrum"] = report.is_integer_ratio;
  rep["parity_commutator_max_abs"] = commutator;
  rep["codespace_block_at_theta_star"] = block;
  rep["comb_phases"] = comb.phases;
  rep["drive_rescale"] = scale;
  files.push_back({cfg.prefix + "_generator.json", rep.dump(2) + "\n"});
  details = rep;
}

std::array<cd, 4> logical_block(const SpinCatCode& code, const Operator& u) {
  return {code.codeword_zero.dot(u * code.codeword_zero),
          code.codeword_zero.dot(u * code.codeword_one),
          code.codeword_one.dot(u * code.codeword_zero),
          code.codeword_one.dot(u * code.codeword_one)};
}

double block_distance(const std::array<cd, 4>& got,
                      const std::array<cd, 4>& want) {
  // strip the global phase using the largest target entry
  int ref = 0;
  for (int i = 1; i < 4; ++i)
    if (std::abs(want[size_t(i)]) > std::abs(want[size_t(ref)])) ref = i;
  cd phase = got[size_t(ref)] / want[size_t(ref)];
  phase /= std::abs(phase);
  double dist = 0.0;
  for (int i = 0; i < 4; ++i)
    dist = std::max(dist, std::abs(got[size_t(i)] - phase * want[size_t(i)]));
  return dist;
}

void run_spincat_gates(const ScenarioConfig& cfg, const RunOptions&,
                       std::vector<Artifact>& files, Details& details) {
  struct Entry {
    LogicalGate gate;
    const char* name;
    double parameter;
  };
  const double rx_theta = 0.7;
  const double type_ii_phi = 2.0 * pi / 5.0;
  const Entry entries[6] = {{LogicalGate::x, "X", 0.0},
                            {LogicalGate::y, "Y", 0.0},
                            {LogicalGate::z, "Z", 0.0},
                            {LogicalGate::sdag_h_s, "SdagHS", 0.0},
                            {LogicalGate::rx, "Rx", rx_theta},
                            {LogicalGate::type_ii, "TypeII", type_ii_phi}};
  auto ideal = [&](const Entry& e) -> std::array<cd, 4> {
    switch (e.gate) {
      case LogicalGate::x:
        return {0.0, 1.0, 1.0, 0.0};
      case LogicalGate::y:
        return {0.0, -I, I, 0.0};
      case LogicalGate::z:
        return {1.0, 0.0, 0.0, -1.0};
      case LogicalGate::sdag_h_s: {
        double c = std::cos(3.0 * pi / 4.0), s = std::sin(3.0 * pi / 4.0);
        return {c, -I * s, I * s, -c};
      }
      case LogicalGate::rx: {
        cd co = std::cos(e.parameter / 2), si = -I * std::sin(e.parameter / 2);
        return {co, si, si, co};
      }
      case LogicalGate::type_ii: {
        double c = std::cos(e.parameter), s = std::sin(e.parameter);
        return {c, -I * s, I * s, -c};
      }
    }
    return {1.0, 0.0, 0.0, 1.0};
  };

  CsvBuilder csv({"two_j", "gate", "k", "parameter", "block_error"});
  double worst = 0.0;
  for (int two_j : cfg.sweep.two_j_list) {
    SpinQuantum J{two_j};
    SpinCatCode code = spin_cat_code(J);
    for (const Entry& e : entries)
      for (int k = 0; k < two_j; ++k) {
        GateRecipe rec = gate_recipe(e.gate, J, k, e.parameter);
        Operator u = recipe_unitary(rec);
        double dist = block_distance(logical_block(code, u), ideal(e));
        worst = std::max(worst, dist);
        csv.row({std::to_string(two_j), e.name, std::to_string(k),
                 fmt_num(e.parameter), fmt_num(dist)});
      }
  }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["worst_block_error"] = worst;
  details["rx_parameter_rad"] = rx_theta;
  details["type_ii_parameter_rad"] = type_ii_phi;
}

// Prepared spin-1 kitten: full sequence, qubit-ground postselection, decoder
// phases applied to the cavity state.
struct PreparedState {
  DensityMatrix cavity;
  double keep = 0.0;
  double fidelity = 0.0;
};

PreparedState prepare_kitten(const ScenarioConfig& cfg, double axis_phi) {
  Schedule sched =
      prep_sequence(SpinQuantum{2}, cfg.params, cfg.eps, cfg.omega, axis_phi);
  std::vector<double> grid = {0.0, sched.total_time};
  Trajectory traj =
      lindblad_evolve(cfg.params, sched.drives, vacuum_state(cfg.params), grid);
  auto [cavity, keep] =
      postselect_ground(traj.states.back(), cfg.params.cavity_dim);
  Operator snap = Operator::Zero(cfg.params.cavity_dim, cfg.params.cavity_dim);
  for (int n = 0; n < cfg.params.cavity_dim; ++n) {
    double phi = n < int(sched.snap_phases.size()) ? sched.snap_phases[size_t(n)]
                                                   : 0.0;
    snap(n, n) = std::exp(-I * phi);
  }
  PreparedState out;
  out.cavity = snap * cavity * snap.adjoint();
  out.keep = keep;
  StateVector target = StateVector::Zero(cfg.params.cavity_dim);
  double sign = std::cos(axis_phi) >= std::abs(std::sin(axis_phi)) ? 1.0 : -1.0;
  target(0) = 1.0 / std::sqrt(2.0);
  target(2) = sign / std::sqrt(2.0);
  out.fidelity = state_fidelity(out.cavity, target);
  return out;
}

DensityMatrix pad_density(const DensityMatrix& rho, int dim) {
  if (rho.rows() >= dim) return rho;
  DensityMatrix out = DensityMatrix::Zero(dim, dim);
  out.topLeftCorner(rho.rows(), rho.cols()) = rho;
  return out;
}

void run_wigner(const ScenarioConfig& cfg, const RunOptions&,
                std::vector<Artifact>& files, Details& details) {
  const SweepSpec& s = cfg.sweep;
  // grid corners reach |alpha|^2 = 2 max^2; keep the 6-photon margin there
  int need = int(std::ceil(2.0 * s.alpha_max * s.alpha_max)) + 7;
  DensityMatrix rho;
  const std::string& st = cfg.options.state;
  if (st == "vacuum" || st == "fock-1") {
    rho = DensityMatrix::Zero(need, need);
    rho(st == "vacuum" ? 0 : 1, st == "vacuum" ? 0 : 1) = 1.0;
  } else if (st == "ideal-plus-cat" || st == "ideal-minus-cat") {
    StateVector v = StateVector::Zero(need);
    v(0) = 1.0 / std::sqrt(2.0);
    v(2) = (st == "ideal-plus-cat" ? 1.0 : -1.0) / std::sqrt(2.0);
    rho = v * v.adjoint();
  } else {
    double axis = st == "prepared-plus-cat" ? 0.0 : pi / 2;
    PreparedState prep = prepare_kitten(cfg, axis);
    rho = pad_density(prep.cavity, need);
    details["keep_prob"] = prep.keep;
    details["fidelity_to_ideal_cat"] = prep.fidelity;
  }

  std::vector<double> re = linspace(-s.alpha_max, s.alpha_max, s.re_points);
  std::vector<double> im = linspace(-s.alpha_max, s.alpha_max, s.im_points);
  std::vector<cd> alphas;
  for (double r : re)
    for (double i : im) alphas.emplace_back(r, i);
  WignerGrid grid = bosonic_wigner(rho, alphas);

  CsvBuilder csv({"alpha_re", "alpha_im", "w"});
  for (size_t i = 0; i < alphas.size(); ++i)
    csv.row({fmt_num(alphas[i].real()), fmt_num(alphas[i].imag()),
             fmt_num(grid.values(Eigen::Index(i)))});
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["state"] = st;
  details["truncation_warning"] = grid.truncation_warning;
}

void run_spin_wigner(const ScenarioConfig& cfg, const RunOptions&,
                     std::vector<Artifact>& files, Details& details) {
  SpinQuantum J{cfg.two_j};
  const std::string& st = cfg.options.state;
  DensityMatrix rho;
  if (st == "prepared-minus-cat") {
    PreparedState prep = prepare_kitten(cfg, pi / 2);
    DensityMatrix block = prep.cavity.topLeftCorner(J.dim(), J.dim());
    double weight = block.trace().real();
    rho = block / weight;
    details["keep_prob"] = prep.keep;
    details["manifold_weight"] = weight;
    details["fidelity_to_ideal_cat"] = prep.fidelity;
  } else {
    StateVector v = StateVector::Zero(J.dim());
    if (st == "pole") {
      v(0) = 1.0;
    } else if (st == "equator") {
      StateVector pole = StateVector::Zero(J.dim());
      pole(0) = 1.0;
      v = spin_rotation(J, pi / 2, 0.0) * pole;
    } else {
      SpinCatCode code = spin_cat_code(J);
      v = st == "plus-cat" ? code.codeword_zero : code.codeword_one;
    }
    rho = v * v.adjoint();
  }

  std::vector<double> thetas = linspace(0.0, pi, cfg.sweep.theta_points);
  std::vector<double> phis = linspace(0.0, two_pi, cfg.sweep.phi_points);
  std::vector<SpherePoint> points;
  for (double th : thetas)
    for (double ph : phis) points.push_back({th, ph});
  WignerGrid grid = spin_wigner(rho, J, points);

  CsvBuilder csv({"theta_rad", "phi_rad", "w"});
  for (size_t i = 0; i < points.size(); ++i)
    csv.row({fmt_num(points[i].theta), fmt_num(points[i].phi),
             fmt_num(grid.values(Eigen::Index(i)))});
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["state"] = st;
}

void run_aperiodicity_report(const ScenarioConfig& cfg, const RunOptions&,
                             std::vector<Artifact>& files, Details& details) {
  json rows = json::array();
  int min_digits_above_spin1 = std::numeric_limits<int>::max();
  for (int two_j : cfg.sweep.two_j_list) {
    EigenReport rep =
        blockade_aperiodicity(SpinQuantum{two_j}, cfg.options.max_digits);
    json row;
    row["two_j"] = two_j;
    row["levels"] = two_j + 1;
    row["eigenvalues"] = rep.eigenvalues;
    row["ratios"] = rep.ratios;
    row["integer_ratio"] = rep.is_integer_ratio;
    row["rationalization_digits"] = rep.rationalization_digits;
    rows.push_back(row);
    if (two_j > 2 && rep.rationalization_digits < min_digits_above_spin1)
      min_digits_above_spin1 = rep.rationalization_digits;
  }
  json rep;
  rep["rows"] = rows;
  rep["rationalization_budget_digits"] = cfg.options.max_digits;
  if (min_digits_above_spin1 != std::numeric_limits<int>::max())
    rep["min_digits_above_spin_1"] = min_digits_above_spin1;
  files.push_back({cfg.prefix + ".json", rep.dump(2) + "\n"});
  details = rep;
}

void run_universality_report(const ScenarioConfig& cfg, const RunOptions&,
                             std::vector<Artifact>& files, Details& details) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, two_pi);
  json rows = json::array();
  for (int two_j : cfg.sweep.two_j_list) {
    SpinQuantum J{two_j};
    PhaseComb su2 = su2_phases(J);
    UniversalityWitness w_su2 =
        check_universality(generator_from_phases(su2, 0.0), J);

    PhaseComb perturbed = su2;
    perturbed.phases.back() += 0.4;
    UniversalityWitness w_pert =
        check_universality(generator_from_phases(perturbed, 0.0), J);

    PhaseComb random_comb = su2;
    for (size_t n = 2; n < random_comb.phases.size(); ++n)
      random_comb.phases[n] = uni(rng);
    UniversalityWitness w_rand =
        check_universality(generator_from_phases(random_comb, 0.0), J);

    GivensFactorization fact =
        givens_factorization(spin_rotation(J, 0.7, 0.3));
    Operator rebuilt = givens_reconstruct(fact, J.dim());
    double err =
        (rebuilt - spin_rotation(J, 0.7, 0.3)).cwiseAbs().maxCoeff();

    json row;
    row["two_j"] = two_j;
    row["su2_comb"] = {{"universal", w_su2.universal},
                       {"witness_q", w_su2.witness_q}};
    row["perturbed_comb"] = {{"universal", w_pert.universal},
                             {"witness_q", w_pert.witness_q}};
    row["random_comb"] = {{"universal", w_rand.universal},
                          {"witness_q", w_rand.witness_q},
                          {"phases", random_comb.phases}};
    row["givens"] = {{"steps", fact.steps.size()},
                     {"step_bound", J.dim() * (J.dim() - 1) / 2},
                     {"reconstruction_error", err}};
    rows.push_back(row);
  }
  json rep;
  rep["rows"] = rows;
  files.push_back({cfg.prefix + ".json", rep.dump(2) + "\n"});
  details = rep;
}

void run_error_budget(const ScenarioConfig& cfg, const RunOptions& opt,
                      std::vector<Artifact>& files, Details& details) {
  const auto& rows = cfg.sweep.loss_toggles;
  const double t_half = pi * std::sqrt(double(cfg.two_j)) / cfg.eps;
  double t_lo = cfg.options.budget_t_min > 0.0 ? cfg.options.budget_t_min
                                               : 0.72 * t_half;
  double t_hi = cfg.options.budget_t_max > 0.0 ? cfg.options.budget_t_max
                                               : 1.25 * t_half;
  std::vector<double> probes = linspace(t_lo, t_hi, cfg.options.budget_points);

  const int np = int(probes.size());
  const int n_jobs = int(rows.size()) * np;
  std::vector<FinalPoint> results(static_cast<size_t>(n_jobs));
  parallel_for(n_jobs, opt.threads, [&](int job) {
    const auto& toggles = rows[size_t(job / np)];
    SystemParams p = cfg.params;
    if (!toggles[0]) p.t1_qubit = inf;
    if (!toggles[1]) p.tphi_qubit = inf;
    if (!toggles[2]) p.t1_cavity = inf;
    if (!toggles[3]) p.tphi_cavity = inf;
    ScenarioConfig row_cfg = cfg;
    row_cfg.params = p;
    results[size_t(job)] =
        run_schedule_final(p, spin_schedule(row_cfg, probes[size_t(job % np)],
                                            probes.back()));
  });

  CsvBuilder csv({"row", "qubit_t1", "qubit_t2", "cavity_t1", "cavity_t2",
                  "max_p_fock_3", "max_p_fock_4", "t_at_max_s"});
  json detail_rows = json::array();
  for (size_t r = 0; r < rows.size(); ++r) {
    double max_p3 = 0.0, max_p4 = 0.0, t_at = probes.front();
    for (int i = 0; i < np; ++i) {
      const FinalPoint& pt = results[r * size_t(np) + size_t(i)];
      if (pt.pops[3] > max_p3) {
        max_p3 = pt.pops[3];
        t_at = probes[size_t(i)];
      }
      max_p4 = std::max(max_p4, pt.pops[4]);
    }
    csv.row({std::to_string(r), std::to_string(int(rows[r][0])),
             std::to_string(int(rows[r][1])), std::to_string(int(rows[r][2])),
             std::to_string(int(rows[r][3])), fmt_num(max_p3), fmt_num(max_p4),
             fmt_num(t_at)});
    detail_rows.push_back({{"qubit_t1", rows[r][0]},
                           {"qubit_t2", rows[r][1]},
                           {"cavity_t1", rows[r][2]},
                           {"cavity_t2", rows[r][3]},
                           {"max_p_fock_3", max_p3},
                           {"max_p_fock_4", max_p4},
                           {"t_at_max_s", t_at}});
  }
  files.push_back({cfg.prefix + ".csv", csv.text});
  details["rows"] = detail_rows;
  details["probe_window_s"] = {t_lo, t_hi};
  details["probe_points"] = np;
  details["trims"] = cfg.trims;
}

// ---------------------------------------------------------------------------
// Dispatch, manifest, CLI
// ---------------------------------------------------------------------------

using Runner = void (*)(const ScenarioConfig&, const RunOptions&,
                        std::vector<Artifact>&, Details&);

Runner find_runner(const std::string& name) {
  if (name == "spin-dynamics") return run_spin_dynamics;
  if (name == "blockade-compare") return run_blockade_compare;
  if (name == "nonlinear-rotation") return run_nonlinear_rotation;
  if (name == "spincat-gates") return run_spincat_gates;
  if (name == "spin-lock") return run_spin_lock;
  if (name == "chevron") return run_chevron;
  if (name == "phase-variation") return run_phase_variation;
  if (name == "wigner") return run_wigner;
  if (name == "spin-wigner") return run_spin_wigner;
  if (name == "aperiodicity-report") return run_aperiodicity_report;
  if (name == "universality-report") return run_universality_report;
  if (name == "error-budget") return run_error_budget;
  throw error("configuration-error: scenario: unknown scenario '" + name + "'");
}

json resolved_block(const ScenarioConfig& cfg) {
  json r;
  r["two_j"] = cfg.two_j;
  r["cavity_dim"] = cfg.params.cavity_dim;
  r["qubit_dim"] = cfg.params.qubit_dim;
  r["fidelity_mode"] = cfg.fidelity_mode;
  r["chi_rad_per_s"] = cfg.params.chi;
  r["chi_prime_rad_per_s"] = cfg.params.chi_prime;
  r["kerr_rad_per_s"] = cfg.params.kerr;
  r["alpha_rad_per_s"] = cfg.params.alpha_anh;
  r["t1_qubit_s"] = to_json_or_null(cfg.params.t1_qubit);
  r["tphi_qubit_s"] = to_json_or_null(cfg.params.tphi_qubit);
  r["t1_cavity_s"] = to_json_or_null(cfg.params.t1_cavity);
  r["tphi_cavity_s"] = to_json_or_null(cfg.params.tphi_cavity);
  r["eps_rad_per_s"] = cfg.eps;
  r["omega_rad_per_s"] = cfg.omega;
  r["varphi_rad"] = cfg.varphi;
  if (!cfg.trims.empty()) r["trims"] = cfg.trims;
  return r;
}

}  // namespace

std::vector<std::string> run_scenario(const ScenarioConfig& config,
                                      const RunOptions& options) {
  auto start = std::chrono::steady_clock::now();
  Runner runner = find_runner(config.scenario);

  std::vector<Artifact> artifacts;
  Details details = json::object();
  runner(config, options, artifacts, details);

  const ScenarioInfo* info = nullptr;
  for (const auto& entry : scenario_catalog())
    if (entry.name == config.scenario) info = &entry;

  double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  json manifest;
  manifest["schema_version"] = 1;
  manifest["scenario"] = config.scenario;
  manifest["code_version"] = std::string("hams ") + library_version;
  manifest["reproduces"] = info ? info->reproduces : "";
  manifest["seed"] = config.seed;
  manifest["runtime_seconds"] = std::round(runtime * 1000.0) / 1000.0;
  json names = json::array();
  for (const auto& a : artifacts) names.push_back(a.filename);
  manifest["generated_files"] = names;
  manifest["config"] = json::parse(config.config_text);
  manifest["resolved"] = resolved_block(config);
  manifest["details"] = details;
  artifacts.push_back(
      {config.prefix + "_manifest.json", manifest.dump(2) + "\n"});

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  std::vector<std::string> written;
  for (const auto& a : artifacts) {
    fs::path path = fs::path(options.out_dir) / a.filename;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw error("configuration-error: cannot write " + path.string());
    out << a.content;
    out.close();
    if (!out)
      throw error("configuration-error: write failed for " + path.string());
    written.push_back(path.string());
  }
  return written;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"synthetic high-angular-momentum spin scenario runner"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  std::uint64_t seed = 0;
  bool have_seed = false;

  CLI::App* run = app.add_subcommand(
      "run", "run a scenario config and write its data files and manifest");
  run->add_option("config", config_path, "path to a scenario config (JSON)")
      ->required();
  run->add_option("--out-dir", options.out_dir, "directory for output files");
  run->add_option("--threads", options.threads,
                  "worker threads (0 = hardware concurrency)");
  run->add_option("--seed", seed, "override the config's seed")
      ->each([&](const std::string&) { have_seed = true; });

  std::string validate_path;
  CLI::App* validate = app.add_subcommand(
      "validate", "parse and validate a scenario config, writing nothing");
  validate->add_option("config", validate_path, "path to a scenario config")
      ->required();

  CLI::App* list =
      app.add_subcommand("list-scenarios", "print the scenario catalog");

  std::vector<const char*> argv = {"hams"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& info : scenario_catalog())
      out << info.name << "\n    " << info.summary << "\n";
    return 0;
  }

  const std::string& path = run->parsed() ? config_path : validate_path;
  ScenarioConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 2;
  }

  if (validate->parsed()) {
    out << "config ok: scenario=" << cfg.scenario
        << " fidelity_mode=" << cfg.fidelity_mode << " two_j=" << cfg.two_j
        << " cavity_dim=" << cfg.params.cavity_dim
        << " qubit_dim=" << cfg.params.qubit_dim << " seed=" << cfg.seed
        << "\n";
    return 0;
  }

  if (have_seed) cfg.seed = seed;
  try {
    std::vector<std::string> written = run_scenario(cfg, options);
    for (const auto& f : written) out << "wrote " << f << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "scenario '" << cfg.scenario << "' failed: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace hams
