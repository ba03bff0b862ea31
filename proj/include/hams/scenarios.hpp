#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hams/dynamics.hpp"

namespace hams {

inline constexpr const char* library_version = "0.1.0";

// One sweep axis per scenario, except the phase-space maps which use a
// two-dimensional grid. Whichever member is non-empty is the axis.
struct SweepSpec {
  std::vector<double> times;      // s
  std::vector<double> detunings;  // rad/s
  std::vector<double> phases;     // rad (comb tooth phase or rotation angle)
  std::vector<int> two_j_list;
  // rows of {qubit t1, qubit t2, cavity t1, cavity t2} channel switches
  std::vector<std::array<bool, 4>> loss_toggles;
  int theta_points = 0;  // spin sphere grid
  int phi_points = 0;
  int re_points = 0;  // bosonic plane grid
  int im_points = 0;
  double alpha_max = 0.0;
};

// Scenario-specific knobs with working defaults; zero means auto.
struct ScenarioOptions {
  double gamma = 0.7853981633974483;  // reflection angle of the nonlinear rotation
  double duration = 0.0;              // trajectory length (s) for chevron/phase sweeps
  int trajectory_points = 41;
  std::string state = "";             // which state the phase-space maps evaluate
  int max_digits = 40;                // rationalization budget of the aperiodicity report
  double theta_max = 0.0;             // drive-area span (rad) of the spin-lock sweep
  int budget_points = 13;             // probe times per loss-budget row
  double budget_t_min = 0.0;          // probe window (s); zero means auto around
  double budget_t_max = 0.0;          // the half-period population peak
};

// Fully resolved scenario configuration. Frequencies are angular (rad/s);
// the config file carries Hz and seconds with unit-suffixed field names.
struct ScenarioConfig {
  int schema_version = 1;
  std::string scenario;
  std::uint64_t seed = 1;
  std::string fidelity_mode = "lossless";
  SystemParams params;
  int two_j = 2;
  double eps = 0.0;
  double omega = 0.0;
  double varphi = 0.0;
  std::vector<double> trims;
  SweepSpec sweep;
  ScenarioOptions options;
  std::string prefix;
  std::string config_text;  // original document, echoed into the manifest
};

struct RunOptions {
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::string reproduces;
};

// The scenarios the runner knows, in catalog order.
const std::vector<ScenarioInfo>& scenario_catalog();

// Parses and validates a config document. Throws error("configuration-error:
// <field path>: ...") on any schema violation; source_name labels messages.
ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& source_name = "config");
ScenarioConfig load_config(const std::string& path);

// Runs one scenario, writing its data files and manifest under out_dir.
// Returns the written file paths (manifest last). Integration problems
// propagate as error with the scenario name in the message.
std::vector<std::string> run_scenario(const ScenarioConfig& config,
                                      const RunOptions& options);

// Command-line entry: run <config> | validate <config> | list-scenarios,
// with --out-dir, --threads, --seed. Returns the process exit code:
// 0 success, 2 schema violation, 3 runtime/integrator failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace hams
