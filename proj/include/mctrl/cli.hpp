#pragma once

#include <string>
#include <vector>

#include "mctrl/diagnostics.hpp"
#include "mctrl/ssn.hpp"

namespace mctrl {

// Resolved run options. Precedence: command-line flag > config file > preset
// default. ny < 0 means "same as nx".
struct RunConfig {
  std::string preset = "two_box_dirichlet";
  int nx = 64;
  int ny = -1;
  double alpha_start = 1.0;
  double alpha_factor = 0.1;
  double alpha_min = 1e-8;
  double beta = 0.0;
  double newton_tol = 1e-9;
  double linear_tol = 1e-10;
  std::string output_dir = ".";
  bool emit_matrices = false;
  std::string log_file;
  std::string config_file;

  int ny_effective() const { return ny < 0 ? nx : ny; }
};

// Known presets:
//   two_box_dirichlet   Laplacian, Dirichlet, two-box target, control on
//                       the closed sup-norm ball of radius 3/4
//   bump_dirichlet_disk Laplacian, Dirichlet, smooth bump target, control on
//                       the closed Euclidean ball of radius 3/4
//   neumann_boundary    -Laplace + 1e-2 id, natural conditions, two-box
//                       target, control on the boundary
//   oracle_1d           1D point-source family and bounded-mass demo
//   slater_check        source-condition certificates for three regions
const std::vector<std::string>& preset_names();

// Parses argv-style arguments (without the program name), merges the config
// file when --config is given, validates. Throws std::invalid_argument with
// a user-facing message on bad flags, unknown keys, or invalid values.
RunConfig load_config(const std::vector<std::string>& args);

// Mesh plus discrete problem for one of the 2D presets.
struct PresetSetup {
  Mesh mesh;
  DiscreteProblem problem;
  OperatorSpec op;
  TargetSpec target;
};
PresetSetup make_preset_setup(const RunConfig& cfg);

// Everything a finished 2D run exports.
struct RunArtifacts {
  SolverState state;
  SolveReport report;
  OptimalityReport optimality;
  SlaterReport slater;
  SparsityStats sparsity;
  std::vector<PathPoint> path;
};

// Writes control.csv, state.csv, support.csv, path.csv and report.json (plus
// A_h.mtx / M_h.mtx / B_h.mtx when emit_matrices). Throws std::runtime_error
// on IO failure.
void export_results(const RunConfig& cfg, const PresetSetup& setup,
                    const RunArtifacts& artifacts);

// Full pipeline for `cfg`. Returns the process exit code:
//   0 success, 1 configuration or IO error, 2 solver non-convergence.
int run(const RunConfig& cfg);

// Entry point used by the binary: parse + run, errors mapped to exit codes.
int cli_main(int argc, const char* const* argv);

}  // namespace mctrl
