#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levymfg/levy.hpp"

namespace levymfg {

/**
 * Experiment configuration shared by every CLI subcommand.
 *
 * Two input syntaxes are accepted:
 *  - flat key = value lines with dotted section prefixes ('#' starts a
 *    comment), e.g.  grid.n = 256
 *  - a JSON object with the same structure, nested or pre-flattened
 *
 * Every numeric value may be written as an integer, a decimal, scientific
 * notation, or a fraction string like "3/10". Fields that feed the exact
 * rational diagnostics keep their raw spelling alongside the parsed double.
 */
struct ExperimentConfig {
  // grid
  int grid_d = 1;
  int grid_n = 128;
  double grid_T = 1.0;
  int grid_nt = 128;

  // levy
  std::string levy_kind = "stable";  // stable | tempered | bounded | atomic
  double levy_two_sigma = 0.5;
  std::string levy_two_sigma_raw = "1/2";
  double levy_lambda = 1.0;  // tempered tempering rate
  double levy_radius = 0.5;  // bounded support radius
  double levy_mass = 1.0;    // bounded total mass
  std::vector<Atom> levy_atoms = {{0.5, 0.6}, {-0.5, 0.6}};

  // hamiltonian
  std::string ham_tag = "d";  // a..f or the long pair names
  double ham_kappa = 1.0;
  double ham_epsilon = 0.1;
  double ham_q = 2.0;
  std::string ham_q_raw = "2";

  // coupling
  double coupling_width = 0.125;
  double coupling_amplitude_f = 1.0;
  double coupling_offset_f = 0.0;
  double coupling_amplitude_g = 0.5;
  double coupling_offset_g = 0.0;
  double coupling_alpha = 1.0;
  std::string coupling_alpha_raw = "1";

  // regularity diagnostics
  double regularity_beta = 1.0;
  std::string regularity_beta_raw = "1";

  // problem data for the standalone solvers
  std::string problem_m0 = "uniform";  // uniform | point | bump
  int problem_m0_site = 0;
  double problem_f_amplitude = 1.0;
  double problem_g_amplitude = 0.5;
  std::string problem_drift_kind = "constant";  // constant | holder
  double problem_drift_value = 1.0;
  double problem_drift_beta = 0.9;

  // solver
  double solver_damping = 0.5;
  double solver_tol = 1e-7;
  int solver_max_iters = 200;
  double solver_cfl_theta = 0.9;
  std::string solver_averaging = "damped";  // damped | fictitious-play

  // mc
  int mc_n_paths = 10000;
  std::uint64_t mc_seed = 1;

  // output
  std::string output_dir = "out";

  // verify
  bool verify_quick = false;

  // Applies one dotted key. Unknown keys and malformed values throw
  // ValidationError naming the key.
  void apply(const std::string& key, const std::string& value);

  // Full state as sorted canonical "key = value" lines (doubles in %.17g).
  std::vector<std::string> canonical_lines() const;

  // FNV-1a 64 over the canonical lines, as 16 hex digits.
  std::string hash() const;

  // Cross-field checks that do not require building the model objects.
  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Builders for the model objects a subcommand needs. Each throws
// ValidationError with the offending constraint named.
LevyMeasureSpec build_levy_spec(const ExperimentConfig& cfg);

}  // namespace levymfg
