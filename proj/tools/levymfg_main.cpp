#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "levymfg/config.hpp"
#include "levymfg/errors.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/hjb.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/mfg.hpp"
#include "levymfg/numerics.hpp"
#include "levymfg/output.hpp"
#include "levymfg/regularity.hpp"
#include "levymfg/sde_mc.hpp"
#include "levymfg/verify.hpp"
#include "levymfg/version.hpp"

namespace {

using namespace levymfg;

constexpr double kTau = 2.0 * std::numbers::pi;

struct CliState {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool stable_output = false;
  bool quick = false;
};

ExperimentConfig load_config(const CliState& cli) {
  ExperimentConfig cfg;
  if (!cli.config_path.empty()) cfg = load_config_file(cli.config_path);
  if (cli.seed_set) cfg.mc_seed = cli.seed;
  if (cli.quick) cfg.verify_quick = true;
  cfg.validate();
  return cfg;
}

std::string out_dir_of(const CliState& cli, const ExperimentConfig& cfg) {
  return cli.out_dir.empty() ? cfg.output_dir : cli.out_dir;
}

OutputMeta meta_of(const ExperimentConfig& cfg, const CliState& cli) {
  OutputMeta m;
  m.config_hash = cfg.hash();
  m.version = kVersion;
  m.seed = cfg.mc_seed;
  m.stable_output = cli.stable_output;
  return m;
}

Grid grid_of(const ExperimentConfig& cfg) {
  return Grid::make(cfg.grid_d, cfg.grid_n, cfg.grid_T, cfg.grid_nt);
}

ConjugatePair pair_of(const ExperimentConfig& cfg) {
  PairParams params;
  params.kappa = cfg.ham_kappa;
  params.epsilon = cfg.ham_epsilon;
  params.q = cfg.ham_q;
  const PairKind kind = parse_pair_kind(cfg.ham_tag);
  if (kind == PairKind::Shifted) {
    return make_shifted_pair(make_pair(PairKind::SmoothedPositivePart, params),
                             params.kappa);
  }
  return make_pair(kind, params);
}

std::vector<double> cosine_profile(const Grid& grid, double amplitude) {
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = amplitude * std::cos(kTau * grid.point(i));
  return out;
}

SpaceTimeField running_field(const Grid& grid, const ExperimentConfig& cfg) {
  std::vector<double> prof = cosine_profile(grid, cfg.problem_f_amplitude);
  SpaceTimeField f = SpaceTimeField::zeros(grid.time_samples(), grid.size(), "f");
  for (int k = 0; k <= grid.time_steps; ++k) {
    std::copy(prof.begin(), prof.end(), f.slice(k).begin());
  }
  return f;
}

std::vector<double> terminal_profile(const Grid& grid, const ExperimentConfig& cfg) {
  return cosine_profile(grid, cfg.problem_g_amplitude);
}

DiscreteMeasure initial_measure(const Grid& grid, const ExperimentConfig& cfg) {
  if (cfg.problem_m0 == "uniform") return DiscreteMeasure::uniform(grid);
  if (cfg.problem_m0 == "point") return DiscreteMeasure::point(grid, cfg.problem_m0_site);
  if (cfg.problem_m0 == "bump") {
    std::vector<double> dens(grid.size());
    for (int i = 0; i < grid.size(); ++i) dens[i] = 1.0 + 0.5 * std::cos(kTau * grid.point(i));
    return DiscreteMeasure::from_density(grid, dens);
  }
  throw ValidationError("problem: unknown m0 kind '" + cfg.problem_m0 + "'");
}

DriftField drift_of(const Grid& grid, const ExperimentConfig& cfg) {
  if (cfg.problem_drift_kind == "constant") {
    return constant_drift(grid, cfg.problem_drift_value);
  }
  if (cfg.problem_drift_kind == "holder") {
    return make_holder_drift(grid, cfg.problem_drift_beta, 0.0, cfg.problem_drift_value,
                             cfg.mc_seed);
  }
  throw ValidationError("problem: unknown drift kind '" + cfg.problem_drift_kind + "'");
}

nlohmann::ordered_json threshold_json(const ThresholdReport& t) {
  nlohmann::ordered_json j;
  j["two_sigma"] = t.two_sigma;
  j["alpha"] = t.alpha;
  j["gamma"] = t.gamma;
  j["symmetric"] = t.symmetric;
  j["mfg_lhs"] = t.mfg_lhs;
  j["mfg_margin"] = t.mfg_margin;
  j["mfg_unique"] = verdict_name(t.mfg_unique);
  j["fp_beta_lower"] = t.fp_beta_lower;
  j["fp_interval_margin"] = t.fp_interval_margin;
  j["fp_interval_nonempty"] = verdict_name(t.fp_interval_nonempty);
  j["exact"] = t.exact;
  return j;
}

double elapsed_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_solve_hjb(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  DiscreteOperator op = assemble_operator(build_levy_spec(cfg), grid);
  ConjugatePair pair = pair_of(cfg);
  HjbOptions opts;
  opts.cfl_theta = cfg.solver_cfl_theta;
  opts.alpha = cfg.coupling_alpha;

  const auto start = std::chrono::steady_clock::now();
  HjbSolution sol = solve_hjb(op, pair, running_field(grid, cfg), terminal_profile(grid, cfg),
                              opts);
  const double secs = elapsed_since(start);

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  write_field_csv(dir + "/u.csv", meta, grid, sol.u);
  nlohmann::ordered_json j = meta_json(meta);
  j["pair"] = pair.name;
  j["substeps"] = sol.substeps;
  j["working_range"] = sol.working_range;
  j["sup_fprime"] = sol.sup_fprime;
  j["data_bound"] = sol.data_bound;
  j["observed_lu_max"] = sol.observed_lu_max;
  j["restarts"] = sol.restarts;
  j["sup_u"] = sup_norm(sol.u.values);
  add_timing(j, meta, "solve", secs);
  write_json(dir + "/hjb.json", j);
  std::printf("solve-hjb: substeps=%d sup|u|=%.6g -> %s\n", sol.substeps,
              sup_norm(sol.u.values), dir.c_str());
  return 0;
}

int run_solve_fp(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  DiscreteOperator op = assemble_operator(build_levy_spec(cfg), grid);
  DriftField b = drift_of(grid, cfg);
  DiscreteMeasure m0 = initial_measure(grid, cfg);

  const auto start = std::chrono::steady_clock::now();
  FpSolution sol = solve_fp(op, b, m0);
  const double secs = elapsed_since(start);

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  write_field_csv(dir + "/m.csv", meta, grid, sol.m);
  nlohmann::ordered_json j = meta_json(meta);
  j["substeps"] = sol.substeps;
  j["max_mass_defect"] = sol.max_mass_defect;
  j["min_entry"] = sol.min_entry;
  j["drift_bound"] = b.upper_bound;
  add_timing(j, meta, "solve", secs);
  write_json(dir + "/fp.json", j);
  std::printf("solve-fp: substeps=%d mass defect=%.3g min entry=%.3g -> %s\n", sol.substeps,
              sol.max_mass_defect, sol.min_entry, dir.c_str());
  return 0;
}

int run_solve_dual(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  DiscreteOperator op = assemble_operator(build_levy_spec(cfg), grid);
  DriftField b = drift_of(grid, cfg);
  std::vector<double> phi = terminal_profile(grid, cfg);

  DualOptions opts;
  opts.direction = DualDirection::BackwardFromT0;
  opts.t0_index = grid.time_steps;

  const auto start = std::chrono::steady_clock::now();
  DualSolution sol = solve_dual(op, b, phi, opts);
  const double secs = elapsed_since(start);

  std::span<const double> w0 = sol.w.slice(0);
  HolderFit fit = measure_holder_exponent(std::vector<double>(w0.begin(), w0.end()), grid);

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  write_field_csv(dir + "/w.csv", meta, grid, sol.w);
  nlohmann::ordered_json j = meta_json(meta);
  j["substeps"] = sol.substeps;
  j["drift_exponent"] = b.holder.exponent;
  j["w0_exponent"] = fit.exponent;
  j["w0_r2"] = fit.r2;
  add_timing(j, meta, "solve", secs);
  write_json(dir + "/dual.json", j);
  std::printf("solve-dual: substeps=%d w(0) exponent=%.4g -> %s\n", sol.substeps, fit.exponent,
              dir.c_str());
  return 0;
}

int run_solve_mfg(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  DiscreteOperator op = assemble_operator(build_levy_spec(cfg), grid);
  ConjugatePair pair = pair_of(cfg);
  Coupling coupling =
      make_coupling(grid, cfg.coupling_width, cfg.coupling_amplitude_f, cfg.coupling_offset_f,
                    cfg.coupling_amplitude_g, cfg.coupling_offset_g);
  DiscreteMeasure m0 = initial_measure(grid, cfg);

  MfgOptions opts;
  opts.damping = cfg.solver_damping;
  opts.tol = cfg.solver_tol;
  opts.max_iters = cfg.solver_max_iters;
  opts.averaging = cfg.solver_averaging == "fictitious" ? MfgAveraging::FictitiousPlay
                                                        : MfgAveraging::Damped;
  opts.hjb.cfl_theta = cfg.solver_cfl_theta;
  opts.hjb.alpha = cfg.coupling_alpha;

  const auto start = std::chrono::steady_clock::now();
  MfgSolution sol = solve_mfg(op, pair, coupling, m0, opts);
  const double secs = elapsed_since(start);

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  write_field_csv(dir + "/u.csv", meta, grid, sol.u);
  write_field_csv(dir + "/m.csv", meta, grid, sol.m);
  write_field_csv(dir + "/b.csv", meta, grid, sol.b);
  nlohmann::ordered_json j = meta_json(meta);
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["residual_hjb"] = sol.residual_hjb;
  j["residual_fp"] = sol.residual_fp;
  j["sup_b"] = sol.sup_b;
  j["increments"] = sol.increments;
  j["thresholds"] = threshold_json(sol.thresholds);
  add_timing(j, meta, "solve", secs);
  write_json(dir + "/mfg.json", j);
  std::printf("solve-mfg: iterations=%d converged=%s residuals=%.3g/%.3g -> %s\n",
              sol.iterations, sol.converged ? "yes" : "no", sol.residual_hjb, sol.residual_fp,
              dir.c_str());
  if (!sol.converged) {
    throw ConvergenceError("mfg: damped iteration did not reach tolerance " +
                           format_g17(cfg.solver_tol) + " in " +
                           std::to_string(cfg.solver_max_iters) + " iterations");
  }
  return 0;
}

int run_diagnose(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  LevyMeasureSpec spec = build_levy_spec(cfg);
  DiscreteOperator op = assemble_operator(spec, grid);
  ConjugatePair pair = pair_of(cfg);

  nlohmann::ordered_json j = meta_json(meta_of(cfg, cli));

  ThresholdReport td = uniqueness_thresholds(cfg.levy_two_sigma, cfg.coupling_alpha,
                                             pair.gamma, spec.fully_symmetric());
  j["thresholds"] = threshold_json(td);

  // Exact rational route, when every ingredient is rationally representable.
  try {
    Fraction fs = Fraction::parse(cfg.levy_two_sigma_raw);
    Fraction fa = Fraction::parse(cfg.coupling_alpha_raw);
    Fraction fg{1, 1};
    if (pair.kind == PairKind::Power) {
      Fraction fq = Fraction::parse(cfg.ham_q_raw);
      const long long num = fq.den;
      const long long den = fq.num - fq.den;
      if (den <= 0) throw ValidationError("diagnose: power exponent must exceed one");
      if (num < den) fg = Fraction{num, den};
    }
    j["thresholds_exact"] = threshold_json(uniqueness_thresholds(fs, fa, fg,
                                                                 spec.fully_symmetric()));
  } catch (const std::exception&) {
    j["thresholds_exact"] = nullptr;
  }

  BootstrapResult boot = bootstrap_recursion(cfg.levy_two_sigma, cfg.regularity_beta);
  nlohmann::ordered_json jb;
  jb["two_sigma"] = boot.two_sigma;
  jb["beta"] = boot.beta;
  jb["in_regime"] = boot.in_regime;
  jb["monotone"] = boot.monotone;
  jb["constants_cauchy"] = boot.constants_cauchy;
  jb["omega_limit"] = boot.omega_limit;
  jb["beta0"] = boot.beta0;
  jb["final_gap"] = boot.final_gap;
  jb["sum_bound"] = boot.sum_bound;
  jb["iterations"] = static_cast<int>(boot.omega.size()) - 1;
  j["bootstrap"] = jb;

  const double sigma = 0.5 * cfg.levy_two_sigma;
  if (sigma <= 0.5) {
    const double qc = critical_q(sigma);
    j["critical_q"] = qc;
    if (pair.kind == PairKind::Power) j["growth_admissible"] = cfg.ham_q < qc;
  } else {
    j["critical_q"] = nullptr;
  }

  const double omega_n = boot.omega.empty() ? boot.omega_limit : boot.omega.back();
  ScalingReport sc = optimal_scaling_exponents(cfg.levy_two_sigma, cfg.regularity_beta, omega_n);
  nlohmann::ordered_json js;
  js["a_star"] = sc.a_star;
  js["a_star_scan"] = sc.a_star_scan;
  js["min_exponent_at_star"] = sc.min_exponent_at_star;
  js["first_branch"] = sc.first_branch;
  js["constraint_lo"] = sc.constraint_lo;
  js["constraint_hi"] = sc.constraint_hi;
  js["constraint_nonempty"] = sc.constraint_nonempty;
  j["scaling"] = js;

  LevyMeasureSpec::LCheck lc = spec.check_concentration_bound();
  nlohmann::ordered_json jl;
  jl["constant"] = lc.constant;
  jl["worst_p"] = lc.worst_p;
  jl["worst_r"] = lc.worst_r;
  jl["finite"] = lc.finite;
  j["concentration"] = jl;

  nlohmann::ordered_json jo;
  jo["total_weight"] = op.total_weight;
  jo["levy_constant"] = op.levy_constant;
  jo["tail_mass"] = op.tail_mass;
  jo["inner_cutoff"] = op.inner_cutoff;
  jo["weights_symmetric"] = op.weights_symmetric;
  j["operator"] = jo;

  AssumptionReport ar = check_assumptions(pair, -2.0, 2.0);
  nlohmann::ordered_json ja;
  ja["pair"] = pair.name;
  ja["gamma_claimed"] = ar.gamma_claimed;
  ja["gamma_measured"] = ar.gamma_measured;
  ja["gamma_r2"] = ar.gamma_r2;
  ja["fprime_min"] = ar.fprime_min;
  ja["fprime_max"] = ar.fprime_max;
  ja["a1_ok"] = ar.a1_ok;
  ja["a1prime_on_range"] = ar.a1prime_on_range;
  ja["a1prime_global"] = ar.a1prime_global;
  ja["convex"] = ar.convex;
  j["assumptions"] = ja;

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  write_json(dir + "/diagnose.json", j);
  std::printf("diagnose: mfg=%s fp-window=%s K=%.6g -> %s\n",
              verdict_name(td.mfg_unique).c_str(),
              verdict_name(td.fp_interval_nonempty).c_str(), lc.constant, dir.c_str());
  return 0;
}

int run_simulate_sde(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  Grid grid = grid_of(cfg);
  LevyMeasureSpec spec = build_levy_spec(cfg);
  DiscreteOperator op = assemble_operator(spec, grid);
  JumpSampler sampler = JumpSampler::make(spec);
  DriftField b = drift_of(grid, cfg);
  DiscreteMeasure m0 = initial_measure(grid, cfg);

  std::vector<int> indices = {0, grid.time_steps / 2, grid.time_steps};
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

  const auto start = std::chrono::steady_clock::now();
  SdeSimulation sim =
      simulate_sde(grid, sampler, b, m0, cfg.mc_n_paths, cfg.mc_seed, indices);
  const double secs = elapsed_since(start);

  FpSolution fp = solve_fp(op, b, m0);
  std::vector<double> tv;
  for (std::size_t r = 0; r < sim.time_indices.size(); ++r) {
    DiscreteMeasure slice;
    std::span<const double> s = fp.m.slice(sim.time_indices[r]);
    slice.mass.assign(s.begin(), s.end());
    tv.push_back(total_variation_distance(sim.histograms[r], slice));
  }

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  write_measure_csv(dir + "/histogram.csv", meta, grid, sim.time_indices, sim.histograms);
  nlohmann::ordered_json j = meta_json(meta);
  j["n_paths"] = sim.n_paths;
  j["time_indices"] = sim.time_indices;
  j["tv_vs_fp"] = tv;
  add_timing(j, meta, "simulate", secs);
  write_json(dir + "/sde.json", j);
  std::printf("simulate-sde: paths=%d terminal tv=%.4g -> %s\n", sim.n_paths,
              tv.empty() ? 0.0 : tv.back(), dir.c_str());
  return 0;
}

int run_verify_all(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli);
  VerifyOptions opts;
  opts.quick = cfg.verify_quick;
  opts.seed = cfg.mc_seed;

  std::vector<CriterionResult> results = run_criteria(opts);
  int failed = 0;
  for (const CriterionResult& r : results) {
    std::printf("[%s] %2d %s: %s\n", r.passed ? "PASS" : "FAIL", r.index, r.name.c_str(),
                r.detail.c_str());
    if (!r.passed) ++failed;
  }

  const std::string dir = out_dir_of(cli, cfg);
  ensure_directory(dir);
  OutputMeta meta = meta_of(cfg, cli);
  nlohmann::ordered_json j = meta_json(meta);
  j["quick"] = opts.quick;
  nlohmann::ordered_json body = criteria_json(results, !cli.stable_output);
  for (auto& [key, value] : body.items()) j[key] = value;
  write_json(dir + "/verify.json", j);
  std::printf("verify-all: %d/%d passed -> %s\n",
              static_cast<int>(results.size()) - failed, static_cast<int>(results.size()),
              dir.c_str());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers and diagnostics for degenerate nonlocal mean field games"};
  app.require_subcommand(1);

  CliState cli;
  app.add_option("--config", cli.config_path, "configuration file (key=value or JSON)");
  app.add_option("--out", cli.out_dir, "output directory (overrides the config)");
  CLI::Option* seed_opt = app.add_option("--seed", cli.seed, "RNG seed (overrides the config)");
  app.add_flag("--stable-output", cli.stable_output,
               "omit wall-clock timings so artifacts are byte-stable");
  app.add_flag("--quick", cli.quick, "reduced verification scales");

  CLI::App* c_hjb = app.add_subcommand("solve-hjb", "solve the backward value equation");
  CLI::App* c_fp = app.add_subcommand("solve-fp", "solve the forward distribution equation");
  CLI::App* c_dual =
      app.add_subcommand("solve-dual", "run the dual flow backward from the horizon");
  CLI::App* c_mfg = app.add_subcommand("solve-mfg", "solve the coupled system");
  CLI::App* c_diag =
      app.add_subcommand("diagnose", "threshold, bootstrap, and assumption diagnostics");
  CLI::App* c_sde =
      app.add_subcommand("simulate-sde", "simulate particle paths into histograms");
  CLI::App* c_ver = app.add_subcommand("verify-all", "run the acceptance criteria");
  for (CLI::App* sub : {c_hjb, c_fp, c_dual, c_mfg, c_diag, c_sde, c_ver}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  cli.seed_set = seed_opt->count() > 0;

  try {
    if (c_hjb->parsed()) return run_solve_hjb(cli);
    if (c_fp->parsed()) return run_solve_fp(cli);
    if (c_dual->parsed()) return run_solve_dual(cli);
    if (c_mfg->parsed()) return run_solve_mfg(cli);
    if (c_diag->parsed()) return run_diagnose(cli);
    if (c_sde->parsed()) return run_simulate_sde(cli);
    if (c_ver->parsed()) return run_verify_all(cli);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
