#include "levymfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"
#include "levymfg/regularity.hpp"

namespace levymfg {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& key, const std::string& value) {
  if (value.find('/') != std::string::npos) {
    try {
      return Fraction::parse(value).value();
    } catch (const ValidationError&) {
      throw ValidationError("config: key '" + key + "' has a malformed fraction '" +
                            value + "'");
    }
  }
  const char* c = value.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  if (end == c || *end != '\0') {
    throw ValidationError("config: key '" + key + "' has a non-numeric value '" +
                          value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  double v = parse_number(key, value);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ValidationError("config: key '" + key + "' must be an integer");
  }
  return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const char* c = value.c_str();
  char* end = nullptr;
  unsigned long long v = std::strtoull(c, &end, 10);
  if (end == c || *end != '\0') {
    throw ValidationError("config: key '" + key +
                          "' must be an unsigned integer");
  }
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config: key '" + key + "' must be true or false");
}

std::vector<Atom> parse_atoms(const std::string& key, const std::string& value) {
  std::vector<Atom> atoms;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("config: key '" + key +
                            "' entries must look like location:mass");
    }
    Atom a;
    a.location = parse_number(key, trim(item.substr(0, colon)));
    a.mass = parse_number(key, trim(item.substr(colon + 1)));
    atoms.push_back(a);
  }
  if (atoms.empty()) {
    throw ValidationError("config: key '" + key + "' lists no atoms");
  }
  return atoms;
}

std::string atoms_to_string(const std::vector<Atom>& atoms) {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ",";
    out += format_g17(atoms[i].location) + ":" + format_g17(atoms[i].mass);
  }
  return out;
}

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  ExperimentConfig& cfg) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const nlohmann::json& v = it.value();
    if (v.is_object()) {
      flatten_json(v, key, cfg);
    } else if (v.is_string()) {
      cfg.apply(key, v.get<std::string>());
    } else {
      cfg.apply(key, v.dump());
    }
  }
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "grid.d") grid_d = parse_int(key, value);
  else if (key == "grid.n") grid_n = parse_int(key, value);
  else if (key == "grid.T") grid_T = parse_number(key, value);
  else if (key == "grid.n_t") grid_nt = parse_int(key, value);
  else if (key == "levy.kind") levy_kind = value;
  else if (key == "levy.two_sigma") {
    levy_two_sigma = parse_number(key, value);
    levy_two_sigma_raw = value;
  } else if (key == "levy.lambda") levy_lambda = parse_number(key, value);
  else if (key == "levy.radius") levy_radius = parse_number(key, value);
  else if (key == "levy.mass") levy_mass = parse_number(key, value);
  else if (key == "levy.atoms") levy_atoms = parse_atoms(key, value);
  else if (key == "hamiltonian.tag") ham_tag = value;
  else if (key == "hamiltonian.kappa") ham_kappa = parse_number(key, value);
  else if (key == "hamiltonian.epsilon") ham_epsilon = parse_number(key, value);
  else if (key == "hamiltonian.q") {
    ham_q = parse_number(key, value);
    ham_q_raw = value;
  } else if (key == "coupling.width") coupling_width = parse_number(key, value);
  else if (key == "coupling.amplitude_f") coupling_amplitude_f = parse_number(key, value);
  else if (key == "coupling.offset_f") coupling_offset_f = parse_number(key, value);
  else if (key == "coupling.amplitude_g") coupling_amplitude_g = parse_number(key, value);
  else if (key == "coupling.offset_g") coupling_offset_g = parse_number(key, value);
  else if (key == "coupling.alpha") {
    coupling_alpha = parse_number(key, value);
    coupling_alpha_raw = value;
  } else if (key == "regularity.beta") {
    regularity_beta = parse_number(key, value);
    regularity_beta_raw = value;
  } else if (key == "problem.m0") problem_m0 = value;
  else if (key == "problem.m0_site") problem_m0_site = parse_int(key, value);
  else if (key == "problem.f_amplitude") problem_f_amplitude = parse_number(key, value);
  else if (key == "problem.g_amplitude") problem_g_amplitude = parse_number(key, value);
  else if (key == "problem.drift_kind") problem_drift_kind = value;
  else if (key == "problem.drift_value") problem_drift_value = parse_number(key, value);
  else if (key == "problem.drift_beta") problem_drift_beta = parse_number(key, value);
  else if (key == "solver.damping") solver_damping = parse_number(key, value);
  else if (key == "solver.tol") solver_tol = parse_number(key, value);
  else if (key == "solver.max_iters") solver_max_iters = parse_int(key, value);
  else if (key == "solver.cfl_theta") solver_cfl_theta = parse_number(key, value);
  else if (key == "solver.averaging") solver_averaging = value;
  else if (key == "mc.n_paths") mc_n_paths = parse_int(key, value);
  else if (key == "mc.seed") mc_seed = parse_u64(key, value);
  else if (key == "output.dir") output_dir = value;
  else if (key == "verify.quick") verify_quick = parse_bool(key, value);
  else throw ValidationError("config: unknown key '" + key + "'");
}

std::vector<std::string> ExperimentConfig::canonical_lines() const {
  std::vector<std::string> lines = {
      "coupling.alpha = " + format_g17(coupling_alpha),
      "coupling.amplitude_f = " + format_g17(coupling_amplitude_f),
      "coupling.amplitude_g = " + format_g17(coupling_amplitude_g),
      "coupling.offset_f = " + format_g17(coupling_offset_f),
      "coupling.offset_g = " + format_g17(coupling_offset_g),
      "coupling.width = " + format_g17(coupling_width),
      "grid.T = " + format_g17(grid_T),
      "grid.d = " + std::to_string(grid_d),
      "grid.n = " + std::to_string(grid_n),
      "grid.n_t = " + std::to_string(grid_nt),
      "hamiltonian.epsilon = " + format_g17(ham_epsilon),
      "hamiltonian.kappa = " + format_g17(ham_kappa),
      "hamiltonian.q = " + format_g17(ham_q),
      "hamiltonian.tag = " + ham_tag,
      "levy.atoms = " + atoms_to_string(levy_atoms),
      "levy.kind = " + levy_kind,
      "levy.lambda = " + format_g17(levy_lambda),
      "levy.mass = " + format_g17(levy_mass),
      "levy.radius = " + format_g17(levy_radius),
      "levy.two_sigma = " + format_g17(levy_two_sigma),
      "mc.n_paths = " + std::to_string(mc_n_paths),
      "mc.seed = " + std::to_string(mc_seed),
      "output.dir = " + output_dir,
      "problem.drift_beta = " + format_g17(problem_drift_beta),
      "problem.drift_kind = " + problem_drift_kind,
      "problem.drift_value = " + format_g17(problem_drift_value),
      "problem.f_amplitude = " + format_g17(problem_f_amplitude),
      "problem.g_amplitude = " + format_g17(problem_g_amplitude),
      "problem.m0 = " + problem_m0,
      "problem.m0_site = " + std::to_string(problem_m0_site),
      "regularity.beta = " + format_g17(regularity_beta),
      "solver.averaging = " + solver_averaging,
      "solver.cfl_theta = " + format_g17(solver_cfl_theta),
      "solver.damping = " + format_g17(solver_damping),
      "solver.max_iters = " + std::to_string(solver_max_iters),
      "solver.tol = " + format_g17(solver_tol),
      "verify.quick = " + std::string(verify_quick ? "true" : "false"),
  };
  return lines;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ULL;
  };
  for (const std::string& line : canonical_lines()) feed(line);
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (grid_d != 1) {
    throw ValidationError("grid: only dimension 1 is supported");
  }
  if (!is_power_of_two(grid_n) || grid_n < 4) {
    throw ValidationError("grid: n must be a power of two and at least 4");
  }
  if (!(grid_T > 0.0)) throw ValidationError("grid: T must be positive");
  if (grid_nt < 1) throw ValidationError("grid: n_t must be at least 1");

  if (levy_kind != "stable" && levy_kind != "tempered" &&
      levy_kind != "bounded" && levy_kind != "atomic") {
    throw ValidationError(
        "levy: kind must be one of stable, tempered, bounded, atomic");
  }
  if ((levy_kind == "stable" || levy_kind == "tempered") &&
      !(levy_two_sigma > 0.0 && levy_two_sigma < 1.0)) {
    throw ValidationError("levy: two_sigma must lie in (0, 1)");
  }
  if (levy_kind == "tempered" && !(levy_lambda > 0.0)) {
    throw ValidationError("levy: lambda must be positive");
  }
  if (levy_kind == "bounded" && !(levy_radius > 0.0 && levy_mass > 0.0)) {
    throw ValidationError("levy: bounded specs need positive radius and mass");
  }
  if (levy_kind == "atomic" && levy_atoms.empty()) {
    throw ValidationError("levy: atomic specs need at least one atom");
  }

  if (!(coupling_width > 0.0 && coupling_width <= 0.25)) {
    throw ValidationError("coupling: width must lie in (0, 1/4]");
  }
  if (!(coupling_alpha > 0.0 && coupling_alpha <= 1.0)) {
    throw ValidationError("coupling: alpha must lie in (0, 1]");
  }
  if (!(regularity_beta > 0.0 && regularity_beta <= 1.0)) {
    throw ValidationError("regularity: beta must lie in (0, 1]");
  }

  if (problem_m0 != "uniform" && problem_m0 != "point" && problem_m0 != "bump") {
    throw ValidationError("problem: m0 must be one of uniform, point, bump");
  }
  if (problem_m0 == "point" &&
      (problem_m0_site < 0 || problem_m0_site >= grid_n)) {
    throw ValidationError("problem: m0_site must index a grid node");
  }
  if (problem_drift_kind != "constant" && problem_drift_kind != "holder") {
    throw ValidationError("problem: drift_kind must be constant or holder");
  }
  if (problem_drift_kind == "constant" && !(problem_drift_value >= 0.0)) {
    throw ValidationError("problem: drift_value must be nonnegative");
  }
  if (problem_drift_kind == "holder" &&
      !(problem_drift_beta > 0.0 && problem_drift_beta <= 1.0)) {
    throw ValidationError("problem: drift_beta must lie in (0, 1]");
  }

  if (!(solver_damping > 0.0 && solver_damping <= 1.0)) {
    throw ValidationError("solver: damping must lie in (0, 1]");
  }
  if (!(solver_tol > 0.0)) throw ValidationError("solver: tol must be positive");
  if (solver_max_iters < 1) {
    throw ValidationError("solver: max_iters must be at least 1");
  }
  if (!(solver_cfl_theta > 0.0 && solver_cfl_theta < 1.0)) {
    throw ValidationError("solver: cfl_theta must lie in (0, 1)");
  }
  if (solver_averaging != "damped" && solver_averaging != "fictitious-play") {
    throw ValidationError(
        "solver: averaging must be damped or fictitious-play");
  }

  if (mc_n_paths < 2) throw ValidationError("mc: n_paths must be at least 2");
  if (output_dir.empty()) throw ValidationError("output: dir must be nonempty");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError("config: JSON root must be an object");
    }
    flatten_json(j, "", cfg);
    return cfg;
  }
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config: line " + std::to_string(line_no) +
                            " is not a key = value pair");
    }
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

LevyMeasureSpec build_levy_spec(const ExperimentConfig& cfg) {
  if (cfg.levy_kind == "stable") return LevyMeasureSpec::stable(cfg.levy_two_sigma);
  if (cfg.levy_kind == "tempered") {
    return LevyMeasureSpec::tempered_stable(cfg.levy_two_sigma, cfg.levy_lambda);
  }
  if (cfg.levy_kind == "bounded") {
    return LevyMeasureSpec::bounded_uniform(cfg.levy_radius, cfg.levy_mass);
  }
  if (cfg.levy_kind == "atomic") return LevyMeasureSpec::atomic(cfg.levy_atoms);
  throw ValidationError(
      "levy: kind must be one of stable, tempered, bounded, atomic");
}

}  // namespace levymfg
