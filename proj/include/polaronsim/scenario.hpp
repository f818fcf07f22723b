#pragma once

// Declarative scenario runner: JSON configuration -> experiment execution ->
// deterministic CSV/JSON artifacts (manifest, tables, trajectories, maps).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polaronsim/model.hpp"
#include "polaronsim/lindblad.hpp"
#include "polaronsim/observables.hpp"

namespace polaronsim {

using Json = nlohmann::json;

std::string error_code_name(ErrorCode code);

// Exit statuses of the command-line runner.
enum class ExitStatus : int {
  ok = 0,
  config_error = 2,
  numerical_error = 3,
  other_error = 4
};
ExitStatus exit_status_for(ErrorCode code);

enum class ExperimentKind {
  spectrum,
  jsd,
  evolve,
  steady,
  sweep,
  wigner,
  incoherent_sweep
};
std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

enum class SweepAxis { omega_p, q_ac, q_m, f_p, f_inc };
std::string sweep_axis_name(SweepAxis axis);

struct InitialMechState {
  std::string type = "fock";  // "fock" | "thermal"
  int level = 0;              // fock
  double n_th = 0.0;          // thermal
};

struct EvolveOptions {
  double t_max = 100.0;
  int points = 201;
  InitialMechState initial;
  IntegratorOptions integrator;
  bool fit = true;  // attempt the cooling fit and record the outcome
};

struct SweepOptions {
  SweepAxis axis = SweepAxis::omega_p;
  std::vector<double> values;  // resolved: explicit list or {min,max,points}
};

struct WignerOptions {
  double half_width = 4.5;
  int points = 81;
};

// Fully resolved configuration: params carry raw rates (Q factors already
// applied), omega_p is numeric (anchors already applied).
struct ScenarioConfig {
  ModelParams params;
  HilbertSpace space;
  ExperimentKind experiment = ExperimentKind::steady;
  JsdOptions jsd;
  EvolveOptions evolve;
  SweepOptions sweep;
  WignerOptions wigner;
  std::filesystem::path output_dir = "out";
  int workers = 0;  // 0 = hardware concurrency
  bool check_truncation = false;

  // Amplitudes configured relative to the polariton linewidth; they follow
  // gamma_ac through Q_ac sweep points.
  std::optional<double> f_p_per_gamma_ac;
  std::optional<double> f_inc_per_gamma_ac;

  Json resolved;  // full echo for the manifest
};

// Parses and validates a configuration document. Exactly one of
// {gamma_ac, Q_ac} and of {gamma_m, Q_m} may appear (defaults when absent);
// omega_p is a number or {"anchor": lower_polariton|upper_polariton|cavity,
// "offset": x}. Throws Error(config) with a speaking message.
ScenarioConfig parse_config(const Json& doc);
ScenarioConfig load_config(const std::filesystem::path& file);

struct RunResult {
  std::vector<std::string> files_written;
  // Named scalar results used by the truncation-doubling drift check.
  std::map<std::string, double> scalars;
};

// Executes the configured experiment, writing the manifest and artifacts
// into config.output_dir. With check_truncation, reruns at doubled cutoffs
// and writes truncation_check.json with per-scalar relative drifts.
RunResult run_scenario(const ScenarioConfig& config);

}  // namespace polaronsim
