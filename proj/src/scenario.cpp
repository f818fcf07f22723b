#include "polaronsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#ifndef POLARONSIM_VERSION
#define POLARONSIM_VERSION "0.0.0"
#endif

namespace polaronsim {

namespace {

constexpr const char* kVersion = POLARONSIM_VERSION;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) : cols_(header.size()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }
  CsvBuilder& cell(double v) { return cell_raw(fmt(v)); }
  CsvBuilder& cell(const std::string& v) { return cell_raw(v); }
  std::string str() { return out_.str(); }

 private:
  CsvBuilder& cell_raw(const std::string& v) {
    if (at_) out_ << ',';
    out_ << v;
    if (++at_ == cols_) {
      out_ << '\n';
      at_ = 0;
    }
    return *this;
  }
  std::ostringstream out_;
  size_t cols_ = 0;
  size_t at_ = 0;
};

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::minus: return "minus";
    case Branch::plus: return "plus";
    default: return "none";
  }
}

const char* class_name(TransitionClass c) {
  switch (c) {
    case TransitionClass::reducing: return "reducing";
    case TransitionClass::conserving: return "conserving";
    default: return "increasing";
  }
}

}  // namespace

std::string error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "config";
    case ErrorCode::incompatible_space: return "incompatible_space";
    case ErrorCode::domain: return "domain";
    case ErrorCode::unsupported_regime: return "unsupported_regime";
    case ErrorCode::classification: return "classification";
    case ErrorCode::degenerate_steady_state: return "degenerate_steady_state";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::solver: return "solver";
    case ErrorCode::undefined_statistic: return "undefined_statistic";
  }
  return "unknown";
}

ExitStatus exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::incompatible_space:
    case ErrorCode::domain:
      return ExitStatus::config_error;
    default:
      return ExitStatus::numerical_error;
  }
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::jsd: return "jsd";
    case ExperimentKind::evolve: return "evolve";
    case ExperimentKind::steady: return "steady";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::wigner: return "wigner";
    case ExperimentKind::incoherent_sweep: return "incoherent-sweep";
  }
  throw Error(ErrorCode::config, "unknown experiment kind");
}

ExperimentKind experiment_from_name(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::spectrum, ExperimentKind::jsd, ExperimentKind::evolve,
        ExperimentKind::steady, ExperimentKind::sweep, ExperimentKind::wigner,
        ExperimentKind::incoherent_sweep}) {
    if (experiment_name(k) == name) return k;
  }
  // Accept the underscore spelling of the subcommand as well.
  if (name == "incoherent_sweep") return ExperimentKind::incoherent_sweep;
  throw Error(ErrorCode::config, "unknown experiment '" + name + "'");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::omega_p: return "omega_p";
    case SweepAxis::q_ac: return "Q_ac";
    case SweepAxis::q_m: return "Q_m";
    case SweepAxis::f_p: return "F_p";
    case SweepAxis::f_inc: return "F_inc";
  }
  throw Error(ErrorCode::config, "unknown sweep axis");
}

namespace {

SweepAxis sweep_axis_from_name(const std::string& name) {
  for (SweepAxis a : {SweepAxis::omega_p, SweepAxis::q_ac, SweepAxis::q_m,
                      SweepAxis::f_p, SweepAxis::f_inc}) {
    if (sweep_axis_name(a) == name) return a;
  }
  throw Error(ErrorCode::config, "unknown sweep axis '" + name + "'");
}

[[noreturn]] void bad_config(const std::string& message) {
  throw Error(ErrorCode::config, message);
}

void require_keys(const Json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      bad_config("unknown key '" + it.key() + "' in " + where);
    }
  }
}

double number_at(const Json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) bad_config("'" + key + "' must be a number");
  return obj.at(key).get<double>();
}

// Amplitudes may be raw numbers or tied to the polariton linewidth as
// {"per_gamma_ac": x}; tied values follow gamma_ac through Q_ac sweeps.
struct TrackedAmplitude {
  double raw = 0.0;
  std::optional<double> per_gamma_ac;
  double resolve(double gamma_ac) const {
    return per_gamma_ac ? *per_gamma_ac * gamma_ac : raw;
  }
};

TrackedAmplitude parse_amplitude(const Json& params, const std::string& key,
                                 double fallback) {
  TrackedAmplitude amp;
  amp.raw = fallback;
  if (!params.contains(key)) return amp;
  const Json& v = params.at(key);
  if (v.is_number()) {
    amp.raw = v.get<double>();
    return amp;
  }
  if (v.is_object()) {
    require_keys(v, "params." + key, {"per_gamma_ac"});
    amp.per_gamma_ac = v.at("per_gamma_ac").get<double>();
    return amp;
  }
  bad_config("'" + key + "' must be a number or {\"per_gamma_ac\": x}");
}

struct PumpAnchor {
  std::string anchor;  // empty = raw frequency
  double offset = 0.0;
  double raw = 0.0;
  double resolve(const ModelParams& p) const {
    if (anchor.empty()) return raw;
    if (anchor == "lower_polariton") return p.lower_polariton() + offset;
    if (anchor == "upper_polariton") return p.upper_polariton() + offset;
    if (anchor == "cavity") return p.omega_c + offset;
    bad_config("unknown omega_p anchor '" + anchor + "'");
  }
};

}  // namespace

namespace {
ScenarioConfig parse_config_impl(const Json& doc);
}

ScenarioConfig parse_config(const Json& doc) {
  try {
    return parse_config_impl(doc);
  } catch (const Json::exception& e) {
    bad_config("malformed configuration: " + std::string(e.what()));
  }
}

namespace {

ScenarioConfig parse_config_impl(const Json& doc) {
  if (!doc.is_object()) bad_config("configuration root must be an object");
  require_keys(doc, "the configuration root",
               {"params", "truncation", "experiment", "output_dir", "workers",
                "check_truncation"});

  ScenarioConfig cfg;
  ModelParams& p = cfg.params;

  TrackedAmplitude f_p, f_inc;
  PumpAnchor pump;
  const Json params = doc.value("params", Json::object());
  {
    require_keys(params, "params",
                 {"omega_m", "omega_c", "omega_a", "g_ac", "g_cm", "gamma_ac",
                  "Q_ac", "gamma_m", "Q_m", "n_th", "F_p", "F_inc", "omega_p"});
    p.omega_m = number_at(params, "omega_m", p.omega_m);
    p.omega_c = number_at(params, "omega_c", p.omega_c);
    p.omega_a = number_at(params, "omega_a", p.omega_a);
    p.g_ac = number_at(params, "g_ac", p.g_ac);
    p.g_cm = number_at(params, "g_cm", p.g_cm);
    p.n_th = number_at(params, "n_th", p.n_th);

    if (params.contains("gamma_ac") && params.contains("Q_ac"))
      bad_config("give exactly one of gamma_ac and Q_ac");
    if (params.contains("Q_ac")) {
      const double q = params.at("Q_ac").get<double>();
      if (q <= 0.0) bad_config("Q_ac must be positive");
      p.gamma_ac = p.omega_c / q;
    } else {
      p.gamma_ac = number_at(params, "gamma_ac", p.gamma_ac);
    }
    if (params.contains("gamma_m") && params.contains("Q_m"))
      bad_config("give exactly one of gamma_m and Q_m");
    if (params.contains("Q_m")) {
      const double q = params.at("Q_m").get<double>();
      if (q <= 0.0) bad_config("Q_m must be positive");
      p.gamma_m = p.omega_m / q;
    } else {
      p.gamma_m = number_at(params, "gamma_m", p.gamma_m);
    }

    f_p = parse_amplitude(params, "F_p", p.F_p);
    f_inc = parse_amplitude(params, "F_inc", p.F_inc);
    p.F_p = f_p.resolve(p.gamma_ac);
    p.F_inc = f_inc.resolve(p.gamma_ac);

    if (params.contains("omega_p")) {
      const Json& w = params.at("omega_p");
      if (w.is_number()) {
        pump.raw = w.get<double>();
      } else if (w.is_object()) {
        require_keys(w, "params.omega_p", {"anchor", "offset"});
        pump.anchor = w.at("anchor").get<std::string>();
        pump.offset = number_at(w, "offset", 0.0);
      } else {
        bad_config("omega_p must be a number or {anchor, offset}");
      }
    } else {
      pump.anchor = "lower_polariton";
    }
    p.omega_p = pump.resolve(p);
  }

  const Json trunc = doc.value("truncation", Json::object());
  require_keys(trunc, "truncation", {"cav_cutoff", "mech_cutoff"});
  cfg.space = make_space(int(number_at(trunc, "cav_cutoff", 3)),
                         int(number_at(trunc, "mech_cutoff", 30)));

  const Json exp = doc.value("experiment", Json::object());
  if (!exp.is_object()) bad_config("experiment must be an object");
  cfg.experiment = experiment_from_name(exp.value("type", "steady"));
  switch (cfg.experiment) {
    case ExperimentKind::spectrum:
    case ExperimentKind::steady:
      require_keys(exp, "experiment", {"type"});
      break;
    case ExperimentKind::jsd: {
      require_keys(exp, "experiment",
                   {"type", "omega_min", "omega_max", "points", "broadening",
                    "ground_state_only"});
      cfg.jsd.omega_min = number_at(exp, "omega_min", 0.0);
      cfg.jsd.omega_max = number_at(exp, "omega_max", 0.0);
      cfg.jsd.points = int(number_at(exp, "points", cfg.jsd.points));
      cfg.jsd.broadening = number_at(exp, "broadening", 0.0);
      cfg.jsd.ground_state_only = exp.value("ground_state_only", false);
      if (cfg.jsd.points < 2) bad_config("jsd needs at least 2 grid points");
      break;
    }
    case ExperimentKind::evolve: {
      require_keys(exp, "experiment",
                   {"type", "t_max", "points", "initial", "abs_tol", "rel_tol",
                    "max_steps", "fit"});
      cfg.evolve.t_max = number_at(exp, "t_max", cfg.evolve.t_max);
      cfg.evolve.points = int(number_at(exp, "points", cfg.evolve.points));
      if (cfg.evolve.t_max <= 0.0 || cfg.evolve.points < 2)
        bad_config("evolve needs t_max > 0 and at least 2 points");
      cfg.evolve.integrator.abs_tol =
          number_at(exp, "abs_tol", cfg.evolve.integrator.abs_tol);
      cfg.evolve.integrator.rel_tol =
          number_at(exp, "rel_tol", cfg.evolve.integrator.rel_tol);
      cfg.evolve.integrator.max_steps = long(
          number_at(exp, "max_steps", double(cfg.evolve.integrator.max_steps)));
      cfg.evolve.fit = exp.value("fit", true);
      const Json init = exp.value("initial", Json::object());
      require_keys(init, "experiment.initial", {"type", "level", "n_th"});
      cfg.evolve.initial.type = init.value("type", "fock");
      if (cfg.evolve.initial.type == "fock") {
        cfg.evolve.initial.level = int(number_at(init, "level", 0));
        if (cfg.evolve.initial.level < 0 ||
            cfg.evolve.initial.level > cfg.space.mech_cutoff)
          bad_config("initial fock level outside the truncation");
      } else if (cfg.evolve.initial.type == "thermal") {
        cfg.evolve.initial.n_th = number_at(init, "n_th", p.n_th);
        if (cfg.evolve.initial.n_th < 0.0)
          bad_config("initial thermal occupation must be >= 0");
      } else {
        bad_config("initial mechanical state must be fock or thermal");
      }
      break;
    }
    case ExperimentKind::sweep:
    case ExperimentKind::incoherent_sweep: {
      require_keys(exp, "experiment", {"type", "axis", "values"});
      cfg.sweep.axis = sweep_axis_from_name(exp.value("axis", "omega_p"));
      if (!exp.contains("values")) bad_config("sweep needs values");
      const Json& vals = exp.at("values");
      if (vals.is_array()) {
        for (const Json& v : vals) cfg.sweep.values.push_back(v.get<double>());
      } else if (vals.is_object()) {
        require_keys(vals, "experiment.values", {"min", "max", "points", "log"});
        const double lo = vals.at("min").get<double>();
        const double hi = vals.at("max").get<double>();
        const int n = int(number_at(vals, "points", 2));
        const bool log_spaced = vals.value("log", false);
        if (n < 2 || !(hi > lo)) bad_config("sweep range needs min < max, points >= 2");
        if (log_spaced && lo <= 0.0) bad_config("log sweep needs min > 0");
        for (int i = 0; i < n; ++i) {
          const double s = double(i) / (n - 1);
          cfg.sweep.values.push_back(
              log_spaced ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
        }
      } else {
        bad_config("sweep values must be an array or {min,max,points,log}");
      }
      if (cfg.sweep.values.empty()) bad_config("sweep needs nonempty values");
      for (double v : cfg.sweep.values)
        if (!std::isfinite(v)) bad_config("sweep values must be finite");
      break;
    }
    case ExperimentKind::wigner: {
      require_keys(exp, "experiment", {"type", "half_width", "points"});
      cfg.wigner.half_width =
          number_at(exp, "half_width", cfg.wigner.half_width);
      cfg.wigner.points = int(number_at(exp, "points", cfg.wigner.points));
      if (cfg.wigner.half_width <= 0.0 || cfg.wigner.points < 2)
        bad_config("wigner needs half_width > 0 and at least 2 points");
      break;
    }
  }

  cfg.output_dir = doc.value("output_dir", std::string("out"));
  cfg.workers = int(number_at(doc, "workers", 0));
  cfg.check_truncation = doc.value("check_truncation", false);
  p.validate();

  // Resolved echo for the manifest: raw rates plus the derived Q factors,
  // numeric omega_p plus the anchor it came from.
  Json echo;
  echo["params"] = {
      {"omega_m", p.omega_m}, {"omega_c", p.omega_c}, {"omega_a", p.omega_a},
      {"g_ac", p.g_ac},       {"g_cm", p.g_cm},       {"gamma_ac", p.gamma_ac},
      {"gamma_m", p.gamma_m}, {"Q_ac", p.omega_c / p.gamma_ac},
      {"Q_m", p.omega_m / p.gamma_m},                 {"n_th", p.n_th},
      {"F_p", p.F_p},         {"F_inc", p.F_inc},     {"omega_p", p.omega_p}};
  if (!pump.anchor.empty()) {
    echo["params"]["omega_p_anchor"] = {{"anchor", pump.anchor},
                                        {"offset", pump.offset}};
  }
  cfg.f_p_per_gamma_ac = f_p.per_gamma_ac;
  cfg.f_inc_per_gamma_ac = f_inc.per_gamma_ac;
  if (f_p.per_gamma_ac) echo["params"]["F_p_per_gamma_ac"] = *f_p.per_gamma_ac;
  if (f_inc.per_gamma_ac)
    echo["params"]["F_inc_per_gamma_ac"] = *f_inc.per_gamma_ac;
  echo["truncation"] = {{"cav_cutoff", cfg.space.cav_cutoff},
                        {"mech_cutoff", cfg.space.mech_cutoff}};
  echo["experiment"] = exp.is_object() && !exp.empty()
                           ? exp
                           : Json{{"type", experiment_name(cfg.experiment)}};
  echo["experiment"]["type"] = experiment_name(cfg.experiment);
  if (cfg.experiment == ExperimentKind::sweep ||
      cfg.experiment == ExperimentKind::incoherent_sweep) {
    echo["experiment"]["values"] = cfg.sweep.values;
    echo["experiment"]["axis"] = sweep_axis_name(cfg.sweep.axis);
  }
  echo["output_dir"] = cfg.output_dir.string();
  cfg.resolved = std::move(echo);
  return cfg;
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) bad_config("cannot open config file '" + file.string() + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    bad_config("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

namespace {

struct Artifacts {
  // name -> full file content; written verbatim for byte determinism.
  std::vector<std::pair<std::string, std::string>> files;
  std::map<std::string, double> scalars;
};

void add_scalar_observables(Artifacts& art, const ScalarObservables& obs,
                            const std::string& prefix) {
  art.scalars[prefix + "phonon_number"] = obs.phonon_number;
  art.scalars[prefix + "photon_number"] = obs.photon_number;
  art.scalars[prefix + "atom_excitation"] = obs.atom_excitation;
  if (obs.g2_phonon) art.scalars[prefix + "g2_phonon"] = *obs.g2_phonon;
}

Json observables_json(const ScalarObservables& obs) {
  Json j;
  j["phonon_number"] = obs.phonon_number;
  j["photon_number"] = obs.photon_number;
  j["atom_excitation"] = obs.atom_excitation;
  if (obs.g2_phonon)
    j["g2_phonon"] = *obs.g2_phonon;
  else
    j["g2_phonon"] = nullptr;
  j["polariton_block_populations"] = obs.polariton_block_populations;
  return j;
}

void run_spectrum(const ScenarioConfig& cfg, Artifacts& art) {
  const std::vector<PolaronLevel> levels = eigensystem(cfg.params, cfg.space);
  CsvBuilder csv({"n", "m", "branch", "energy"});
  for (const PolaronLevel& lv : levels) {
    csv.cell(double(lv.n))
        .cell(double(lv.m))
        .cell(branch_name(lv.branch))
        .cell(lv.energy);
  }
  art.files.emplace_back("levels.csv", csv.str());
  for (const PolaronLevel& lv : levels) {
    if (lv.n >= 1 && lv.n <= 2 && lv.m <= 5 && lv.branch != Branch::none) {
      art.scalars["level_n" + std::to_string(lv.n) + "_m" +
                  std::to_string(lv.m) + "_" + branch_name(lv.branch)] =
          lv.energy;
    }
  }
}

void run_jsd(const ScenarioConfig& cfg, Artifacts& art) {
  const SpectralDensity sd =
      joint_spectral_density(cfg.params, cfg.space, cfg.jsd);
  CsvBuilder density({"omega", "density"});
  for (size_t i = 0; i < sd.omega.size(); ++i)
    density.cell(sd.omega[i]).cell(sd.density[i]);
  art.files.emplace_back("jsd.csv", density.str());

  CsvBuilder lines(
      {"E_initial", "E_final", "omega", "weight", "delta_phonon", "class"});
  for (const TransitionRecord& t : sd.transitions) {
    lines.cell(t.e_initial)
        .cell(t.e_final)
        .cell(t.omega)
        .cell(t.weight)
        .cell(t.delta_phonon)
        .cell(class_name(t.cls));
  }
  art.files.emplace_back("transitions.csv", lines.str());

  art.scalars["total_weight"] = sd.total_weight;
  size_t peak = 0;
  for (size_t i = 1; i < sd.density.size(); ++i)
    if (sd.density[i] > sd.density[peak]) peak = i;
  art.scalars["peak_omega"] = sd.omega[peak];
  art.scalars["peak_density"] = sd.density[peak];
  // Density centroids in windows around the two polariton lines.
  auto centroid = [&](double center) {
    double mass = 0.0, first = 0.0;
    for (size_t i = 0; i < sd.omega.size(); ++i) {
      if (std::abs(sd.omega[i] - center) > 0.25 * cfg.params.omega_m) continue;
      mass += sd.density[i];
      first += sd.density[i] * sd.omega[i];
    }
    return mass > 0.0 ? first / mass : center;
  };
  art.scalars["centroid_lower"] = centroid(cfg.params.lower_polariton());
  art.scalars["centroid_upper"] = centroid(cfg.params.upper_polariton());
}

DensityMatrix initial_state(const ScenarioConfig& cfg) {
  const InitialMechState& init = cfg.evolve.initial;
  DensityMatrix mech =
      init.type == "fock"
          ? fock_state(cfg.space.mech_dim(), init.level)
          : thermal_state(cfg.space.mech_dim(), init.n_th);
  return product_state(cfg.space, 0, 0, mech);
}

void run_evolve(const ScenarioConfig& cfg, Artifacts& art) {
  Superoperator lv = liouvillian(cfg.params, cfg.space);
  std::vector<double> times;
  for (int i = 0; i < cfg.evolve.points; ++i)
    times.push_back(cfg.evolve.t_max * double(i) / (cfg.evolve.points - 1));
  const Trajectory traj =
      evolve(lv, initial_state(cfg), times, cfg.evolve.integrator);

  CsvBuilder csv({"time", "photon_number", "phonon_number", "atom_excitation",
                  "g2_phonon", "trace_residual"});
  for (size_t i = 0; i < traj.times.size(); ++i) {
    csv.cell(traj.times[i])
        .cell(traj.photon_number[i])
        .cell(traj.phonon_number[i])
        .cell(traj.atom_excitation[i])
        .cell(traj.g2_phonon[i])
        .cell(traj.trace_residual[i]);
  }
  art.files.emplace_back("trajectory.csv", csv.str());

  art.scalars["final_phonon_number"] = traj.phonon_number.back();
  art.scalars["final_photon_number"] = traj.photon_number.back();
  art.scalars["final_atom_excitation"] = traj.atom_excitation.back();
  if (traj.g2_defined.back())
    art.scalars["final_g2_phonon"] = traj.g2_phonon.back();

  Json fit_doc;
  fit_doc["attempted"] = cfg.evolve.fit;
  if (cfg.evolve.fit) {
    try {
      const CoolingFit fit = fit_cooling(traj);
      fit_doc["gamma_eff"] = fit.gamma_eff;
      fit_doc["gamma_eff_over_gamma_m"] = fit.gamma_eff / cfg.params.gamma_m;
      fit_doc["n_min"] = fit.n_min;
      fit_doc["t0"] = fit.t0;
      fit_doc["t_end"] = fit.t_end;
      fit_doc["residual"] = fit.residual;
      fit_doc["rejected"] = false;
      art.scalars["gamma_eff"] = fit.gamma_eff;
      art.scalars["n_min"] = fit.n_min;
    } catch (const Error& e) {
      fit_doc["rejected"] = true;
      fit_doc["code"] = error_code_name(e.code());
      fit_doc["message"] = e.what();
    }
  }
  art.files.emplace_back("cooling_fit.json", fit_doc.dump(2) + "\n");
}

void run_steady(const ScenarioConfig& cfg, Artifacts& art) {
  Superoperator lv = liouvillian(cfg.params, cfg.space);
  const SteadyState ss = steady_state(lv);
  const ScalarObservables obs = scalar_observables(ss.rho, cfg.space);

  Json doc;
  doc["method"] = ss.method;
  doc["residual_max"] = ss.residual_max;
  doc["kernel_residual"] = ss.kernel_residual;
  doc["hermiticity_drop"] = ss.hermiticity_drop;
  doc["iterations"] = ss.iterations;
  doc["observables"] = observables_json(obs);
  doc["params"] = cfg.resolved["params"];
  doc["truncation"] = cfg.resolved["truncation"];
  art.files.emplace_back("steady.json", doc.dump(2) + "\n");

  add_scalar_observables(art, obs, "");
  for (size_t i = 0; i < obs.polariton_block_populations.size() && i < 3; ++i)
    art.scalars["block_population_" + std::to_string(i)] =
        obs.polariton_block_populations[i];
}

ModelParams params_at(const ScenarioConfig& cfg, double value) {
  ModelParams p = cfg.params;
  switch (cfg.sweep.axis) {
    case SweepAxis::omega_p: p.omega_p = value; break;
    case SweepAxis::q_ac:
      if (value <= 0.0) throw Error(ErrorCode::domain, "Q_ac must be positive");
      p.gamma_ac = p.omega_c / value;
      if (cfg.f_p_per_gamma_ac) p.F_p = *cfg.f_p_per_gamma_ac * p.gamma_ac;
      if (cfg.f_inc_per_gamma_ac)
        p.F_inc = *cfg.f_inc_per_gamma_ac * p.gamma_ac;
      break;
    case SweepAxis::q_m:
      if (value <= 0.0) throw Error(ErrorCode::domain, "Q_m must be positive");
      p.gamma_m = p.omega_m / value;
      break;
    case SweepAxis::f_p: p.F_p = value; break;
    case SweepAxis::f_inc: p.F_inc = value; break;
  }
  return p;
}

void run_sweep(const ScenarioConfig& cfg, Artifacts& art) {
  struct Point {
    bool ok = false;
    std::string status = "ok";
    ScalarObservables obs;
    double residual_max = 0.0;
  };
  const size_t count = cfg.sweep.values.size();
  std::vector<Point> points(count);

  auto solve_point = [&](size_t i) {
    Point out;
    try {
      Superoperator lv = liouvillian(params_at(cfg, cfg.sweep.values[i]),
                                     cfg.space);
      const SteadyState ss = steady_state(lv);
      out.obs = scalar_observables(ss.rho, cfg.space);
      out.residual_max = ss.residual_max;
      out.ok = true;
    } catch (const Error& e) {
      out.status = error_code_name(e.code());
    } catch (const std::exception&) {
      out.status = "unknown";
    }
    return out;
  };

  int workers = cfg.workers > 0
                    ? cfg.workers
                    : std::max(1, int(std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, int(count));
  std::atomic<size_t> next{0};
  auto body = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= count) break;
      points[i] = solve_point(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (std::thread& t : pool) t.join();

  const std::string axis = sweep_axis_name(cfg.sweep.axis);
  CsvBuilder csv({axis, "phonon_number", "photon_number", "atom_excitation",
                  "g2_phonon", "residual_max", "status"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < count; ++i) {
    const Point& pt = points[i];
    csv.cell(cfg.sweep.values[i])
        .cell(pt.ok ? pt.obs.phonon_number : nan)
        .cell(pt.ok ? pt.obs.photon_number : nan)
        .cell(pt.ok ? pt.obs.atom_excitation : nan)
        .cell(pt.ok && pt.obs.g2_phonon ? *pt.obs.g2_phonon : nan)
        .cell(pt.ok ? pt.residual_max : nan)
        .cell(pt.status);
  }
  const bool incoherent = cfg.experiment == ExperimentKind::incoherent_sweep;
  art.files.emplace_back(incoherent ? "incoherent_sweep.csv" : "sweep.csv",
                         csv.str());

  // Located extrema as the drift-checked scalars.
  bool any = false;
  double phonon_min = 0.0, phonon_max = 0.0, at_min = 0.0, at_max = 0.0;
  double g2_max = 0.0, g2_min = 0.0;
  bool any_g2 = false;
  for (size_t i = 0; i < count; ++i) {
    if (!points[i].ok) continue;
    const double n = points[i].obs.phonon_number;
    if (!any || n < phonon_min) phonon_min = n, at_min = cfg.sweep.values[i];
    if (!any || n > phonon_max) phonon_max = n, at_max = cfg.sweep.values[i];
    any = true;
    if (points[i].obs.g2_phonon) {
      const double g = *points[i].obs.g2_phonon;
      if (!any_g2 || g > g2_max) g2_max = g;
      if (!any_g2 || g < g2_min) g2_min = g;
      any_g2 = true;
    }
  }
  if (any) {
    art.scalars["phonon_min"] = phonon_min;
    art.scalars["phonon_max"] = phonon_max;
    art.scalars["phonon_argmin"] = at_min;
    art.scalars["phonon_argmax"] = at_max;
  }
  if (any_g2) {
    art.scalars["g2_max"] = g2_max;
    art.scalars["g2_min"] = g2_min;
  }
}

void run_wigner(const ScenarioConfig& cfg, Artifacts& art) {
  Superoperator lv = liouvillian(cfg.params, cfg.space);
  const SteadyState ss = steady_state(lv);
  const DensityMatrix mech = partial_trace(ss.rho, Mode::mechanics);

  const std::vector<double> grid =
      linear_grid(-cfg.wigner.half_width, cfg.wigner.half_width,
                  cfg.wigner.points);
  const WignerMap map = wigner(mech, grid, grid);

  CsvBuilder csv({"x", "p", "w"});
  for (size_t i = 0; i < map.x_grid.size(); ++i)
    for (size_t j = 0; j < map.p_grid.size(); ++j)
      csv.cell(map.x_grid[i]).cell(map.p_grid[j]).cell(map.values(long(i), long(j)));
  art.files.emplace_back("wigner.csv", csv.str());

  CsvBuilder rho_csv({"row", "col", "re", "im"});
  for (int r = 0; r < mech.dim(); ++r)
    for (int c = 0; c < mech.dim(); ++c)
      rho_csv.cell(double(r))
          .cell(double(c))
          .cell(mech.matrix()(r, c).real())
          .cell(mech.matrix()(r, c).imag());
  art.files.emplace_back("rho_mech.csv", rho_csv.str());

  const ScalarObservables obs = scalar_observables(ss.rho, cfg.space);
  Json doc;
  doc["min_value"] = map.min_value;
  doc["integral"] = map.integral;
  doc["imag_residual"] = map.imag_residual;
  doc["accuracy_warning"] = map.accuracy_warning;
  doc["grid"] = {{"half_width", cfg.wigner.half_width},
                 {"points", cfg.wigner.points}};
  doc["observables"] = observables_json(obs);
  art.files.emplace_back("wigner_summary.json", doc.dump(2) + "\n");

  art.scalars["wigner_min"] = map.min_value;
  art.scalars["wigner_integral"] = map.integral;
  add_scalar_observables(art, obs, "");
}

Artifacts execute(const ScenarioConfig& cfg) {
  Artifacts art;
  switch (cfg.experiment) {
    case ExperimentKind::spectrum: run_spectrum(cfg, art); break;
    case ExperimentKind::jsd: run_jsd(cfg, art); break;
    case ExperimentKind::evolve: run_evolve(cfg, art); break;
    case ExperimentKind::steady: run_steady(cfg, art); break;
    case ExperimentKind::sweep:
    case ExperimentKind::incoherent_sweep: run_sweep(cfg, art); break;
    case ExperimentKind::wigner: run_wigner(cfg, art); break;
  }
  return art;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  Artifacts art = execute(cfg);

  if (cfg.check_truncation) {
    ScenarioConfig doubled = cfg;
    doubled.space = make_space(2 * cfg.space.cav_cutoff,
                               2 * cfg.space.mech_cutoff);
    doubled.check_truncation = false;
    if (doubled.evolve.initial.type == "fock" &&
        doubled.evolve.initial.level > doubled.space.mech_cutoff) {
      throw Error(ErrorCode::config,
                  "doubled truncation cannot hold the initial fock state");
    }
    const Artifacts fine = execute(doubled);
    Json check;
    check["base_truncation"] = cfg.resolved["truncation"];
    check["doubled_truncation"] = {{"cav_cutoff", doubled.space.cav_cutoff},
                                   {"mech_cutoff", doubled.space.mech_cutoff}};
    double max_drift = 0.0;
    Json table = Json::object();
    for (const auto& [name, base] : art.scalars) {
      auto it = fine.scalars.find(name);
      if (it == fine.scalars.end()) continue;
      const double drift = std::abs(base - it->second) /
                           std::max({std::abs(base), std::abs(it->second),
                                     1e-12});
      table[name] = {{"base", base}, {"doubled", it->second},
                     {"rel_drift", drift}};
      max_drift = std::max(max_drift, drift);
    }
    check["scalars"] = table;
    check["max_rel_drift"] = max_drift;
    art.files.emplace_back("truncation_check.json", check.dump(2) + "\n");
  }

  Json manifest;
  manifest["version"] = kVersion;
  manifest["experiment"] = experiment_name(cfg.experiment);
  manifest["config"] = cfg.resolved;
  manifest["workers"] = cfg.workers;
  manifest["check_truncation"] = cfg.check_truncation;
  std::vector<std::string> names;
  names.reserve(art.files.size());
  for (const auto& file : art.files) names.push_back(file.first);
  std::sort(names.begin(), names.end());
  manifest["files"] = names;
  art.files.emplace_back("manifest.json", manifest.dump(2) + "\n");

  std::filesystem::create_directories(cfg.output_dir);
  RunResult result;
  result.scalars = art.scalars;
  for (const auto& [name, content] : art.files) {
    std::ofstream out(cfg.output_dir / name, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::config,
                  "cannot write output file '" + name + "'");
    }
    out << content;
    result.files_written.push_back(name);
  }
  return result;
}

}  // namespace polaronsim
