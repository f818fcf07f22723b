#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polaronsim/scenario.hpp"

using namespace polaronsim;

namespace {

struct CliArgs {
  std::string config_path;
  std::string output_dir;
  int workers = -1;
  bool check_truncation = false;
  std::string experiment;
};

int fail(const std::string& code, const std::string& message, ExitStatus status) {
  Json err;
  err["error"] = {{"code", code},
                  {"message", message},
                  {"exit", int(status)}};
  std::cerr << err.dump() << "\n";
  return int(status);
}

int run(const CliArgs& args) {
  Json doc = Json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) {
      throw Error(ErrorCode::config,
                  "cannot open config file '" + args.config_path + "'");
    }
    try {
      in >> doc;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::config,
                  "config is not valid JSON: " + std::string(e.what()));
    }
  }

  // The subcommand selects the experiment; a conflicting type in the config
  // is a mistake worth stopping on.
  if (doc.contains("experiment") && doc["experiment"].contains("type")) {
    const std::string in_config = doc["experiment"]["type"].get<std::string>();
    if (experiment_from_name(in_config) !=
        experiment_from_name(args.experiment)) {
      throw Error(ErrorCode::config, "config experiment type '" + in_config +
                                         "' conflicts with subcommand '" +
                                         args.experiment + "'");
    }
  }
  doc["experiment"]["type"] = args.experiment;

  ScenarioConfig cfg = parse_config(doc);
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  if (args.workers >= 0) cfg.workers = args.workers;
  if (args.check_truncation) cfg.check_truncation = true;

  const RunResult result = run_scenario(cfg);
  Json summary;
  summary["status"] = "ok";
  summary["output_dir"] = cfg.output_dir.string();
  summary["files"] = result.files_written;
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner for the hybrid atom-cavity-mechanics model"};
  app.require_subcommand(1);

  CliArgs args;
  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"spectrum", "Diagonalize and write the labeled level table"},
      {"jsd", "Joint spectral density of 0 -> 1 polariton absorption"},
      {"evolve", "Integrate the master equation and fit the cooling law"},
      {"steady", "Solve the stationary state and its observables"},
      {"sweep", "Steady-state observables along a parameter axis"},
      {"wigner", "Steady state plus mechanical Wigner map"},
      {"incoherent-sweep", "Incoherently pumped steady-state sweep"},
  };
  for (const auto& [name, desc] : experiments) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args.config_path,
                    "JSON scenario configuration");
    sub->add_option("--output", args.output_dir, "Output directory override");
    sub->add_option("--workers", args.workers,
                    "Concurrent sweep workers (0 = hardware)");
    sub->add_flag("--check-truncation", args.check_truncation,
                  "Re-run at doubled cutoffs and report observable drift");
    sub->callback([&args, name = name] { args.experiment = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    return fail("config", e.what(), ExitStatus::config_error);
  }

  try {
    return run(args);
  } catch (const Error& e) {
    return fail(error_code_name(e.code()), e.what(), exit_status_for(e.code()));
  } catch (const std::exception& e) {
    return fail("unknown", e.what(), ExitStatus::other_error);
  }
}
