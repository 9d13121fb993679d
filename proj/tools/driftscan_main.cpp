#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "driftscan/commands.hpp"
#include "driftscan/config.hpp"
#include "driftscan/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "JSON config file")->required();
  sub->add_option("--set", args.overrides,
                  "override a config field, e.g. --set ph.lambda_threshold=1.5");
  sub->add_option("--seed", args.seed, "override the run seed");
  sub->add_option("--out", args.out_dir, "override the output directory");
}

driftscan::RunConfig resolve_config(const CommonArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) throw driftscan::ConfigError("cannot open config file '" + args.config_path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw driftscan::ConfigError("config parse error in '" + args.config_path +
                                 "': " + e.what());
  }
  for (const auto& ov : args.overrides) driftscan::apply_override(doc, ov);
  if (args.seed >= 0) doc["seed"] = args.seed;
  if (!args.out_dir.empty()) doc["output_dir"] = args.out_dir;
  return driftscan::parse_run_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftscan: concept-drift detection for commit-level defect streams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "driftscan 1.0.0");

  CommonArgs args;
  CLI::App* synth = app.add_subcommand("synth", "generate synthetic labeled streams");
  CLI::App* detect = app.add_subcommand("detect", "run the configured drift detectors");
  CLI::App* baseline =
      app.add_subcommand("baseline", "run performance-monitoring baseline detectors");
  CLI::App* scorecmd =
      app.add_subcommand("score", "score detector reports against reference drifts");
  CLI::App* rank = app.add_subcommand("rank", "rank methods from score outputs");
  for (CLI::App* sub : {synth, detect, baseline, scorecmd, rank}) add_common(sub, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // invalid usage is a configuration problem
  }

  try {
    driftscan::RunConfig cfg = resolve_config(args);
    if (synth->parsed()) driftscan::cmd_synth(cfg);
    else if (detect->parsed()) driftscan::cmd_detect(cfg);
    else if (baseline->parsed()) driftscan::cmd_baseline(cfg);
    else if (scorecmd->parsed()) driftscan::cmd_score(cfg);
    else if (rank->parsed()) driftscan::cmd_rank(cfg);
    return 0;
  } catch (const driftscan::ConfigError& e) {
    std::cerr << "[error] config: " << e.what() << "\n";
    return 2;
  } catch (const driftscan::DataError& e) {
    std::cerr << "[error] data: " << e.what() << "\n";
    return 3;
  } catch (const driftscan::ComputeError& e) {
    std::cerr << "[error] compute: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "[error] unexpected: " << e.what() << "\n";
    return 4;
  }
}
