// Command-line driver: loads a JSON config, applies flag overrides and runs
// one scenario. Exit codes follow gd::ExitCode.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gravdephase/errors.hpp"
#include "gravdephase/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gravitational dephasing of timed Dicke emission"};
  std::string config_path;
  std::string scenario;
  std::string output;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario, "Override the scenario")
      ->check(CLI::IsMember(gd::scenario_names()));
  auto* seed_opt = app.add_option("--seed", seed, "Override the RNG seed");
  app.add_option("-o,--output", output, "Override the output directory");
  app.add_option("-j,--threads", threads, "Worker threads (>= 1)")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "Suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gd::kExitOk : gd::kExitInvalidConfig;
  }

  gd::RunConfig config;
  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      config = gd::load_config(config_path);
      doc = gd::to_json(config);
    }
    if (!scenario.empty()) doc["scenario"] = scenario;
    if (*seed_opt) doc["seed"] = seed;
    if (!output.empty()) doc["output_dir"] = output;
    if (threads > 0) doc["threads"] = threads;
    if (!doc.contains("scenario")) throw gd::ConfigError("no scenario given");
    config = gd::parse_config(doc);
  } catch (const gd::ConfigError& e) {
    nlohmann::json err = {{"error", "invalid_config"},
                          {"message", e.what()},
                          {"exit_code", int(gd::kExitInvalidConfig)}};
    std::cerr << err.dump() << '\n';
    return gd::kExitInvalidConfig;
  }

  const gd::RunOutcome outcome = gd::run(config);
  if (outcome.exit_code == gd::kExitOk || outcome.exit_code == gd::kExitOracleDisagreement) {
    if (!quiet) std::cout << outcome.summary;
    for (const auto& f : outcome.files) {
      if (!quiet) std::cout << "wrote " << f.string() << '\n';
    }
  }
  if (outcome.exit_code != gd::kExitOk) std::cerr << outcome.report.dump() << '\n';
  return outcome.exit_code;
}
