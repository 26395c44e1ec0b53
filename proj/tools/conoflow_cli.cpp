#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "conoflow/cli.hpp"

using namespace conoflow;

namespace {

// CONOFLOW_LOG = trace | debug | info | warn | error | critical | off (default warn).
void setup_logging() {
  auto logger = spdlog::stderr_color_mt("conoflow");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CONOFLOW_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("CONOFLOW_LOG='{}' not recognised; keeping warn", env);
    else
      spdlog::set_level(level);
  }
}

int run_command(ExperimentKind kind, const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) {
    spdlog::error("cannot read config {}", config_path);
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();

  ExperimentConfig config;
  try {
    config = validate(text.str(), kind);
  } catch (const ConfigError& e) {
    spdlog::error("{}: {}", config_path, to_string(e.code()));
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return 1;
  }
  spdlog::info("running {} from {} into {}", to_string(kind), config_path, out_dir);
  spdlog::debug("resolved config:\n{}", serialize(config));

  Report report;
  try {
    report = run(config, out_dir);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return 1;
  }
  for (const auto& [name, value] : report.observables) spdlog::info("  {} = {}", name, value);
  for (const auto& [name, note] : report.notes) spdlog::info("  {}: {}", name, note);
  if (report.status == "refused")
    spdlog::warn("refused ({}): {}", report.error_code, report.message);
  else if (report.status != "ok")
    spdlog::error("{}: {}", report.error_code, report.message);
  spdlog::info("wrote {} artifacts and report.json in {:.2f} s", report.artifacts.size(),
               report.wall_clock_s);
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Bicharacteristic flows and wave-packet experiments for conormal potentials"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int code = 0;
  for (const std::string& name : experiment_kinds()) {
    auto* sub = app.add_subcommand(name, "run a " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    const ExperimentKind kind = *parse_experiment_kind(name);
    sub->callback([&, kind] { code = run_command(kind, config_path, out_dir); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 1;
  }
  return code;
}
