#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "memheat/parallel.hpp"
#include "memheat/scenario.hpp"

namespace ms = memheat::scenario;

int main(int argc, char** argv) {
  CLI::App app{"memheat: diffusion with memory, contour solvers and controllability experiments"};
  std::string experiment;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::size_t threads = 0;

  app.add_option("experiment", experiment, "simulate | verify | control | obstruction | zset | exampleA2 | validate")
      ->required()
      ->check(CLI::IsMember({"simulate", "verify", "control", "obstruction", "zset", "exampleA2", "validate"}));
  app.add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker thread cap (0 = hardware concurrency)");
  CLI11_PARSE(app, argc, argv);

  ms::ScenarioConfig config;
  try {
    nlohmann::json raw = nlohmann::json::object();
    if (!config_path.empty()) {
      raw = ms::read_config_json(config_path);
    } else if (experiment != "validate") {
      std::cerr << "--config is required for " << experiment << '\n';
      return ms::kFailure;
    }
    if (raw.is_object() && !raw.contains("experiment")) raw["experiment"] = experiment;
    config = ms::from_json(raw);
    if (ms::to_string(config.experiment) != experiment) {
      std::cerr << "config names experiment '" << ms::to_string(config.experiment) << "', command line says '"
                << experiment << "'\n";
      return ms::kFailure;
    }
  } catch (const ms::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return ms::kFailure;
  }

  memheat::set_thread_limit(threads);
  const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(config.output) : out_dir;
  const ms::RunResult r = ms::run(config, out, std::cout);
  std::cout << ms::to_string(config.experiment) << ": " << r.report.value("status", "unknown") << '\n';
  for (const auto& f : r.files) std::cout << "  wrote " << f.string() << '\n';
  return r.exit_code;
}
