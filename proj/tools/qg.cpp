#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qg/harness/run.hpp"

namespace {

// Exit codes: 0 all contracts held, 1 runtime or input error, 2 a result contract failed.
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kContract = 2;

bool configure_logging() {
  auto logger = spdlog::stderr_color_mt("qg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("QG_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else {
    spdlog::error("QG_LOG must be one of error, info, debug (got '{}')", level);
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (!configure_logging()) return kError;

  CLI::App app{"Quasi-geostrophic averaging experiments"};
  app.require_subcommand(1);
  std::string config_path;
  int jobs = 1;
  std::string out_dir;
  std::optional<qg::harness::Experiment> chosen;

  for (const auto& [name, experiment] : qg::harness::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "worker threads for independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->callback([&chosen, e = experiment] { chosen = e; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = qg::harness::parse_config(config_path, chosen);
    const auto manifest =
        qg::harness::run(cfg, jobs, out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir));
    spdlog::debug("manifest:\n{}", manifest.json.dump(2));
    return manifest.contracts_ok ? kOk : kContract;
  } catch (const qg::ParseError& e) {
    for (const auto& p : e.problems()) spdlog::error("{}", p);
    return kError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kError;
  }
}
