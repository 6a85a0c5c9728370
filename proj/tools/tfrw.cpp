// tfrw: scenario runner for the quantized-scale-factor toy model.
//
//   tfrw <subcommand> --scenario <file.json> --out <dir>
//
// Exit codes: 0 success, 2 parse or validation error, 3 numerical failure.
// TFRW_LOG_LEVEL selects verbosity (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tfrw/errors.hpp"
#include "tfrw/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("tfrw");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TFRW_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept real ones
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring unknown TFRW_LOG_LEVEL '{}'", env);
    }
  }
}

int run_validate(const nlohmann::json& j, const std::filesystem::path& out) {
  const auto issues = tfrw::validate_scenario(j);
  nlohmann::json report{{"version", std::string(tfrw::kVersion)},
                        {"valid", issues.empty()},
                        {"issues", issues}};
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream os(out / "validation.json", std::ios::binary);
    os << report.dump(2) << '\n';
  }
  for (const auto& issue : issues) std::cerr << "invalid: " << issue << '\n';
  if (issues.empty()) spdlog::info("scenario is valid");
  return issues.empty() ? kOk : kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Quantized FRW scale-factor simulator"};
  app.require_subcommand(1);
  std::string scenario_path;
  std::string out_dir;

  for (const char* name :
       {"kernel", "measure", "optomech", "hubble", "mirror-measure", "validate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();
    auto* out = sub->add_option("--out", out_dir, "output directory");
    if (std::string(name) != "validate") out->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto command = tfrw::command_from_string(name);

  try {
    const nlohmann::json j = tfrw::read_json_file(scenario_path);
    if (*command == tfrw::Command::Validate) return run_validate(j, out_dir);

    const tfrw::Scenario scenario = tfrw::parse_scenario(j);
    spdlog::info("running {} on {}", name, scenario_path);
    const auto summary = tfrw::run_command(*command, scenario, out_dir);
    spdlog::debug("results: {}", summary.at("results").dump());
    spdlog::info("wrote {}", (std::filesystem::path(out_dir) / "summary.json").string());
    return kOk;
  } catch (const tfrw::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const tfrw::InvalidRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const tfrw::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const tfrw::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}
