#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tfrw/evolution_kernel.hpp"
#include "tfrw/measurement_pipeline.hpp"
#include "tfrw/optomech.hpp"
#include "tfrw/universe_state.hpp"

namespace tfrw {

inline constexpr std::string_view kVersion = "tfrw 1.0.0";

struct GridSpec {
  Spacing spacing = Spacing::LogUniform;
  double a_min = 0.1;
  double a_max = 10.0;
  std::size_t n = 2001;
  std::vector<double> points;  ///< only for explicit grids

  ScaleGrid build() const;
};

struct PriorSpec {
  double a0 = 1.0;
  double sigma = 0.1;
};

enum class KernelMethod { Quadrature, ClosedForm, Auto };

struct ProfilesSpec {
  SpectralProfile emit;
  SpectralProfile detect;
  KernelMethod method = KernelMethod::Quadrature;

  MeasurementEvent event() const { return {emit, detect}; }
  /// Quadrature kernel, or the closed form when requested and available.
  MeasurementKernel kernel() const;
};

struct KernelScanSpec {
  double r_min = 0.2;
  double r_max = 5.0;
  std::size_t n = 200;
};

struct OptomechRunSpec {
  OptomechParams params;
  OptomechState initial;
  double dt = 1e-3;
  std::size_t steps = 1000;
  Integrator method = Integrator::VelocityVerlet;
  std::size_t stride = 1;  ///< write every stride-th state
};

struct HubbleSpec {
  double hubble = 0.1;
  double a0 = 1.0;
  double eta_max = 1.0;
  std::size_t steps = 100;
};

struct MirrorSpec {
  double x_min = -0.4;
  double x_max = 0.4;
  std::size_t n = 801;
  double x_center = 0.0;
  double sigma = 0.1;
  std::optional<EvolutionKernel> evolution;
};

/// Every section is optional at parse time; each subcommand checks for the
/// sections it needs.
struct Scenario {
  std::string name;
  std::optional<GridSpec> grid;
  std::optional<PriorSpec> prior;
  std::optional<ProfilesSpec> profiles;
  std::optional<EvolutionKernel> evolution;
  unsigned k = 1;
  KernelScanSpec kernel_scan;
  std::optional<OptomechRunSpec> optomech;
  std::optional<RotatingFrameConfig> rotating_frame;
  std::optional<HubbleSpec> hubble;
  std::optional<MirrorSpec> mirror;

  /// Fully resolved configuration, defaults filled in.
  nlohmann::json resolved() const;
};

enum class Command { Kernel, Measure, Optomech, Hubble, MirrorMeasure, Validate };

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view s);

/// Reads and parses a JSON file. Syntax errors report line and column;
/// everything is raised as InvalidArgument.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Parses every present section. Errors name the offending section.
Scenario parse_scenario(const nlohmann::json& j);

/// Every violated invariant, without running any simulation. Empty when the
/// scenario is well formed.
std::vector<std::string> validate_scenario(const nlohmann::json& j);

/// Runs a subcommand, writing CSV files and summary.json into `out`.
/// Returns the summary. Missing sections raise InvalidArgument naming them.
nlohmann::json run_command(Command c, const Scenario& s,
                           const std::filesystem::path& out);

}  // namespace tfrw
