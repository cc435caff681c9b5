#pragma once

// Declarative experiment descriptions and the runner behind the memheat CLI.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memheat/contour.hpp"
#include "memheat/spectral.hpp"

namespace memheat::scenario {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Simulate, Verify, Control, Obstruction, ZSet, ExampleA2, Validate };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

/// Exit status contract of run().
enum ExitCode : int { kOk = 0, kFailure = 1, kAdmissibility = 2, kNumerical = 3 };

/// zero | unit (scale phi_mode) | decay (scale n^-power) | band (decay cut after `mode` terms)
struct FieldSpec {
  std::string kind = "unit";
  std::size_t mode = 1;
  double power = 1.0;
  double scale = 1.0;

  SpectralField build(const EigenBasis& basis) const;
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct KernelConfig {
  std::string K = "delta(1)";
  std::string N = "zero";
  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

struct DomainConfig {
  double length = std::numbers::pi;
  std::size_t modes = 64;
  friend bool operator==(const DomainConfig&, const DomainConfig&) = default;
};

struct TimeConfig {
  double T = 1.0;
  std::size_t steps_per_unit = 512;
  std::size_t stride = 16;  // trajectory output every stride-th node
  std::size_t snapshot_points = 129;
  friend bool operator==(const TimeConfig&, const TimeConfig&) = default;
};

/// none | distributed (constant value on one mode) | boundary (constant value on one side)
struct ForcingConfig {
  std::string kind = "none";
  double value = 1.0;
  std::size_t mode = 1;
  std::string side = "left";
  friend bool operator==(const ForcingConfig&, const ForcingConfig&) = default;
};

struct GeometryConfig {
  std::string kind = "distributed";
  double a = std::numbers::pi / 4;
  double b = 3 * std::numbers::pi / 4;
  std::string side = "left";

  ControlGeometry build() const;
  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct BasisConfig {
  std::vector<std::size_t> time_atoms{2, 4, 8, 16};
  std::size_t space_atoms = 4;
  friend bool operator==(const BasisConfig&, const BasisConfig&) = default;
};

struct ObstructionConfig {
  std::vector<double> mu2{64, 256, 1024};
  friend bool operator==(const ObstructionConfig&, const ObstructionConfig&) = default;
};

struct ZSetConfig {
  double t_lo = 0.1;
  double t_hi = 10.0;
  std::size_t points = 64;
  friend bool operator==(const ZSetConfig&, const ZSetConfig&) = default;
};

struct ExampleA2Config {
  double eps = 0.1;
  std::size_t steps = 512;
  std::size_t extra_nodes = 64;
  std::vector<double> times{0.5, 0.9, 0.99, 0.9999};
  friend bool operator==(const ExampleA2Config&, const ExampleA2Config&) = default;
};

struct Tolerances {
  double theta_A = std::numbers::pi / 2 - 1e-3;
  double rel_tol = 1e-8;
  double convolution_tol = 1e-3;
  std::optional<double> rho;
  double psi_tol = 1e-8;
  double zero_tol = 1e-8;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Replaces the automatic contour; unset angle means pi/2 + 0.6 theta_max.
struct ContourConfig {
  double arc_radius = 1.0;
  std::optional<double> ray_angle;
  double truncation = 1e8;
  std::size_t ray_nodes = 32;
  std::size_t arc_nodes = 16;
  std::string t_scaling = "auto";

  ContourSpec build(double theta) const;
  friend bool operator==(const ContourConfig&, const ContourConfig&) = default;
};

struct ScenarioConfig {
  Experiment experiment = Experiment::Simulate;
  KernelConfig kernels;
  DomainConfig domain;
  TimeConfig time;
  FieldSpec initial;
  FieldSpec target;
  ForcingConfig forcing;
  GeometryConfig geometry;
  BasisConfig basis;
  ObstructionConfig obstruction;
  ZSetConfig zset;
  ExampleA2Config example_a2;
  Tolerances tolerances;
  std::optional<ContourConfig> contour;
  std::string output = "memheat_out";
  std::uint64_t seed = 0;

  EigenBasis eigen_basis() const { return EigenBasis(domain.length, domain.modes); }
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Strict: unknown keys and wrong types throw ConfigError.
ScenarioConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);
/// Parsed file contents without validation.
nlohmann::json read_config_json(const std::filesystem::path& path);
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunResult {
  int exit_code = kOk;
  nlohmann::json report;
  std::vector<std::filesystem::path> files;
};

/// Runs the experiment, writes <out>/<experiment>.json plus CSV companions and
/// maps failures onto the exit codes. Diagnostics go to `log`.
RunResult run(const ScenarioConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Frozen high-precision reference values.
const nlohmann::json& oracle_fixtures();

}  // namespace memheat::scenario
