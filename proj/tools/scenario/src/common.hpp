#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "memheat/admissibility.hpp"
#include "memheat/contour.hpp"
#include "memheat/kernel.hpp"
#include "memheat/scenario.hpp"

namespace memheat::scenario::detail {

struct PreparedPair {
  MemoryKernel k;
  MemoryKernel n;
  AdmissibilityReport admissibility;
  ContourSpec spec;
};

/// Parses the kernels, checks admissibility (AdmissibilityError when it fails)
/// and picks the contour.
PreparedPair prepare(const ScenarioConfig& c);

InversionOptions inversion_options(const ScenarioConfig& c);

std::size_t steps_for(const ScenarioConfig& c);

nlohmann::json contour_json(const ContourSpec& s);

std::ofstream open_output(const std::filesystem::path& path);

/// Writes `j` and records the file.
void write_json(const std::filesystem::path& path, const nlohmann::json& j, RunResult& result);

nlohmann::json run_validate(const ScenarioConfig& c, const std::filesystem::path& out, RunResult& result,
                            std::ostream& log);

}  // namespace memheat::scenario::detail
