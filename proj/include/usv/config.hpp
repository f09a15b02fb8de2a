// JSON scenario and experiment-matrix files.
//
// All physical quantities carry their unit in the key name (`_m`, `_deg`,
// `_mps`, `_s`, `_hz`, ...). Unknown keys are rejected so that typos do not
// silently fall back to defaults.
#pragma once

#include "usv/simulator.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace usv {

// Carries a location in the offending file: "path:line:col: field: message".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioFile {
  Scenario scenario;
  SimConfig sim;
  double hydro_nominal_speed = kStationKeepingSpeed;  // m/s
  std::filesystem::path wind_trace_path;               // empty unless wind.model == trace
};

ScenarioFile parse_scenario(const std::string& text, const std::string& origin = "<string>",
                            const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& path);

// Single-line JSON in the same schema as the input, with every default spelled out.
std::string scenario_to_json(const ScenarioFile& file);

struct MatrixConfig {
  std::string name = "matrix";
  std::vector<std::filesystem::path> scenario_paths;  // resolved against the matrix file
  std::vector<ControllerKind> controllers{ControllerKind::pd, ControllerKind::backstepping,
                                          ControllerKind::sliding};
  std::vector<bool> feedforward{false, true};
  std::vector<std::uint64_t> seeds{1};
  double duration_override = 0.0;  // s, 0 keeps each scenario's duration
  unsigned threads = 0;            // 0 = hardware concurrency
};

MatrixConfig parse_matrix(const std::string& text, const std::string& origin = "<string>",
                          const std::filesystem::path& base_dir = {});
MatrixConfig load_matrix(const std::filesystem::path& path);

struct WindgenConfig {
  WindSynthesisSpec spec;
};

WindgenConfig parse_windgen(const std::string& text, const std::string& origin = "<string>");
WindgenConfig load_windgen(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace usv
