#pragma once

#include <string>

#include "ncsafe/experiment.hpp"

namespace ncsafe {

// Scenario files are INI-style documents with the sections
// [arm] [obstacles] [waypoints] [network] [mpc] [disturbance] [run].
// Unknown sections or keys are rejected; parse errors carry the line
// number. serialize/parse round-trips to an identical configuration.
ExperimentConfig parse_scenario_file(const std::string& path);
ExperimentConfig parse_scenario_string(const std::string& text,
                                       const std::string& origin = "<string>");
std::string serialize_scenario(const ExperimentConfig& cfg);

}  // namespace ncsafe
