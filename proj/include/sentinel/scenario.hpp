#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentinel/config_file.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/synthgen.hpp"

namespace sentinel::synthgen {

// One building floorplan in a scenario. Rogue target indices are local to
// the building's own APs.
struct BuildingSpec {
    std::string id;
    std::size_t num_aps = 0;
    double path_length = 0.0;
    double rp_spacing = 1.0;
    double y_offset = 0.0;
    RogueConfig rogues;
};

// A multi-building generation scenario. Every device visits every RP of
// every building; AP columns are concatenated building by building into
// one global index space, and an AP from another building reads -100 dBm.
struct ScenarioConfig {
    std::vector<BuildingSpec> buildings;
    std::vector<DeviceProfile> devices;
    std::size_t samples_per_rp_per_device = 6;
    std::uint64_t seed = 0;
};

void validate_scenario(const ScenarioConfig& scenario);

std::size_t total_ap_count(const ScenarioConfig& scenario);
std::size_t total_rp_count(const ScenarioConfig& scenario);

// Parses the [scenario], [[building]], [[device]] and [[rogue]] sections
// of a config document.
ScenarioConfig scenario_from_table(const config::Table& root);

// Deterministic end-to-end generation. RP classes are labeled
// "<building>-RP<index>" so lexicographic class order groups by building.
dataset::FingerprintDB generate_scenario(const ScenarioConfig& scenario,
                                         std::uint64_t seed);

} // namespace sentinel::synthgen
