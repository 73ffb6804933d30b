#include "sentinel/scenario.hpp"

#include <set>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::synthgen {

void validate_scenario(const ScenarioConfig& scenario) {
    if (scenario.buildings.empty()) {
        throw ConfigError("scenario needs at least one building");
    }
    if (scenario.devices.empty()) {
        throw ConfigError("scenario needs at least one device");
    }
    if (scenario.samples_per_rp_per_device < 1) {
        throw ConfigError("samples_per_rp_per_device must be at least 1");
    }
    std::set<std::string> building_ids;
    for (const BuildingSpec& building : scenario.buildings) {
        if (building.id.empty()) throw ConfigError("building id is empty");
        if (!building_ids.insert(building.id).second) {
            throw ConfigError("duplicate building id '" + building.id + "'");
        }
        if (building.num_aps < 1) {
            throw ConfigError("building '" + building.id +
                              "' needs at least 1 AP");
        }
        if (building.path_length <= 0.0 || building.rp_spacing <= 0.0) {
            throw ConfigError("building '" + building.id +
                              "' needs positive path_length and rp_spacing");
        }
        validate_rogues(building.rogues, building.num_aps);
    }
    std::set<std::string> device_ids;
    for (const DeviceProfile& device : scenario.devices) {
        if (device.device_id.empty()) throw ConfigError("device id is empty");
        if (!device_ids.insert(device.device_id).second) {
            throw ConfigError("duplicate device id '" + device.device_id + "'");
        }
        if (device.noise_sigma_dbm < 0.0) {
            throw ConfigError("device '" + device.device_id +
                              "' has negative noise_sigma_dbm");
        }
    }
}

std::size_t total_ap_count(const ScenarioConfig& scenario) {
    std::size_t total = 0;
    for (const BuildingSpec& building : scenario.buildings) {
        total += building.num_aps;
    }
    return total;
}

std::size_t total_rp_count(const ScenarioConfig& scenario) {
    std::size_t total = 0;
    for (const BuildingSpec& building : scenario.buildings) {
        Environment env;
        env.path_length = building.path_length;
        env.rp_spacing = building.rp_spacing;
        total += env.rp_count();
    }
    return total;
}

ScenarioConfig scenario_from_table(const config::Table& root) {
    ScenarioConfig scenario;
    if (root.has_table("scenario")) {
        const config::Table& sc = root.table("scenario");
        scenario.seed = sc.get_u64_or("seed", 0);
        scenario.samples_per_rp_per_device =
            sc.get_u64_or("samples_per_rp_per_device", 6);
    }
    for (const config::Table& entry : root.table_array("building")) {
        BuildingSpec building;
        building.id = entry.get_string("id");
        building.num_aps = entry.get_u64("num_aps");
        building.path_length = entry.get_f64("path_length");
        building.rp_spacing = entry.get_f64_or("rp_spacing", 1.0);
        building.y_offset = entry.get_f64_or("y_offset", 0.0);
        scenario.buildings.push_back(std::move(building));
    }
    for (const config::Table& entry : root.table_array("device")) {
        DeviceProfile device;
        device.device_id = entry.get_string("id");
        device.rss_offset_dbm = entry.get_f64_or("rss_offset_dbm", 0.0);
        device.noise_sigma_dbm = entry.get_f64_or("noise_sigma_dbm", 0.0);
        scenario.devices.push_back(std::move(device));
    }
    for (const config::Table& entry : root.table_array("rogue")) {
        const std::string target_building = entry.get_string("building");
        BuildingSpec* building = nullptr;
        for (BuildingSpec& candidate : scenario.buildings) {
            if (candidate.id == target_building) {
                building = &candidate;
                break;
            }
        }
        if (building == nullptr) {
            throw ConfigError("rogue references unknown building '" +
                              target_building + "'");
        }
        building->rogues.target_aps.push_back(entry.get_u64("target_ap"));
        building->rogues.rogue_positions.emplace_back(entry.get_f64("x"),
                                                      entry.get_f64("y"));
        building->rogues.rogue_tx_power_dbm.push_back(
            entry.get_f64("tx_power_dbm"));
    }
    validate_scenario(scenario);
    return scenario;
}

dataset::FingerprintDB generate_scenario(const ScenarioConfig& scenario,
                                         std::uint64_t seed) {
    validate_scenario(scenario);
    const std::size_t total_aps = total_ap_count(scenario);
    const std::size_t samples = scenario.samples_per_rp_per_device;

    std::vector<dataset::Fingerprint> fingerprints;
    std::size_t ap_base = 0;
    for (std::size_t b = 0; b < scenario.buildings.size(); ++b) {
        const BuildingSpec& building = scenario.buildings[b];
        const Environment env =
            generate_environment(building.num_aps, building.path_length,
                                 building.rp_spacing,
                                 derive_seed(seed, "building-env", b));
        const std::uint64_t building_seed = derive_seed(seed, "building-smp", b);
        for (std::size_t rp = 0; rp < env.rp_count(); ++rp) {
            for (std::size_t d = 0; d < scenario.devices.size(); ++d) {
                for (std::size_t s = 0; s < samples; ++s) {
                    dataset::Fingerprint fp = sample_fingerprint(
                        env, rp, scenario.devices[d],
                        derive_seed(building_seed, "sample", rp,
                                    d * samples + s));
                    fp = apply_evil_twin(fp, env, building.rogues, rp);
                    fp.sample_idx = s;
                    fp.building_id = building.id;
                    fp.rp_id = building.id + "-" + fp.rp_id;
                    fp.y_m += building.y_offset;
                    std::vector<double> global_rss(total_aps, -100.0);
                    for (std::size_t j = 0; j < fp.rss.size(); ++j) {
                        global_rss[ap_base + j] = fp.rss[j];
                    }
                    fp.rss = std::move(global_rss);
                    fingerprints.push_back(std::move(fp));
                }
            }
        }
        ap_base += building.num_aps;
    }
    return dataset::FingerprintDB(std::move(fingerprints));
}

} // namespace sentinel::synthgen
