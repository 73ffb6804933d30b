#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/dataset.hpp"

namespace sentinel::synthgen {

// A corridor floorplan: reference points on a line at 0, s, 2s, ... along
// the x axis, APs scattered in a bounding box around it. tx_power_dbm is
// the reference RSS at 1 m, one entry per AP.
struct Environment {
    double path_length = 0.0;
    double rp_spacing = 1.0;
    std::vector<std::pair<double, double>> ap_positions;
    std::vector<double> tx_power_dbm;
    double path_loss_exponent = 2.0;

    std::size_t ap_count() const { return ap_positions.size(); }
    std::size_t rp_count() const;
    std::pair<double, double> rp_position(std::size_t rp) const;
};

// Throws ConfigError on violated invariants (spacing, AP count, exponent
// range, tx power list length).
void validate_environment(const Environment& env);

struct DeviceProfile {
    std::string device_id;
    double rss_offset_dbm = 0.0;
    double noise_sigma_dbm = 0.0;
};

// Evil-twin rogues: rogue r silences the legitimate AP target_aps[r] and
// broadcasts in its place from rogue_positions[r] at rogue_tx_power_dbm[r].
struct RogueConfig {
    std::vector<std::size_t> target_aps;
    std::vector<std::pair<double, double>> rogue_positions;
    std::vector<double> rogue_tx_power_dbm;

    std::size_t rogue_count() const { return target_aps.size(); }
};

void validate_rogues(const RogueConfig& rogues, std::size_t ap_count);

// Seeded environment builder: APs uniform in the corridor bounding box
// (x in [0, path_length], y in [-3, 3] m), tx power uniform in [-45, -35]
// dBm per AP, path-loss exponent uniform in [2, 4].
Environment generate_environment(std::size_t num_aps, double path_length,
                                 double rp_spacing, std::uint64_t seed);

// Log-distance path-loss sample at one RP for one device:
//   rss[j] = clamp(P0_j - 10 n log10(max(d_j, 1)) + offset + N(0, sigma^2),
//                  -100, 0)
// Noise is drawn per AP in index order from the seeded stream. building_id
// defaults to "B0" and sample_idx to 0; callers relabel as needed.
dataset::Fingerprint sample_fingerprint(const Environment& env, std::size_t rp,
                                        const DeviceProfile& profile,
                                        std::uint64_t seed);

// Replaces each targeted AP column with the rogue's own path-loss value
// (no device offset, no noise: the legitimate AP is silenced and the rogue
// broadcasts in its place). All other columns are untouched.
dataset::Fingerprint apply_evil_twin(const dataset::Fingerprint& fp,
                                     const Environment& env,
                                     const RogueConfig& rogues, std::size_t rp);

// Full factorial (rp x device x sample) database with the rogue
// perturbation applied to every fingerprint. Per-fingerprint seeds are
// derived from (seed, rp, device, sample), so the clean portion is
// identical across rogue configurations sharing a base seed.
dataset::FingerprintDB generate_dataset(const Environment& env,
                                        const std::vector<DeviceProfile>& devices,
                                        std::size_t samples_per_rp_per_device,
                                        const RogueConfig& rogues,
                                        std::uint64_t seed);

} // namespace sentinel::synthgen
