#include "sentinel/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::synthgen {

namespace {

constexpr double kCorridorHalfWidthM = 3.0;

double distance(std::pair<double, double> a, std::pair<double, double> b) {
    const double dx = a.first - b.first;
    const double dy = a.second - b.second;
    return std::sqrt(dx * dx + dy * dy);
}

// Log-distance attenuation with a 1 m floor to dodge the d = 0 singularity.
double path_loss_rss(double tx_power_dbm, double dist_m, double exponent) {
    return tx_power_dbm - 10.0 * exponent * std::log10(std::max(dist_m, 1.0));
}

double clamp_rss(double v) { return std::clamp(v, -100.0, 0.0); }

std::string rp_label(std::size_t rp, std::size_t total) {
    std::size_t width = 3;
    for (std::size_t v = total > 0 ? total - 1 : 0; v >= 1000; v /= 10) ++width;
    std::string digits = std::to_string(rp);
    return "RP" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

} // namespace

std::size_t Environment::rp_count() const {
    return static_cast<std::size_t>(std::floor(path_length / rp_spacing)) + 1;
}

std::pair<double, double> Environment::rp_position(std::size_t rp) const {
    return {static_cast<double>(rp) * rp_spacing, 0.0};
}

void validate_environment(const Environment& env) {
    if (env.rp_spacing <= 0.0) {
        throw ConfigError("rp_spacing must be positive");
    }
    if (env.path_length <= 0.0) {
        throw ConfigError("path_length must be positive");
    }
    if (env.ap_positions.empty()) {
        throw ConfigError("environment needs at least 1 AP");
    }
    if (env.tx_power_dbm.size() != env.ap_positions.size()) {
        throw ConfigError("tx_power_dbm has " +
                          std::to_string(env.tx_power_dbm.size()) +
                          " entries for " +
                          std::to_string(env.ap_positions.size()) + " APs");
    }
    if (env.path_loss_exponent < 1.5 || env.path_loss_exponent > 6.0) {
        throw ConfigError("path_loss_exponent " +
                          std::to_string(env.path_loss_exponent) +
                          " outside [1.5, 6]");
    }
}

void validate_rogues(const RogueConfig& rogues, std::size_t ap_count) {
    if (rogues.rogue_positions.size() != rogues.target_aps.size() ||
        rogues.rogue_tx_power_dbm.size() != rogues.target_aps.size()) {
        throw ConfigError("rogue config lists must have equal length");
    }
    std::vector<std::size_t> targets = rogues.target_aps;
    std::sort(targets.begin(), targets.end());
    if (std::adjacent_find(targets.begin(), targets.end()) != targets.end()) {
        throw ConfigError("rogue target APs must be distinct");
    }
    for (std::size_t j : rogues.target_aps) {
        if (j >= ap_count) {
            throw ConfigError("rogue target AP " + std::to_string(j) +
                              " out of range for " + std::to_string(ap_count) +
                              " APs");
        }
    }
}

Environment generate_environment(std::size_t num_aps, double path_length,
                                 double rp_spacing, std::uint64_t seed) {
    if (num_aps < 1) {
        throw ConfigError("num_aps must be at least 1");
    }
    if (path_length <= 0.0) {
        throw ConfigError("path_length must be positive");
    }
    if (rp_spacing <= 0.0) {
        throw ConfigError("rp_spacing must be positive");
    }
    Environment env;
    env.path_length = path_length;
    env.rp_spacing = rp_spacing;
    Rng rng(derive_seed(seed, "environment"));
    for (std::size_t a = 0; a < num_aps; ++a) {
        const double x = rng.uniform(0.0, path_length);
        const double y = rng.uniform(-kCorridorHalfWidthM, kCorridorHalfWidthM);
        env.ap_positions.emplace_back(x, y);
        env.tx_power_dbm.push_back(rng.uniform(-45.0, -35.0));
    }
    env.path_loss_exponent = rng.uniform(2.0, 4.0);
    validate_environment(env);
    return env;
}

dataset::Fingerprint sample_fingerprint(const Environment& env, std::size_t rp,
                                        const DeviceProfile& profile,
                                        std::uint64_t seed) {
    validate_environment(env);
    if (rp >= env.rp_count()) {
        throw ConfigError("rp index " + std::to_string(rp) +
                          " out of range for " + std::to_string(env.rp_count()) +
                          " reference points");
    }
    if (profile.noise_sigma_dbm < 0.0) {
        throw ConfigError("noise_sigma_dbm must be non-negative");
    }
    const auto pos = env.rp_position(rp);
    dataset::Fingerprint fp;
    fp.building_id = "B0";
    fp.rp_id = rp_label(rp, env.rp_count());
    fp.x_m = pos.first;
    fp.y_m = pos.second;
    fp.device_id = profile.device_id;
    fp.sample_idx = 0;
    fp.rss.reserve(env.ap_count());
    Rng rng(seed);
    for (std::size_t j = 0; j < env.ap_count(); ++j) {
        const double d = distance(pos, env.ap_positions[j]);
        const double raw = path_loss_rss(env.tx_power_dbm[j], d,
                                         env.path_loss_exponent) +
                           profile.rss_offset_dbm +
                           rng.normal(0.0, profile.noise_sigma_dbm);
        fp.rss.push_back(clamp_rss(raw));
    }
    return fp;
}

dataset::Fingerprint apply_evil_twin(const dataset::Fingerprint& fp,
                                     const Environment& env,
                                     const RogueConfig& rogues, std::size_t rp) {
    validate_rogues(rogues, fp.rss.size());
    if (rp >= env.rp_count()) {
        throw ConfigError("rp index " + std::to_string(rp) +
                          " out of range for " + std::to_string(env.rp_count()) +
                          " reference points");
    }
    dataset::Fingerprint out = fp;
    const auto pos = env.rp_position(rp);
    for (std::size_t r = 0; r < rogues.rogue_count(); ++r) {
        const double d = distance(pos, rogues.rogue_positions[r]);
        out.rss[rogues.target_aps[r]] = clamp_rss(
            path_loss_rss(rogues.rogue_tx_power_dbm[r], d,
                          env.path_loss_exponent));
    }
    return out;
}

dataset::FingerprintDB generate_dataset(const Environment& env,
                                        const std::vector<DeviceProfile>& devices,
                                        std::size_t samples_per_rp_per_device,
                                        const RogueConfig& rogues,
                                        std::uint64_t seed) {
    validate_environment(env);
    validate_rogues(rogues, env.ap_count());
    if (devices.empty()) {
        throw ConfigError("device list is empty");
    }
    if (samples_per_rp_per_device < 1) {
        throw ConfigError("samples_per_rp_per_device must be at least 1");
    }
    std::vector<dataset::Fingerprint> fingerprints;
    fingerprints.reserve(env.rp_count() * devices.size() *
                         samples_per_rp_per_device);
    for (std::size_t rp = 0; rp < env.rp_count(); ++rp) {
        for (std::size_t d = 0; d < devices.size(); ++d) {
            for (std::size_t s = 0; s < samples_per_rp_per_device; ++s) {
                const std::uint64_t fp_seed = derive_seed(
                    seed, "sample", rp, d * samples_per_rp_per_device + s);
                dataset::Fingerprint fp =
                    sample_fingerprint(env, rp, devices[d], fp_seed);
                fp.sample_idx = s;
                fingerprints.push_back(apply_evil_twin(fp, env, rogues, rp));
            }
        }
    }
    return dataset::FingerprintDB(std::move(fingerprints));
}

} // namespace sentinel::synthgen
