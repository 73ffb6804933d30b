#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/tensor.hpp"

namespace sentinel::dataset {

// One RSS measurement vector captured at a reference point by one device.
// rss holds one dBm value per globally indexed AP; an AP that is not heard
// is recorded as exactly -100.
struct Fingerprint {
    std::string building_id;
    std::string rp_id;
    double x_m = 0.0;
    double y_m = 0.0;
    std::string device_id;
    std::uint64_t sample_idx = 0;
    std::vector<double> rss;
};

// Immutable labeled fingerprint collection. Validates on construction:
// consistent AP count, rss values in [-100, 0], one (building, x, y) per
// rp_id, and unique (rp, device, sample_idx) triples. Class indices are
// assigned to rp_ids in lexicographic order, densely from 0.
class FingerprintDB {
public:
    explicit FingerprintDB(std::vector<Fingerprint> fingerprints);

    std::size_t ap_count() const { return ap_count_; }
    std::size_t class_count() const { return rp_ids_.size(); }
    const std::vector<Fingerprint>& fingerprints() const { return fingerprints_; }

    bool has_rp(const std::string& rp_id) const;
    std::size_t class_of(const std::string& rp_id) const;
    const std::string& rp_id_of(std::size_t class_index) const;
    std::pair<double, double> coords_of(const std::string& rp_id) const;

    // Sorted unique identifiers, stable across row order.
    const std::vector<std::string>& device_ids() const { return device_ids_; }
    const std::vector<std::string>& building_ids() const { return building_ids_; }

private:
    std::vector<Fingerprint> fingerprints_;
    std::size_t ap_count_ = 0;
    std::map<std::string, std::size_t> rp_index_;
    std::vector<std::string> rp_ids_;
    std::map<std::string, std::pair<double, double>> rp_coords_;
    std::vector<std::string> device_ids_;
    std::vector<std::string> building_ids_;
};

// Canonical CSV, header:
//   building_id,rp_id,x_m,y_m,device_id,sample_idx,ap_0,...,ap_{W-1}
// one fingerprint per row, `#`-prefixed comment lines and blank lines
// ignored. Errors name the offending 1-based line.
FingerprintDB load_db(const std::filesystem::path& path);

// Writes the canonical CSV. Doubles are emitted in shortest round-trip
// form so load_db(save_db(db)) reproduces db exactly.
void save_db(const FingerprintDB& db, const std::filesystem::path& path);

struct SplitSpec {
    std::string train_device;
    std::size_t train_samples_per_rp = 5;
    std::size_t test_samples_per_rp_per_device = 1;
};

struct Split {
    std::vector<Fingerprint> train;
    std::vector<Fingerprint> test;
};

// Training protocol: train_samples_per_rp fingerprints per RP, all from the
// single train_device, chosen by seeded shuffle; then
// test_samples_per_rp_per_device per (RP, device) drawn from the remaining
// samples. Train and test are disjoint as (rp, device, sample) triples.
// Candidate lists are ordered by sample_idx before shuffling, so the split
// depends only on DB content and seed, not on file row order.
Split split(const FingerprintDB& db, const SplitSpec& spec, std::uint64_t seed);

// Single-row grayscale image, pixels shaped (1, W, 1) with values in [0, 1].
// Brighter pixel means stronger RSS.
struct GrayscaleImage {
    numerics::Tensor pixels;

    GrayscaleImage() : pixels(numerics::Shape{1, 0, 1}) {}
    explicit GrayscaleImage(numerics::Tensor p);

    std::size_t width() const { return pixels.dim(1); }
};

// pixel[0, j, 0] = (rss[j] + 100) / 100.
GrayscaleImage rss_to_image(const Fingerprint& fp);

// Exact inverse of rss_to_image (to within one rounding of the affine map).
// Pixels outside [0, 1] are a range error.
std::vector<double> image_to_rss(const GrayscaleImage& img);

} // namespace sentinel::dataset
