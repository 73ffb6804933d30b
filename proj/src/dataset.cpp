#include "sentinel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::dataset {

namespace {

std::string line_msg(const std::filesystem::path& path, std::size_t line,
                     const std::string& what) {
    return path.string() + ":" + std::to_string(line) + ": " + what;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, const std::filesystem::path& path,
                    std::size_t line, const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(line_msg(path, line, "cannot parse " + what + " '" +
                                 std::string(field) + "' as a number"));
    }
    return value;
}

std::uint64_t parse_u64(std::string_view field, const std::filesystem::path& path,
                        std::size_t line, const std::string& what) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(line_msg(path, line, "cannot parse " + what + " '" +
                                 std::string(field) + "' as a non-negative integer"));
    }
    return value;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

FingerprintDB::FingerprintDB(std::vector<Fingerprint> fingerprints)
    : fingerprints_(std::move(fingerprints)) {
    if (fingerprints_.empty()) {
        throw DataError("fingerprint database is empty");
    }
    ap_count_ = fingerprints_[0].rss.size();
    if (ap_count_ == 0) {
        throw DataError("fingerprints carry zero AP columns");
    }

    std::set<std::string> devices, buildings;
    std::map<std::string, std::string> rp_building;
    std::set<std::tuple<std::string, std::string, std::uint64_t>> triples;
    for (const Fingerprint& fp : fingerprints_) {
        if (fp.rss.size() != ap_count_) {
            throw DataError("fingerprint (" + fp.rp_id + ", " + fp.device_id +
                            ", " + std::to_string(fp.sample_idx) + ") has " +
                            std::to_string(fp.rss.size()) + " AP values, expected " +
                            std::to_string(ap_count_));
        }
        for (std::size_t j = 0; j < fp.rss.size(); ++j) {
            if (!(fp.rss[j] >= -100.0 && fp.rss[j] <= 0.0)) {
                throw DataError("rss value " + format_double(fp.rss[j]) +
                                " for AP " + std::to_string(j) + " at rp '" +
                                fp.rp_id + "' outside [-100, 0] dBm");
            }
        }
        auto [coords_it, inserted] =
            rp_coords_.try_emplace(fp.rp_id, fp.x_m, fp.y_m);
        if (!inserted && (coords_it->second.first != fp.x_m ||
                          coords_it->second.second != fp.y_m)) {
            throw DataError("rp '" + fp.rp_id + "' has conflicting coordinates");
        }
        auto [bld_it, bld_inserted] = rp_building.try_emplace(fp.rp_id, fp.building_id);
        if (!bld_inserted && bld_it->second != fp.building_id) {
            throw DataError("rp '" + fp.rp_id + "' appears in buildings '" +
                            bld_it->second + "' and '" + fp.building_id + "'");
        }
        if (!triples.emplace(fp.rp_id, fp.device_id, fp.sample_idx).second) {
            throw DataError("duplicate sample (" + fp.rp_id + ", " + fp.device_id +
                            ", " + std::to_string(fp.sample_idx) + ")");
        }
        devices.insert(fp.device_id);
        buildings.insert(fp.building_id);
    }

    for (const auto& [rp_id, coords] : rp_coords_) {
        rp_index_.emplace(rp_id, rp_ids_.size());
        rp_ids_.push_back(rp_id); // std::map iterates lexicographically
    }
    device_ids_.assign(devices.begin(), devices.end());
    building_ids_.assign(buildings.begin(), buildings.end());
}

bool FingerprintDB::has_rp(const std::string& rp_id) const {
    return rp_index_.count(rp_id) != 0;
}

std::size_t FingerprintDB::class_of(const std::string& rp_id) const {
    auto it = rp_index_.find(rp_id);
    if (it == rp_index_.end()) {
        throw DataError("unknown rp '" + rp_id + "'");
    }
    return it->second;
}

const std::string& FingerprintDB::rp_id_of(std::size_t class_index) const {
    if (class_index >= rp_ids_.size()) {
        throw DataError("class index " + std::to_string(class_index) +
                        " out of range for " + std::to_string(rp_ids_.size()) +
                        " classes");
    }
    return rp_ids_[class_index];
}

std::pair<double, double> FingerprintDB::coords_of(const std::string& rp_id) const {
    auto it = rp_coords_.find(rp_id);
    if (it == rp_coords_.end()) {
        throw DataError("unknown rp '" + rp_id + "'");
    }
    return it->second;
}

FingerprintDB load_db(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }

    std::string line;
    std::size_t line_no = 0;
    std::size_t ap_count = 0;
    bool header_seen = false;
    std::vector<Fingerprint> fingerprints;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view content = trim(line);
        if (content.empty() || content.front() == '#') continue;

        std::vector<std::string_view> fields = split_fields(content);
        if (!header_seen) {
            static const char* kFixed[] = {"building_id", "rp_id", "x_m",
                                           "y_m",         "device_id", "sample_idx"};
            if (fields.size() < 7) {
                throw DataError(line_msg(path, line_no,
                                         "header needs at least one ap_ column"));
            }
            for (std::size_t i = 0; i < 6; ++i) {
                if (fields[i] != kFixed[i]) {
                    throw DataError(line_msg(path, line_no, "header column " +
                                             std::to_string(i) + " is '" +
                                             std::string(fields[i]) + "', expected '" +
                                             kFixed[i] + "'"));
                }
            }
            ap_count = fields.size() - 6;
            for (std::size_t j = 0; j < ap_count; ++j) {
                std::string expected = "ap_" + std::to_string(j);
                if (fields[6 + j] != expected) {
                    throw DataError(line_msg(path, line_no, "header AP column " +
                                             std::to_string(j) + " is '" +
                                             std::string(fields[6 + j]) +
                                             "', expected '" + expected + "'"));
                }
            }
            header_seen = true;
            continue;
        }

        if (fields.size() != 6 + ap_count) {
            throw DataError(line_msg(path, line_no, "expected " +
                                     std::to_string(6 + ap_count) +
                                     " columns, got " +
                                     std::to_string(fields.size())));
        }
        Fingerprint fp;
        fp.building_id = std::string(fields[0]);
        fp.rp_id = std::string(fields[1]);
        fp.x_m = parse_double(fields[2], path, line_no, "x_m");
        fp.y_m = parse_double(fields[3], path, line_no, "y_m");
        fp.device_id = std::string(fields[4]);
        fp.sample_idx = parse_u64(fields[5], path, line_no, "sample_idx");
        if (fp.building_id.empty() || fp.rp_id.empty() || fp.device_id.empty()) {
            throw DataError(line_msg(path, line_no, "empty identifier field"));
        }
        fp.rss.reserve(ap_count);
        for (std::size_t j = 0; j < ap_count; ++j) {
            double v = parse_double(fields[6 + j], path, line_no,
                                    "ap_" + std::to_string(j));
            if (!(v >= -100.0 && v <= 0.0)) {
                throw DataError(line_msg(path, line_no, "ap_" + std::to_string(j) +
                                         " value " + format_double(v) +
                                         " outside [-100, 0] dBm"));
            }
            fp.rss.push_back(v);
        }
        fingerprints.push_back(std::move(fp));
    }

    if (!header_seen) {
        throw DataError("'" + path.string() + "' has no header line");
    }
    try {
        return FingerprintDB(std::move(fingerprints));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_db(const FingerprintDB& db, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << "building_id,rp_id,x_m,y_m,device_id,sample_idx";
    for (std::size_t j = 0; j < db.ap_count(); ++j) out << ",ap_" << j;
    out << "\n";
    for (const Fingerprint& fp : db.fingerprints()) {
        out << fp.building_id << ',' << fp.rp_id << ',' << format_double(fp.x_m)
            << ',' << format_double(fp.y_m) << ',' << fp.device_id << ','
            << fp.sample_idx;
        for (double v : fp.rss) out << ',' << format_double(v);
        out << "\n";
    }
    if (!out.flush()) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

Split split(const FingerprintDB& db, const SplitSpec& spec, std::uint64_t seed) {
    if (spec.train_samples_per_rp < 1) {
        throw ConfigError("train_samples_per_rp must be at least 1");
    }
    const auto& devices = db.device_ids();
    if (std::find(devices.begin(), devices.end(), spec.train_device) ==
        devices.end()) {
        throw DataError("train device '" + spec.train_device +
                        "' absent from database");
    }

    // (class, device) -> fingerprint indices, ordered by sample_idx.
    std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> pool;
    const auto& all = db.fingerprints();
    for (std::size_t i = 0; i < all.size(); ++i) {
        pool[{db.class_of(all[i].rp_id), all[i].device_id}].push_back(i);
    }
    for (auto& [key, indices] : pool) {
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            return all[a].sample_idx < all[b].sample_idx;
        });
    }

    Split result;
    std::vector<char> taken(all.size(), 0);
    for (std::size_t cls = 0; cls < db.class_count(); ++cls) {
        auto it = pool.find({cls, spec.train_device});
        std::size_t available = it == pool.end() ? 0 : it->second.size();
        if (available < spec.train_samples_per_rp) {
            throw DataError("rp '" + db.rp_id_of(cls) + "' has " +
                            std::to_string(available) + " samples on device '" +
                            spec.train_device + "', need " +
                            std::to_string(spec.train_samples_per_rp));
        }
        std::vector<std::size_t> candidates = it->second;
        Rng rng(derive_seed(seed, "split-train", cls));
        rng.shuffle(candidates);
        for (std::size_t s = 0; s < spec.train_samples_per_rp; ++s) {
            result.train.push_back(all[candidates[s]]);
            taken[candidates[s]] = 1;
        }
    }

    for (std::size_t cls = 0; cls < db.class_count(); ++cls) {
        for (std::size_t d = 0; d < devices.size(); ++d) {
            auto it = pool.find({cls, devices[d]});
            std::vector<std::size_t> candidates;
            if (it != pool.end()) {
                for (std::size_t idx : it->second) {
                    if (!taken[idx]) candidates.push_back(idx);
                }
            }
            if (candidates.size() < spec.test_samples_per_rp_per_device) {
                throw DataError("rp '" + db.rp_id_of(cls) + "' has " +
                                std::to_string(candidates.size()) +
                                " test-eligible samples on device '" + devices[d] +
                                "', need " +
                                std::to_string(spec.test_samples_per_rp_per_device));
            }
            Rng rng(derive_seed(seed, "split-test", cls, d));
            rng.shuffle(candidates);
            for (std::size_t s = 0; s < spec.test_samples_per_rp_per_device; ++s) {
                result.test.push_back(all[candidates[s]]);
            }
        }
    }
    return result;
}

GrayscaleImage::GrayscaleImage(numerics::Tensor p) : pixels(std::move(p)) {
    if (pixels.rank() != 3 || pixels.dim(0) != 1 || pixels.dim(2) != 1) {
        throw DataError("grayscale image must be shaped (1, W, 1), got " +
                        numerics::shape_str(pixels.shape()));
    }
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (!(pixels[i] >= 0.0 && pixels[i] <= 1.0)) {
            throw DataError("pixel " + std::to_string(i) + " value " +
                            format_double(pixels[i]) + " outside [0, 1]");
        }
    }
}

GrayscaleImage rss_to_image(const Fingerprint& fp) {
    numerics::Tensor pixels(numerics::Shape{1, fp.rss.size(), 1});
    for (std::size_t j = 0; j < fp.rss.size(); ++j) {
        const double v = fp.rss[j];
        if (!(v >= -100.0 && v <= 0.0)) {
            throw DataError("rss value " + format_double(v) +
                            " outside [-100, 0] dBm");
        }
        pixels[j] = (v + 100.0) / 100.0;
    }
    return GrayscaleImage(std::move(pixels));
}

std::vector<double> image_to_rss(const GrayscaleImage& img) {
    std::vector<double> rss(img.width());
    for (std::size_t j = 0; j < rss.size(); ++j) {
        const double p = img.pixels[j];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DataError("pixel value " + format_double(p) + " outside [0, 1]");
        }
        rss[j] = p * 100.0 - 100.0;
    }
    return rss;
}

} // namespace sentinel::dataset
