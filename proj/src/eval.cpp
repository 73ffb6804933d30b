#include "sentinel/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::evalcli {

LabelMap LabelMap::from_db(const dataset::FingerprintDB& db) {
    std::vector<capsnet::LabelInfo> labels;
    labels.reserve(db.class_count());
    for (std::size_t cls = 0; cls < db.class_count(); ++cls) {
        const std::string& rp_id = db.rp_id_of(cls);
        const auto [x, y] = db.coords_of(rp_id);
        labels.push_back({rp_id, x, y});
    }
    return from_labels(std::move(labels));
}

LabelMap LabelMap::from_labels(std::vector<capsnet::LabelInfo> labels) {
    LabelMap map;
    map.labels_ = std::move(labels);
    for (std::size_t cls = 0; cls < map.labels_.size(); ++cls) {
        if (!map.index_.emplace(map.labels_[cls].rp_id, cls).second) {
            throw DataError("duplicate rp '" + map.labels_[cls].rp_id +
                            "' in label map");
        }
    }
    if (map.labels_.empty()) throw DataError("label map is empty");
    return map;
}

std::size_t LabelMap::class_of(const std::string& rp_id) const {
    auto it = index_.find(rp_id);
    if (it == index_.end()) {
        throw DataError("rp '" + rp_id + "' is not among the model's classes");
    }
    return it->second;
}

std::pair<double, double> LabelMap::coords_of(std::size_t class_index) const {
    if (class_index >= labels_.size()) {
        throw DataError("class index " + std::to_string(class_index) +
                        " out of range for " + std::to_string(labels_.size()) +
                        " classes");
    }
    return {labels_[class_index].x_m, labels_[class_index].y_m};
}

const std::string& LabelMap::rp_id_of(std::size_t class_index) const {
    if (class_index >= labels_.size()) {
        throw DataError("class index " + std::to_string(class_index) +
                        " out of range for " + std::to_string(labels_.size()) +
                        " classes");
    }
    return labels_[class_index].rp_id;
}

double localization_error(std::size_t predicted_class, std::size_t true_class,
                          const LabelMap& labels) {
    const auto [px, py] = labels.coords_of(predicted_class);
    const auto [tx, ty] = labels.coords_of(true_class);
    const double dx = px - tx;
    const double dy = py - ty;
    return std::sqrt(dx * dx + dy * dy);
}

namespace {

std::uint64_t attack_fingerprint(const capsnet::ModelConfig& config,
                                 const adversarial::AttackConfig& attack) {
    std::uint64_t h = capsnet::config_hash(config);
    const auto mix_u64 = [&h](std::uint64_t v) { h = fnv1a(&v, sizeof(v), h); };
    const auto mix_f64 = [&h](double v) { h = fnv1a(&v, sizeof(v), h); };
    mix_u64(static_cast<std::uint64_t>(attack.method));
    mix_f64(attack.eps);
    mix_f64(attack.phi);
    mix_u64(attack.iters);
    mix_f64(attack.alpha);
    mix_u64(attack.mask_seed);
    mix_u64(attack.mim_literal ? 1 : 0);
    return h;
}

struct Accumulator {
    double sum = 0.0;
    double best = 0.0;
    double worst = 0.0;
    std::size_t samples = 0;

    void add(double err) {
        if (samples == 0) {
            best = worst = err;
        } else {
            best = std::min(best, err);
            worst = std::max(worst, err);
        }
        sum += err;
        ++samples;
    }

    ErrorCell cell() const {
        return {sum / static_cast<double>(samples), best, worst, samples};
    }
};

} // namespace

ErrorReport evaluate(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     const adversarial::AttackConfig& attack) {
    adversarial::validate(attack);
    if (test_set.empty()) throw DataError("test set is empty");
    if (labels.class_count() != config.class_count) {
        throw ConfigError("label map has " +
                          std::to_string(labels.class_count()) +
                          " classes, model expects " +
                          std::to_string(config.class_count));
    }

    std::vector<capsnet::Sample> samples;
    samples.reserve(test_set.size());
    for (const dataset::Fingerprint& fp : test_set) {
        samples.push_back(
            {dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }
    if (attack.method != adversarial::AttackMethod::NONE) {
        samples = adversarial::attack_dataset(params, config, samples, attack);
    }

    std::map<std::pair<std::string, std::string>, Accumulator> cells;
    Accumulator overall;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        capsnet::ForwardTrace trace =
            capsnet::forward(params, config, samples[i].image);
        const std::size_t predicted = capsnet::predict(trace);
        const double err =
            localization_error(predicted, samples[i].label, labels);
        cells[{test_set[i].device_id, test_set[i].building_id}].add(err);
        overall.add(err);
    }

    ErrorReport report;
    for (const auto& [key, acc] : cells) {
        report.cells.emplace(key, acc.cell());
    }
    report.overall = overall.cell();
    report.config_fingerprint = attack_fingerprint(config, attack);
    return report;
}

SweepTable sweep_phi(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     adversarial::AttackConfig base) {
    SweepTable table;
    table.axis_name = "phi";
    for (int phi = 0; phi <= 100; phi += 10) {
        base.phi = static_cast<double>(phi);
        ErrorReport report = evaluate(params, config, labels, test_set, base);
        table.axis.push_back(base.phi);
        table.mean_error_m.push_back(report.overall.mean_m);
    }
    return table;
}

SweepTable sweep_eps(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     adversarial::AttackConfig base,
                     const std::vector<double>& phi_values) {
    if (phi_values.empty()) {
        throw ConfigError("sweep_eps needs at least one phi value");
    }
    SweepTable table;
    table.axis_name = "eps";
    for (int step = 0; step <= 5; ++step) {
        base.eps = static_cast<double>(step) / 10.0;
        double sum = 0.0;
        for (double phi : phi_values) {
            base.phi = phi;
            ErrorReport report =
                evaluate(params, config, labels, test_set, base);
            sum += report.overall.mean_m;
        }
        table.axis.push_back(base.eps);
        table.mean_error_m.push_back(sum /
                                     static_cast<double>(phi_values.size()));
    }
    return table;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace sentinel::evalcli
