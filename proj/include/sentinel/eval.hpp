#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sentinel/adversarial.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/checkpoint.hpp"
#include "sentinel/dataset.hpp"

namespace sentinel::evalcli {

// Class-index space shared between a model and the data it is evaluated
// on. Built either from a FingerprintDB (training time) or from checkpoint
// labels (a trained model is evaluated in its own index space).
class LabelMap {
public:
    static LabelMap from_db(const dataset::FingerprintDB& db);
    static LabelMap from_labels(std::vector<capsnet::LabelInfo> labels);

    std::size_t class_count() const { return labels_.size(); }
    std::size_t class_of(const std::string& rp_id) const;
    std::pair<double, double> coords_of(std::size_t class_index) const;
    const std::string& rp_id_of(std::size_t class_index) const;
    const std::vector<capsnet::LabelInfo>& labels() const { return labels_; }

private:
    std::vector<capsnet::LabelInfo> labels_;
    std::map<std::string, std::size_t> index_;
};

// Straight-line distance in meters between predicted and true RP.
double localization_error(std::size_t predicted_class, std::size_t true_class,
                          const LabelMap& labels);

struct ErrorCell {
    double mean_m = 0.0;
    double best_m = 0.0;
    double worst_m = 0.0;
    std::size_t samples = 0;
};

struct ErrorReport {
    // One cell per (device, building) present in the test set, plus the
    // all-sample aggregate. Samples are weighted uniformly.
    std::map<std::pair<std::string, std::string>, ErrorCell> cells;
    ErrorCell overall;
    std::uint64_t config_fingerprint = 0;
    std::string weighting = "per-sample";
};

// Applies the attack (method NONE evaluates clean data), predicts every
// fingerprint, aggregates localization error per (device, building).
ErrorReport evaluate(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     const adversarial::AttackConfig& attack);

struct SweepTable {
    std::string axis_name;  // "phi" or "eps"
    std::vector<double> axis;
    std::vector<double> mean_error_m;
};

// Mean error at phi in {0, 10, ..., 100}, attack strength fixed by
// base.eps (0.1 by convention).
SweepTable sweep_phi(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     adversarial::AttackConfig base);

// Mean error at eps in {0, 0.1, ..., 0.5}, each point averaged over the
// given phi values (per-sample means averaged uniformly across phi).
SweepTable sweep_eps(const capsnet::ModelParams& params,
                     const capsnet::ModelConfig& config,
                     const LabelMap& labels,
                     const std::vector<dataset::Fingerprint>& test_set,
                     adversarial::AttackConfig base,
                     const std::vector<double>& phi_values);

// Shortest round-trip decimal form, shared by every report writer so
// reruns are byte-identical.
std::string format_double(double v);

} // namespace sentinel::evalcli
