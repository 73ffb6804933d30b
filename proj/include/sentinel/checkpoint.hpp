#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sentinel/capsnet.hpp"

namespace sentinel::capsnet {

// Class-index to reference-point mapping, carried inside checkpoints so a
// trained model is self-contained for evaluation: index i predicts
// labels[i].rp_id at (x_m, y_m).
struct LabelInfo {
    std::string rp_id;
    double x_m = 0.0;
    double y_m = 0.0;
};

struct Checkpoint {
    ModelConfig config;
    ModelParams params;
    std::vector<LabelInfo> labels;  // size == config.class_count
};

// FNV-1a over the serialized config block; stored in the file and
// revalidated on load, so a checkpoint trained under one architecture is
// refused by any other.
std::uint64_t config_hash(const ModelConfig& config);

// Binary format (documented byte-exactly in docs/checkpoint_format.md).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace sentinel::capsnet
