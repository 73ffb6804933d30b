#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/adversarial.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/config_file.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/scenario.hpp"

namespace sentinel::evalcli {

// Full pipeline description: synthetic scenario, split protocol, model
// hyperparameters, the variants to train ("NONE", "FGSM", "PGD", "MIM"),
// training-time attack settings, and the evaluation attack.
struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;
    std::vector<std::string> variants{"NONE", "FGSM", "PGD", "MIM"};
    bool sweeps = true;
    synthgen::ScenarioConfig scenario;
    dataset::SplitSpec split;
    capsnet::ModelConfig model;  // input_width/class_count filled at run time
    adversarial::AttackConfig train_attack;  // method replaced per variant
    adversarial::AttackConfig eval_attack;
};

// Section parsers, shared by the experiment loader and the CLI verbs.
// Seeds not given explicitly in the file are derived from default_seed.
capsnet::ModelConfig model_from_table(const config::Table& root,
                                      std::uint64_t default_seed);
dataset::SplitSpec split_from_table(const config::Table& root);
adversarial::AttackConfig attack_from_table(const config::Table& table,
                                            std::uint64_t default_mask_seed);

ExperimentConfig experiment_from_table(
    const config::Table& root, std::optional<std::uint64_t> seed_override);

// Generates the dataset, trains (or reloads) every variant, evaluates
// clean and attacked error, optionally runs both sweeps, and writes
// dataset.csv, model_<variant>.ckpt, loss_<variant>.csv,
// error_report.csv, sweep_phi.csv, sweep_eps.csv and summary.json into
// out_dir. Single-threaded and deterministic: identical config and seed
// give byte-identical report files.
void run_experiment(const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir);

} // namespace sentinel::evalcli
