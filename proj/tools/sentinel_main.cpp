// sentinel: command line front end for the synthetic-data, training,
// attack and evaluation pipeline.
//
// Verbs: gen, train, attack, eval, sweep, experiment.
// Exit codes: 0 success, 1 usage or config error, 2 data error,
// 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sentinel/adversarial.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/checkpoint.hpp"
#include "sentinel/config_file.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/experiment.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/scenario.hpp"

namespace fs = std::filesystem;
using namespace sentinel;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string data_path;
    std::string ckpt_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;  // single-threaded is the only mode
};

config::Table load_config(const std::string& path) {
    if (path.empty()) {
        throw ConfigError("--config is required for this command");
    }
    return config::parse_file(path);
}

// Reports are opened in binary mode so line endings are identical on
// every platform, which the rerun-determinism guarantee depends on.
std::ofstream open_report(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    return out;
}

void finish_report(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) {
        throw DataError("failed to write " + path.string());
    }
}

fs::path ensure_out_dir(const std::string& out_dir) {
    fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    return dir;
}

// The eval/attack/sweep verbs read their attack settings from the
// [attack] table; absent settings fall back to the given method.
adversarial::AttackConfig attack_from_config(const CommonOpts& opts,
                                             const std::string& default_method) {
    config::Table root;
    if (!opts.config_path.empty()) {
        root = config::parse_file(opts.config_path);
    }
    adversarial::AttackConfig attack;
    std::uint64_t mask_seed =
        opts.seed ? *opts.seed : derive_seed(0, "eval-mask");
    if (root.has_table("attack")) {
        attack = evalcli::attack_from_table(root.table("attack"), mask_seed);
    } else {
        attack = evalcli::attack_from_table(config::Table(), mask_seed);
        attack.method = adversarial::attack_method_from_string(default_method);
    }
    if (opts.seed) {
        attack.mask_seed = *opts.seed;
    }
    adversarial::validate(attack);
    return attack;
}

std::vector<capsnet::Sample> samples_from_db(const dataset::FingerprintDB& db,
                                             const evalcli::LabelMap& labels) {
    std::vector<capsnet::Sample> samples;
    samples.reserve(db.fingerprints().size());
    for (const dataset::Fingerprint& fp : db.fingerprints()) {
        samples.push_back({dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }
    return samples;
}

void write_error_report(const evalcli::ErrorReport& report, const fs::path& path) {
    std::ofstream out = open_report(path);
    out << "device,building,mean_m,best_m,worst_m,samples\n";
    for (const auto& [key, cell] : report.cells) {
        out << key.first << ',' << key.second << ','
            << evalcli::format_double(cell.mean_m) << ','
            << evalcli::format_double(cell.best_m) << ','
            << evalcli::format_double(cell.worst_m) << ','
            << cell.samples << '\n';
    }
    out << "ALL,ALL," << evalcli::format_double(report.overall.mean_m) << ','
        << evalcli::format_double(report.overall.best_m) << ','
        << evalcli::format_double(report.overall.worst_m) << ','
        << report.overall.samples << '\n';
    finish_report(out, path);
}

int cmd_gen(const CommonOpts& opts) {
    config::Table root = load_config(opts.config_path);
    synthgen::ScenarioConfig scenario = synthgen::scenario_from_table(root);
    std::uint64_t seed = opts.seed ? *opts.seed : scenario.seed;
    dataset::FingerprintDB db = synthgen::generate_scenario(scenario, seed);
    fs::path out = ensure_out_dir(opts.out_dir) / "dataset.csv";
    dataset::save_db(db, out);
    std::cout << "wrote " << out.string() << " (" << db.fingerprints().size()
              << " fingerprints, " << db.ap_count() << " aps, "
              << db.class_count() << " classes)\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& variant_flag) {
    config::Table root = load_config(opts.config_path);
    dataset::FingerprintDB db = dataset::load_db(opts.data_path);
    std::uint64_t seed = opts.seed ? *opts.seed : 0;

    std::string variant = variant_flag;
    if (variant.empty()) {
        variant = root.has_table("train")
                      ? root.table("train").get_string_or("method", "NONE")
                      : "NONE";
    }
    adversarial::AttackMethod method =
        adversarial::attack_method_from_string(variant);

    capsnet::ModelConfig model = evalcli::model_from_table(root, seed);
    model.input_width = db.ap_count();
    model.class_count = db.class_count();

    dataset::SplitSpec spec = evalcli::split_from_table(root);
    dataset::Split split = dataset::split(db, spec, seed);

    evalcli::LabelMap labels = evalcli::LabelMap::from_db(db);
    std::vector<capsnet::Sample> train_set;
    train_set.reserve(split.train.size());
    for (const dataset::Fingerprint& fp : split.train) {
        train_set.push_back(
            {dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }

    std::optional<adversarial::AttackConfig> adv;
    if (method != adversarial::AttackMethod::NONE) {
        config::Table empty;
        const config::Table& t =
            root.has_table("train") ? root.table("train") : empty;
        adversarial::AttackConfig cfg = evalcli::attack_from_table(
            t, derive_seed(seed, "train-mask"));
        cfg.method = method;
        adversarial::validate(cfg);
        adv = cfg;
    }

    capsnet::TrainResult result =
        capsnet::train(capsnet::init(model), model, train_set, adv,
                       derive_seed(seed, "train-" + variant));

    fs::path dir = ensure_out_dir(opts.out_dir);
    fs::path ckpt_path = dir / ("model_" + variant + ".ckpt");
    capsnet::save_checkpoint({model, result.params, labels.labels()}, ckpt_path);

    fs::path loss_path = dir / ("loss_" + variant + ".csv");
    std::ofstream loss = open_report(loss_path);
    loss << "epoch,loss\n";
    for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
        loss << e << ',' << evalcli::format_double(result.loss_curve[e]) << '\n';
    }
    finish_report(loss, loss_path);

    std::cout << "wrote " << ckpt_path.string() << " (" << split.train.size()
              << " train samples, final loss "
              << evalcli::format_double(result.loss_curve.empty()
                                            ? 0.0
                                            : result.loss_curve.back())
              << ")\n";
    return 0;
}

int cmd_attack(const CommonOpts& opts) {
    capsnet::Checkpoint ckpt = capsnet::load_checkpoint(opts.ckpt_path);
    dataset::FingerprintDB db = dataset::load_db(opts.data_path);
    adversarial::AttackConfig attack = attack_from_config(opts, "FGSM");

    evalcli::LabelMap labels = evalcli::LabelMap::from_labels(ckpt.labels);
    if (db.ap_count() != ckpt.config.input_width) {
        throw DataError("dataset has " + std::to_string(db.ap_count()) +
                                " aps but the checkpoint expects " +
                                std::to_string(ckpt.config.input_width));
    }
    std::vector<capsnet::Sample> samples = samples_from_db(db, labels);
    std::vector<capsnet::Sample> attacked =
        adversarial::attack_dataset(ckpt.params, ckpt.config, samples, attack);

    std::vector<dataset::Fingerprint> rows = db.fingerprints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].rss = dataset::image_to_rss(attacked[i].image);
    }
    fs::path out = ensure_out_dir(opts.out_dir) / "adversarial.csv";
    dataset::save_db(dataset::FingerprintDB(std::move(rows)), out);
    std::cout << "wrote " << out.string() << " ("
              << adversarial::to_string(attack.method) << " eps "
              << evalcli::format_double(attack.eps) << " phi "
              << evalcli::format_double(attack.phi) << ")\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts) {
    capsnet::Checkpoint ckpt = capsnet::load_checkpoint(opts.ckpt_path);
    dataset::FingerprintDB db = dataset::load_db(opts.data_path);
    adversarial::AttackConfig attack = attack_from_config(opts, "NONE");

    evalcli::LabelMap labels = evalcli::LabelMap::from_labels(ckpt.labels);
    evalcli::ErrorReport report = evalcli::evaluate(
        ckpt.params, ckpt.config, labels, db.fingerprints(), attack);

    if (!opts.out_dir.empty()) {
        fs::path out = ensure_out_dir(opts.out_dir) / "error_report.csv";
        write_error_report(report, out);
        std::cout << "wrote " << out.string() << '\n';
    }
    std::cout << "attack " << adversarial::to_string(attack.method)
              << " mean error " << evalcli::format_double(report.overall.mean_m)
              << " m over " << report.overall.samples << " samples (best "
              << evalcli::format_double(report.overall.best_m) << ", worst "
              << evalcli::format_double(report.overall.worst_m) << ")\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& kind) {
    if (kind != "phi" && kind != "eps") {
        throw ConfigError("--kind must be phi or eps");
    }
    capsnet::Checkpoint ckpt = capsnet::load_checkpoint(opts.ckpt_path);
    dataset::FingerprintDB db = dataset::load_db(opts.data_path);
    adversarial::AttackConfig base = attack_from_config(opts, "FGSM");
    if (base.method == adversarial::AttackMethod::NONE) {
        throw ConfigError("sweep needs an attack method, not NONE");
    }

    evalcli::LabelMap labels = evalcli::LabelMap::from_labels(ckpt.labels);
    evalcli::SweepTable table;
    if (kind == "phi") {
        table = evalcli::sweep_phi(ckpt.params, ckpt.config, labels,
                                   db.fingerprints(), base);
    } else {
        std::vector<double> phis;
        for (int phi = 0; phi <= 100; phi += 10) {
            phis.push_back(static_cast<double>(phi));
        }
        table = evalcli::sweep_eps(ckpt.params, ckpt.config, labels,
                                   db.fingerprints(), base, phis);
    }

    fs::path out = ensure_out_dir(opts.out_dir) / ("sweep_" + kind + ".csv");
    std::ofstream csv = open_report(out);
    csv << table.axis_name << ",mean_error_m\n";
    for (std::size_t i = 0; i < table.axis.size(); ++i) {
        csv << evalcli::format_double(table.axis[i]) << ','
            << evalcli::format_double(table.mean_error_m[i]) << '\n';
    }
    finish_report(csv, out);
    std::cout << "wrote " << out.string() << " (" << table.axis.size()
              << " rows)\n";
    return 0;
}

int cmd_experiment(const CommonOpts& opts) {
    config::Table root = load_config(opts.config_path);
    evalcli::ExperimentConfig cfg =
        evalcli::experiment_from_table(root, opts.seed);
    fs::path dir = ensure_out_dir(opts.out_dir);
    evalcli::run_experiment(cfg, dir);
    std::cout << "wrote reports for " << cfg.name << " to " << dir.string()
              << '\n';
    return 0;
}

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool with_config) {
    if (with_config) {
        cmd->add_option("--config", opts.config_path, "TOML config file");
    }
    cmd->add_option("--seed", opts.seed, "seed override");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_flag("--deterministic", opts.deterministic,
                  "single-threaded deterministic execution (always on)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sentinel: capsule-network indoor localization pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string variant;
    std::string kind;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    add_common_flags(gen, opts, true);
    gen->get_option("--config")->required();
    gen->get_option("--out")->required();

    CLI::App* train = app.add_subcommand("train", "train a model variant");
    add_common_flags(train, opts, true);
    train->add_option("--data", opts.data_path, "fingerprint CSV")->required();
    train->add_option("--variant", variant,
                      "training variant: NONE, FGSM, PGD or MIM");
    train->get_option("--config")->required();
    train->get_option("--out")->required();

    CLI::App* attack = app.add_subcommand("attack", "write a perturbed dataset");
    add_common_flags(attack, opts, true);
    attack->add_option("--ckpt", opts.ckpt_path, "model checkpoint")->required();
    attack->add_option("--data", opts.data_path, "fingerprint CSV")->required();
    attack->get_option("--out")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common_flags(eval, opts, true);
    eval->add_option("--ckpt", opts.ckpt_path, "model checkpoint")->required();
    eval->add_option("--data", opts.data_path, "fingerprint CSV")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "phi or eps sweep");
    add_common_flags(sweep, opts, true);
    sweep->add_option("--kind", kind, "phi or eps")->required();
    sweep->add_option("--ckpt", opts.ckpt_path, "model checkpoint")->required();
    sweep->add_option("--data", opts.data_path, "fingerprint CSV")->required();
    sweep->get_option("--out")->required();

    CLI::App* experiment =
        app.add_subcommand("experiment", "full pipeline from one config");
    add_common_flags(experiment, opts, true);
    experiment->get_option("--config")->required();
    experiment->get_option("--out")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(opts);
        if (train->parsed()) return cmd_train(opts, variant);
        if (attack->parsed()) return cmd_attack(opts);
        if (eval->parsed()) return cmd_eval(opts);
        if (sweep->parsed()) return cmd_sweep(opts, kind);
        if (experiment->parsed()) return cmd_experiment(opts);
        std::cerr << "error: no command given\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
