#include "sentinel/experiment.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::evalcli {

namespace {

using json = nlohmann::ordered_json;

std::uint64_t mix_u64(std::uint64_t h, std::uint64_t v) {
    return fnv1a(&v, sizeof(v), h);
}

std::uint64_t mix_f64(std::uint64_t h, double v) {
    return fnv1a(&v, sizeof(v), h);
}

std::uint64_t mix_str(std::uint64_t h, const std::string& s) {
    h = mix_u64(h, s.size());
    return fnv1a(s, h);
}

std::uint64_t attack_mix(std::uint64_t h,
                         const adversarial::AttackConfig& attack) {
    h = mix_u64(h, static_cast<std::uint64_t>(attack.method));
    h = mix_f64(h, attack.eps);
    h = mix_f64(h, attack.phi);
    h = mix_u64(h, attack.iters);
    h = mix_f64(h, attack.alpha);
    h = mix_u64(h, attack.mask_seed);
    return mix_u64(h, attack.mim_literal ? 1 : 0);
}

// Fingerprint of everything that shapes the report files.
std::uint64_t experiment_fingerprint(const ExperimentConfig& cfg) {
    std::uint64_t h = mix_str(fnv1a("experiment"), cfg.name);
    h = mix_u64(h, cfg.seed);
    for (const std::string& variant : cfg.variants) h = mix_str(h, variant);
    h = mix_u64(h, cfg.sweeps ? 1 : 0);
    for (const auto& b : cfg.scenario.buildings) {
        h = mix_str(h, b.id);
        h = mix_u64(h, b.num_aps);
        h = mix_f64(h, b.path_length);
        h = mix_f64(h, b.rp_spacing);
        h = mix_f64(h, b.y_offset);
        for (std::size_t r = 0; r < b.rogues.rogue_count(); ++r) {
            h = mix_u64(h, b.rogues.target_aps[r]);
            h = mix_f64(h, b.rogues.rogue_positions[r].first);
            h = mix_f64(h, b.rogues.rogue_positions[r].second);
            h = mix_f64(h, b.rogues.rogue_tx_power_dbm[r]);
        }
    }
    for (const auto& d : cfg.scenario.devices) {
        h = mix_str(h, d.device_id);
        h = mix_f64(h, d.rss_offset_dbm);
        h = mix_f64(h, d.noise_sigma_dbm);
    }
    h = mix_u64(h, cfg.scenario.samples_per_rp_per_device);
    h = mix_str(h, cfg.split.train_device);
    h = mix_u64(h, cfg.split.train_samples_per_rp);
    h = mix_u64(h, cfg.split.test_samples_per_rp_per_device);
    h = mix_u64(h, cfg.model.conv_filters);
    h = mix_u64(h, cfg.model.conv_kernel);
    h = mix_u64(h, cfg.model.pc_capsules);
    h = mix_u64(h, cfg.model.pc_dim);
    h = mix_u64(h, cfg.model.oc_dim);
    h = mix_u64(h, cfg.model.routing_iters);
    h = mix_u64(h, cfg.model.epochs);
    h = mix_f64(h, cfg.model.lr);
    h = mix_u64(h, cfg.model.batch_size);
    h = mix_u64(h, cfg.model.init_seed);
    h = attack_mix(h, cfg.train_attack);
    return attack_mix(h, cfg.eval_attack);
}

std::ofstream open_report(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // LF line ends everywhere
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<double>& curve) {
    std::ofstream out = open_report(path);
    out << "epoch,mean_loss\n";
    for (std::size_t epoch = 0; epoch < curve.size(); ++epoch) {
        out << epoch << ',' << format_double(curve[epoch]) << "\n";
    }
    if (!out.flush()) throw DataError("failed writing '" + path.string() + "'");
}

void write_report_rows(std::ofstream& out, const std::string& variant,
                       const adversarial::AttackConfig& attack,
                       const ErrorReport& report) {
    const std::string prefix = variant + ',' + to_string(attack.method) + ',' +
                               format_double(attack.eps) + ',' +
                               format_double(attack.phi) + ',';
    for (const auto& [key, cell] : report.cells) {
        out << prefix << key.first << ',' << key.second << ','
            << format_double(cell.mean_m) << ',' << format_double(cell.best_m)
            << ',' << format_double(cell.worst_m) << ',' << cell.samples
            << "\n";
    }
    out << prefix << "ALL,ALL," << format_double(report.overall.mean_m) << ','
        << format_double(report.overall.best_m) << ','
        << format_double(report.overall.worst_m) << ','
        << report.overall.samples << "\n";
}

} // namespace

capsnet::ModelConfig model_from_table(const config::Table& root,
                                      std::uint64_t default_seed) {
    capsnet::ModelConfig model;
    const std::uint64_t derived_init = derive_seed(default_seed, "model-init-seed");
    if (!root.has_table("model")) {
        model.init_seed = derived_init;
        return model;
    }
    const config::Table& t = root.table("model");
    model.conv_filters = t.get_u64_or("conv_filters", model.conv_filters);
    model.conv_kernel = t.get_u64_or("conv_kernel", model.conv_kernel);
    model.pc_capsules = t.get_u64_or("pc_capsules", model.pc_capsules);
    model.pc_dim = t.get_u64_or("pc_dim", model.pc_dim);
    model.oc_dim = t.get_u64_or("oc_dim", model.oc_dim);
    model.routing_iters = t.get_u64_or("routing_iters", model.routing_iters);
    model.epochs = t.get_u64_or("epochs", model.epochs);
    model.lr = t.get_f64_or("lr", model.lr);
    model.batch_size = t.get_u64_or("batch_size", model.batch_size);
    model.init_seed = t.get_u64_or("init_seed", derived_init);
    return model;
}

dataset::SplitSpec split_from_table(const config::Table& root) {
    if (!root.has_table("split")) {
        throw ConfigError("config needs a [split] table with train_device");
    }
    const config::Table& t = root.table("split");
    dataset::SplitSpec spec;
    spec.train_device = t.get_string("train_device");
    spec.train_samples_per_rp = t.get_u64_or("train_samples_per_rp", 5);
    spec.test_samples_per_rp_per_device =
        t.get_u64_or("test_samples_per_rp_per_device", 1);
    return spec;
}

adversarial::AttackConfig attack_from_table(const config::Table& table,
                                            std::uint64_t default_mask_seed) {
    adversarial::AttackConfig attack;
    attack.method =
        adversarial::attack_method_from_string(table.get_string_or("method", "FGSM"));
    attack.eps = table.get_f64_or("eps", 0.1);
    attack.phi = table.get_f64_or("phi", 100.0);
    attack.iters = table.get_u64_or("iters", 10);
    attack.alpha = table.get_f64_or("alpha", 0.9);
    attack.mask_seed = table.get_u64_or("mask_seed", default_mask_seed);
    attack.mim_literal = table.get_bool_or("mim_literal", false);
    adversarial::validate(attack);
    return attack;
}

ExperimentConfig experiment_from_table(
    const config::Table& root, std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg;
    if (root.has_table("experiment")) {
        const config::Table& t = root.table("experiment");
        cfg.name = t.get_string_or("name", cfg.name);
        cfg.seed = t.get_u64_or("seed", cfg.seed);
        if (t.has("variants")) {
            cfg.variants = t.get_string_array_or("variants");
        }
        cfg.sweeps = t.get_bool_or("sweeps", cfg.sweeps);
    }
    if (seed_override) cfg.seed = *seed_override;
    if (cfg.variants.empty()) {
        throw ConfigError("experiment needs at least one variant");
    }
    std::set<std::string> seen;
    for (const std::string& variant : cfg.variants) {
        adversarial::attack_method_from_string(variant);  // validates the name
        if (!seen.insert(variant).second) {
            throw ConfigError("duplicate variant '" + variant + "'");
        }
    }

    cfg.scenario = synthgen::scenario_from_table(root);
    cfg.split = split_from_table(root);
    cfg.model = model_from_table(root, cfg.seed);

    if (root.has_table("train")) {
        cfg.train_attack = attack_from_table(root.table("train"),
                                             derive_seed(cfg.seed, "train-mask"));
    } else {
        cfg.train_attack.mask_seed = derive_seed(cfg.seed, "train-mask");
    }
    if (root.has_table("attack")) {
        cfg.eval_attack = attack_from_table(root.table("attack"),
                                            derive_seed(cfg.seed, "eval-mask"));
    } else {
        cfg.eval_attack.method = adversarial::AttackMethod::FGSM;
        cfg.eval_attack.mask_seed = derive_seed(cfg.seed, "eval-mask");
    }
    return cfg;
}

void run_experiment(const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::uint64_t fingerprint = experiment_fingerprint(cfg);

    dataset::FingerprintDB db = synthgen::generate_scenario(
        cfg.scenario, cfg.scenario.seed != 0 ? cfg.scenario.seed : cfg.seed);
    dataset::save_db(db, out_dir / "dataset.csv");

    capsnet::ModelConfig model = cfg.model;
    model.input_width = db.ap_count();
    model.class_count = db.class_count();
    capsnet::validate(model);

    const LabelMap labels = LabelMap::from_db(db);
    dataset::Split split = dataset::split(db, cfg.split, cfg.seed);
    std::vector<capsnet::Sample> train_samples;
    train_samples.reserve(split.train.size());
    for (const dataset::Fingerprint& fp : split.train) {
        train_samples.push_back(
            {dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }

    json summary;
    summary["name"] = cfg.name;
    summary["seed"] = cfg.seed;
    summary["config_fingerprint"] = std::to_string(fingerprint);
    summary["weighting"] = "per-sample";
    summary["dataset"] = {{"fingerprints", db.fingerprints().size()},
                          {"ap_count", db.ap_count()},
                          {"classes", db.class_count()},
                          {"devices", db.device_ids()},
                          {"buildings", db.building_ids()},
                          {"train_samples", split.train.size()},
                          {"test_samples", split.test.size()}};
    summary["model"] = {{"trainable_params", capsnet::count_params(model)},
                        {"epochs", model.epochs},
                        {"lr", model.lr},
                        {"batch_size", model.batch_size},
                        {"routing_iters", model.routing_iters}};
    summary["attack"] = {{"method", to_string(cfg.eval_attack.method)},
                         {"eps", cfg.eval_attack.eps},
                         {"phi", cfg.eval_attack.phi},
                         {"iters", cfg.eval_attack.iters},
                         {"alpha", cfg.eval_attack.alpha}};

    adversarial::AttackConfig clean_attack;
    clean_attack.method = adversarial::AttackMethod::NONE;
    clean_attack.eps = 0.0;
    clean_attack.phi = 0.0;

    std::ofstream report_csv = open_report(out_dir / "error_report.csv");
    report_csv << "variant,attack,eps,phi,device,building,mean_m,best_m,"
                  "worst_m,samples\n";
    std::ofstream phi_csv, eps_csv;
    if (cfg.sweeps) {
        phi_csv = open_report(out_dir / "sweep_phi.csv");
        phi_csv << "variant,method,eps,phi,mean_error_m\n";
        eps_csv = open_report(out_dir / "sweep_eps.csv");
        eps_csv << "variant,method,eps,mean_error_m\n";
    }
    std::vector<double> phi_grid;
    for (int phi = 0; phi <= 100; phi += 10) {
        phi_grid.push_back(static_cast<double>(phi));
    }

    json variants_json;
    double none_attacked_mean = -1.0;
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
        const std::string& variant = cfg.variants[v];
        const adversarial::AttackMethod method =
            adversarial::attack_method_from_string(variant);

        std::optional<adversarial::AttackConfig> adv;
        if (method != adversarial::AttackMethod::NONE) {
            adv = cfg.train_attack;
            adv->method = method;
        }

        const std::filesystem::path ckpt_path =
            out_dir / ("model_" + variant + ".ckpt");
        capsnet::Checkpoint ckpt;
        bool reused = false;
        if (std::filesystem::exists(ckpt_path)) {
            try {
                capsnet::Checkpoint loaded = capsnet::load_checkpoint(ckpt_path);
                if (loaded.config == model &&
                    loaded.labels.size() == labels.class_count()) {
                    ckpt = std::move(loaded);
                    reused = true;
                }
            } catch (const DataError&) {
                // stale or foreign file: retrain below and overwrite
            }
        }
        if (!reused) {
            capsnet::TrainResult trained = capsnet::train(
                capsnet::init(model), model, train_samples, adv,
                derive_seed(cfg.seed, "train-" + variant));
            ckpt.config = model;
            ckpt.params = std::move(trained.params);
            ckpt.labels = labels.labels();
            capsnet::save_checkpoint(ckpt, ckpt_path);
            write_loss_curve(out_dir / ("loss_" + variant + ".csv"),
                             trained.loss_curve);
        }

        ErrorReport clean_report =
            evaluate(ckpt.params, model, labels, split.test, clean_attack);
        ErrorReport attacked_report =
            evaluate(ckpt.params, model, labels, split.test, cfg.eval_attack);
        write_report_rows(report_csv, variant, clean_attack, clean_report);
        write_report_rows(report_csv, variant, cfg.eval_attack, attacked_report);

        json entry;
        entry["clean_mean_m"] = clean_report.overall.mean_m;
        entry["attacked_mean_m"] = attacked_report.overall.mean_m;
        if (method == adversarial::AttackMethod::NONE) {
            none_attacked_mean = attacked_report.overall.mean_m;
        }
        variants_json[variant] = std::move(entry);

        if (cfg.sweeps) {
            adversarial::AttackConfig base = cfg.eval_attack;
            base.eps = 0.1;
            SweepTable phi_table =
                sweep_phi(ckpt.params, model, labels, split.test, base);
            for (std::size_t i = 0; i < phi_table.axis.size(); ++i) {
                phi_csv << variant << ',' << to_string(base.method) << ','
                        << format_double(base.eps) << ','
                        << format_double(phi_table.axis[i]) << ','
                        << format_double(phi_table.mean_error_m[i]) << "\n";
            }
            SweepTable eps_table = sweep_eps(ckpt.params, model, labels,
                                             split.test, cfg.eval_attack,
                                             phi_grid);
            for (std::size_t i = 0; i < eps_table.axis.size(); ++i) {
                eps_csv << variant << ',' << to_string(cfg.eval_attack.method)
                        << ',' << format_double(eps_table.axis[i]) << ','
                        << format_double(eps_table.mean_error_m[i]) << "\n";
            }
        }
    }

    // Mean-error quotients against the undefended variant under attack.
    if (none_attacked_mean >= 0.0) {
        for (auto& [variant, entry] : variants_json.items()) {
            if (variant == "NONE") continue;
            const double attacked = entry["attacked_mean_m"].get<double>();
            if (attacked > 0.0) {
                entry["none_over_variant_attacked_ratio"] =
                    none_attacked_mean / attacked;
            }
        }
    }
    summary["variants"] = std::move(variants_json);

    if (!report_csv.flush()) {
        throw DataError("failed writing error_report.csv");
    }
    if (cfg.sweeps) {
        if (!phi_csv.flush() || !eps_csv.flush()) {
            throw DataError("failed writing sweep tables");
        }
    }
    std::ofstream summary_file = open_report(out_dir / "summary.json");
    summary_file << summary.dump(2) << "\n";
    if (!summary_file.flush()) {
        throw DataError("failed writing summary.json");
    }
}

} // namespace sentinel::evalcli
