// Python bindings for the sentinel pipeline. The surface mirrors the CLI
// verbs (file-oriented) plus the low-level numeric operations.
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

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
#include "sentinel/tensor.hpp"

namespace py = pybind11;
using namespace sentinel;

namespace {

namespace fs = std::filesystem;

adversarial::AttackConfig make_attack(const std::string& method, double eps,
                                      double phi, std::size_t iters,
                                      double alpha, std::uint64_t mask_seed,
                                      bool mim_literal) {
    adversarial::AttackConfig atk;
    atk.method = adversarial::attack_method_from_string(method);
    atk.eps = eps;
    atk.phi = phi;
    atk.iters = iters;
    atk.alpha = alpha;
    atk.mask_seed = mask_seed;
    atk.mim_literal = mim_literal;
    adversarial::validate(atk);
    return atk;
}

numerics::Tensor vector_tensor(const std::vector<double>& v) {
    numerics::Tensor t(numerics::Shape{v.size()});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i];
    return t;
}

std::vector<double> tensor_vector(const numerics::Tensor& t) {
    return std::vector<double>(t.data(), t.data() + t.size());
}

py::dict cell_dict(const evalcli::ErrorCell& cell) {
    py::dict d;
    d["mean_m"] = cell.mean_m;
    d["best_m"] = cell.best_m;
    d["worst_m"] = cell.worst_m;
    d["samples"] = cell.samples;
    return d;
}

py::dict generate_dataset(const std::string& config_text,
                          const fs::path& out_csv,
                          std::optional<std::uint64_t> seed) {
    const config::Table root = config::parse_string(config_text, "<config>");
    const synthgen::ScenarioConfig scenario = synthgen::scenario_from_table(root);
    const dataset::FingerprintDB db = synthgen::generate_scenario(
        scenario, seed ? *seed : scenario.seed);
    dataset::save_db(db, out_csv);
    py::dict d;
    d["fingerprints"] = db.fingerprints().size();
    d["ap_count"] = db.ap_count();
    d["classes"] = db.class_count();
    d["devices"] = db.device_ids();
    d["buildings"] = db.building_ids();
    return d;
}

std::vector<double> train(const fs::path& data_csv, const fs::path& out_ckpt,
                          const std::string& config_text,
                          const std::string& variant, std::uint64_t seed) {
    const config::Table root = config::parse_string(config_text, "<config>");
    const dataset::FingerprintDB db = dataset::load_db(data_csv);
    const adversarial::AttackMethod method =
        adversarial::attack_method_from_string(variant);

    capsnet::ModelConfig model = evalcli::model_from_table(root, seed);
    model.input_width = db.ap_count();
    model.class_count = db.class_count();

    const dataset::SplitSpec spec = evalcli::split_from_table(root);
    const dataset::Split split = dataset::split(db, spec, seed);

    const evalcli::LabelMap labels = evalcli::LabelMap::from_db(db);
    std::vector<capsnet::Sample> train_set;
    train_set.reserve(split.train.size());
    for (const dataset::Fingerprint& fp : split.train) {
        train_set.push_back(
            {dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }

    std::optional<adversarial::AttackConfig> adv;
    if (method != adversarial::AttackMethod::NONE) {
        const config::Table empty;
        const config::Table& t =
            root.has_table("train") ? root.table("train") : empty;
        adversarial::AttackConfig atk =
            evalcli::attack_from_table(t, derive_seed(seed, "train-mask"));
        atk.method = method;
        adversarial::validate(atk);
        adv = atk;
    }

    capsnet::TrainResult result =
        capsnet::train(capsnet::init(model), model, train_set, adv,
                       derive_seed(seed, "train-" + variant));
    capsnet::save_checkpoint({model, result.params, labels.labels()}, out_ckpt);
    return result.loss_curve;
}

py::dict evaluate(const fs::path& ckpt_path, const fs::path& data_csv,
                  const std::string& method, double eps, double phi,
                  std::size_t iters, double alpha, std::uint64_t mask_seed,
                  bool mim_literal) {
    const capsnet::Checkpoint ckpt = capsnet::load_checkpoint(ckpt_path);
    const dataset::FingerprintDB db = dataset::load_db(data_csv);
    const adversarial::AttackConfig atk =
        make_attack(method, eps, phi, iters, alpha, mask_seed, mim_literal);
    const evalcli::LabelMap labels = evalcli::LabelMap::from_labels(ckpt.labels);
    const evalcli::ErrorReport report = evalcli::evaluate(
        ckpt.params, ckpt.config, labels, db.fingerprints(), atk);

    py::dict d = cell_dict(report.overall);
    py::dict cells;
    for (const auto& [key, cell] : report.cells) {
        cells[py::make_tuple(key.first, key.second)] = cell_dict(cell);
    }
    d["cells"] = cells;
    d["weighting"] = report.weighting;
    return d;
}

void attack_dataset(const fs::path& ckpt_path, const fs::path& data_csv,
                    const fs::path& out_csv, const std::string& method,
                    double eps, double phi, std::size_t iters, double alpha,
                    std::uint64_t mask_seed, bool mim_literal) {
    const capsnet::Checkpoint ckpt = capsnet::load_checkpoint(ckpt_path);
    const dataset::FingerprintDB db = dataset::load_db(data_csv);
    if (db.ap_count() != ckpt.config.input_width) {
        throw DataError("dataset has " + std::to_string(db.ap_count()) +
                        " aps but the checkpoint expects " +
                        std::to_string(ckpt.config.input_width));
    }
    const adversarial::AttackConfig atk =
        make_attack(method, eps, phi, iters, alpha, mask_seed, mim_literal);
    const evalcli::LabelMap labels = evalcli::LabelMap::from_labels(ckpt.labels);

    std::vector<capsnet::Sample> samples;
    samples.reserve(db.fingerprints().size());
    for (const dataset::Fingerprint& fp : db.fingerprints()) {
        samples.push_back(
            {dataset::rss_to_image(fp), labels.class_of(fp.rp_id)});
    }
    const std::vector<capsnet::Sample> attacked =
        adversarial::attack_dataset(ckpt.params, ckpt.config, samples, atk);

    std::vector<dataset::Fingerprint> rows = db.fingerprints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].rss = dataset::image_to_rss(attacked[i].image);
    }
    dataset::save_db(dataset::FingerprintDB(std::move(rows)), out_csv);
}

py::dict predict(const fs::path& ckpt_path, const std::vector<double>& rss) {
    const capsnet::Checkpoint ckpt = capsnet::load_checkpoint(ckpt_path);
    if (rss.size() != ckpt.config.input_width) {
        throw DataError("fingerprint has " + std::to_string(rss.size()) +
                        " aps but the checkpoint expects " +
                        std::to_string(ckpt.config.input_width));
    }
    dataset::Fingerprint fp;
    fp.rss = rss;
    const capsnet::ForwardTrace trace =
        capsnet::forward(ckpt.params, ckpt.config, dataset::rss_to_image(fp));
    const std::size_t cls = capsnet::predict(trace);

    py::dict d;
    d["class_index"] = cls;
    d["rp_id"] = ckpt.labels[cls].rp_id;
    d["x_m"] = ckpt.labels[cls].x_m;
    d["y_m"] = ckpt.labels[cls].y_m;
    d["probs"] = tensor_vector(trace.probs);
    return d;
}

void run_experiment(const std::string& config_text, const fs::path& out_dir,
                    std::optional<std::uint64_t> seed) {
    const config::Table root = config::parse_string(config_text, "<config>");
    const evalcli::ExperimentConfig cfg =
        evalcli::experiment_from_table(root, seed);
    evalcli::run_experiment(cfg, out_dir);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Capsule-network indoor localization under adversarial attacks";
#ifdef SENTINEL_VERSION
    m.attr("__version__") = SENTINEL_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("squash",
          [](const std::vector<double>& v) {
              return tensor_vector(numerics::squash(vector_tensor(v)));
          },
          py::arg("vector"),
          "Norm-compressing capsule nonlinearity, output norm < 1.");
    m.def("softmax",
          [](const std::vector<double>& v) {
              return tensor_vector(numerics::softmax(vector_tensor(v)));
          },
          py::arg("vector"), "Numerically stable softmax.");
    m.def("make_mask", &adversarial::make_mask, py::arg("ap_count"),
          py::arg("phi"), py::arg("seed"),
          "Compromised-AP mask with exactly round(phi * W / 100) bits set.");
    m.def("rss_to_image",
          [](const std::vector<double>& rss) {
              dataset::Fingerprint fp;
              fp.rss = rss;
              return tensor_vector(dataset::rss_to_image(fp).pixels);
          },
          py::arg("rss"),
          "Map dBm readings in [-100, 0] to pixels via (rss + 100) / 100.");
    m.def("image_to_rss",
          [](const std::vector<double>& pixels) {
              numerics::Tensor t(numerics::Shape{1, pixels.size(), 1});
              for (std::size_t i = 0; i < pixels.size(); ++i) t[i] = pixels[i];
              return dataset::image_to_rss(dataset::GrayscaleImage(t));
          },
          py::arg("pixels"), "Inverse pixel map back to dBm.");

    m.def("generate_dataset", &generate_dataset, py::arg("config"),
          py::arg("out_csv"), py::arg("seed") = py::none(),
          "Generate a synthetic fingerprint CSV from a scenario config; "
          "returns dataset facts.");
    m.def("train", &train, py::arg("data_csv"), py::arg("out_ckpt"),
          py::arg("config") = "[split]\ntrain_device = \"dev-a\"\n",
          py::arg("variant") = "NONE", py::arg("seed") = 0,
          "Train one variant on the canonical CSV and write a checkpoint; "
          "returns the per-epoch loss curve.");
    m.def("evaluate", &evaluate, py::arg("ckpt"), py::arg("data_csv"),
          py::arg("method") = "NONE", py::arg("eps") = 0.1,
          py::arg("phi") = 100.0, py::arg("iters") = 10,
          py::arg("alpha") = 0.9, py::arg("mask_seed") = 0,
          py::arg("mim_literal") = false,
          "Localization error of a checkpoint on a CSV, optionally attacked.");
    m.def("attack_dataset", &attack_dataset, py::arg("ckpt"),
          py::arg("data_csv"), py::arg("out_csv"), py::arg("method") = "FGSM",
          py::arg("eps") = 0.1, py::arg("phi") = 100.0, py::arg("iters") = 10,
          py::arg("alpha") = 0.9, py::arg("mask_seed") = 0,
          py::arg("mim_literal") = false,
          "Write an adversarially perturbed copy of a fingerprint CSV.");
    m.def("predict", &predict, py::arg("ckpt"), py::arg("rss"),
          "Predict the reference point of one RSS fingerprint.");
    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::arg("out_dir"), py::arg("seed") = py::none(),
          "Full pipeline: generate, train every variant, evaluate, sweep.");
}
