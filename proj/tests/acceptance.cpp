// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. The heavyweight scenario run backs criteria 5 to 7.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sentinel/adversarial.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/experiment.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/synthgen.hpp"
#include "sentinel/tensor.hpp"

using namespace sentinel;
using adversarial::APMask;
using adversarial::AttackConfig;
using adversarial::AttackMethod;
using capsnet::ModelConfig;
using capsnet::ModelParams;
using numerics::Shape;
using numerics::Tensor;

namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int number, bool pass, const std::string& detail) {
    std::cout << "criterion " << number << ": " << (pass ? "PASS" : "FAIL")
              << " (" << detail << ")" << std::endl;
    if (!pass) ++failures;
}

template <typename F>
void criterion(int number, F&& f) {
    try {
        const auto [pass, detail] = f();
        report(number, pass, detail);
    } catch (const std::exception& e) {
        report(number, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.input_width = 16;
    cfg.class_count = 3;
    cfg.conv_filters = 2;
    cfg.conv_kernel = 3;
    cfg.pc_capsules = 2;
    cfg.pc_dim = 4;
    cfg.oc_dim = 4;
    cfg.routing_iters = 2;
    cfg.init_seed = 21;
    return cfg;
}

fs::path work_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sentinel_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

// mean_error_m by axis value for one variant of a sweep file.
std::map<double, double> sweep_column(const fs::path& path,
                                      const std::string& variant,
                                      std::size_t axis_col,
                                      std::size_t mean_col) {
    std::istringstream stream(read_bytes(path));
    std::string line;
    std::getline(stream, line);  // header
    std::map<double, double> out;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.at(0) != variant) continue;
        out[std::stod(fields.at(axis_col))] = std::stod(fields.at(mean_col));
    }
    return out;
}

// --- criterion 1 ------------------------------------------------------

std::pair<bool, std::string> check_gradients() {
    const auto start = std::chrono::steady_clock::now();
    const ModelConfig cfg = tiny_config();
    const ModelParams params = capsnet::init(cfg);
    Rng rng(123);
    Tensor pixels(Shape{1, cfg.input_width, 1});
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = rng.uniform(0.05, 0.95);
    }
    const std::size_t label = 1;

    numerics::GradTape tape;
    capsnet::GraphRefs refs = capsnet::build_forward(tape, params, cfg, pixels);
    numerics::GradTape::Ref loss_ref = tape.sparse_ce(refs.probs, label);
    tape.backward(loss_ref);
    const Tensor gF = tape.grad(refs.F);
    const Tensor gV = tape.grad(refs.V);
    const Tensor gWt = tape.grad(refs.Wt);
    const Tensor gImg = tape.grad(refs.image);

    ModelParams fd = params;
    Tensor fd_px = pixels;
    const auto loss = [&]() {
        return numerics::sparse_ce_loss(
            capsnet::forward(fd, cfg, dataset::GrayscaleImage(fd_px)).probs,
            label);
    };
    double worst = 0.0;
    worst = std::max(worst, oracle::max_grad_rel_err(fd.F, gF, loss));
    worst = std::max(worst, oracle::max_grad_rel_err(fd.V, gV, loss));
    worst = std::max(worst, oracle::max_grad_rel_err(fd.Wt, gWt, loss));
    worst = std::max(worst, oracle::max_grad_rel_err(fd_px, gImg, loss));

    const std::size_t coords =
        fd.F.size() + fd.V.size() + fd.Wt.size() + fd_px.size();
    const double elapsed = seconds_since(start);
    return {worst <= 1e-4 && elapsed < 60.0,
            "max rel err " + fmt(worst) + " over " + std::to_string(coords) +
                " coordinates, " + fmt(elapsed) + " s"};
}

// --- criterion 2 ------------------------------------------------------

std::pair<bool, std::string> check_invariants() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(456);
    std::size_t violations = 0;
    for (std::size_t trial = 0; trial < 10000; ++trial) {
        const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(8));
        Tensor v(Shape{dim});
        for (std::size_t i = 0; i < dim; ++i) v[i] = rng.uniform(-3.0, 3.0);

        const Tensor sq = numerics::squash(v);
        const double out_norm = std::sqrt(numerics::squared_l2_norm(sq));
        if (!(out_norm < 1.0)) ++violations;

        const double scale = 1.0 + rng.uniform(0.1, 1.0);
        Tensor scaled = v;
        for (std::size_t i = 0; i < dim; ++i) scaled[i] *= scale;
        const double bigger =
            std::sqrt(numerics::squared_l2_norm(numerics::squash(scaled)));
        if (!(bigger > out_norm)) ++violations;

        const Tensor sm = numerics::softmax(v);
        double total = 0.0;
        for (std::size_t i = 0; i < dim; ++i) total += sm[i];
        if (std::fabs(total - 1.0) > 1e-12) ++violations;

        const double shift = rng.uniform(-5.0, 5.0);
        Tensor shifted = v;
        for (std::size_t i = 0; i < dim; ++i) shifted[i] += shift;
        const Tensor sm2 = numerics::softmax(shifted);
        for (std::size_t i = 0; i < dim; ++i) {
            if (std::fabs(sm2[i] - sm[i]) > 1e-12) ++violations;
        }

        Tensor onehot(Shape{dim});
        const std::size_t label = static_cast<std::size_t>(rng.below(dim));
        onehot[label] = 1.0;
        if (numerics::sparse_ce_loss(onehot, label) != 0.0) ++violations;
    }
    const double elapsed = seconds_since(start);
    return {violations == 0 && elapsed < 10.0,
            std::to_string(violations) + " violations in 10000 trials, " +
                fmt(elapsed) + " s"};
}

// --- criterion 3 ------------------------------------------------------

std::pair<bool, std::string> check_oracles() {
    Rng rng(789);
    double worst = 0.0;

    for (std::size_t trial = 0; trial < 100; ++trial) {
        const std::size_t w = 4 + static_cast<std::size_t>(rng.below(21));
        const std::size_t k =
            1 + static_cast<std::size_t>(rng.below(std::min<std::size_t>(w, 6)));
        const std::size_t nf = 1 + static_cast<std::size_t>(rng.below(4));
        const Tensor img = oracle::random_tensor(Shape{1, w, 1}, -2, 2, rng);
        const Tensor filt = oracle::random_tensor(Shape{nf, k}, -2, 2, rng);
        const Tensor got = numerics::conv1d(img, filt);
        const Tensor want = oracle::conv1d(img, filt);
        for (std::size_t i = 0; i < got.size(); ++i) {
            worst = std::max(worst, std::fabs(got[i] - want[i]));
        }
    }

    for (std::size_t trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(8));
        Tensor v(Shape{dim});
        std::vector<double> raw(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            raw[i] = rng.uniform(-3.0, 3.0);
            v[i] = raw[i];
        }
        const Tensor sq = numerics::squash(v);
        const std::vector<double> sq_want = oracle::squash(raw);
        const Tensor sm = numerics::softmax(v);
        const std::vector<double> sm_want = oracle::softmax(raw);
        for (std::size_t i = 0; i < dim; ++i) {
            worst = std::max(worst, std::fabs(sq[i] - sq_want[i]));
            worst = std::max(worst, std::fabs(sm[i] - sm_want[i]));
        }
    }

    for (std::size_t trial = 0; trial < 100; ++trial) {
        const std::size_t pc = 1 + static_cast<std::size_t>(rng.below(3));
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(4));
        const std::size_t ocd = 1 + static_cast<std::size_t>(rng.below(4));
        const std::size_t pcd = 1 + static_cast<std::size_t>(rng.below(4));
        const Tensor u = oracle::random_tensor(Shape{pc, pcd}, -1, 1, rng);
        const Tensor Wt =
            oracle::random_tensor(Shape{pc, n, ocd, pcd}, -1, 1, rng);
        const capsnet::RouteResult got = capsnet::route(u, Wt, 1);
        const oracle::RouteOracle want = oracle::route_once(u, Wt);
        for (std::size_t j = 0; j < n; ++j) {
            worst = std::max(worst,
                             std::fabs(got.agreement[j] - want.agreement[j]));
            worst = std::max(worst, std::fabs(got.probs[j] - want.probs[j]));
        }
    }

    return {worst <= 1e-12,
            "max abs diff " + fmt(worst) + " across conv1d/squash/softmax/route"};
}

// --- criterion 4 ------------------------------------------------------

std::pair<bool, std::string> check_bounds() {
    std::size_t violations = 0;

    for (std::size_t w = 1; w <= 64; ++w) {
        for (int phi = 0; phi <= 100; ++phi) {
            const APMask mask = adversarial::make_mask(w, phi, 5);
            const auto want = static_cast<std::size_t>(
                std::llround(phi * static_cast<double>(w) / 100.0));
            if (adversarial::popcount(mask) != want) ++violations;
        }
    }

    const ModelConfig cfg = tiny_config();
    const ModelParams params = capsnet::init(cfg);
    Rng rng(31);
    Tensor pixels(Shape{1, cfg.input_width, 1});
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = rng.uniform(0.05, 0.95);
    }
    const dataset::GrayscaleImage img(pixels);
    const std::size_t label = 2;

    std::size_t attacks = 0;
    for (AttackMethod method :
         {AttackMethod::FGSM, AttackMethod::PGD, AttackMethod::MIM}) {
        for (double eps : {0.1, 0.3, 0.5}) {
            for (double phi : {0.0, 50.0, 100.0}) {
                AttackConfig atk;
                atk.method = method;
                atk.eps = eps;
                atk.phi = phi;
                atk.mask_seed = 7;
                const APMask mask =
                    adversarial::make_mask(cfg.input_width, phi, atk.mask_seed);
                const dataset::GrayscaleImage adv = adversarial::attack_image(
                    params, cfg, img, label, atk, mask);
                ++attacks;
                for (std::size_t j = 0; j < cfg.input_width; ++j) {
                    if (adv.pixels[j] < 0.0 || adv.pixels[j] > 1.0) ++violations;
                    if (mask[j]) {
                        if (std::fabs(adv.pixels[j] - img.pixels[j]) >
                            eps + 1e-12) {
                            ++violations;
                        }
                    } else if (adv.pixels[j] != img.pixels[j]) {
                        ++violations;
                    }
                }
            }
        }
    }

    return {violations == 0,
            std::to_string(violations) + " violations over " +
                std::to_string(attacks) + " attacks and 6464 masks"};
}

// --- criteria 5 to 7 --------------------------------------------------

evalcli::ExperimentConfig scale_experiment() {
    evalcli::ExperimentConfig exp;
    exp.name = "acceptance-scale";
    exp.seed = 20260814;
    exp.variants = {"NONE", "FGSM"};
    exp.sweeps = true;

    const struct {
        const char* id;
        double y_offset;
    } buildings[] = {{"B0", 0.0}, {"B1", 50.0}, {"B2", 100.0}};
    for (const auto& b : buildings) {
        synthgen::BuildingSpec spec;
        spec.id = b.id;
        spec.num_aps = 8;
        spec.path_length = 20.0;
        spec.rp_spacing = 2.0;
        spec.y_offset = b.y_offset;
        exp.scenario.buildings.push_back(std::move(spec));
    }
    exp.scenario.devices = {{"dev-a", 0.0, 1.0},
                            {"dev-b", -1.5, 1.2},
                            {"dev-c", 1.2, 0.8},
                            {"dev-d", -2.5, 1.5},
                            {"dev-e", 2.0, 1.1}};
    exp.scenario.samples_per_rp_per_device = 6;
    exp.split.train_device = "dev-a";
    exp.model.init_seed = derive_seed(exp.seed, "model-init-seed");

    exp.train_attack.method = AttackMethod::FGSM;
    exp.train_attack.eps = 0.1;
    exp.train_attack.phi = 100.0;
    exp.train_attack.mask_seed = derive_seed(exp.seed, "train-mask");
    exp.eval_attack = exp.train_attack;
    exp.eval_attack.mask_seed = derive_seed(exp.seed, "eval-mask");
    return exp;
}

// --- criterion 8 ------------------------------------------------------

std::pair<bool, std::string> check_split_protocol() {
    synthgen::ScenarioConfig scenario;
    for (const char* id : {"B0", "B1"}) {
        synthgen::BuildingSpec b;
        b.id = id;
        b.num_aps = 6;
        b.path_length = 8.0;
        b.rp_spacing = 2.0;
        scenario.buildings.push_back(std::move(b));
    }
    scenario.devices = {{"dev-a", 0.0, 1.0},
                        {"dev-b", -1.0, 1.2},
                        {"dev-c", 1.5, 0.9}};
    scenario.samples_per_rp_per_device = 6;

    const dataset::FingerprintDB db = synthgen::generate_scenario(scenario, 7);
    dataset::SplitSpec spec;
    spec.train_device = "dev-a";
    const dataset::Split split = dataset::split(db, spec, 9);

    std::size_t violations = 0;
    std::map<std::string, std::size_t> train_per_rp;
    std::map<std::pair<std::string, std::string>, std::size_t> test_per_rp_dev;
    std::map<std::string, std::size_t> seen;
    for (const dataset::Fingerprint& fp : split.train) {
        if (fp.device_id != "dev-a") ++violations;
        ++train_per_rp[fp.rp_id];
        ++seen[fp.rp_id + "|" + fp.device_id + "|" +
               std::to_string(fp.sample_idx)];
    }
    for (const dataset::Fingerprint& fp : split.test) {
        ++test_per_rp_dev[{fp.rp_id, fp.device_id}];
        ++seen[fp.rp_id + "|" + fp.device_id + "|" +
               std::to_string(fp.sample_idx)];
    }
    for (const auto& [key, count] : seen) {
        if (count != 1) ++violations;  // train/test overlap
    }
    if (train_per_rp.size() != db.class_count()) ++violations;
    for (const auto& [rp, count] : train_per_rp) {
        if (count != 5) ++violations;
    }
    if (test_per_rp_dev.size() != db.class_count() * db.device_ids().size()) {
        ++violations;
    }
    for (const auto& [key, count] : test_per_rp_dev) {
        if (count != 1) ++violations;
    }
    return {violations == 0,
            std::to_string(split.train.size()) + " train / " +
                std::to_string(split.test.size()) + " test over " +
                std::to_string(db.class_count()) + " RPs x " +
                std::to_string(db.device_ids().size()) + " devices, " +
                std::to_string(violations) + " violations"};
}

// --- criterion 9 ------------------------------------------------------

const char* kDeterminismConfig =
    "[experiment]\n"
    "name = \"determinism\"\n"
    "seed = 99\n"
    "variants = [\"NONE\", \"FGSM\"]\n"
    "sweeps = true\n"
    "[scenario]\n"
    "samples_per_rp_per_device = 6\n"
    "[[building]]\n"
    "id = \"B0\"\n"
    "num_aps = 6\n"
    "path_length = 8.0\n"
    "rp_spacing = 2.0\n"
    "[[device]]\n"
    "id = \"dev-a\"\n"
    "rss_offset_dbm = 0.0\n"
    "noise_sigma_dbm = 1.0\n"
    "[[device]]\n"
    "id = \"dev-b\"\n"
    "rss_offset_dbm = -1.5\n"
    "noise_sigma_dbm = 1.2\n"
    "[split]\n"
    "train_device = \"dev-a\"\n"
    "[model]\n"
    "epochs = 3\n"
    "batch_size = 8\n"
    "conv_filters = 2\n"
    "conv_kernel = 3\n"
    "pc_capsules = 2\n"
    "pc_dim = 4\n"
    "oc_dim = 4\n"
    "routing_iters = 2\n"
    "[train]\n"
    "method = \"FGSM\"\n"
    "[attack]\n"
    "method = \"FGSM\"\n";

const char* kReportFiles[] = {"dataset.csv",     "model_NONE.ckpt",
                              "model_FGSM.ckpt", "loss_NONE.csv",
                              "loss_FGSM.csv",   "error_report.csv",
                              "sweep_phi.csv",   "sweep_eps.csv",
                              "summary.json"};

std::pair<bool, std::string> check_determinism(const std::string& cli) {
    const fs::path dir_a = work_dir("det_a");
    const fs::path dir_b = work_dir("det_b");

    if (!cli.empty()) {
        const fs::path cfg_path =
            fs::temp_directory_path() / "sentinel_acceptance" / "det.toml";
        std::ofstream(cfg_path, std::ios::binary) << kDeterminismConfig;
        for (const fs::path& dir : {dir_a, dir_b}) {
            const std::string cmd = "\"" + cli + "\" experiment --config \"" +
                                    cfg_path.string() +
                                    "\" --deterministic --out \"" +
                                    dir.string() + "\"";
            const int rc = std::system(cmd.c_str());
            if (rc != 0) {
                return {false, "experiment verb exited with " +
                                   std::to_string(rc)};
            }
        }
    } else {
        const config::Table root =
            config::parse_string(kDeterminismConfig, "det.toml");
        const evalcli::ExperimentConfig cfg =
            evalcli::experiment_from_table(root, std::nullopt);
        evalcli::run_experiment(cfg, dir_a);
        evalcli::run_experiment(cfg, dir_b);
    }

    std::size_t mismatches = 0;
    for (const char* name : kReportFiles) {
        if (read_bytes(dir_a / name) != read_bytes(dir_b / name)) ++mismatches;
    }
    const std::string mode = cli.empty() ? "in-process" : "CLI";
    return {mismatches == 0,
            std::to_string(std::size(kReportFiles) - mismatches) + " of " +
                std::to_string(std::size(kReportFiles)) +
                " report files byte-identical across " + mode + " reruns"};
}

// --- criterion 10 -----------------------------------------------------

std::pair<bool, std::string> check_memorization() {
    ModelConfig cfg = tiny_config();
    cfg.epochs = 300;
    Rng rng(90);
    Tensor pixels(Shape{1, cfg.input_width, 1});
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = rng.uniform(0.05, 0.95);
    }
    const std::vector<capsnet::Sample> one = {
        {dataset::GrayscaleImage(pixels), 1}};

    const capsnet::TrainResult trained =
        capsnet::train(capsnet::init(cfg), cfg, one, std::nullopt, 11);
    const double ce = numerics::sparse_ce_loss(
        capsnet::forward(trained.params, cfg, one[0].image).probs,
        one[0].label);
    return {ce < 0.01, "single-fingerprint CE " + fmt(ce) + " after " +
                           std::to_string(cfg.epochs) + " epochs"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    criterion(1, check_gradients);
    criterion(2, check_invariants);
    criterion(3, check_oracles);
    criterion(4, check_bounds);

    // One scenario run backs criteria 5, 6 and 7.
    const fs::path scale_dir = work_dir("scale");
    std::string exp_error;
    double exp_elapsed = 0.0;
    try {
        const auto start = std::chrono::steady_clock::now();
        evalcli::run_experiment(scale_experiment(), scale_dir);
        exp_elapsed = seconds_since(start);
    } catch (const std::exception& e) {
        exp_error = e.what();
    }

    criterion(5, [&]() -> std::pair<bool, std::string> {
        if (!exp_error.empty()) return {false, "experiment failed: " + exp_error};
        const nlohmann::json summary =
            nlohmann::json::parse(read_bytes(scale_dir / "summary.json"));
        const double clean =
            summary["variants"]["NONE"]["clean_mean_m"].get<double>();
        const double attacked =
            summary["variants"]["NONE"]["attacked_mean_m"].get<double>();
        const bool pass =
            attacked >= 1.5 * clean && clean >= 0.0 && exp_elapsed < 900.0;
        return {pass, "clean " + fmt(clean) + " m vs attacked " +
                          fmt(attacked) + " m (" +
                          fmt(clean > 0 ? attacked / clean : 0.0) + "x), run " +
                          fmt(exp_elapsed) + " s"};
    });

    criterion(6, [&]() -> std::pair<bool, std::string> {
        if (!exp_error.empty()) return {false, "experiment failed: " + exp_error};
        const nlohmann::json summary =
            nlohmann::json::parse(read_bytes(scale_dir / "summary.json"));
        const double none_attacked =
            summary["variants"]["NONE"]["attacked_mean_m"].get<double>();
        const double fgsm_attacked =
            summary["variants"]["FGSM"]["attacked_mean_m"].get<double>();
        const bool pass = fgsm_attacked <= 0.8 * none_attacked;
        return {pass, "FGSM-trained " + fmt(fgsm_attacked) +
                          " m vs undefended " + fmt(none_attacked) + " m (" +
                          fmt(none_attacked > 0 ? fgsm_attacked / none_attacked
                                                : 0.0) +
                          "x)"};
    });

    criterion(7, [&]() -> std::pair<bool, std::string> {
        if (!exp_error.empty()) return {false, "experiment failed: " + exp_error};
        const std::map<double, double> phi_none =
            sweep_column(scale_dir / "sweep_phi.csv", "NONE", 3, 4);
        const std::map<double, double> phi_fgsm =
            sweep_column(scale_dir / "sweep_phi.csv", "FGSM", 3, 4);
        const std::map<double, double> eps_none =
            sweep_column(scale_dir / "sweep_eps.csv", "NONE", 2, 3);
        if (phi_none.size() != 11 || phi_fgsm.size() != 11 ||
            eps_none.size() != 6) {
            return {false, "sweep tables incomplete"};
        }
        const bool phi_trend = phi_none.at(100.0) >= phi_none.at(0.0);
        const bool eps_trend = eps_none.at(0.5) >= eps_none.at(0.0);
        const auto ratio = [](const std::map<double, double>& sweep) {
            double lo = sweep.begin()->second, hi = sweep.begin()->second;
            for (const auto& [axis, mean] : sweep) {
                lo = std::min(lo, mean);
                hi = std::max(hi, mean);
            }
            return lo > 0.0 ? hi / lo : (hi > 0.0 ? 1e300 : 1.0);
        };
        const double r_none = ratio(phi_none);
        const double r_fgsm = ratio(phi_fgsm);
        const bool flat = r_fgsm <= r_none;
        return {phi_trend && eps_trend && flat,
                "phi 0->100: " + fmt(phi_none.at(0.0)) + "->" +
                    fmt(phi_none.at(100.0)) + " m, eps 0->0.5: " +
                    fmt(eps_none.at(0.0)) + "->" + fmt(eps_none.at(0.5)) +
                    " m, phi max/min " + fmt(r_fgsm) + " (FGSM) vs " +
                    fmt(r_none) + " (NONE)"};
    });

    criterion(8, check_split_protocol);
    criterion(9, [&]() { return check_determinism(cli); });
    criterion(10, check_memorization);

    return failures == 0 ? 0 : 1;
}
