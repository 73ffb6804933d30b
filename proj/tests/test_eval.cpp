#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "sentinel/adversarial.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/config_file.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/experiment.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/scenario.hpp"

using namespace sentinel;
using adversarial::AttackConfig;
using adversarial::AttackMethod;
using capsnet::LabelInfo;
using capsnet::ModelConfig;
using capsnet::ModelParams;
using evalcli::LabelMap;

namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sentinel_eval_tests";
    fs::create_directories(dir);
    return dir / name;
}

template <typename F>
std::string config_error_of(F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

ModelConfig tiny_model(std::size_t width, std::size_t classes) {
    ModelConfig cfg;
    cfg.input_width = width;
    cfg.class_count = classes;
    cfg.conv_filters = 2;
    cfg.conv_kernel = 3;
    cfg.pc_capsules = 2;
    cfg.pc_dim = 4;
    cfg.oc_dim = 4;
    cfg.routing_iters = 2;
    cfg.init_seed = 21;
    return cfg;
}

dataset::Fingerprint make_fp(const std::string& building,
                             const std::string& rp, double x, double y,
                             const std::string& device, std::uint64_t idx,
                             std::vector<double> rss) {
    dataset::Fingerprint fp;
    fp.building_id = building;
    fp.rp_id = rp;
    fp.x_m = x;
    fp.y_m = y;
    fp.device_id = device;
    fp.sample_idx = idx;
    fp.rss = std::move(rss);
    return fp;
}

}  // namespace

TEST_CASE("toml parser handles the supported syntax") {
    const std::string text =
        "# full-line comment\n"
        "title = \"quote \\\" slash \\\\ nl \\n tab \\t\"  # trailing\n"
        "count = -12\n"
        "\n"
        "ratio = 0.25\n"
        "big = 1e3\n"
        "flag = true\n"
        "off = false\n"
        "names = [\"a\", \"b\" , \"c\"]\n"
        "grid = [1, 2, 3]\n"
        "empty = []\n"
        "[outer]\n"
        "x = 1\n"
        "[outer.inner]\n"
        "y = 2\n"
        "[[item]]\n"
        "id = \"first\"\n"
        "[[item]]\n"
        "id = \"second\"\n";
    const config::Table root = config::parse_string(text, "doc");

    CHECK(root.get_string("title") == "quote \" slash \\ nl \n tab \t");
    CHECK(root.get_i64("count") == -12);
    CHECK(root.get_f64("ratio") == 0.25);
    CHECK(root.get_f64("big") == 1000.0);
    CHECK(root.get_bool("flag"));
    CHECK_FALSE(root.get_bool("off"));
    CHECK(root.get_string_array_or("names") ==
          std::vector<std::string>{"a", "b", "c"});
    CHECK(root.at("grid").as_array().size() == 3);
    CHECK(root.at("grid").as_array()[2].as_i64() == 3);
    CHECK(root.at("empty").as_array().empty());

    REQUIRE(root.has_table("outer"));
    CHECK(root.table("outer").get_i64("x") == 1);
    CHECK(root.table("outer").table("inner").get_i64("y") == 2);

    const std::vector<config::Table>& items = root.table_array("item");
    REQUIRE(items.size() == 2);
    CHECK(items[0].get_string("id") == "first");
    CHECK(items[1].get_string("id") == "second");
    CHECK(root.table_array("missing").empty());

    // Integers widen to floats on demand.
    CHECK(root.get_f64("count") == -12.0);
    // Fallback accessors only fire when the key is absent.
    CHECK(root.get_i64_or("count", 99) == -12);
    CHECK(root.get_i64_or("nope", 99) == 99);
    CHECK(root.get_string_or("nope", "dflt") == "dflt");
    CHECK(root.get_f64_or("nope", 0.5) == 0.5);
    CHECK(root.get_bool_or("nope", true));
    CHECK(root.get_u64_or("nope", 7) == 7);
}

TEST_CASE("toml parser reports precise line errors") {
    CHECK(contains(config_error_of([] {
              config::parse_string("a = 1\na = 2\n", "cfg");
          }),
          "cfg:2: duplicate key 'a'"));
    CHECK(contains(config_error_of([] {
              config::parse_string("\n\njust words\n", "cfg");
          }),
          "cfg:3: expected 'key = value'"));
    CHECK(contains(config_error_of([] {
              config::parse_string("v = @@\n", "cfg");
          }),
          "cfg:1: cannot parse value"));
    CHECK(contains(config_error_of([] {
              config::parse_string("s = \"open\n", "cfg");
          }),
          "cfg:1: unterminated string"));
    CHECK(contains(config_error_of([] {
              config::parse_string("v = 1 2\n", "cfg");
          }),
          "cannot parse value"));
    CHECK(contains(config_error_of([] {
              config::parse_string("v = [1] 2\n", "cfg");
          }),
          "trailing content"));
    CHECK(contains(config_error_of([] {
              config::parse_string("bad key = 1\n", "cfg");
          }),
          "invalid character"));
    CHECK(contains(config_error_of([] {
              config::parse_string("[unclosed\n", "cfg");
          }),
          "malformed table header"));
    CHECK(contains(config_error_of([] {
              config::parse_string("s = \"\\q\"\n", "cfg");
          }),
          "unsupported escape"));
    CHECK(contains(config_error_of([] {
              config::parse_string("v = [\n", "cfg");
          }),
          "unterminated array"));
    CHECK(contains(config_error_of([] {
              config::parse_string("v = [1, 2\n", "cfg");
          }),
          "expected ',' or ']' in array"));

    CHECK_THROWS_AS(config::parse_file(temp_path("missing.toml")), ConfigError);

    const fs::path path = temp_path("ok.toml");
    std::ofstream(path) << "x = 5\n";
    CHECK(config::parse_file(path).get_i64("x") == 5);
}

TEST_CASE("table accessors enforce kinds and name the key") {
    const config::Table root =
        config::parse_string("s = \"text\"\nneg = -3\n[t]\nv = 1\n", "doc");
    CHECK(contains(config_error_of([&] { root.get_i64("s"); }), "key 's'"));
    CHECK(contains(config_error_of([&] { root.get_i64("s"); }), "string"));
    CHECK(contains(config_error_of([&] { root.get_string("neg"); }),
                   "key 'neg'"));
    CHECK(contains(config_error_of([&] { root.get_u64("neg"); }),
                   "non-negative"));
    CHECK(contains(config_error_of([&] { root.get_i64("absent"); }),
                   "missing key 'absent'"));
    CHECK(contains(config_error_of([&] { root.table("nope"); }),
                   "missing table [nope]"));
    // The error names the table that was searched.
    CHECK(contains(config_error_of([&] { root.table("t").get_i64("w"); }),
                   "[t]"));
}

TEST_CASE("label maps index reference points both ways") {
    LabelMap map = LabelMap::from_labels(
        {{"RP0", 0.0, 0.0}, {"RP1", 3.0, 4.0}, {"RP2", -1.0, 2.0}});
    CHECK(map.class_count() == 3);
    CHECK(map.class_of("RP1") == 1);
    CHECK(map.rp_id_of(2) == "RP2");
    CHECK(map.coords_of(1) == std::pair<double, double>{3.0, 4.0});

    CHECK_THROWS_AS(map.class_of("RP9"), DataError);
    CHECK_THROWS_AS(map.coords_of(3), DataError);
    CHECK_THROWS_AS(map.rp_id_of(3), DataError);
    CHECK_THROWS_AS(LabelMap::from_labels({}), DataError);
    CHECK_THROWS_AS(
        LabelMap::from_labels({{"RP0", 0.0, 0.0}, {"RP0", 1.0, 1.0}}),
        DataError);
}

TEST_CASE("label map from a database follows its class order") {
    std::vector<dataset::Fingerprint> fps;
    fps.push_back(make_fp("B0", "RPb", 1.0, 0.0, "d", 0, {-40, -50}));
    fps.push_back(make_fp("B0", "RPa", 2.0, 1.0, "d", 0, {-45, -55}));
    const dataset::FingerprintDB db{std::move(fps)};
    const LabelMap map = LabelMap::from_db(db);
    REQUIRE(map.class_count() == db.class_count());
    for (std::size_t cls = 0; cls < db.class_count(); ++cls) {
        CHECK(map.rp_id_of(cls) == db.rp_id_of(cls));
        CHECK(map.coords_of(cls) == db.coords_of(db.rp_id_of(cls)));
        CHECK(map.class_of(db.rp_id_of(cls)) == cls);
    }
    CHECK(map.class_of("RPa") == 0);  // lexicographic, not insertion, order
}

TEST_CASE("localization error is the straight-line distance") {
    const LabelMap map = LabelMap::from_labels(
        {{"RP0", 0.0, 0.0}, {"RP1", 3.0, 4.0}, {"RP2", 7.0, 0.5}});
    CHECK(evalcli::localization_error(0, 0, map) == 0.0);
    CHECK(evalcli::localization_error(1, 1, map) == 0.0);
    CHECK(evalcli::localization_error(0, 1, map) == doctest::Approx(5.0));
    CHECK(evalcli::localization_error(1, 0, map) ==
          evalcli::localization_error(0, 1, map));
}

TEST_CASE("evaluate scores a single-class model exactly") {
    // One class: every prediction is that class, so every error is zero.
    const ModelConfig cfg = tiny_model(6, 1);
    const ModelParams params = capsnet::init(cfg);
    const LabelMap map = LabelMap::from_labels({{"RP0", 2.0, 3.0}});

    std::vector<dataset::Fingerprint> test_set;
    test_set.push_back(make_fp("B0", "RP0", 2, 3, "da", 0,
                               {-40, -50, -60, -70, -80, -90}));
    test_set.push_back(make_fp("B0", "RP0", 2, 3, "da", 1,
                               {-42, -52, -62, -72, -82, -92}));
    test_set.push_back(make_fp("B0", "RP0", 2, 3, "db", 0,
                               {-44, -54, -64, -74, -84, -94}));
    test_set.push_back(make_fp("B0", "RP0", 2, 3, "db", 1,
                               {-46, -56, -66, -76, -86, -96}));

    AttackConfig none;
    none.method = AttackMethod::NONE;
    const evalcli::ErrorReport report =
        evalcli::evaluate(params, cfg, map, test_set, none);

    CHECK(report.overall.mean_m == 0.0);
    CHECK(report.overall.best_m == 0.0);
    CHECK(report.overall.worst_m == 0.0);
    CHECK(report.overall.samples == 4);
    CHECK(report.weighting == "per-sample");
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells.at({"da", "B0"}).samples == 2);
    CHECK(report.cells.at({"db", "B0"}).samples == 2);
    CHECK(report.cells.at({"da", "B0"}).mean_m == 0.0);
}

TEST_CASE("evaluate aggregates per device and building") {
    const ModelConfig cfg = tiny_model(6, 2);
    const ModelParams params = capsnet::init(cfg);
    const LabelMap map =
        LabelMap::from_labels({{"RP0", 0.0, 0.0}, {"RP1", 6.0, 8.0}});

    Rng rng(83);
    std::vector<dataset::Fingerprint> test_set;
    for (const std::string dev : {"d1", "d2"}) {
        for (const std::string bld : {"B0", "B1"}) {
            for (std::uint64_t i = 0; i < 3; ++i) {
                std::vector<double> rss(6);
                for (double& v : rss) v = rng.uniform(-95.0, -5.0);
                test_set.push_back(make_fp(bld, i % 2 == 0 ? "RP0" : "RP1",
                                           0, 0, dev, i, std::move(rss)));
            }
        }
    }

    AttackConfig atk;
    atk.method = AttackMethod::FGSM;
    atk.eps = 0.1;
    atk.phi = 100.0;
    atk.mask_seed = 3;

    const evalcli::ErrorReport a =
        evalcli::evaluate(params, cfg, map, test_set, atk);
    REQUIRE(a.cells.size() == 4);
    std::size_t cell_samples = 0;
    for (const auto& [key, cell] : a.cells) {
        cell_samples += cell.samples;
        CHECK(cell.best_m <= cell.mean_m + 1e-12);
        CHECK(cell.mean_m <= cell.worst_m + 1e-12);
    }
    CHECK(cell_samples == a.overall.samples);
    CHECK(a.overall.samples == test_set.size());

    const evalcli::ErrorReport b =
        evalcli::evaluate(params, cfg, map, test_set, atk);
    CHECK(a.overall.mean_m == b.overall.mean_m);
    CHECK(a.config_fingerprint == b.config_fingerprint);
    for (const auto& [key, cell] : a.cells) {
        CHECK(b.cells.at(key).mean_m == cell.mean_m);
    }

    // eps = 0 perturbs nothing, so the report equals the clean one.
    AttackConfig no_eps = atk;
    no_eps.eps = 0.0;
    AttackConfig none;
    none.method = AttackMethod::NONE;
    const evalcli::ErrorReport clean =
        evalcli::evaluate(params, cfg, map, test_set, none);
    const evalcli::ErrorReport zero =
        evalcli::evaluate(params, cfg, map, test_set, no_eps);
    CHECK(zero.overall.mean_m == clean.overall.mean_m);
    CHECK(zero.overall.worst_m == clean.overall.worst_m);

    CHECK_THROWS_AS(evalcli::evaluate(params, cfg, map, {}, none), DataError);
    const LabelMap short_map = LabelMap::from_labels({{"RP0", 0.0, 0.0}});
    CHECK_THROWS_AS(evalcli::evaluate(params, cfg, short_map, test_set, none),
                    ConfigError);
}

TEST_CASE("sweeps cover the documented grids and anchor at zero") {
    const ModelConfig cfg = tiny_model(6, 2);
    const ModelParams params = capsnet::init(cfg);
    const LabelMap map =
        LabelMap::from_labels({{"RP0", 0.0, 0.0}, {"RP1", 6.0, 8.0}});

    Rng rng(89);
    std::vector<dataset::Fingerprint> test_set;
    for (std::uint64_t i = 0; i < 6; ++i) {
        std::vector<double> rss(6);
        for (double& v : rss) v = rng.uniform(-95.0, -5.0);
        test_set.push_back(make_fp("B0", i % 2 == 0 ? "RP0" : "RP1", 0, 0,
                                   "d1", i, std::move(rss)));
    }

    AttackConfig none;
    none.method = AttackMethod::NONE;
    const double clean_mean =
        evalcli::evaluate(params, cfg, map, test_set, none).overall.mean_m;

    AttackConfig base;
    base.method = AttackMethod::FGSM;
    base.eps = 0.1;
    base.mask_seed = 13;

    const evalcli::SweepTable phi_table =
        evalcli::sweep_phi(params, cfg, map, test_set, base);
    CHECK(phi_table.axis_name == "phi");
    REQUIRE(phi_table.axis.size() == 11);
    REQUIRE(phi_table.mean_error_m.size() == 11);
    for (std::size_t i = 0; i < 11; ++i) {
        CHECK(phi_table.axis[i] == 10.0 * static_cast<double>(i));
    }
    CHECK(phi_table.mean_error_m[0] == clean_mean);

    const evalcli::SweepTable eps_table = evalcli::sweep_eps(
        params, cfg, map, test_set, base, {0.0, 50.0, 100.0});
    CHECK(eps_table.axis_name == "eps");
    REQUIRE(eps_table.axis.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(eps_table.axis[i] == static_cast<double>(i) / 10.0);
    }
    CHECK(eps_table.mean_error_m[0] == clean_mean);

    CHECK_THROWS_AS(evalcli::sweep_eps(params, cfg, map, test_set, base, {}),
                    ConfigError);

    const evalcli::SweepTable again =
        evalcli::sweep_phi(params, cfg, map, test_set, base);
    for (std::size_t i = 0; i < 11; ++i) {
        CHECK(again.mean_error_m[i] == phi_table.mean_error_m[i]);
    }
}

TEST_CASE("format_double emits shortest round-trip decimals") {
    for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 2.5e-8, 1e300, -17.25, 4.4,
                     0.30000000000000004}) {
        const std::string s = evalcli::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(evalcli::format_double(1.0) == "1");
    CHECK(evalcli::format_double(0.5) == "0.5");
    CHECK(evalcli::format_double(-2.0) == "-2");
}

TEST_CASE("model, split and attack sections parse with defaults") {
    const config::Table empty = config::parse_string("", "doc");
    const ModelConfig dflt = evalcli::model_from_table(empty, 42);
    CHECK(dflt.conv_filters == 32);
    CHECK(dflt.conv_kernel == 9);
    CHECK(dflt.pc_capsules == 8);
    CHECK(dflt.pc_dim == 32);
    CHECK(dflt.oc_dim == 32);
    CHECK(dflt.routing_iters == 3);
    CHECK(dflt.epochs == 300);
    CHECK(dflt.lr == 0.001);
    CHECK(dflt.batch_size == 32);
    CHECK(dflt.init_seed == derive_seed(42, "model-init-seed"));

    const config::Table doc = config::parse_string(
        "[model]\nepochs = 7\nlr = 0.01\ninit_seed = 5\n", "doc");
    const ModelConfig tuned = evalcli::model_from_table(doc, 42);
    CHECK(tuned.epochs == 7);
    CHECK(tuned.lr == 0.01);
    CHECK(tuned.init_seed == 5);
    CHECK(tuned.conv_filters == 32);

    CHECK_THROWS_AS(evalcli::split_from_table(empty), ConfigError);
    const config::Table split_doc = config::parse_string(
        "[split]\ntrain_device = \"dev-a\"\n", "doc");
    const dataset::SplitSpec spec = evalcli::split_from_table(split_doc);
    CHECK(spec.train_device == "dev-a");
    CHECK(spec.train_samples_per_rp == 5);
    CHECK(spec.test_samples_per_rp_per_device == 1);

    const config::Table atk_empty = config::parse_string("", "doc");
    const AttackConfig atk = evalcli::attack_from_table(atk_empty, 123);
    CHECK(atk.method == AttackMethod::FGSM);
    CHECK(atk.eps == 0.1);
    CHECK(atk.phi == 100.0);
    CHECK(atk.iters == 10);
    CHECK(atk.alpha == 0.9);
    CHECK(atk.mask_seed == 123);
    CHECK_FALSE(atk.mim_literal);

    const config::Table atk_doc = config::parse_string(
        "method = \"MIM\"\neps = 0.3\nmim_literal = true\nmask_seed = 9\n",
        "doc");
    const AttackConfig mim = evalcli::attack_from_table(atk_doc, 123);
    CHECK(mim.method == AttackMethod::MIM);
    CHECK(mim.eps == 0.3);
    CHECK(mim.mim_literal);
    CHECK(mim.mask_seed == 9);

    const config::Table bad = config::parse_string("eps = 0.9\n", "doc");
    CHECK_THROWS_AS(evalcli::attack_from_table(bad, 0), ConfigError);
}

namespace {

const char* kExperimentDoc =
    "[experiment]\n"
    "name = \"demo\"\n"
    "seed = 99\n"
    "variants = [\"NONE\", \"FGSM\"]\n"
    "sweeps = false\n"
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
    "routing_iters = 2\n";

}  // namespace

TEST_CASE("experiment config parses, derives seeds and validates variants") {
    const config::Table root = config::parse_string(kExperimentDoc, "doc");
    const evalcli::ExperimentConfig cfg =
        evalcli::experiment_from_table(root, std::nullopt);
    CHECK(cfg.name == "demo");
    CHECK(cfg.seed == 99);
    CHECK(cfg.variants == std::vector<std::string>{"NONE", "FGSM"});
    CHECK_FALSE(cfg.sweeps);
    CHECK(cfg.scenario.buildings.size() == 1);
    CHECK(cfg.scenario.devices.size() == 2);
    CHECK(cfg.split.train_device == "dev-a");
    CHECK(cfg.model.epochs == 3);
    CHECK(cfg.model.init_seed == derive_seed(99, "model-init-seed"));
    // No [train]/[attack] tables: defaults with derived mask seeds.
    CHECK(cfg.train_attack.mask_seed == derive_seed(99, "train-mask"));
    CHECK(cfg.eval_attack.mask_seed == derive_seed(99, "eval-mask"));
    CHECK(cfg.eval_attack.method == AttackMethod::FGSM);

    const evalcli::ExperimentConfig overridden =
        evalcli::experiment_from_table(root, 777);
    CHECK(overridden.seed == 777);
    CHECK(overridden.model.init_seed == derive_seed(777, "model-init-seed"));
    CHECK(overridden.eval_attack.mask_seed == derive_seed(777, "eval-mask"));

    config::Table bad_variant = config::parse_string(
        std::string(kExperimentDoc), "doc");
    bad_variant.open_table("experiment")
        .set("variants", config::Value::array({config::Value::string("BIM")}));
    CHECK_THROWS_AS(evalcli::experiment_from_table(bad_variant, std::nullopt),
                    ConfigError);

    config::Table dup_variant = config::parse_string(
        std::string(kExperimentDoc), "doc");
    dup_variant.open_table("experiment")
        .set("variants",
             config::Value::array({config::Value::string("FGSM"),
                                   config::Value::string("FGSM")}));
    CHECK_THROWS_AS(evalcli::experiment_from_table(dup_variant, std::nullopt),
                    ConfigError);

    config::Table no_variants = config::parse_string(
        std::string(kExperimentDoc), "doc");
    no_variants.open_table("experiment")
        .set("variants", config::Value::array({}));
    CHECK_THROWS_AS(evalcli::experiment_from_table(no_variants, std::nullopt),
                    ConfigError);
}

TEST_CASE("run_experiment writes a complete deterministic report") {
    const config::Table root = config::parse_string(kExperimentDoc, "doc");
    evalcli::ExperimentConfig cfg =
        evalcli::experiment_from_table(root, std::nullopt);
    cfg.variants = {"NONE"};
    cfg.sweeps = true;

    const fs::path dir_a = temp_path("exp_a");
    const fs::path dir_b = temp_path("exp_b");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    evalcli::run_experiment(cfg, dir_a);

    const char* files[] = {"dataset.csv",      "model_NONE.ckpt",
                           "loss_NONE.csv",    "error_report.csv",
                           "sweep_phi.csv",    "sweep_eps.csv",
                           "summary.json"};
    for (const char* name : files) {
        CHECK(fs::exists(dir_a / name));
    }

    const nlohmann::json summary =
        nlohmann::json::parse(read_file(dir_a / "summary.json"));
    CHECK(summary["name"] == "demo");
    CHECK(summary["seed"] == 99);
    // B0: 8 m path at 2 m spacing puts RPs at 0,2,4,6,8.
    CHECK(summary["dataset"]["classes"] == 5);
    CHECK(summary["dataset"]["ap_count"] == 6);
    CHECK(summary["dataset"]["fingerprints"] == 60);
    CHECK(summary["dataset"]["train_samples"] == 25);
    CHECK(summary["dataset"]["test_samples"] == 10);
    CHECK(summary["variants"]["NONE"].contains("clean_mean_m"));
    CHECK(summary["variants"]["NONE"].contains("attacked_mean_m"));
    CHECK(summary["variants"]["NONE"]["clean_mean_m"].get<double>() >= 0.0);

    // Header plus 2 attack blocks of (2 devices x 1 building + ALL) rows.
    const std::string report = read_file(dir_a / "error_report.csv");
    CHECK(line_count(report) == 1 + 2 * 3);
    CHECK(report.rfind("variant,attack,eps,phi,device,building,mean_m,"
                       "best_m,worst_m,samples\n", 0) == 0);
    CHECK(contains(report, "NONE,NONE,0,0,ALL,ALL,"));
    CHECK(contains(report, "NONE,FGSM,0.1,100,ALL,ALL,"));

    CHECK(line_count(read_file(dir_a / "sweep_phi.csv")) == 1 + 11);
    CHECK(line_count(read_file(dir_a / "sweep_eps.csv")) == 1 + 6);
    CHECK(line_count(read_file(dir_a / "loss_NONE.csv")) == 1 + 3);

    const dataset::FingerprintDB db = dataset::load_db(dir_a / "dataset.csv");
    CHECK(db.class_count() == 5);
    CHECK(db.ap_count() == 6);

    // A fresh directory reproduces every report byte for byte.
    evalcli::run_experiment(cfg, dir_b);
    for (const char* name : files) {
        CHECK(read_file(dir_a / name) == read_file(dir_b / name));
    }

    // Rerunning in place reuses the stored checkpoint instead of retraining
    // and leaves the reports unchanged.
    evalcli::run_experiment(cfg, dir_a);
    for (const char* name : files) {
        CHECK(read_file(dir_a / name) == read_file(dir_b / name));
    }
}
