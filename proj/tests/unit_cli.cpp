#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "labcli.hpp"

namespace fs = std::filesystem;
using namespace groklab::cli;

namespace {

fs::path sandbox() {
    auto dir = fs::temp_directory_path() / "groklab_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    auto p = sandbox() / name;
    std::ofstream f(p);
    f << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string ts_small_config(const std::string& outdir) {
    nlohmann::json j;
    j["model"] = "ts";
    j["ts"] = {{"n", 400},   {"d", 40},          {"N", 80},       {"sigma2", 0.3},
               {"sigma_a2", 0.05}, {"sigma_w2", 0.5}, {"eps", -0.3}};
    j["scan"] = {{"grid", {0.5, 0.4, 0.3}}};
    j["solver"] = {{"mode", "quadrature"}, {"emit_curves", false}};
    j["output_dir"] = outdir;
    j["seed"] = 11;
    return j.dump();
}

}  // namespace

TEST_CASE("malformed configs are rejected naming the field, no output written") {
    auto out = (sandbox() / "never").string();
    auto bad1 = write_config("bad1.json", R"({"model": "ts", "ts": {"n": 10, "d": 4, "N": 5,
        "sigma2": 0.2, "sigma_a2": 0.1, "sigma_w2": 0.5, "eps": 0.0, "bogus_key": 1},
        "output_dir": ")" + out + R"("})");
    CHECK(cmd_ts_theory(bad1.string(), {}) == kInvalid);
    CHECK_FALSE(fs::exists(out));

    CHECK_THROWS_WITH_AS(validate_config_file(bad1.string()),
                         doctest::Contains("bogus_key"), std::invalid_argument);

    auto bad2 = write_config("bad2.json", R"({"model": "nope"})");
    CHECK(cmd_scan(bad2.string(), {}) == kInvalid);

    auto bad3 = write_config("bad3.json", "this is not json");
    CHECK(cmd_scan(bad3.string(), {}) == kInvalid);

    // empty scan grid
    auto bad4 = write_config("bad4.json", R"({"model": "mod",
        "mod": {"P": 5, "N": 10, "sigma2": 0.2, "sigma_a2": 0.1, "gamma": 1e-4},
        "scan": {"grid": []}})");
    CHECK(cmd_mod_theory(bad4.string(), {}) == kInvalid);
}

TEST_CASE("ts-theory: artifacts written, reruns are hash-identical") {
    auto out1 = sandbox() / "ts_run1";
    auto out2 = sandbox() / "ts_run2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    auto cfg = write_config("ts_ok.json", ts_small_config(out1.string()));
    CHECK(cmd_ts_theory(cfg.string(), {}) == kClean);
    CHECK(fs::exists(out1 / "ts_scan.csv"));
    CHECK(fs::exists(out1 / "transition.json"));
    CHECK(fs::exists(out1 / "manifest.json"));

    Overrides ov;
    ov.output_dir = out2.string();
    CHECK(cmd_ts_theory(cfg.string(), ov) == kClean);
    CHECK(slurp(out1 / "ts_scan.csv") == slurp(out2 / "ts_scan.csv"));

    auto m1 = nlohmann::json::parse(slurp(out1 / "manifest.json"));
    auto m2 = nlohmann::json::parse(slurp(out2 / "manifest.json"));
    REQUIRE(m1["artifacts"].size() == m2["artifacts"].size());
    for (size_t i = 0; i < m1["artifacts"].size(); ++i)
        CHECK(m1["artifacts"][i]["hash"] == m2["artifacts"][i]["hash"]);

    // every output file is referenced by the manifest (no orphan writes)
    std::set<std::string> listed;
    for (const auto& a : m1["artifacts"]) listed.insert(a["file"].get<std::string>());
    for (const auto& entry : fs::directory_iterator(out1)) {
        auto name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        CHECK(listed.count(name) == 1);
    }
}

TEST_CASE("mod-theory: boundaries artifact and clean exit") {
    auto out = sandbox() / "mod_run";
    fs::remove_all(out);
    nlohmann::json j;
    j["model"] = "mod";
    j["mod"] = {{"P", 401}, {"N", 1000}, {"sigma2", 0.2}, {"sigma_a2", 2e-6}, {"gamma", 1e-4}};
    j["scan"] = {{"from", 0.30}, {"to", 0.10}, {"step", 0.01}};
    j["solver"] = {{"emit_curves", false}};
    j["output_dir"] = out.string();
    auto cfg = write_config("mod_ok.json", j.dump());
    CHECK(cmd_mod_theory(cfg.string(), {}) == kClean);
    auto b = nlohmann::json::parse(slurp(out / "boundaries.json"));
    CHECK(b["boundaries_found"].get<bool>());
}

TEST_CASE("sample: desk-scale guard blocks huge runs without --force") {
    auto out = sandbox() / "sample_guard";
    nlohmann::json j;
    j["model"] = "ts";
    j["ts"] = {{"n", 3000}, {"d", 150}, {"N", 2800}, {"sigma2", 0.2},
               {"sigma_a2", 0.003}, {"sigma_w2", 0.5}, {"eps", -0.3}};
    j["langevin"] = {{"step_size", 1e-4}, {"n_steps", 400000}, {"burn_in", 1000},
                     {"thin", 100},       {"n_init_seeds", 50}, {"n_data_seeds", 4},
                     {"flop_cap", 1e12}};
    j["output_dir"] = out.string();
    auto cfg = write_config("sample_big.json", j.dump());
    CHECK(cmd_sample(cfg.string(), {}) == kInvalid);
}

TEST_CASE("sample: prior-only run emits the moment-check report") {
    auto out = sandbox() / "sample_prior";
    fs::remove_all(out);
    nlohmann::json j;
    j["model"] = "ts";
    j["ts"] = {{"n", 0},        {"d", 10},          {"N", 20},      {"sigma2", 0.25},
               {"sigma_a2", 1.0}, {"sigma_w2", 0.5}, {"eps", 0.0}};
    j["langevin"] = {{"step_size", 2e-4}, {"n_steps", 800}, {"burn_in", 200},
                     {"thin", 40},        {"n_init_seeds", 6}, {"n_data_seeds", 1}};
    j["output_dir"] = out.string();
    j["seed"] = 5;
    auto cfg = write_config("sample_prior.json", j.dump());
    CHECK(cmd_sample(cfg.string(), {}) == kClean);
    auto rep = nlohmann::json::parse(slurp(out / "prior_moments.json"));
    double got = rep["input_weight_var"].get<double>();
    double want = rep["input_weight_var_declared"].get<double>();
    CHECK(std::abs(got - want) < 0.5 * want);  // short run, loose check
}

TEST_CASE("sample + resume: checkpoints continue bit-exactly") {
    auto out = sandbox() / "sample_ckpt";
    fs::remove_all(out);
    nlohmann::json j;
    j["model"] = "ts";
    j["ts"] = {{"n", 30},       {"d", 6},           {"N", 8},       {"sigma2", 0.3},
               {"sigma_a2", 0.5}, {"sigma_w2", 0.5}, {"eps", -0.5}};
    j["langevin"] = {{"step_size", 5e-4}, {"n_steps", 50}, {"burn_in", 10},
                     {"thin", 10},        {"n_init_seeds", 2}, {"n_data_seeds", 1},
                     {"keep_checkpoints", true}};
    j["output_dir"] = out.string();
    j["seed"] = 21;
    auto cfg = write_config("sample_ckpt.json", j.dump());
    CHECK(cmd_sample(cfg.string(), {}) == kClean);
    REQUIRE(fs::exists(out / "checkpoint_0.json"));

    // resume to the same step is a no-op on the weights
    Overrides ov;
    ov.output_dir = (out / "resumed.json").string();
    CHECK(cmd_resume((out / "checkpoint_0.json").string(), 50, ov) == kClean);
    auto a = nlohmann::json::parse(slurp(out / "checkpoint_0.json"));
    auto b = nlohmann::json::parse(slurp(out / "resumed.json"));
    CHECK(a["input_weights"] == b["input_weights"]);
}

TEST_CASE("verify: passes on sound implementation" * doctest::timeout(500)) {
    auto out = sandbox() / "verify_run";
    fs::remove_all(out);
    nlohmann::json j;
    j["model"] = "mod";
    j["mod"] = {{"P", 5}, {"N", 10}, {"sigma2", 0.2}, {"sigma_a2", 0.1}, {"gamma", 1e-4}};
    j["output_dir"] = out.string();
    j["seed"] = 3;
    auto cfg = write_config("verify.json", j.dump());
    CHECK(cmd_verify(cfg.string(), {}) == kClean);
    auto rep = nlohmann::json::parse(slurp(out / "verification.json"));
    CHECK(rep["all_pass"].get<bool>());
}
