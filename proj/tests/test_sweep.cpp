#include <doctest.h>

#include "harq/optimizer.hpp"
#include "harq/sweep.hpp"
#include "harq/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace harq;

namespace {

std::filesystem::path scratch_dir() {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("harq_sweep_test_" + std::to_string(++counter));
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

// The wall-clock column is the one field exempt from determinism.
std::string strip_wall_time(const std::string& line) {
    const auto pos = line.rfind(',');
    return line.substr(0, pos);
}

SweepSpec tiny_spec(const std::filesystem::path& out) {
    SweepSpec spec;
    spec.snr_db = {10.0};
    spec.m_values = {1.0};
    spec.k_values = {1, 2};
    spec.schemes = {Scheme::harq_i, Scheme::harq_ir};
    spec.rate_modes = {RateMode::fixed, RateMode::variable};
    spec.grid_points = 60;
    spec.seed = 1;
    spec.output_path = out.string();
    return spec;
}

} // namespace

TEST_CASE("run_sweep: schema, capacity bound, and single-attempt rows") {
    const auto dir = scratch_dir();
    const SweepSpec spec = tiny_spec(dir / "tiny.csv");
    const SweepResult result = run_sweep(spec);
    CHECK(result.rows_written == 8);
    CHECK(result.skipped.empty());
    CHECK(result.csv_path == spec.output_path);

    const std::vector<std::string> lines = read_lines(result.csv_path);
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] ==
          "snr_db,m,K,scheme,rate_mode,c_bar,eta_exact,eta_bound,chi,k_avg,"
          "f_1,f_2,rho_1,rho_2,mc_eta,mc_stderr,wall_time_ms");

    const ChannelModel model(1.0, 10.0);
    const double eta_k1 =
        optimize_fixed_rate(model, Scheme::harq_i, 1).reported.eta;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> f = split_csv(lines[i]);
        REQUIRE(f.size() == 17);
        const int k = std::stoi(f[2]);
        const std::string& scheme = f[3];
        const std::string& mode = f[4];
        const double c_bar = std::stod(f[5]);
        const double eta = std::stod(f[6]);
        const double chi = std::stod(f[8]);
        const double k_avg = std::stod(f[9]);

        CHECK(eta <= c_bar + 1e-6);
        CHECK(chi >= 0.0);
        CHECK(chi <= 1.0);
        CHECK(k_avg >= 1.0);
        CHECK(k_avg <= k + 1e-9);

        // eta_bound only accompanies the bound-driven optimizer.
        if (scheme == "HARQ_IR" && mode == "VARIABLE") {
            CHECK(!f[7].empty());
            CHECK(std::stod(f[7]) <= eta + 2e-3);
        } else {
            CHECK(f[7].empty());
        }

        if (k == 1) {
            CHECK(f[11].empty()); // f_2 padding
            CHECK(f[13].empty()); // rho_2 padding
            // All schemes and modes coincide at one attempt.
            CHECK(std::abs(std::stod(f[6]) - eta_k1) <= 1e-4);
            CHECK(!f[10].empty());
        } else {
            CHECK(!f[11].empty());
            CHECK(!f[13].empty());
        }

        // No Monte Carlo columns without trials.
        CHECK(f[14].empty());
        CHECK(f[15].empty());
    }
}

TEST_CASE("run_sweep: byte-identical rerun modulo wall time") {
    const auto dir = scratch_dir();
    const SweepSpec spec = tiny_spec(dir / "repeat.csv");
    run_sweep(spec);
    const std::vector<std::string> first = read_lines(spec.output_path);
    run_sweep(spec);
    const std::vector<std::string> second = read_lines(spec.output_path);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(strip_wall_time(first[i]) == strip_wall_time(second[i]));
    }
}

TEST_CASE("run_sweep: chase beyond four attempts is skipped with a reason") {
    const auto dir = scratch_dir();
    SweepSpec spec = tiny_spec(dir / "skip.csv");
    spec.k_values = {2, 6};
    spec.schemes = {Scheme::harq_chase};
    const SweepResult result = run_sweep(spec);
    // K=2 in both modes runs; K=6 in both modes is skipped.
    CHECK(result.rows_written == 2);
    REQUIRE(result.skipped.size() == 2);
    for (const std::string& reason : result.skipped) {
        CHECK(reason.find("K <= 4") != std::string::npos);
    }

    const auto manifest = nlohmann::json::parse(
        std::ifstream(result.manifest_path));
    CHECK(manifest["skipped"].size() == 2);
    CHECK(manifest["rows_written"] == 2);
}

TEST_CASE("run_sweep: manifest reproduces the spec") {
    const auto dir = scratch_dir();
    SweepSpec spec = tiny_spec(dir / "manifest.csv");
    spec.trials = 20000;
    spec.seed = 42;
    spec.k_values = {2};
    spec.schemes = {Scheme::harq_ir};
    const SweepResult result = run_sweep(spec);
    CHECK(result.manifest_path == spec.output_path + ".manifest.json");

    const auto manifest = nlohmann::json::parse(
        std::ifstream(result.manifest_path));
    CHECK(manifest.contains("tool"));
    CHECK(manifest.contains("version"));
    const auto& js = manifest["spec"];
    CHECK(js["snr_db"] == nlohmann::json::array({10.0}));
    CHECK(js["m_values"] == nlohmann::json::array({1.0}));
    CHECK(js["k_values"] == nlohmann::json::array({2}));
    CHECK(js["grid_points"] == 60);
    CHECK(js["trials"] == 20000);
    CHECK(js["seed"] == 42);

    // Monte Carlo columns must be populated and consistent with the
    // analytic value.
    const std::vector<std::string> lines = read_lines(result.csv_path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> f = split_csv(lines[i]);
        REQUIRE(f.size() == 17);
        REQUIRE(!f[14].empty());
        REQUIRE(!f[15].empty());
        const double eta = std::stod(f[6]);
        const double mc = std::stod(f[14]);
        const double se = std::stod(f[15]);
        CHECK(se > 0.0);
        CHECK(std::abs(mc - eta) <= 5.0 * se + 1e-3);
        CHECK(std::stod(f[16]) >= 0.0);
    }
}

TEST_CASE("run_sweep: spec validation") {
    const auto dir = scratch_dir();
    const SweepSpec good = tiny_spec(dir / "x.csv");

    SweepSpec bad = good;
    bad.snr_db.clear();
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.m_values = {0.3};
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.k_values = {0};
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.grid_points = 20;
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.grid_points = 500;
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.trials = 0;
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);

    bad = good;
    bad.output_path.clear();
    CHECK_THROWS_AS((void)run_sweep(bad), std::invalid_argument);
}

TEST_CASE("preset specs are valid and distinct") {
    std::vector<std::string> names = {"fig3", "fig4", "fig5", "fig6", "fig7"};
    for (const std::string& name : names) {
        const SweepSpec spec = preset_spec(name);
        CHECK(!spec.snr_db.empty());
        CHECK(!spec.m_values.empty());
        CHECK(!spec.k_values.empty());
        CHECK(!spec.schemes.empty());
        CHECK(!spec.rate_modes.empty());
        CHECK(!spec.output_path.empty());
    }
    CHECK(preset_spec("fig3").snr_db.size() == 16);
    CHECK(preset_spec("fig4").m_values.size() == 3);
    CHECK_THROWS_AS((void)preset_spec("fig9"), std::invalid_argument);
}

TEST_CASE("describe_policy: equal-redundancy report for harq-i") {
    const PolicyDescription d =
        describe_policy(10.0, 1.0, 3, Scheme::harq_i, RateMode::fixed, 60);
    CHECK(d.text.find("rho") != std::string::npos);
    CHECK(d.text.find("eta") != std::string::npos);

    const auto j = nlohmann::json::parse(d.json);
    REQUIRE(j["rho"].size() == 3);
    const double first = j["rho"][0].get<double>();
    for (const auto& r : j["rho"]) {
        CHECK(std::abs(r.get<double>() - first) <= 1e-9 * first);
    }
    CHECK(j["eta"].get<double>() > 0.0);
    CHECK(j["k_max"] == 3);
    CHECK(j["scheme"] == "HARQ_I");
    REQUIRE(j["f"].size() == 3);
    REQUIRE(j["rate"].size() == 3);
    CHECK(std::abs(j["rate"][0].get<double>() - 1.0 / first) < 1e-9 / first);
}

TEST_CASE("describe_policy: variable-rate profile has an interior minimum") {
    const PolicyDescription d = describe_policy(10.0, 1.0, 4, Scheme::harq_ir,
                                                RateMode::variable, 100);
    const auto j = nlohmann::json::parse(d.json);
    const auto rp = j["rho_prime"].get<std::vector<double>>();
    REQUIRE(rp.size() == 4);
    const std::size_t argmin =
        std::min_element(rp.begin(), rp.end()) - rp.begin();
    CHECK(argmin > 0);
    CHECK(argmin < rp.size() - 1);
    CHECK(rp[0] == *std::max_element(rp.begin(), rp.end()));
    CHECK(!j["eta_bound"].is_null());
}

TEST_CASE("describe_policy: single attempt is mode-independent") {
    const PolicyDescription vr = describe_policy(10.0, 1.0, 1, Scheme::harq_ir,
                                                 RateMode::variable, 80);
    const PolicyDescription fr = describe_policy(10.0, 1.0, 1, Scheme::harq_ir,
                                                 RateMode::fixed, 80);
    const auto jv = nlohmann::json::parse(vr.json);
    const auto jf = nlohmann::json::parse(fr.json);
    CHECK(std::abs(jv["rho"][0].get<double>() -
                   jf["rho"][0].get<double>()) < 1e-12);
    CHECK(std::abs(jv["eta"].get<double>() - jf["eta"].get<double>()) <
          1e-12);
}
