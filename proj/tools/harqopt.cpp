#include "harq/sweep.hpp"
#include "harq/types.hpp"
#include "harq/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput analysis and redundancy optimization for "
                 "truncated HARQ over Nakagami-m block-fading channels"};
    app.set_version_flag("--version", harq::tool_version);
    app.require_subcommand(1);

    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Run a Cartesian parameter sweep, write CSV + manifest");
    std::string preset;
    std::vector<std::string> scheme_names{"HARQ_IR"};
    std::vector<std::string> mode_names{"FIXED", "VARIABLE"};
    std::vector<double> snr_db{10.0};
    std::vector<double> m_values{1.0};
    std::vector<int> k_values{4};
    int grid_points = 100;
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    int chase_starts = 4;
    std::string out_path;
    auto* preset_opt =
        sweep_cmd->add_option("--preset", preset,
                              "Headline dataset axes: fig3|fig4|fig5|fig6|fig7 "
                              "(explicit axis flags override)");
    auto* scheme_opt =
        sweep_cmd->add_option("--scheme", scheme_names,
                              "HARQ_I, HARQ_IR, HARQ_CHASE (repeatable)")
            ->delimiter(',');
    auto* mode_opt = sweep_cmd
                         ->add_option("--rate-mode", mode_names,
                                      "FIXED, VARIABLE (repeatable)")
                         ->delimiter(',');
    auto* snr_opt = sweep_cmd
                        ->add_option("--snr-db", snr_db,
                                     "Average SNR axis in dB (repeatable)")
                        ->delimiter(',');
    auto* m_opt = sweep_cmd
                      ->add_option("--m", m_values,
                                   "Nakagami shape axis, each >= 0.5")
                      ->delimiter(',');
    auto* k_opt = sweep_cmd
                      ->add_option("--K", k_values,
                                   "Attempt-cap axis (repeatable)")
                      ->delimiter(',');
    auto* grid_opt = sweep_cmd->add_option(
        "--grid-points", grid_points,
        "Budget-grid resolution for the variable-rate tables [50, 400]");
    auto* trials_opt = sweep_cmd->add_option(
        "--trials", trials,
        "Monte Carlo trials per row; enables the mc_eta/mc_stderr columns");
    auto* seed_opt = sweep_cmd->add_option("--seed", seed, "Base RNG seed");
    auto* starts_opt = sweep_cmd->add_option(
        "--chase-starts", chase_starts,
        "Random restarts in the variable-rate Chase search");
    auto* out_opt =
        sweep_cmd->add_option("--out", out_path, "CSV output path");

    auto* describe_cmd = app.add_subcommand(
        "describe", "Optimize one configuration and print its policy");
    std::string d_scheme = "HARQ_IR";
    std::string d_mode = "VARIABLE";
    double d_snr = 10.0;
    double d_m = 1.0;
    int d_k = 4;
    int d_grid = 100;
    int d_starts = 4;
    std::uint64_t d_seed = 20260815ull;
    bool as_json = false;
    describe_cmd->add_option("--scheme", d_scheme,
                             "HARQ_I, HARQ_IR, HARQ_CHASE");
    describe_cmd->add_option("--rate-mode", d_mode, "FIXED or VARIABLE");
    describe_cmd->add_option("--snr-db", d_snr, "Average SNR in dB");
    describe_cmd->add_option("--m", d_m, "Nakagami shape, >= 0.5");
    describe_cmd->add_option("--K", d_k, "Attempt cap");
    describe_cmd->add_option("--grid-points", d_grid,
                             "Variable-rate table resolution [50, 400]");
    describe_cmd->add_option("--chase-starts", d_starts,
                             "Random restarts in the Chase search");
    describe_cmd->add_option("--seed", d_seed, "RNG seed for the search");
    describe_cmd->add_flag("--json", as_json, "Emit JSON instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sweep_cmd) {
            harq::SweepSpec spec;
            const bool from_preset = preset_opt->count() > 0;
            if (from_preset) spec = harq::preset_spec(preset);
            auto explicit_or_fresh = [&](CLI::Option* opt) {
                return !from_preset || opt->count() > 0;
            };
            if (explicit_or_fresh(scheme_opt)) {
                spec.schemes.clear();
                for (const std::string& name : scheme_names)
                    spec.schemes.push_back(harq::parse_scheme(upper(name)));
            }
            if (explicit_or_fresh(mode_opt)) {
                spec.rate_modes.clear();
                for (const std::string& name : mode_names)
                    spec.rate_modes.push_back(harq::parse_rate_mode(upper(name)));
            }
            if (explicit_or_fresh(snr_opt)) spec.snr_db = snr_db;
            if (explicit_or_fresh(m_opt)) spec.m_values = m_values;
            if (explicit_or_fresh(k_opt)) spec.k_values = k_values;
            if (explicit_or_fresh(grid_opt)) spec.grid_points = grid_points;
            if (explicit_or_fresh(seed_opt)) spec.seed = seed;
            if (explicit_or_fresh(starts_opt)) spec.chase_starts = chase_starts;
            if (trials_opt->count() > 0) spec.trials = trials;
            if (out_opt->count() > 0)
                spec.output_path = out_path;
            else if (!from_preset)
                spec.output_path = "sweep.csv";

            harq::SweepResult result = harq::run_sweep(spec);
            std::cout << "wrote " << result.rows_written << " row(s) to "
                      << result.csv_path << '\n';
            std::cout << "manifest: " << result.manifest_path << '\n';
            for (const std::string& reason : result.skipped)
                std::cout << "skipped: " << reason << '\n';
        } else {
            harq::PolicyDescription description = harq::describe_policy(
                d_snr, d_m, d_k, harq::parse_scheme(upper(d_scheme)),
                harq::parse_rate_mode(upper(d_mode)), d_grid, d_starts, d_seed);
            if (as_json)
                std::cout << description.json << '\n';
            else
                std::cout << description.text;
        }
    } catch (const harq::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
