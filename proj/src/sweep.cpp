#include "harq/sweep.hpp"

#include "harq/montecarlo.hpp"
#include "harq/optimizer.hpp"
#include "harq/rng.hpp"
#include "harq/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace harq {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

OutageProfile profile_for(const ChannelModel& model, const ErgodicStats& stats,
                          Scheme scheme, const RedundancyPolicy& policy) {
    switch (scheme) {
    case Scheme::harq_i:
        return outage_harq_i(model, policy);
    case Scheme::harq_ir:
        return outage_ir_exact(model, stats, policy);
    case Scheme::harq_chase:
        return outage_chase(model, policy);
    }
    throw std::logic_error("unreachable scheme");
}

OptimizationResult optimize_cell(const ChannelModel& model, Scheme scheme,
                                 RateMode mode, int k, int grid_points,
                                 int chase_starts, std::uint64_t seed) {
    if (mode == RateMode::fixed) return optimize_fixed_rate(model, scheme, k);
    switch (scheme) {
    case Scheme::harq_ir:
        return optimize_vr_ir(model, k, grid_points);
    case Scheme::harq_chase:
        return optimize_vr_chase(model, k, chase_starts, seed);
    case Scheme::harq_i:
        return optimize_vr_harq_i(model, k, chase_starts, seed);
    }
    throw std::logic_error("unreachable scheme");
}

struct Cell {
    double snr_db = 0.0;
    double m = 0.0;
    int k = 0;
    Scheme scheme = Scheme::harq_i;
    RateMode mode = RateMode::fixed;
    std::size_t stats_key = 0;
    std::size_t ordinal = 0;
};

struct CellResult {
    bool skipped = false;
    std::string skip_reason;
    std::string row;
    std::exception_ptr error;
};

std::string cell_tag(const Cell& cell) {
    return "snr_db=" + fmt6(cell.snr_db) + " m=" + fmt6(cell.m) +
           " K=" + std::to_string(cell.k) + " scheme=" +
           std::string(to_string(cell.scheme)) +
           " rate_mode=" + std::string(to_string(cell.mode));
}

void validate_spec(const SweepSpec& spec) {
    if (spec.snr_db.empty() || spec.m_values.empty() || spec.k_values.empty() ||
        spec.schemes.empty() || spec.rate_modes.empty())
        throw std::invalid_argument("sweep: every axis needs at least one value");
    for (double m : spec.m_values)
        if (!(m >= 0.5) || !std::isfinite(m))
            throw std::invalid_argument("sweep: m must be finite and >= 0.5");
    for (double s : spec.snr_db)
        if (!std::isfinite(s))
            throw std::invalid_argument("sweep: snr_db must be finite");
    for (int k : spec.k_values)
        if (k < 1) throw std::invalid_argument("sweep: K must be >= 1");
    if (spec.grid_points < 50 || spec.grid_points > 400)
        throw std::invalid_argument("sweep: grid_points outside [50, 400]");
    if (spec.trials && *spec.trials < 1)
        throw std::invalid_argument("sweep: trials must be >= 1");
    if (spec.chase_starts < 0)
        throw std::invalid_argument("sweep: chase_starts must be >= 0");
    if (spec.output_path.empty())
        throw std::invalid_argument("sweep: output_path is empty");
}

nlohmann::ordered_json spec_to_json(const SweepSpec& spec) {
    nlohmann::ordered_json j;
    j["snr_db"] = spec.snr_db;
    j["m_values"] = spec.m_values;
    j["k_values"] = spec.k_values;
    std::vector<std::string> schemes, modes;
    for (Scheme s : spec.schemes) schemes.emplace_back(to_string(s));
    for (RateMode r : spec.rate_modes) modes.emplace_back(to_string(r));
    j["schemes"] = schemes;
    j["rate_modes"] = modes;
    j["grid_points"] = spec.grid_points;
    if (spec.trials)
        j["trials"] = *spec.trials;
    else
        j["trials"] = nullptr;
    j["seed"] = spec.seed;
    j["output_path"] = spec.output_path;
    j["chase_starts"] = spec.chase_starts;
    return j;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    validate_spec(spec);

    const int k_pad = *std::max_element(spec.k_values.begin(),
                                        spec.k_values.end());

    // One ergodic-statistics evaluation per (snr, m) pair, shared by all
    // cells of that channel.
    std::map<std::pair<double, double>, std::size_t> stats_index;
    std::vector<ErgodicStats> stats_store;
    std::vector<Cell> cells;
    for (double snr : spec.snr_db)
        for (double m : spec.m_values) {
            auto key = std::make_pair(snr, m);
            if (!stats_index.count(key)) {
                stats_index[key] = stats_store.size();
                stats_store.push_back(
                    ergodic_stats(ChannelModel(m, db_to_linear(snr))));
            }
            for (int k : spec.k_values)
                for (Scheme scheme : spec.schemes)
                    for (RateMode mode : spec.rate_modes) {
                        Cell cell;
                        cell.snr_db = snr;
                        cell.m = m;
                        cell.k = k;
                        cell.scheme = scheme;
                        cell.mode = mode;
                        cell.stats_key = stats_index[key];
                        cell.ordinal = cells.size();
                        cells.push_back(cell);
                    }
        }

    std::vector<CellResult> results(cells.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long ci = 0; ci < static_cast<long>(cells.size()); ++ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellResult& out = results[static_cast<std::size_t>(ci)];
        try {
            if (cell.scheme == Scheme::harq_chase && cell.k > 4) {
                out.skipped = true;
                out.skip_reason =
                    cell_tag(cell) + ": Chase optimization requires K <= 4";
                continue;
            }
            auto t0 = std::chrono::steady_clock::now();
            ChannelModel model(cell.m, db_to_linear(cell.snr_db));
            const ErgodicStats& stats = stats_store[cell.stats_key];
            OptimizationResult opt =
                optimize_cell(model, cell.scheme, cell.mode, cell.k,
                              spec.grid_points, spec.chase_starts, spec.seed);
            OutageProfile profile =
                profile_for(model, stats, cell.scheme, opt.policy);
            ThroughputReport report = throughput(opt.policy, profile, stats);

            std::string mc_eta, mc_stderr;
            if (spec.trials) {
                SimConfig sim{.scheme = cell.scheme,
                              .model = model,
                              .policy = opt.policy,
                              .trials = *spec.trials,
                              .seed = substream_seed(spec.seed, cell.ordinal),
                              .fixed_snr = {}};
                SimEstimate est = simulate(sim);
                mc_eta = fmt(est.eta_hat.value);
                mc_stderr = fmt(est.eta_hat.std_error);
            }
            auto t1 = std::chrono::steady_clock::now();
            double wall_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();

            std::ostringstream row;
            row << fmt(cell.snr_db) << ',' << fmt(cell.m) << ',' << cell.k
                << ',' << to_string(cell.scheme) << ','
                << to_string(cell.mode) << ',' << fmt(stats.c_bar) << ','
                << fmt(report.eta) << ',';
            if (cell.mode == RateMode::variable &&
                cell.scheme == Scheme::harq_ir)
                row << fmt(opt.predicted_eta_bound);
            row << ',' << fmt(report.chi) << ',' << fmt(report.k_avg);
            for (int k = 0; k < k_pad; ++k) {
                row << ',';
                if (k < cell.k) row << fmt(profile.f[static_cast<std::size_t>(k)]);
            }
            for (int k = 0; k < k_pad; ++k) {
                row << ',';
                if (k < cell.k)
                    row << fmt(opt.policy.rho[static_cast<std::size_t>(k)]);
            }
            row << ',' << mc_eta << ',' << mc_stderr << ','
                << fmt(wall_ms);
            out.row = row.str();
        } catch (...) {
            out.error = std::current_exception();
        }
    }

    for (const CellResult& result : results)
        if (result.error) std::rethrow_exception(result.error);

    SweepResult summary;
    summary.csv_path = spec.output_path;
    summary.manifest_path = spec.output_path + ".manifest.json";

    std::ofstream csv(spec.output_path, std::ios::binary);
    if (!csv)
        throw std::invalid_argument("sweep: cannot open output path " +
                                    spec.output_path);
    csv << "snr_db,m,K,scheme,rate_mode,c_bar,eta_exact,eta_bound,chi,k_avg";
    for (int k = 1; k <= k_pad; ++k) csv << ",f_" << k;
    for (int k = 1; k <= k_pad; ++k) csv << ",rho_" << k;
    csv << ",mc_eta,mc_stderr,wall_time_ms\n";
    for (const CellResult& result : results) {
        if (result.skipped) {
            summary.skipped.push_back(result.skip_reason);
            continue;
        }
        csv << result.row << '\n';
        ++summary.rows_written;
    }
    csv.close();

    nlohmann::ordered_json manifest;
    manifest["tool"] = "harqopt";
    manifest["version"] = tool_version;
    manifest["spec"] = spec_to_json(spec);
    manifest["rows_written"] = summary.rows_written;
    manifest["skipped"] = summary.skipped;
    std::ofstream mf(summary.manifest_path, std::ios::binary);
    if (!mf)
        throw std::invalid_argument("sweep: cannot open manifest path " +
                                    summary.manifest_path);
    mf << manifest.dump(2) << '\n';
    return summary;
}

SweepSpec preset_spec(const std::string& name) {
    SweepSpec spec;
    spec.output_path = name + ".csv";
    if (name == "fig3") {
        // Throughput against average SNR for the incremental-redundancy
        // and Chase schemes, both rate modes.
        for (int db = 0; db <= 30; db += 2) spec.snr_db.push_back(db);
        spec.m_values = {1.0};
        spec.k_values = {1, 2, 4, 8};
        spec.schemes = {Scheme::harq_ir, Scheme::harq_chase};
        spec.rate_modes = {RateMode::fixed, RateMode::variable};
    } else if (name == "fig4") {
        // Residual throughput against the attempt cap at high SNR for
        // three fading severities (incremental redundancy; the Chase
        // quadrature beyond K = 4 is out of reach anyway).
        spec.snr_db = {30.0};
        spec.m_values = {0.5, 1.0, 2.0};
        spec.k_values = {1, 2, 4, 6, 8, 10};
        spec.schemes = {Scheme::harq_ir};
        spec.rate_modes = {RateMode::fixed, RateMode::variable};
    } else if (name == "fig5") {
        // Optimized per-attempt redundancy profiles at K = 4.
        spec.snr_db = {10.0, 20.0};
        spec.m_values = {1.0};
        spec.k_values = {4};
        spec.schemes = {Scheme::harq_ir, Scheme::harq_chase};
        spec.rate_modes = {RateMode::fixed, RateMode::variable};
    } else if (name == "fig6") {
        // Redundancy profiles of the incremental-redundancy scheme as the
        // attempt cap grows.
        spec.snr_db = {10.0};
        spec.m_values = {1.0};
        spec.k_values = {1, 2, 4, 6, 8};
        spec.schemes = {Scheme::harq_ir};
        spec.rate_modes = {RateMode::fixed, RateMode::variable};
    } else if (name == "fig7") {
        // Outage trajectories f_k under optimized policies.
        spec.snr_db = {10.0};
        spec.m_values = {1.0};
        spec.k_values = {4, 6, 8};
        spec.schemes = {Scheme::harq_ir};
        spec.rate_modes = {RateMode::fixed, RateMode::variable};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return spec;
}

PolicyDescription describe_policy(double snr_db, double m, int k_max,
                                  Scheme scheme, RateMode mode,
                                  int grid_points, int starts,
                                  std::uint64_t seed) {
    ChannelModel model(m, db_to_linear(snr_db));
    ErgodicStats stats = ergodic_stats(model);
    OptimizationResult opt =
        optimize_cell(model, scheme, mode, k_max, grid_points, starts, seed);
    OutageProfile profile = profile_for(model, stats, scheme, opt.policy);
    ThroughputReport report = throughput(opt.policy, profile, stats);

    std::ostringstream text;
    text << to_string(scheme) << ' ' << to_string(mode) << "  m=" << fmt6(m)
         << "  snr=" << fmt6(snr_db) << " dB  c_bar=" << fmt6(stats.c_bar)
         << " bits/use\n";
    text << "  k    rho_k        rho'_k       R_k=1/rho_k  f_k\n";
    for (int k = 0; k < k_max; ++k) {
        auto i = static_cast<std::size_t>(k);
        char line[128];
        std::snprintf(line, sizeof line, "  %-4d %-12.6g %-12.6g %-12.6g %.6g\n",
                      k + 1, opt.policy.rho[i], opt.policy.rho[i] * stats.c_bar,
                      1.0 / opt.policy.rho[i], profile.f[i]);
        text << line;
    }
    text << "  eta=" << fmt6(report.eta) << " bits/use";
    if (std::isfinite(opt.predicted_eta_bound))
        text << "  eta_bound=" << fmt6(opt.predicted_eta_bound);
    text << "  chi=" << fmt6(report.chi) << "  K_avg=" << fmt6(report.k_avg)
         << "  method=" << to_string(profile.method) << '\n';
    if (!opt.diagnostics.empty()) text << "  note: " << opt.diagnostics << '\n';
    if (!profile.warning.empty())
        text << "  warning: " << profile.warning << '\n';

    nlohmann::ordered_json j;
    j["snr_db"] = snr_db;
    j["m"] = m;
    j["gamma_bar"] = model.gamma_bar;
    j["k_max"] = k_max;
    j["scheme"] = to_string(scheme);
    j["rate_mode"] = to_string(mode);
    j["c_bar"] = stats.c_bar;
    j["xi"] = stats.xi;
    j["rho"] = opt.policy.rho;
    std::vector<double> rho_prime, rate;
    for (double r : opt.policy.rho) {
        rho_prime.push_back(r * stats.c_bar);
        rate.push_back(1.0 / r);
    }
    j["rho_prime"] = rho_prime;
    j["rate"] = rate;
    j["f"] = profile.f;
    j["eta"] = report.eta;
    if (std::isfinite(opt.predicted_eta_bound))
        j["eta_bound"] = opt.predicted_eta_bound;
    else
        j["eta_bound"] = nullptr;
    j["chi"] = report.chi;
    j["k_avg"] = report.k_avg;
    j["method"] = to_string(profile.method);
    j["evaluations"] = opt.evaluations;
    j["converged"] = opt.converged;
    j["diagnostics"] = opt.diagnostics;
    j["warning"] = profile.warning;

    PolicyDescription out;
    out.text = text.str();
    out.json = j.dump(2);
    return out;
}

} // namespace harq
