#pragma once

#include "harq/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace harq {

// Cartesian sweep over channel and protocol axes. Every combination
// produces one CSV row; combinations that are invalid (variable-rate
// Chase beyond K = 4) are skipped with a logged reason.
struct SweepSpec {
    std::vector<double> snr_db;
    std::vector<double> m_values;
    std::vector<int> k_values;
    std::vector<Scheme> schemes;
    std::vector<RateMode> rate_modes;
    int grid_points = 100;
    std::optional<std::uint64_t> trials; // enables Monte Carlo columns
    std::uint64_t seed = 1;
    std::string output_path;
    int chase_starts = 4;
};

struct SweepResult {
    std::string csv_path;
    std::string manifest_path;
    int rows_written = 0;
    std::vector<std::string> skipped; // human-readable reasons
};

// Runs the sweep, writes the CSV and a JSON manifest (same path with
// ".manifest.json" appended). Output bytes are a function of the spec
// alone, except the wall_time_ms column.
SweepResult run_sweep(const SweepSpec& spec);

// Named sweeps reproducing the headline datasets; see README. Throws
// std::invalid_argument for unknown names.
SweepSpec preset_spec(const std::string& name);

// Optimizes one configuration and formats the policy, per-attempt
// normalized redundancies, rates, outage profile, and throughput metrics.
struct PolicyDescription {
    std::string text;
    std::string json;
};

PolicyDescription describe_policy(double snr_db, double m, int k_max,
                                  Scheme scheme, RateMode mode,
                                  int grid_points = 100, int starts = 4,
                                  std::uint64_t seed = 20260815ull);

} // namespace harq
