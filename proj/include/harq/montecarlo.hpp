#pragma once

#include "harq/channel.hpp"
#include "harq/outage.hpp"
#include "harq/rng.hpp"
#include "harq/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace harq {

// One simulation run: draw i.i.d. per-attempt SNRs, apply the scheme's
// decoding condition after each attempt, stop at first success or after K
// attempts. fixed_snr freezes the channel for degenerate-case tests.
struct SimConfig {
    Scheme scheme = Scheme::harq_ir;
    ChannelModel model;
    RedundancyPolicy policy;
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
    std::optional<double> fixed_snr;
};

struct MonteCarloValue {
    double value = 0.0;
    double std_error = 0.0;
};

struct SimEstimate {
    std::vector<MonteCarloValue> f_hat; // failure prob after k attempts
    MonteCarloValue eta_hat;            // renewal-reward throughput
    MonteCarloValue k_avg_hat;          // mean attempts consumed
    std::uint64_t trials_used = 0;
};

// One draw of the per-attempt SNR: Gamma(shape m, mean gamma_bar).
double sample_snr(const ChannelModel& model, Xoshiro256ss& rng);

// Runs config.trials independent trials. Every trial derives its own RNG
// substream from (seed, trial index) and all accumulators are integer
// counts, so the result is bit-identical for any trial order or thread
// count. simulate() spreads trial blocks across OpenMP threads;
// simulate_serial() is the single-threaded reference.
SimEstimate simulate(const SimConfig& config);
SimEstimate simulate_serial(const SimConfig& config);

} // namespace harq
