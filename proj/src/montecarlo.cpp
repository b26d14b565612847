#include "harq/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace harq {

namespace {

double sample_normal(Xoshiro256ss& rng) {
    for (;;) {
        double u = 2.0 * rng.uniform01() - 1.0;
        double v = 2.0 * rng.uniform01() - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

// Marsaglia-Tsang rejection; unit scale.
double sample_gamma_unit(double shape, Xoshiro256ss& rng) {
    if (shape < 1.0) {
        double boosted = sample_gamma_unit(shape + 1.0, rng);
        return boosted * std::pow(rng.uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = sample_normal(rng);
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double capacity(double snr) { return std::log1p(snr) / std::numbers::ln2; }

struct TrialCounts {
    std::vector<std::uint64_t> success_at;
    std::uint64_t exhausted = 0;
};

// True when maximum-ratio combining of the first k attempts decodes:
// attempts sorted by ascending rho form chunks whose equivalent SNR is the
// suffix sum of the sorted per-attempt SNRs.
bool chase_decodes(const std::vector<double>& rho,
                   const std::vector<double>& snr, std::size_t k) {
    std::array<std::pair<double, double>, 8> pairs;
    for (std::size_t i = 0; i < k; ++i) pairs[i] = {rho[i], snr[i]};
    std::sort(pairs.begin(), pairs.begin() + k);
    double info = 0.0;
    double suffix = 0.0;
    // Walk chunks outermost-first so suffix SNR sums accumulate once.
    for (std::size_t l = k; l-- > 0;) {
        suffix += pairs[l].second;
        double lower = l > 0 ? pairs[l - 1].first : 0.0;
        info += capacity(suffix) * (pairs[l].first - lower);
    }
    return info >= 1.0;
}

void run_trial(const SimConfig& config, std::uint64_t trial,
               TrialCounts& counts, std::vector<double>& snr_scratch) {
    Xoshiro256ss rng(substream_seed(config.seed, trial));
    const std::size_t k_max = config.policy.rho.size();
    double accumulated = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        double snr = config.fixed_snr ? *config.fixed_snr
                                      : sample_snr(config.model, rng);
        bool decoded = false;
        switch (config.scheme) {
        case Scheme::harq_i:
            decoded = capacity(snr) * config.policy.rho[k] >= 1.0;
            break;
        case Scheme::harq_ir:
            accumulated += capacity(snr) * config.policy.rho[k];
            decoded = accumulated >= 1.0;
            break;
        case Scheme::harq_chase:
            snr_scratch[k] = snr;
            decoded = chase_decodes(config.policy.rho, snr_scratch, k + 1);
            break;
        }
        if (decoded) {
            ++counts.success_at[k];
            return;
        }
    }
    ++counts.exhausted;
}

SimEstimate assemble(const SimConfig& config, const TrialCounts& counts) {
    const std::size_t k_max = config.policy.rho.size();
    const auto n = static_cast<double>(config.trials);
    SimEstimate estimate;
    estimate.trials_used = config.trials;
    estimate.f_hat.resize(k_max);
    std::uint64_t decoded_so_far = 0;
    for (std::size_t k = 0; k < k_max; ++k) {
        decoded_so_far += counts.success_at[k];
        double failed = n - static_cast<double>(decoded_so_far);
        double f = failed / n;
        estimate.f_hat[k].value = f;
        estimate.f_hat[k].std_error = std::sqrt(f * (1.0 - f) / n);
    }

    std::vector<double> cost(k_max);
    double running = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        running += config.policy.rho[k];
        cost[k] = running;
    }
    // Renewal-reward ratio: reward 1 per delivered packet, cost = channel
    // uses per information bit actually spent. Sums over trials reduce to
    // count-weighted sums because the per-trial cost takes K+1 values.
    double successes = 0.0;
    double cost_sum = 0.0;
    double cost_sq_sum = 0.0;
    double cross_sum = 0.0;
    double attempts_sum = 0.0;
    double attempts_sq_sum = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        auto c = static_cast<double>(counts.success_at[k]);
        successes += c;
        cost_sum += c * cost[k];
        cost_sq_sum += c * cost[k] * cost[k];
        cross_sum += c * cost[k];
        double attempts = static_cast<double>(k + 1);
        attempts_sum += c * attempts;
        attempts_sq_sum += c * attempts * attempts;
    }
    auto failures = static_cast<double>(counts.exhausted);
    cost_sum += failures * cost[k_max - 1];
    cost_sq_sum += failures * cost[k_max - 1] * cost[k_max - 1];
    attempts_sum += failures * static_cast<double>(k_max);
    attempts_sq_sum +=
        failures * static_cast<double>(k_max) * static_cast<double>(k_max);

    double mean_reward = successes / n;
    double mean_cost = cost_sum / n;
    double ratio = mean_reward / mean_cost;
    estimate.eta_hat.value = ratio;
    // Delta method for the ratio of per-trial means.
    double var_reward = mean_reward - mean_reward * mean_reward;
    double var_cost = cost_sq_sum / n - mean_cost * mean_cost;
    double cov = cross_sum / n - mean_reward * mean_cost;
    double ratio_var = (var_reward - 2.0 * ratio * cov +
                        ratio * ratio * var_cost) /
                       (n * mean_cost * mean_cost);
    estimate.eta_hat.std_error = std::sqrt(std::max(0.0, ratio_var));

    double mean_attempts = attempts_sum / n;
    double var_attempts = attempts_sq_sum / n - mean_attempts * mean_attempts;
    estimate.k_avg_hat.value = mean_attempts;
    estimate.k_avg_hat.std_error =
        std::sqrt(std::max(0.0, var_attempts / n));
    return estimate;
}

SimEstimate run(const SimConfig& config, bool parallel) {
    validate_policy(config.policy);
    if (config.trials < 1) {
        throw std::invalid_argument("simulation needs at least one trial");
    }
    if (config.scheme == Scheme::harq_chase && config.policy.rho.size() > 8) {
        throw std::invalid_argument(
            "Chase simulation limited to K <= 8 attempts");
    }
    if (config.fixed_snr && !(*config.fixed_snr >= 0.0)) {
        throw std::invalid_argument("fixed SNR must be nonnegative");
    }
    const std::size_t k_max = config.policy.rho.size();
    constexpr std::uint64_t block_size = 1 << 16;
    const auto blocks =
        static_cast<std::size_t>((config.trials + block_size - 1) / block_size);
    std::vector<TrialCounts> partial(blocks);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
        TrialCounts local;
        local.success_at.assign(k_max, 0);
        std::vector<double> scratch(k_max, 0.0);
        const std::uint64_t begin = static_cast<std::uint64_t>(b) * block_size;
        const std::uint64_t end =
            std::min(config.trials, begin + block_size);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            run_trial(config, trial, local, scratch);
        }
        partial[b] = std::move(local);
    }

    TrialCounts total;
    total.success_at.assign(k_max, 0);
    for (const TrialCounts& block : partial) {
        for (std::size_t k = 0; k < k_max; ++k) {
            total.success_at[k] += block.success_at[k];
        }
        total.exhausted += block.exhausted;
    }
    return assemble(config, total);
}

} // namespace

double sample_snr(const ChannelModel& model, Xoshiro256ss& rng) {
    return sample_gamma_unit(model.m, rng) * (model.gamma_bar / model.m);
}

SimEstimate simulate(const SimConfig& config) { return run(config, true); }

SimEstimate simulate_serial(const SimConfig& config) {
    return run(config, false);
}

} // namespace harq
