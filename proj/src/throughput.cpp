#include "harq/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harq {

ThroughputReport throughput(const RedundancyPolicy& policy,
                            const OutageProfile& profile) {
    validate_policy(policy);
    const std::size_t k_max = policy.rho.size();
    if (profile.f.size() != k_max) {
        throw std::invalid_argument(
            "outage profile length does not match policy length");
    }
    double denominator = policy.rho[0];
    for (std::size_t k = 1; k < k_max; ++k) {
        denominator += profile.f[k - 1] * policy.rho[k];
    }
    ThroughputReport report;
    report.eta = (1.0 - profile.f.back()) / denominator;
    report.f_terminal = profile.f.back();
    report.k_avg = k_average(profile);
    report.policy = policy;
    report.scheme = profile.scheme;
    report.method = profile.method;
    return report;
}

ThroughputReport throughput(const RedundancyPolicy& policy,
                            const OutageProfile& profile,
                            const ErgodicStats& stats) {
    ThroughputReport report = throughput(policy, profile);
    report.chi = residual_throughput(report, stats);
    return report;
}

double k_average(const OutageProfile& profile) {
    double avg = 1.0;
    for (std::size_t k = 0; k + 1 < profile.f.size(); ++k) {
        avg += profile.f[k];
    }
    return avg;
}

double residual_throughput(const ThroughputReport& report,
                           const ErgodicStats& stats) {
    if (report.eta > stats.c_bar * (1.0 + 1e-6)) {
        throw numerical_error(
            "throughput exceeds the ergodic capacity; outage path suspect");
    }
    return std::clamp(1.0 - report.eta / stats.c_bar, 0.0, 1.0);
}

ThroughputReport throughput_harq_i(const ChannelModel& model,
                                   const RedundancyPolicy& policy) {
    return throughput(policy, outage_harq_i(model, policy));
}

} // namespace harq
