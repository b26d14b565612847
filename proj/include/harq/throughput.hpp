#pragma once

#include "harq/channel.hpp"
#include "harq/outage.hpp"
#include "harq/types.hpp"

#include <limits>
#include <vector>

namespace harq {

// Renewal-reward metrics of one (policy, outage profile) pair. eta is in
// bits per channel use. chi = 1 - eta/c_bar is NaN until the report has
// been completed with ergodic statistics.
struct ThroughputReport {
    double eta = 0.0;
    double f_terminal = 0.0;
    double k_avg = 1.0;
    double chi = std::numeric_limits<double>::quiet_NaN();
    RedundancyPolicy policy;
    Scheme scheme = Scheme::harq_i;
    OutageMethod method = OutageMethod::exact;
};

// eta = (1 - f_K) / (rho_1 + sum_{k>=2} f_{k-1} rho_k).
ThroughputReport throughput(const RedundancyPolicy& policy,
                            const OutageProfile& profile);

// Same, plus chi; validates eta <= c_bar (1 + 1e-6).
ThroughputReport throughput(const RedundancyPolicy& policy,
                            const OutageProfile& profile,
                            const ErgodicStats& stats);

// Expected number of attempts: 1 + sum_{k=1}^{K-1} f_k.
double k_average(const OutageProfile& profile);

// chi = 1 - eta/c_bar, clamped to [0, 1]. Throws numerical_error when
// eta exceeds c_bar beyond 1e-6 relative (an outage-calculation bug).
double residual_throughput(const ThroughputReport& report,
                           const ErgodicStats& stats);

// Convenience composition of outage_harq_i and throughput.
ThroughputReport throughput_harq_i(const ChannelModel& model,
                                   const RedundancyPolicy& policy);

} // namespace harq
