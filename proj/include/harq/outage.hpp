#pragma once

#include "harq/channel.hpp"
#include "harq/types.hpp"

#include <string>
#include <vector>

namespace harq {

// Per-attempt redundancies rho[k] (channel uses per information bit),
// in transmission order. K = rho.size() >= 1, every entry positive.
struct RedundancyPolicy {
    std::vector<double> rho;
};

// Throws std::invalid_argument when the policy is empty or has a
// nonpositive/nonfinite entry.
void validate_policy(const RedundancyPolicy& policy);

// Normalized view of a policy: rho_prime[k] = rho[k] * c_bar,
// cumulative[k] = X_{k+1} = sum of the first k+1 rho_prime,
// rms[k] = Y_{k+1} = sqrt(sum of their squares). Y_k <= X_k always.
struct NormalizedPolicy {
    std::vector<double> rho_prime;
    std::vector<double> cumulative;
    std::vector<double> rms;
};

NormalizedPolicy normalize_policy(const RedundancyPolicy& policy,
                                  const ErgodicStats& stats);

// Cumulative decoding-failure probabilities: f[k-1] is the probability the
// packet is still undecoded after k attempts. Nonincreasing in k.
// `warning` is nonempty when a numerical result needed clamping beyond 1e-6.
struct OutageProfile {
    Scheme scheme;
    OutageMethod method;
    std::vector<double> f;
    std::string warning;
};

// Decoding discards all but the latest attempt: f_k is the product of the
// per-attempt outages. Exact.
OutageProfile outage_harq_i(const ChannelModel& model,
                            const RedundancyPolicy& policy);

struct IrExactOptions {
    // Grid step = min_k(rho_prime[k]) / bins_per_min_redundancy, further
    // reduced if needed so the nominal support has >= 4096 bins.
    int bins_per_min_redundancy = 512;
    // Accept a profile only when halving the step moves every f[k] by
    // < 1e-4; up to two refinements are attempted before giving up.
    bool check_convergence = true;
    // When positive, caps the initial bin count across the nominal support
    // (the refinement ladder may still halve the step up to three times).
    // The per-redundancy rule makes evaluations arbitrarily expensive, and
    // arbitrarily large, as the smallest redundancy shrinks; the default
    // keeps worst-case memory bounded while staying far finer than any
    // policy of practical interest needs. 0 means uncapped.
    int max_support_bins = 1 << 19;
};

// Accumulated-mutual-information decoding: f_k = P{sum_l C(gamma_l) rho_l < 1},
// computed by discretizing each attempt's information density, convolving,
// and integrating below 1. Throws numerical_error when the resolution
// check fails after two refinements.
OutageProfile outage_ir_exact(const ChannelModel& model,
                              const RedundancyPolicy& policy,
                              const IrExactOptions& opts = {});
OutageProfile outage_ir_exact(const ChannelModel& model,
                              const ErgodicStats& stats,
                              const RedundancyPolicy& policy,
                              const IrExactOptions& opts = {});

// Central-limit surrogate f_k = Q(xi (X_k - 1) / Y_k).
OutageProfile outage_ir_gaussian(const ChannelModel& model,
                                 const RedundancyPolicy& policy);
OutageProfile outage_ir_gaussian(const ErgodicStats& stats,
                                 const RedundancyPolicy& policy);

// Analytic surrogate f_k = Q(xi (1 - 1/X_k)). Dominates the Gaussian
// surrogate pointwise whenever X_k >= 1 (equality at k = 1).
OutageProfile outage_ir_bound(const ChannelModel& model,
                              const RedundancyPolicy& policy);
OutageProfile outage_ir_bound(const ErgodicStats& stats,
                              const RedundancyPolicy& policy);

// Maximum-ratio combining of repeated attempts. Attempts are reordered by
// ascending rho; equal consecutive values merge their SNRs into one gamma
// variable of proportionally larger shape (zero-width chunks carry no
// information term), and the failure probability is a nested integral over
// the remaining variables, evaluated with fixed-order Gauss-Legendre
// panels and an exact CDF at the innermost level. K <= 4.
OutageProfile outage_chase(const ChannelModel& model,
                           const RedundancyPolicy& policy);
OutageProfile outage_chase_serial(const ChannelModel& model,
                                  const RedundancyPolicy& policy);

// Closed form for k equal-redundancy attempts: the combined SNR is the sum
// of k iid Gamma(m, gamma_bar/m) variables, so the failure probability is
// P(m k, m (2^{1/rho} - 1) / gamma_bar).
double chase_equal_rho_failure(const ChannelModel& model, double rho, int k);

// Panel order used per nesting level: 40 below m = 1 (integrable density
// singularity at 0 handled by a quadratic substitution), 10 otherwise.
int chase_rule_order(double m);

namespace detail {

// P{sum_l C(gamma_l) rho_l < threshold} on the discretized carrier; the
// profile path uses threshold 1. Exposed for scaling-property tests.
std::vector<double> ir_exact_tail_profile(const ChannelModel& model,
                                          const ErgodicStats& stats,
                                          const RedundancyPolicy& policy,
                                          double threshold,
                                          const IrExactOptions& opts);

// Mass of C(gamma) * rho falling in [i*step, (i+1)*step), i < count,
// as exact CDF differences.
std::vector<double> ir_component_masses(const ChannelModel& model, double rho,
                                        double step, std::size_t count);

} // namespace detail

} // namespace harq
