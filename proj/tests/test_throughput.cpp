#include <doctest.h>

#include "harq/channel.hpp"
#include "harq/outage.hpp"
#include "harq/throughput.hpp"
#include "harq/types.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace harq;

namespace {

OutageProfile make_profile(std::vector<double> f) {
    OutageProfile p;
    p.scheme = Scheme::harq_ir;
    p.method = OutageMethod::exact;
    p.f = std::move(f);
    return p;
}

} // namespace

TEST_CASE("throughput: renewal-reward ratio on a handmade profile") {
    const RedundancyPolicy policy{{1.0, 1.0}};
    const OutageProfile p = make_profile({0.5, 0.25});
    const ThroughputReport r = throughput(policy, p);
    // (1 - 0.25) / (1 + 0.5 * 1) = 0.5.
    CHECK(std::abs(r.eta - 0.5) < 1e-15);
    CHECK(std::abs(r.f_terminal - 0.25) < 1e-15);
    CHECK(std::abs(r.k_avg - 1.5) < 1e-15);
    CHECK(std::isnan(r.chi));

    const ErgodicStats stats{2.0, 1.0, 2.0};
    const ThroughputReport with_stats = throughput(policy, p, stats);
    CHECK(std::abs(with_stats.chi - 0.75) < 1e-15);
}

TEST_CASE("k_average accumulates the survivor probabilities") {
    CHECK(std::abs(k_average(make_profile({0.5, 0.25, 0.1, 0.02})) - 1.85) <
          1e-15);
    CHECK(k_average(make_profile({0.0})) == 1.0);
    CHECK(std::abs(k_average(make_profile({1.0, 1.0, 1.0})) - 3.0) < 1e-15);
}

TEST_CASE("residual throughput: endpoints, clamp, and overshoot error") {
    const ErgodicStats stats{2.0, 1.0, 2.0};
    ThroughputReport r;
    r.eta = 0.0;
    CHECK(residual_throughput(r, stats) == 1.0);
    r.eta = stats.c_bar;
    CHECK(residual_throughput(r, stats) == 0.0);
    r.eta = 0.5 * stats.c_bar;
    CHECK(std::abs(residual_throughput(r, stats) - 0.5) < 1e-15);
    // Overshoot within the numerical band clamps to zero...
    r.eta = stats.c_bar * (1.0 + 0.5e-6);
    CHECK(residual_throughput(r, stats) == 0.0);
    // ...but a real violation is an outage-calculation bug.
    r.eta = stats.c_bar * (1.0 + 2e-6);
    CHECK_THROWS_AS((void)residual_throughput(r, stats), numerical_error);
}

TEST_CASE("throughput: capacity guard when completing with stats") {
    const ErgodicStats stats{2.0, 1.0, 2.0};
    const RedundancyPolicy cheap{{0.1, 0.1}};
    const OutageProfile no_fail = make_profile({0.0, 0.0});
    CHECK_THROWS_AS((void)throughput(cheap, no_fail, stats),
                    numerical_error);
    // The stats-free overload performs no capacity check.
    CHECK_NOTHROW((void)throughput(cheap, no_fail));
}

TEST_CASE("throughput: degrading any outage entry degrades eta") {
    const RedundancyPolicy policy{{0.9, 0.6, 0.5, 0.4}};
    const std::vector<double> base_f = {0.4, 0.2, 0.08, 0.03};
    const double base = throughput(policy, make_profile(base_f)).eta;
    for (std::size_t k = 0; k < base_f.size(); ++k) {
        std::vector<double> bumped = base_f;
        bumped[k] = std::min(1.0, bumped[k] + 0.05);
        // Keep the profile nonincreasing.
        for (std::size_t j = k + 1; j < bumped.size(); ++j) {
            bumped[j] = std::min(bumped[j], bumped[k]);
        }
        const double worse = throughput(policy, make_profile(bumped)).eta;
        CHECK(worse < base);
    }
}

TEST_CASE("throughput: bound profile never beats the gaussian profile") {
    const ErgodicStats stats{1.0, 0.45, 1.0 / 0.45};
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> first(1.0, 2.5);
    std::uniform_real_distribution<double> rest(0.5, 2.5);
    for (int trial = 0; trial < 100; ++trial) {
        RedundancyPolicy policy;
        policy.rho.push_back(first(gen));
        const int k_max = 2 + static_cast<int>(gen() % 3);
        for (int k = 1; k < k_max; ++k) policy.rho.push_back(rest(gen));
        const double eta_bound =
            throughput(policy, outage_ir_bound(stats, policy)).eta;
        const double eta_gauss =
            throughput(policy, outage_ir_gaussian(stats, policy)).eta;
        CHECK(eta_bound <= eta_gauss + 1e-12);
    }
}

TEST_CASE("throughput_harq_i composes outage and ratio") {
    const ChannelModel model(1.0, 10.0);
    const RedundancyPolicy policy{{0.8, 1.3, 0.6}};
    const ThroughputReport direct = throughput_harq_i(model, policy);
    const ThroughputReport manual =
        throughput(policy, outage_harq_i(model, policy));
    CHECK(direct.eta == manual.eta);
    CHECK(direct.k_avg == manual.k_avg);
    CHECK(direct.f_terminal == manual.f_terminal);
    CHECK(direct.scheme == Scheme::harq_i);
}
