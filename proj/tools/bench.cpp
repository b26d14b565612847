#include "harq/montecarlo.hpp"
#include "harq/optimizer.hpp"
#include "harq/outage.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

bool report(const char* name, double serial_ms, double parallel_ms,
            bool identical) {
    std::printf("%-34s serial %9.1f ms   parallel %9.1f ms   x%.2f   %s\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "outputs identical" : "OUTPUTS DIFFER");
    return identical;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP unavailable; both columns run serially\n");
#endif

    bool ok = true;
    const harq::ChannelModel model(1.0, 10.0);
    const harq::ErgodicStats stats = harq::ergodic_stats(model);

    {
        harq::SimConfig config{
            .scheme = harq::Scheme::harq_ir,
            .model = model,
            .policy = {{1.2 / stats.c_bar, 0.7 / stats.c_bar,
                        0.5 / stats.c_bar, 0.5 / stats.c_bar}},
            .trials = 2'000'000,
            .seed = 7,
            .fixed_snr = {}};
        harq::SimEstimate serial, parallel;
        double ts = time_ms([&] { serial = harq::simulate_serial(config); });
        double tp = time_ms([&] { parallel = harq::simulate(config); });
        bool same = serial.eta_hat.value == parallel.eta_hat.value &&
                    serial.eta_hat.std_error == parallel.eta_hat.std_error &&
                    serial.k_avg_hat.value == parallel.k_avg_hat.value;
        for (std::size_t k = 0; same && k < serial.f_hat.size(); ++k)
            same = serial.f_hat[k].value == parallel.f_hat[k].value;
        ok &= report("monte carlo, IR K=4, 2e6 trials", ts, tp, same);
    }

    {
        harq::DpTables serial, parallel;
        double ts = time_ms([&] {
            serial = harq::build_dp_tables_serial(model, stats, 8, 400, false);
        });
        double tp = time_ms([&] {
            parallel = harq::build_dp_tables(model, stats, 8, 400, false);
        });
        bool same = serial.x_grid == parallel.x_grid;
        for (std::size_t k = 0; same && k < serial.v.size(); ++k)
            same = serial.v[k] == parallel.v[k] &&
                   serial.arg_rho[k] == parallel.arg_rho[k];
        ok &= report("allocation tables, K=8, 400 pts", ts, tp, same);
    }

    {
        harq::RedundancyPolicy policy;
        policy.rho = {1.4 / stats.c_bar, 0.9 / stats.c_bar, 0.6 / stats.c_bar,
                      0.45 / stats.c_bar};
        harq::OutageProfile serial, parallel;
        double ts = time_ms(
            [&] { serial = harq::outage_chase_serial(model, policy); });
        double tp =
            time_ms([&] { parallel = harq::outage_chase(model, policy); });
        bool same = serial.f == parallel.f;
        ok &= report("chase quadrature profile, K=4", ts, tp, same);
    }

    if (!ok) {
        std::printf("FAIL: parallel output diverged from serial reference\n");
        return 1;
    }
    return 0;
}
