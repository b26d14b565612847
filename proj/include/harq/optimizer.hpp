#pragma once

#include "harq/channel.hpp"
#include "harq/outage.hpp"
#include "harq/throughput.hpp"
#include "harq/types.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace harq {

// Discretized value functions for the bound-based variable-rate problem:
// v[k-1][g] = V_k(x_grid[g]) is the minimal expected normalized cost of k
// attempts whose normalized redundancies sum to x_grid[g];
// arg_rho[k-1][g] is the minimizing last-attempt redundancy.
struct DpTables {
    std::vector<double> x_grid;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> arg_rho;
    double c_bar = 0.0;
    double xi = 0.0;
    // Nonempty when doubling the grid moved the bound optimum by > 1e-3.
    std::string grid_warning;
};

struct OptimizationResult {
    RedundancyPolicy policy;
    // Bound-objective value at the optimum (variable-rate IR only; NaN
    // elsewhere).
    double predicted_eta_bound = std::numeric_limits<double>::quiet_NaN();
    // Exact-method evaluation of the returned policy.
    ThroughputReport reported;
    long evaluations = 0;
    bool converged = true;
    std::string diagnostics;
};

// Exact-method throughput of a policy: product-form outage for HARQ-I,
// density convolution for HARQ-IR, nested quadrature for HARQ-CHASE
// (closed form when all rho equal, which also lifts the K <= 4 cap).
ThroughputReport evaluate_policy(const ChannelModel& model,
                                 const ErgodicStats& stats, Scheme scheme,
                                 const RedundancyPolicy& policy);

// Best equal-rho policy: coarse logarithmic scan over normalized
// redundancy refined by golden section to 1e-4 relative in rho.
OptimizationResult optimize_fixed_rate(const ChannelModel& model,
                                       Scheme scheme, int k_max);

// Builds V_k tables on a grid over (0, K]: log-spaced below 1, linear
// above. The inner minimization scans grid offsets and refines the best
// candidate with a quadratic fit. check_coarseness re-solves at twice the
// grid and records grid_warning when the optimum moves by > 1e-3.
DpTables build_dp_tables(const ChannelModel& model, int k_max,
                         int grid_points, bool check_coarseness = true);
DpTables build_dp_tables(const ChannelModel& model, const ErgodicStats& stats,
                         int k_max, int grid_points,
                         bool check_coarseness = true);
DpTables build_dp_tables_serial(const ChannelModel& model,
                                const ErgodicStats& stats, int k_max,
                                int grid_points, bool check_coarseness = true);

// Variable-rate HARQ-IR: maximizes (1 - f_K(X)) / V_K(X) over the grid
// with golden refinement, recovers the policy by backtracking, then
// finishes with a bounded simplex descent on the exact-method throughput
// initialized at the recovered split and at the best equal split (the
// surrogate optimum alone can sit a few percent below the exact optimum).
// Near-equal-throughput policies are tie-broken toward the smaller
// terminal outage. Reports the exact-method throughput of the final
// policy. K = 1 has nothing to split and delegates to the fixed-rate
// search.
OptimizationResult optimize_vr_ir(const ChannelModel& model, int k_max,
                                  int grid_points = 100);

// Variable-rate HARQ-CHASE (K <= 4): multi-start Nelder-Mead on log-rho
// coordinates against the exact quadrature throughput. Starts: fixed-rate
// optimum, the VR-IR policy, and `starts` random policies. Deterministic
// for a given seed.
OptimizationResult optimize_vr_chase(const ChannelModel& model, int k_max,
                                     int starts = 6,
                                     std::uint64_t seed = 20260815ull);

// Same multi-start search for HARQ-I (cheap product-form objective); used
// to confirm numerically that unequal policies cannot beat the fixed-rate
// optimum.
OptimizationResult optimize_vr_harq_i(const ChannelModel& model, int k_max,
                                      int starts = 6,
                                      std::uint64_t seed = 20260815ull);

namespace detail {

// Piecewise-linear interpolation of (grid, values) at x; clamps at the
// ends. Grid must be strictly increasing.
double interp_on_grid(const std::vector<double>& grid,
                      const std::vector<double>& values, double x);

// The DP failure surrogate after k attempts with total normalized
// redundancy x: Q(xi sqrt(k) (1 - 1/x)).
double dp_failure(double xi, int k, double x);

// Bound-objective cost denominator of an explicit policy (rho-prime
// units): rho'_1 + sum_{k>=2} rho'_k dp_failure(xi, k-1, X_{k-1}).
double dp_policy_cost(double xi, const std::vector<double>& rho_prime);

} // namespace detail

} // namespace harq
