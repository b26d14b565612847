#include "harq/optimizer.hpp"

#include "harq/rng.hpp"
#include "harq/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace harq {

namespace detail {

double interp_on_grid(const std::vector<double>& grid,
                      const std::vector<double>& values, double x) {
    if (grid.size() != values.size() || grid.empty())
        throw std::invalid_argument("interp_on_grid: mismatched inputs");
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    std::size_t lo = hi - 1;
    double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
}

double dp_failure(double xi, int k, double x) {
    if (x <= 0.0) return 1.0;
    return q_function(xi * std::sqrt(static_cast<double>(k)) *
                      (1.0 - 1.0 / x));
}

double dp_policy_cost(double xi, const std::vector<double>& rho_prime) {
    if (rho_prime.empty())
        throw std::invalid_argument("dp_policy_cost: empty policy");
    double cost = rho_prime[0];
    double x = rho_prime[0];
    for (std::size_t k = 1; k < rho_prime.size(); ++k) {
        cost += rho_prime[k] * dp_failure(xi, static_cast<int>(k), x);
        x += rho_prime[k];
    }
    return cost;
}

} // namespace detail

namespace {

// Maximizes fn over [a, b] by golden section; tol is absolute in x.
// Assumes unimodality on the bracket; returns the best probed point.
std::pair<double, double> golden_max(const std::function<double(double)>& fn,
                                     double a, double b, double tol,
                                     long& evals) {
    constexpr double invphi = 0.6180339887498949;
    constexpr double invphi2 = 1.0 - invphi;
    double h = b - a;
    double c = a + invphi2 * h;
    double d = a + invphi * h;
    double fc = fn(c);
    double fd = fn(d);
    evals += 2;
    while (h > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = a + invphi2 * h;
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + invphi * h;
            fd = fn(d);
        }
        ++evals;
    }
    return fc > fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

// Value of the layer objective V_{k_prev}(p) + (x - p) f_{k_prev}(p) with
// V interpolated linearly on the grid and anchored at (0, 0); p = 0 is the
// "spend everything now" candidate with certain prior failure.
double layer_value(const std::vector<double>& grid,
                   const std::vector<double>& v_prev, int k_prev, double xi,
                   double x, double p) {
    double v;
    if (p <= 0.0)
        v = 0.0;
    else if (p <= grid.front())
        v = v_prev.front() * (p / grid.front());
    else
        v = detail::interp_on_grid(grid, v_prev, p);
    double f = p <= 0.0 ? 1.0 : detail::dp_failure(xi, k_prev, p);
    return v + (x - p) * f;
}

struct LayerSolution {
    double prev = 0.0;
    double value = 0.0;
};

// Minimizes the layer objective over p in [0, x]: scans the virtual
// origin, every grid node below x, and x itself, then refines the best
// candidate with a parabola through its neighbors.
LayerSolution solve_layer(const std::vector<double>& grid,
                          const std::vector<double>& v_prev, int k_prev,
                          double xi, double x) {
    std::vector<double> cand;
    cand.reserve(grid.size() + 2);
    cand.push_back(0.0);
    for (double g : grid) {
        if (g >= x) break;
        cand.push_back(g);
    }
    cand.push_back(x);

    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> values(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        values[i] = layer_value(grid, v_prev, k_prev, xi, x, cand[i]);
        if (values[i] < best_value) {
            best_value = values[i];
            best = i;
        }
    }

    LayerSolution out{cand[best], best_value};
    if (cand.size() >= 3) {
        std::size_t lo = best == 0 ? 0
                         : best + 1 >= cand.size() ? cand.size() - 3
                                                   : best - 1;
        double p0 = cand[lo], p1 = cand[lo + 1], p2 = cand[lo + 2];
        double f0 = values[lo], f1 = values[lo + 1], f2 = values[lo + 2];
        double d01 = (f1 - f0) / (p1 - p0);
        double d12 = (f2 - f1) / (p2 - p1);
        double curvature = (d12 - d01) / (p2 - p0);
        if (curvature > 0.0) {
            double vertex = 0.5 * (p0 + p1 - d01 / curvature);
            if (vertex > p0 && vertex < p2) {
                double fv = layer_value(grid, v_prev, k_prev, xi, x, vertex);
                if (fv < out.value) out = {vertex, fv};
            }
        }
    }
    return out;
}

// Grid over (0, k_max]: log spacing resolves the region below 1 where the
// failure surrogate saturates, linear spacing covers [1, k_max].
std::vector<double> make_grid(int k_max, int grid_points) {
    const double x_min = 0.01;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_points));
    if (k_max == 1) {
        for (int i = 0; i < grid_points; ++i) {
            double t = static_cast<double>(i) / (grid_points - 1);
            grid.push_back(x_min * std::pow(1.0 / x_min, t));
        }
        grid.back() = 1.0;
        return grid;
    }
    int n_log = std::max(8, static_cast<int>(std::lround(0.4 * grid_points)));
    n_log = std::min(n_log, grid_points - 2);
    int n_lin = grid_points - n_log;
    for (int i = 0; i < n_log; ++i) {
        double t = static_cast<double>(i) / n_log;
        grid.push_back(x_min * std::pow(1.0 / x_min, t));
    }
    for (int i = 0; i < n_lin; ++i) {
        double t = static_cast<double>(i) / (n_lin - 1);
        grid.push_back(1.0 + t * (k_max - 1));
    }
    return grid;
}

DpTables build_tables_impl(const ErgodicStats& stats, int k_max,
                           int grid_points, bool parallel) {
    DpTables tables;
    tables.c_bar = stats.c_bar;
    tables.xi = stats.xi;
    tables.x_grid = make_grid(k_max, grid_points);
    const std::vector<double>& grid = tables.x_grid;
    const std::size_t n = grid.size();
    const double xi = stats.xi;

    tables.v.assign(static_cast<std::size_t>(k_max), std::vector<double>(n));
    tables.arg_rho.assign(static_cast<std::size_t>(k_max),
                          std::vector<double>(n));
    tables.v[0] = grid;
    tables.arg_rho[0] = grid;

    for (int k = 2; k <= k_max; ++k) {
        const std::vector<double>& v_prev = tables.v[k - 2];
        std::vector<double>& v_here = tables.v[k - 1];
        std::vector<double>& arg_here = tables.arg_rho[k - 1];
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
        for (long gi = 0; gi < static_cast<long>(n); ++gi) {
            auto g = static_cast<std::size_t>(gi);
            LayerSolution sol = solve_layer(grid, v_prev, k - 1, xi, grid[g]);
            v_here[g] = sol.value;
            arg_here[g] = grid[g] - sol.prev;
        }
    }
    (void)parallel;
    return tables;
}

struct BoundOptimum {
    double x = 0.0;
    double objective = 0.0;
    long evals = 0;
};

// max over X of (1 - f_K(X)) / V_K(X) on the last table layer: grid scan
// plus golden refinement between the best node's neighbors.
BoundOptimum bound_optimum(const DpTables& tables, int k_max) {
    const std::vector<double>& grid = tables.x_grid;
    const std::vector<double>& v_last = tables.v.back();
    const double xi = tables.xi;
    BoundOptimum out;
    auto objective = [&](double x) {
        double v = x <= grid.front() ? v_last.front() * (x / grid.front())
                                     : detail::interp_on_grid(grid, v_last, x);
        if (!(v > 0.0)) return 0.0;
        return (1.0 - detail::dp_failure(xi, k_max, x)) / v;
    };
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double value = objective(grid[g]);
        ++out.evals;
        if (value > best_value) {
            best_value = value;
            best = g;
        }
    }
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    out.x = grid[best];
    out.objective = best_value;
    if (hi > lo) {
        double tol = std::max(1e-9, 1e-7 * grid.back());
        auto [x_ref, value_ref] = golden_max(objective, lo, hi, tol, out.evals);
        if (value_ref > out.objective) {
            out.x = x_ref;
            out.objective = value_ref;
        }
    }
    return out;
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

constexpr double z_floor = -6.907755278982137;  // ln 1e-3
constexpr double z_ceil = 4.1588830833596715;   // ln 64

struct NmOutcome {
    std::vector<double> z;
    double value = std::numeric_limits<double>::infinity();
    long evals = 0;
    bool converged = false;
};

// Minimizes fn over clamped log-redundancy coordinates. Standard simplex
// moves (reflect 1, expand 2, contract 1/2, shrink 1/2); stops when the
// vertex spread falls below ftol or the evaluation budget runs out.
NmOutcome nelder_mead(const std::function<double(std::vector<double>&)>& fn,
                      const std::vector<double>& z0, double step,
                      long max_evals, double ftol) {
    const std::size_t n = z0.size();
    std::vector<std::vector<double>> vertex(n + 1, z0);
    for (std::size_t i = 0; i < n; ++i) vertex[i + 1][i] += step;

    NmOutcome out;
    auto eval = [&](std::vector<double>& z) {
        for (double& zi : z) zi = std::clamp(zi, z_floor, z_ceil);
        ++out.evals;
        return fn(z);
    };

    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i <= n; ++i) value[i] = eval(vertex[i]);

    std::vector<std::size_t> order(n + 1);
    while (out.evals < max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return value[a] < value[b];
                         });
        const std::size_t bi = order[0];
        const std::size_t wi = order[n];
        const std::size_t si = order[n - 1];
        if (value[wi] - value[bi] < ftol) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < n; ++i)
                centroid[i] += vertex[order[r]][i] / static_cast<double>(n);

        std::vector<double> reflected(n);
        for (std::size_t i = 0; i < n; ++i)
            reflected[i] = centroid[i] + (centroid[i] - vertex[wi][i]);
        double f_reflected = eval(reflected);

        if (f_reflected < value[bi]) {
            std::vector<double> expanded(n);
            for (std::size_t i = 0; i < n; ++i)
                expanded[i] = centroid[i] + 2.0 * (reflected[i] - centroid[i]);
            double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                vertex[wi] = std::move(expanded);
                value[wi] = f_expanded;
            } else {
                vertex[wi] = std::move(reflected);
                value[wi] = f_reflected;
            }
        } else if (f_reflected < value[si]) {
            vertex[wi] = std::move(reflected);
            value[wi] = f_reflected;
        } else {
            std::vector<double> contracted(n);
            bool outside = f_reflected < value[wi];
            const std::vector<double>& toward =
                outside ? reflected : vertex[wi];
            for (std::size_t i = 0; i < n; ++i)
                contracted[i] = centroid[i] + 0.5 * (toward[i] - centroid[i]);
            double f_contracted = eval(contracted);
            if (f_contracted < std::min(f_reflected, value[wi])) {
                vertex[wi] = std::move(contracted);
                value[wi] = f_contracted;
            } else {
                for (std::size_t r = 1; r <= n; ++r) {
                    std::size_t v = order[r];
                    for (std::size_t i = 0; i < n; ++i)
                        vertex[v][i] = vertex[bi][i] +
                                       0.5 * (vertex[v][i] - vertex[bi][i]);
                    value[v] = eval(vertex[v]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (value[i] < value[best]) best = i;
    out.z = vertex[best];
    out.value = value[best];
    return out;
}

// One cyclic pass of per-coordinate refinement: a coarse scan across
// [z_lo, z_hi] brackets the best cell, golden section narrows it. Escapes
// axes a collapsed simplex no longer probes; `value` must be fn(z) on
// entry and matches z on exit.
void coordinate_sweep(const std::function<double(std::vector<double>&)>& fn,
                      std::vector<double>& z, double& value, double z_lo,
                      double z_hi, long& evals) {
    constexpr int scan = 12;
    constexpr double gr = 0.6180339887498949;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double keep = z[i];
        double best_t = keep;
        double best_v = value;
        for (int s = 0; s <= scan; ++s) {
            z[i] = z_lo + (z_hi - z_lo) * s / scan;
            const double v = fn(z);
            ++evals;
            if (v < best_v) {
                best_v = v;
                best_t = z[i];
            }
        }
        double a = std::max(z_lo, best_t - (z_hi - z_lo) / scan);
        double b = std::min(z_hi, best_t + (z_hi - z_lo) / scan);
        double x1 = b - gr * (b - a);
        double x2 = a + gr * (b - a);
        z[i] = x1;
        double f1 = fn(z);
        z[i] = x2;
        double f2 = fn(z);
        evals += 2;
        while ((b - a) > 1e-3) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                z[i] = x1;
                f1 = fn(z);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                z[i] = x2;
                f2 = fn(z);
            }
            ++evals;
        }
        if (std::min(f1, f2) < best_v) {
            best_v = std::min(f1, f2);
            best_t = f1 < f2 ? x1 : x2;
        }
        if (best_v < value) {
            z[i] = best_t;
            value = best_v;
        } else {
            z[i] = keep;
        }
    }
}

struct TablePolicy {
    std::vector<double> rho_prime;
    long evals = 0;
    std::string diagnostics;
};

// Table build plus backtracking recovery of the surrogate-optimal split,
// re-solving each layer at the running budget rather than interpolating
// stored arguments. Degenerate shares are clamped so K stays meaningful.
TablePolicy recover_table_policy(const ChannelModel& model,
                                 const ErgodicStats& stats, int k_max,
                                 int grid_points) {
    DpTables tables = build_dp_tables(model, stats, k_max, grid_points, true);
    BoundOptimum opt = bound_optimum(tables, k_max);

    TablePolicy out;
    out.evals = opt.evals;
    out.diagnostics = tables.grid_warning;
    out.rho_prime.assign(static_cast<std::size_t>(k_max), 0.0);
    double x_cur = opt.x;
    for (int k = k_max; k >= 2; --k) {
        if (x_cur <= 0.0) break;
        LayerSolution sol =
            solve_layer(tables.x_grid, tables.v[k - 2], k - 1, tables.xi, x_cur);
        out.rho_prime[static_cast<std::size_t>(k - 1)] = x_cur - sol.prev;
        x_cur = sol.prev;
    }
    out.rho_prime[0] = x_cur;

    const double floor = 1e-6 * opt.x;
    bool clamped = false;
    for (double& r : out.rho_prime)
        if (r < floor) {
            r = floor;
            clamped = true;
        }
    if (clamped) {
        double total =
            std::accumulate(out.rho_prime.begin(), out.rho_prime.end(), 0.0);
        for (double& r : out.rho_prime) r *= opt.x / total;
        if (!out.diagnostics.empty()) out.diagnostics += "; ";
        out.diagnostics += "degenerate split clamped to a minimum share and "
                           "rescaled";
    }
    return out;
}

} // namespace

DpTables build_dp_tables(const ChannelModel& model, const ErgodicStats& stats,
                         int k_max, int grid_points, bool check_coarseness) {
    (void)model;
    if (k_max < 1) throw std::invalid_argument("build_dp_tables: k_max < 1");
    if (grid_points < 50 || grid_points > 400)
        throw std::invalid_argument(
            "build_dp_tables: grid_points outside [50, 400]");
    DpTables tables = build_tables_impl(stats, k_max, grid_points, true);
    if (check_coarseness && k_max >= 2) {
        DpTables doubled =
            build_tables_impl(stats, k_max, 2 * grid_points, true);
        BoundOptimum coarse = bound_optimum(tables, k_max);
        BoundOptimum fine = bound_optimum(doubled, k_max);
        double shift =
            stats.c_bar * std::fabs(fine.objective - coarse.objective);
        if (shift > 1e-3) {
            tables.grid_warning =
                "doubling the grid moved the bound optimum by " +
                format_double(shift) +
                " bits/use; increase grid_points";
        }
    }
    return tables;
}

DpTables build_dp_tables(const ChannelModel& model, int k_max, int grid_points,
                         bool check_coarseness) {
    return build_dp_tables(model, ergodic_stats(model), k_max, grid_points,
                           check_coarseness);
}

DpTables build_dp_tables_serial(const ChannelModel& model,
                                const ErgodicStats& stats, int k_max,
                                int grid_points, bool check_coarseness) {
    (void)model;
    if (k_max < 1) throw std::invalid_argument("build_dp_tables: k_max < 1");
    if (grid_points < 50 || grid_points > 400)
        throw std::invalid_argument(
            "build_dp_tables: grid_points outside [50, 400]");
    DpTables tables = build_tables_impl(stats, k_max, grid_points, false);
    if (check_coarseness && k_max >= 2) {
        DpTables doubled =
            build_tables_impl(stats, k_max, 2 * grid_points, false);
        BoundOptimum coarse = bound_optimum(tables, k_max);
        BoundOptimum fine = bound_optimum(doubled, k_max);
        double shift =
            stats.c_bar * std::fabs(fine.objective - coarse.objective);
        if (shift > 1e-3) {
            tables.grid_warning =
                "doubling the grid moved the bound optimum by " +
                format_double(shift) +
                " bits/use; increase grid_points";
        }
    }
    return tables;
}

ThroughputReport evaluate_policy(const ChannelModel& model,
                                 const ErgodicStats& stats, Scheme scheme,
                                 const RedundancyPolicy& policy) {
    OutageProfile profile;
    switch (scheme) {
    case Scheme::harq_i:
        profile = outage_harq_i(model, policy);
        break;
    case Scheme::harq_ir:
        profile = outage_ir_exact(model, stats, policy);
        break;
    case Scheme::harq_chase:
        profile = outage_chase(model, policy);
        break;
    }
    return throughput(policy, profile, stats);
}

OptimizationResult optimize_fixed_rate(const ChannelModel& model,
                                       Scheme scheme, int k_max) {
    if (k_max < 1)
        throw std::invalid_argument("optimize_fixed_rate: k_max < 1");
    if (scheme == Scheme::harq_chase && k_max > 4)
        throw std::invalid_argument(
            "optimize_fixed_rate: Chase optimization needs k_max <= 4");
    const ErgodicStats stats = ergodic_stats(model);
    long evals = 0;
    auto eta_at_log_rho_prime = [&](double z) {
        RedundancyPolicy policy;
        policy.rho.assign(static_cast<std::size_t>(k_max),
                          std::exp(z) / stats.c_bar);
        ++evals;
        return evaluate_policy(model, stats, scheme, policy).eta;
    };

    double z_lo = std::log(0.05);
    double z_hi = std::log(8.0);
    const int scan_points = 40;
    std::string diagnostics;

    int best = -1;
    double best_eta = -1.0;
    std::vector<double> z_scan, eta_scan;
    auto run_scan = [&]() {
        z_scan.clear();
        eta_scan.clear();
        best = -1;
        best_eta = -1.0;
        for (int i = 0; i < scan_points; ++i) {
            double z = z_lo + (z_hi - z_lo) * i / (scan_points - 1);
            double eta = eta_at_log_rho_prime(z);
            z_scan.push_back(z);
            eta_scan.push_back(eta);
            if (eta > best_eta) {
                best_eta = eta;
                best = i;
            }
        }
    };
    run_scan();
    // An edge optimum means the scan window missed the peak: widen once on
    // the offending side and rescan.
    int widenings = 0;
    while ((best == 0 || best == scan_points - 1) && widenings < 2) {
        if (best == 0)
            z_lo -= std::log(4.0);
        else
            z_hi += std::log(4.0);
        ++widenings;
        diagnostics = "scan window widened " + std::to_string(widenings) +
                      " time(s)";
        run_scan();
    }

    double a = z_scan[static_cast<std::size_t>(std::max(best - 1, 0))];
    double b = z_scan[static_cast<std::size_t>(
        std::min(best + 1, scan_points - 1))];
    auto [z_best, eta_refined] =
        golden_max(eta_at_log_rho_prime, a, b, 1e-4, evals);
    if (eta_scan[static_cast<std::size_t>(best)] > eta_refined)
        z_best = z_scan[static_cast<std::size_t>(best)];

    OptimizationResult result;
    result.policy.rho.assign(static_cast<std::size_t>(k_max),
                             std::exp(z_best) / stats.c_bar);
    result.reported = evaluate_policy(model, stats, scheme, result.policy);
    ++evals;
    result.evaluations = evals;
    result.converged = true;
    result.diagnostics = diagnostics;
    return result;
}

OptimizationResult optimize_vr_ir(const ChannelModel& model, int k_max,
                                  int grid_points) {
    if (k_max < 1) throw std::invalid_argument("optimize_vr_ir: k_max < 1");
    const ErgodicStats stats = ergodic_stats(model);
    if (k_max == 1) {
        // One attempt carries the whole budget; the problem is the
        // fixed-rate one.
        OptimizationResult result = optimize_fixed_rate(model, Scheme::harq_ir, 1);
        result.predicted_eta_bound =
            throughput(result.policy, outage_ir_bound(stats, result.policy))
                .eta;
        return result;
    }

    TablePolicy table = recover_table_policy(model, stats, k_max, grid_points);

    std::string diagnostics = table.diagnostics;
    auto note = [&](const std::string& text) {
        if (!diagnostics.empty()) diagnostics += "; ";
        diagnostics += text;
    };

    // The table solves the surrogate problem; its optimum can sit a few
    // percent from the exact-throughput optimum, so finish with a bounded
    // simplex descent on the exact objective from the recovered split.
    // Search evaluations skip the resolution ladder (the final report does
    // not), and probes outside a sane redundancy box are rejected outright:
    // the convolution step tracks the smallest rho, so a near-zero probe
    // coordinate would make a single evaluation arbitrarily expensive.
    const auto [table_min, table_max] = std::minmax_element(
        table.rho_prime.begin(), table.rho_prime.end());
    const double box_lo = std::min(0.05, 0.5 * *table_min);
    const double box_hi = std::max(8.0, 2.0 * *table_max);
    const IrExactOptions search_opts{.bins_per_min_redundancy = 256,
                                     .check_convergence = false,
                                     .max_support_bins = 6000};
    auto objective = [&](std::vector<double>& z) {
        RedundancyPolicy policy;
        policy.rho.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double rho_prime = std::exp(z[i]);
            if (rho_prime < box_lo || rho_prime > box_hi)
                return std::numeric_limits<double>::infinity();
            policy.rho[i] = rho_prime / stats.c_bar;
        }
        try {
            const OutageProfile profile =
                outage_ir_exact(model, stats, policy, search_opts);
            return -throughput(policy, profile, stats).eta;
        } catch (const numerical_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    std::vector<double> z0(static_cast<std::size_t>(k_max));
    for (int k = 0; k < k_max; ++k)
        z0[static_cast<std::size_t>(k)] =
            std::log(table.rho_prime[static_cast<std::size_t>(k)]);

    // The surrogate's split degrades as the fading parameter grows (its
    // Gaussian tail decays too fast, starving late attempts), and a single
    // simplex can collapse inside a degenerate basin at large K. Descend
    // from the recovered split and from the best equal split, then restart
    // once from the winner with a fresh simplex.
    long search_evals = 0;
    double best_equal_value = std::numeric_limits<double>::infinity();
    double best_equal_rp = 1.0;
    for (int i = 0; i <= 20; ++i) {
        const double rp =
            0.25 * std::pow(10.0, static_cast<double>(i) / 20.0);
        std::vector<double> z(static_cast<std::size_t>(k_max), std::log(rp));
        const double value = objective(z);
        ++search_evals;
        if (value < best_equal_value) {
            best_equal_value = value;
            best_equal_rp = rp;
        }
    }
    std::vector<std::vector<double>> seeds;
    seeds.push_back(z0);
    seeds.emplace_back(static_cast<std::size_t>(k_max),
                       std::log(best_equal_rp));
    NmOutcome polish;
    for (const auto& seed : seeds) {
        NmOutcome nm =
            nelder_mead(objective, seed, 0.12, 200 + 80L * k_max, 1e-9);
        search_evals += nm.evals;
        if (nm.value < polish.value) polish = std::move(nm);
    }
    {
        const double z_lo = std::max(std::log(box_lo), z_floor);
        const double z_hi = std::min(std::log(box_hi), z_ceil);
        for (int sweep = 0; sweep < 2; ++sweep) {
            const double before = polish.value;
            coordinate_sweep(objective, polish.z, polish.value, z_lo, z_hi,
                             search_evals);
            if (polish.value < before) polish.converged = false;
        }
        NmOutcome restart =
            nelder_mead(objective, polish.z, 0.05, 100 + 40L * k_max, 1e-9);
        search_evals += restart.evals;
        if (restart.value < polish.value) {
            polish = std::move(restart);
        } else if (restart.converged) {
            // The fresh simplex re-verified the winner as a fixed point.
            polish.converged = true;
        }
    }

    // The exact objective is nearly flat around its maximizer, so the
    // near-optimal set is a ridge of policies whose throughputs agree to
    // within the search resolution but whose terminal outages differ
    // visibly. Among those, report the end with the smaller terminal
    // outage: equal throughput with fewer lost packets.
    {
        const double eta_floor = -polish.value - 1e-4;
        auto lower_outage = [&](std::vector<double>& z) {
            RedundancyPolicy policy;
            policy.rho.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double rho_prime = std::exp(z[i]);
                if (rho_prime < box_lo || rho_prime > box_hi)
                    return std::numeric_limits<double>::infinity();
                policy.rho[i] = rho_prime / stats.c_bar;
            }
            try {
                const OutageProfile profile =
                    outage_ir_exact(model, stats, policy, search_opts);
                if (throughput(policy, profile, stats).eta < eta_floor)
                    return std::numeric_limits<double>::infinity();
                return profile.f.back();
            } catch (const numerical_error&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        NmOutcome tie =
            nelder_mead(lower_outage, polish.z, 0.03, 100 + 40L * k_max,
                        1e-9);
        search_evals += tie.evals;
        if (std::isfinite(tie.value)) polish.z = std::move(tie.z);
    }

    RedundancyPolicy table_policy;
    table_policy.rho.resize(static_cast<std::size_t>(k_max));
    for (int k = 0; k < k_max; ++k)
        table_policy.rho[static_cast<std::size_t>(k)] =
            table.rho_prime[static_cast<std::size_t>(k)] / stats.c_bar;
    RedundancyPolicy polished_policy;
    polished_policy.rho.resize(static_cast<std::size_t>(k_max));
    for (int k = 0; k < k_max; ++k)
        polished_policy.rho[static_cast<std::size_t>(k)] =
            std::exp(polish.z[static_cast<std::size_t>(k)]) / stats.c_bar;

    OptimizationResult result;
    const ThroughputReport table_report =
        evaluate_policy(model, stats, Scheme::harq_ir, table_policy);
    const ThroughputReport polished_report =
        evaluate_policy(model, stats, Scheme::harq_ir, polished_policy);
    if (polished_report.eta >= table_report.eta) {
        result.policy = std::move(polished_policy);
        result.reported = polished_report;
    } else {
        result.policy = std::move(table_policy);
        result.reported = table_report;
        note("exact-objective descent kept the table split");
    }
    for (int k = 0; k < k_max; ++k)
        if (result.policy.rho[static_cast<std::size_t>(k)] * stats.c_bar >=
            1.0) {
            note("attempt " + std::to_string(k + 1) +
                 " carries normalized redundancy >= 1");
            break;
        }
    // The quoted bound value is the genuine analytic lower bound at the
    // returned policy, which is what reported.eta is guaranteed to dominate.
    result.predicted_eta_bound =
        throughput(result.policy, outage_ir_bound(stats, result.policy)).eta;
    result.evaluations = table.evals + search_evals + 2;
    result.converged = polish.converged;
    result.diagnostics = diagnostics;
    return result;
}

namespace {

OptimizationResult nm_multistart(const ChannelModel& model, Scheme scheme,
                                 int k_max, int starts, std::uint64_t seed) {
    if (k_max < 1) throw std::invalid_argument("optimizer: k_max < 1");
    if (starts < 0) throw std::invalid_argument("optimizer: starts < 0");
    if (k_max == 1) return optimize_fixed_rate(model, scheme, 1);

    const ErgodicStats stats = ergodic_stats(model);

    std::vector<std::vector<double>> seeds;
    std::vector<std::string> labels;
    {
        OptimizationResult fr = optimize_fixed_rate(model, scheme, k_max);
        std::vector<double> z(static_cast<std::size_t>(k_max));
        for (int k = 0; k < k_max; ++k)
            z[static_cast<std::size_t>(k)] = std::log(
                fr.policy.rho[static_cast<std::size_t>(k)] * stats.c_bar);
        seeds.push_back(std::move(z));
        labels.emplace_back("fixed-rate seed");
    }
    try {
        // The raw table split is a good-enough profile for seeding; the
        // polished exact-objective solve would only cost time here.
        TablePolicy table = recover_table_policy(model, stats, k_max, 100);
        std::vector<double> z(static_cast<std::size_t>(k_max));
        for (int k = 0; k < k_max; ++k)
            z[static_cast<std::size_t>(k)] =
                std::log(table.rho_prime[static_cast<std::size_t>(k)]);
        seeds.push_back(std::move(z));
        labels.emplace_back("variable-rate table seed");
    } catch (const numerical_error&) {
        // The table-derived seed is a convenience; the search proceeds
        // without it.
    }
    const double z_draw_lo = std::log(0.15);
    const double z_draw_hi = std::log(2.2);
    for (int s = 0; s < starts; ++s) {
        Xoshiro256ss rng(substream_seed(seed, static_cast<std::uint64_t>(s)));
        std::vector<double> z(static_cast<std::size_t>(k_max));
        for (double& zi : z)
            zi = z_draw_lo + (z_draw_hi - z_draw_lo) * rng.uniform01();
        seeds.push_back(std::move(z));
        labels.emplace_back("random seed " + std::to_string(s + 1));
    }

    auto objective = [&](std::vector<double>& z) {
        RedundancyPolicy policy;
        policy.rho.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            policy.rho[i] = std::exp(z[i]) / stats.c_bar;
        try {
            return -evaluate_policy(model, stats, scheme, policy).eta;
        } catch (const numerical_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<NmOutcome> outcomes(seeds.size());
    std::vector<std::string> errors(seeds.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long si = 0; si < static_cast<long>(seeds.size()); ++si) {
        auto s = static_cast<std::size_t>(si);
        try {
            outcomes[s] = nelder_mead(objective, seeds[s], 0.12, 500, 1e-10);
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    }
    for (const std::string& err : errors)
        if (!err.empty()) throw numerical_error("optimizer start failed: " + err);

    std::size_t best = 0;
    for (std::size_t s = 1; s < outcomes.size(); ++s) {
        if (outcomes[s].value < outcomes[best].value)
            best = s;
        else if (outcomes[s].value == outcomes[best].value &&
                 outcomes[s].z < outcomes[best].z)
            best = s;
    }

    OptimizationResult result;
    result.policy.rho.resize(static_cast<std::size_t>(k_max));
    for (int k = 0; k < k_max; ++k)
        result.policy.rho[static_cast<std::size_t>(k)] =
            std::exp(outcomes[best].z[static_cast<std::size_t>(k)]) /
            stats.c_bar;
    result.reported = evaluate_policy(model, stats, scheme, result.policy);
    for (const NmOutcome& o : outcomes) result.evaluations += o.evals;
    result.converged = outcomes[best].converged;
    result.diagnostics = std::to_string(seeds.size()) +
                         " starts; best from " + labels[best];
    return result;
}

} // namespace

OptimizationResult optimize_vr_chase(const ChannelModel& model, int k_max,
                                     int starts, std::uint64_t seed) {
    if (k_max > 4)
        throw std::invalid_argument(
            "optimize_vr_chase: unequal-redundancy search needs k_max <= 4");
    return nm_multistart(model, Scheme::harq_chase, k_max, starts, seed);
}

OptimizationResult optimize_vr_harq_i(const ChannelModel& model, int k_max,
                                      int starts, std::uint64_t seed) {
    return nm_multistart(model, Scheme::harq_i, k_max, starts, seed);
}

} // namespace harq
