#include "harq/outage.hpp"

#include "harq/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace harq {

namespace {

constexpr double ir_resolution_target = 1e-4;

void append_warning(std::string& sink, const std::string& text) {
    if (!sink.empty()) sink += "; ";
    sink += text;
}

// Clamp to [lo, hi]; excursions beyond 1e-6 are reported.
double clamp_with_warning(double value, double lo, double hi,
                          std::string& warning, const char* what) {
    if (value < lo) {
        if (lo - value > 1e-6) {
            append_warning(warning, std::string(what) + " clamped by " +
                                        std::to_string(lo - value));
        }
        return lo;
    }
    if (value > hi) {
        if (value - hi > 1e-6) {
            append_warning(warning, std::string(what) + " clamped by " +
                                        std::to_string(value - hi));
        }
        return hi;
    }
    return value;
}

// P{X < threshold} for a mass vector whose bin i is centered at
// origin + i*step and spreads its mass over [center - step/2, center + step/2).
double masses_cdf_below(const std::vector<double>& masses, double origin,
                        double step, double threshold) {
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double center = origin + static_cast<double>(i) * step;
        double left = center - 0.5 * step;
        if (threshold >= left + step) {
            acc += masses[i];
        } else if (threshold > left) {
            acc += masses[i] * (threshold - left) / step;
        } else {
            break;
        }
    }
    return acc;
}

std::vector<double> ir_profile_at_step(const ChannelModel& model,
                                       const RedundancyPolicy& policy,
                                       double threshold, double step) {
    const double cover = threshold + 2.0 * step;
    const auto count =
        static_cast<std::size_t>(std::ceil(cover / step)) + 1;
    const std::size_t k_max = policy.rho.size();

    // Components for repeated rho values are identical; build each once.
    std::map<double, std::vector<double>> component_cache;
    for (double rho : policy.rho) {
        if (!component_cache.count(rho)) {
            component_cache.emplace(
                rho, detail::ir_component_masses(model, rho, step, count));
        }
    }

    std::vector<double> f(k_max);
    std::vector<double> accumulated = component_cache.at(policy.rho[0]);
    double origin = 0.5 * step;
    f[0] = masses_cdf_below(accumulated, origin, step, threshold);
    for (std::size_t k = 1; k < k_max; ++k) {
        accumulated = detail::convolve_masses(
            accumulated, component_cache.at(policy.rho[k]));
        origin += 0.5 * step;
        // Mass at or beyond the threshold can never return below it;
        // dropping those bins keeps the convolution exact for f and small.
        auto keep = static_cast<std::size_t>(
            std::floor((cover - origin) / step)) + 1;
        if (accumulated.size() > keep) accumulated.resize(keep);
        f[k] = masses_cdf_below(accumulated, origin, step, threshold);
    }
    return f;
}

// --- Chase combining ---

// Attempts reordered by ascending rho; exact duplicates merge their SNR
// variables into one gamma variable of added shape.
struct ChaseLevels {
    std::vector<double> cum_rho; // distinct sorted rho values (chunk sums)
    std::vector<double> shape;   // gamma shape of the merged SNR variable
};

ChaseLevels chase_levels(const ChannelModel& model,
                         const std::vector<double>& rho, std::size_t k) {
    std::vector<double> sorted(rho.begin(), rho.begin() + k);
    std::sort(sorted.begin(), sorted.end());
    ChaseLevels levels;
    for (double value : sorted) {
        if (!levels.cum_rho.empty() && value == levels.cum_rho.back()) {
            levels.shape.back() += model.m;
        } else {
            levels.cum_rho.push_back(value);
            levels.shape.push_back(model.m);
        }
    }
    return levels;
}

double log2_capacity(double snr) { return std::log1p(snr) / std::numbers::ln2; }

// Upper integration limit for the level's SNR variable: the largest value
// that keeps the decoding constraint satisfiable when every inner variable
// is zero. info_tail is the information already locked in by outer levels.
double chase_level_limit(double cum_rho, double suffix_snr,
                         double info_tail) {
    double budget = 1.0 - info_tail;
    if (budget <= 0.0) return 0.0;
    double exponent = budget / cum_rho;
    double threshold =
        exponent > 1020.0 ? 1e307 : std::exp2(exponent) - 1.0;
    return threshold - suffix_snr;
}

double gamma_log_pdf(double shape, double scale, double x) {
    return (shape - 1.0) * std::log(x) - x / scale -
           std::lgamma(shape) - shape * std::log(scale);
}

struct ChaseContext {
    const ChannelModel* model;
    const ChaseLevels* levels;
    const QuadratureRule* rule;
};

double chase_nested(const ChaseContext& ctx, int level, double suffix_snr,
                    double info_tail);

// One quadrature panel over the level's SNR in (0, z]: returns
// integral of pdf(u) * inner(u) du.
double chase_panel(const ChaseContext& ctx, int level, double z,
                   double suffix_snr, double info_tail) {
    const double shape = ctx.levels->shape[level];
    const double scale = ctx.model->gamma_bar / ctx.model->m;
    // The gamma mass above scale*(shape + 10 sqrt(shape) + 25) is < 1e-14;
    // tightening the panel keeps the nodes where the density lives.
    const double cap = scale * (shape + 10.0 * std::sqrt(shape) + 25.0);
    const double upper = std::min(z, cap);
    const double width = ctx.levels->cum_rho[level] -
                         ctx.levels->cum_rho[level - 1];
    const QuadratureRule& rule = *ctx.rule;
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        double t = 0.5 * (rule.nodes[i] + 1.0); // map [-1,1] -> (0,1)
        double u;
        double jacobian;
        if (shape < 1.0) {
            // u = upper t^2 removes the u^{shape-1} endpoint singularity.
            u = upper * t * t;
            jacobian = upper * t; // d u / d t / 2 (node weight carries the 2)
        } else {
            u = upper * t;
            jacobian = 0.5 * upper;
        }
        if (u <= 0.0) continue;
        double density = std::exp(gamma_log_pdf(shape, scale, u));
        double snr = suffix_snr + u;
        double inner = chase_nested(ctx, level - 1, snr,
                                    info_tail + log2_capacity(snr) * width);
        acc += rule.weights[i] * jacobian * density * inner;
    }
    // shape < 1 mapping: du = 2 upper t dt and t-interval halving combine
    // into the jacobian above times the [-1,1] weights' factor 1.
    return acc;
}

double chase_nested(const ChaseContext& ctx, int level, double suffix_snr,
                    double info_tail) {
    double z = chase_level_limit(ctx.levels->cum_rho[level], suffix_snr,
                                 info_tail);
    if (z <= 0.0) return 0.0;
    const ChannelModel& model = *ctx.model;
    if (level == 0) {
        // Innermost variable: exact CDF of Gamma(shape, gamma_bar/m).
        return regularized_lower_gamma(ctx.levels->shape[0],
                                       model.m * z / model.gamma_bar);
    }
    return chase_panel(ctx, level, z, suffix_snr, info_tail);
}

// As chase_nested at the top level, but with the panel contributions
// stored per node and reduced in index order so the result does not
// depend on the thread count.
double chase_top(const ChaseContext& ctx, bool parallel) {
    const int top = static_cast<int>(ctx.levels->cum_rho.size()) - 1;
    if (top == 0) return chase_nested(ctx, 0, 0.0, 0.0);
    double z = chase_level_limit(ctx.levels->cum_rho[top], 0.0, 0.0);
    if (z <= 0.0) return 0.0;
    const double shape = ctx.levels->shape[top];
    const double scale = ctx.model->gamma_bar / ctx.model->m;
    const double cap = scale * (shape + 10.0 * std::sqrt(shape) + 25.0);
    const double upper = std::min(z, cap);
    const double width =
        ctx.levels->cum_rho[top] - ctx.levels->cum_rho[top - 1];
    const QuadratureRule& rule = *ctx.rule;
    std::vector<double> partial(rule.order, 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < rule.order; ++i) {
        double t = 0.5 * (rule.nodes[i] + 1.0);
        double u;
        double jacobian;
        if (shape < 1.0) {
            u = upper * t * t;
            jacobian = upper * t;
        } else {
            u = upper * t;
            jacobian = 0.5 * upper;
        }
        if (u <= 0.0) continue;
        double density = std::exp(gamma_log_pdf(shape, scale, u));
        double snr = u;
        double inner = chase_nested(ctx, top - 1, snr,
                                    log2_capacity(snr) * width);
        partial[i] = rule.weights[i] * jacobian * density * inner;
    }
    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc;
}

OutageProfile chase_impl(const ChannelModel& model,
                         const RedundancyPolicy& policy, bool parallel) {
    validate_policy(policy);
    const std::size_t k_max = policy.rho.size();
    if (k_max > 4) {
        throw std::invalid_argument(
            "Chase outage limited to K <= 4 attempts");
    }
    const QuadratureRule& rule = gauss_legendre_rule(chase_rule_order(model.m));
    OutageProfile profile;
    profile.scheme = Scheme::harq_chase;
    bool all_equal = std::all_of(
        policy.rho.begin(), policy.rho.end(),
        [&](double r) { return r == policy.rho.front(); });
    profile.method =
        all_equal ? OutageMethod::closed_form : OutageMethod::quadrature;
    profile.f.resize(k_max);
    double previous = 1.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        ChaseLevels levels = chase_levels(model, policy.rho, k);
        ChaseContext ctx{&model, &levels, &rule};
        double raw = chase_top(ctx, parallel);
        raw = clamp_with_warning(raw, 0.0, 1.0, profile.warning,
                                 "chase failure probability");
        // True failure events are nested; quadrature noise must not break
        // that.
        raw = clamp_with_warning(raw, 0.0, previous, profile.warning,
                                 "chase profile monotonicity");
        profile.f[k - 1] = raw;
        previous = raw;
    }
    return profile;
}

} // namespace

void validate_policy(const RedundancyPolicy& policy) {
    if (policy.rho.empty()) {
        throw std::invalid_argument("policy must have at least one attempt");
    }
    for (double r : policy.rho) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw std::invalid_argument(
                "per-attempt redundancies must be positive and finite");
        }
    }
}

NormalizedPolicy normalize_policy(const RedundancyPolicy& policy,
                                  const ErgodicStats& stats) {
    validate_policy(policy);
    NormalizedPolicy normalized;
    const std::size_t k_max = policy.rho.size();
    normalized.rho_prime.resize(k_max);
    normalized.cumulative.resize(k_max);
    normalized.rms.resize(k_max);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        double rp = policy.rho[k] * stats.c_bar;
        normalized.rho_prime[k] = rp;
        sum += rp;
        sum_sq += rp * rp;
        normalized.cumulative[k] = sum;
        normalized.rms[k] = std::sqrt(sum_sq);
    }
    return normalized;
}

OutageProfile outage_harq_i(const ChannelModel& model,
                            const RedundancyPolicy& policy) {
    validate_policy(policy);
    OutageProfile profile;
    profile.scheme = Scheme::harq_i;
    profile.method = OutageMethod::exact;
    profile.f.resize(policy.rho.size());
    double product = 1.0;
    for (std::size_t k = 0; k < policy.rho.size(); ++k) {
        product *= single_outage(model, policy.rho[k]);
        profile.f[k] = product;
    }
    return profile;
}

OutageProfile outage_ir_exact(const ChannelModel& model,
                              const RedundancyPolicy& policy,
                              const IrExactOptions& opts) {
    return outage_ir_exact(model, ergodic_stats(model), policy, opts);
}

OutageProfile outage_ir_exact(const ChannelModel& model,
                              const ErgodicStats& stats,
                              const RedundancyPolicy& policy,
                              const IrExactOptions& opts) {
    OutageProfile profile;
    profile.scheme = Scheme::harq_ir;
    profile.method = OutageMethod::exact;
    profile.f = detail::ir_exact_tail_profile(model, stats, policy, 1.0, opts);
    for (std::size_t k = 0; k < profile.f.size(); ++k) {
        profile.f[k] = clamp_with_warning(profile.f[k], 0.0, 1.0,
                                          profile.warning,
                                          "IR failure probability");
        if (k > 0) {
            profile.f[k] =
                clamp_with_warning(profile.f[k], 0.0, profile.f[k - 1],
                                   profile.warning,
                                   "IR profile monotonicity");
        }
    }
    return profile;
}

OutageProfile outage_ir_gaussian(const ChannelModel& model,
                                 const RedundancyPolicy& policy) {
    return outage_ir_gaussian(ergodic_stats(model), policy);
}

OutageProfile outage_ir_gaussian(const ErgodicStats& stats,
                                 const RedundancyPolicy& policy) {
    NormalizedPolicy n = normalize_policy(policy, stats);
    OutageProfile profile;
    profile.scheme = Scheme::harq_ir;
    profile.method = OutageMethod::gaussian;
    profile.f.resize(policy.rho.size());
    for (std::size_t k = 0; k < policy.rho.size(); ++k) {
        profile.f[k] =
            q_function(stats.xi * (n.cumulative[k] - 1.0) / n.rms[k]);
    }
    return profile;
}

OutageProfile outage_ir_bound(const ChannelModel& model,
                              const RedundancyPolicy& policy) {
    return outage_ir_bound(ergodic_stats(model), policy);
}

OutageProfile outage_ir_bound(const ErgodicStats& stats,
                              const RedundancyPolicy& policy) {
    NormalizedPolicy n = normalize_policy(policy, stats);
    OutageProfile profile;
    profile.scheme = Scheme::harq_ir;
    profile.method = OutageMethod::bound;
    profile.f.resize(policy.rho.size());
    for (std::size_t k = 0; k < policy.rho.size(); ++k) {
        profile.f[k] = q_function(stats.xi * (1.0 - 1.0 / n.cumulative[k]));
    }
    return profile;
}

OutageProfile outage_chase(const ChannelModel& model,
                           const RedundancyPolicy& policy) {
    return chase_impl(model, policy, true);
}

OutageProfile outage_chase_serial(const ChannelModel& model,
                                  const RedundancyPolicy& policy) {
    return chase_impl(model, policy, false);
}

double chase_equal_rho_failure(const ChannelModel& model, double rho, int k) {
    if (k < 1) throw std::invalid_argument("attempt count must be >= 1");
    if (!(rho > 0.0)) throw std::domain_error("redundancy must be positive");
    if (rho < 1e-3) return 1.0;
    double z = std::exp2(1.0 / rho) - 1.0;
    // Sum of k iid Gamma(m, gamma_bar/m) SNRs keeps the per-attempt scale.
    return regularized_lower_gamma(model.m * k,
                                   model.m * z / model.gamma_bar);
}

int chase_rule_order(double m) { return m < 1.0 ? 40 : 10; }

namespace detail {

std::vector<double> ir_component_masses(const ChannelModel& model, double rho,
                                        double step, std::size_t count) {
    // Exact probability of C(gamma) * rho landing in each bin, via CDF
    // differences of x -> F(2^{x/rho} - 1). Robust for m < 1 where the
    // density itself is unbounded at 0.
    std::vector<double> edges(count + 1);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i <= static_cast<long long>(count); ++i) {
        double x = static_cast<double>(i) * step;
        double exponent = x / rho;
        double snr_threshold =
            exponent > 1020.0 ? 1e307 : std::exp2(exponent) - 1.0;
        edges[i] = snr_cdf(model, snr_threshold);
    }
    std::vector<double> masses(count);
    for (std::size_t i = 0; i < count; ++i) {
        masses[i] = std::max(0.0, edges[i + 1] - edges[i]);
    }
    return masses;
}

std::vector<double> ir_exact_tail_profile(const ChannelModel& model,
                                          const ErgodicStats& stats,
                                          const RedundancyPolicy& policy,
                                          double threshold,
                                          const IrExactOptions& opts) {
    validate_policy(policy);
    if (!(threshold > 0.0)) {
        throw std::domain_error("information threshold must be positive");
    }
    if (opts.bins_per_min_redundancy < 16) {
        throw std::invalid_argument("bins_per_min_redundancy too small");
    }
    NormalizedPolicy n = normalize_policy(policy, stats);
    double min_rp = *std::min_element(n.rho_prime.begin(), n.rho_prime.end());
    double step = min_rp / opts.bins_per_min_redundancy;
    // Keep at least 4096 bins across the nominal support of the sum.
    double nominal = n.cumulative.back() + 10.0 * n.rms.back();
    step = std::min(step, nominal / 4096.0);
    if (opts.max_support_bins > 0) {
        step = std::max(step, nominal / opts.max_support_bins);
    }

    if (!opts.check_convergence) {
        return ir_profile_at_step(model, policy, threshold, step);
    }
    std::vector<double> coarse = ir_profile_at_step(model, policy, threshold,
                                                    step);
    for (int refinement = 0; refinement < 3; ++refinement) {
        step *= 0.5;
        std::vector<double> fine = ir_profile_at_step(model, policy,
                                                      threshold, step);
        double worst = 0.0;
        for (std::size_t k = 0; k < fine.size(); ++k) {
            worst = std::max(worst, std::abs(fine[k] - coarse[k]));
        }
        if (worst < ir_resolution_target) return fine;
        coarse = std::move(fine);
    }
    throw numerical_error(
        "accumulated-information density failed the resolution check");
}

} // namespace detail

} // namespace harq
