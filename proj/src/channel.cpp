#include "harq/channel.hpp"

#include "harq/special_math.hpp"
#include "harq/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace harq {

namespace {

// log2(1 + e^u) without overflowing e^u.
double capacity_of_log_snr(double u) {
    double softplus = u > 40.0 ? u : std::log1p(std::exp(u));
    return softplus / std::numbers::ln2;
}

} // namespace

ChannelModel::ChannelModel(double shape, double mean_snr)
    : m(shape), gamma_bar(mean_snr) {
    if (!(m >= 0.5) || !std::isfinite(m)) {
        throw std::domain_error("fading shape m must be >= 0.5");
    }
    if (!(gamma_bar > 0.0) || !std::isfinite(gamma_bar)) {
        throw std::domain_error("mean SNR must be positive");
    }
}

double mutual_information(double gamma) {
    if (!(gamma >= 0.0)) {
        throw std::domain_error("SNR must be nonnegative");
    }
    return std::log1p(gamma) / std::numbers::ln2;
}

double snr_pdf(const ChannelModel& model, double gamma) {
    if (gamma < 0.0) return 0.0;
    if (gamma == 0.0) {
        if (model.m < 1.0) return std::numeric_limits<double>::infinity();
        if (model.m == 1.0) return 1.0 / model.gamma_bar;
        return 0.0;
    }
    double scale = model.gamma_bar / model.m;
    double log_pdf = (model.m - 1.0) * std::log(gamma) -
                     model.m * std::log(scale) - std::lgamma(model.m) -
                     gamma / scale;
    return std::exp(log_pdf);
}

double snr_cdf(const ChannelModel& model, double x) {
    if (x <= 0.0) return 0.0;
    if (x > 1e300) return 1.0;
    return regularized_lower_gamma(model.m, model.m * x / model.gamma_bar);
}

double single_outage(const ChannelModel& model, double rho) {
    if (!(rho > 0.0)) {
        throw std::domain_error("redundancy must be positive");
    }
    if (rho < 1e-3) return 1.0;
    return snr_cdf(model, std::exp2(1.0 / rho) - 1.0);
}

ErgodicStats ergodic_stats(const ChannelModel& model) {
    // Substituting gamma = e^u turns the density weight into
    // exp(m(u - ln scale) - e^u/scale)/Gamma(m), smooth for every m >= 0.5.
    const double scale = model.gamma_bar / model.m;
    const double log_scale = std::log(scale);
    const double log_norm = std::lgamma(model.m);
    auto weighted = [&](double u, int power) {
        double log_w =
            model.m * (u - log_scale) - std::exp(u) / scale - log_norm;
        double c = capacity_of_log_snr(u);
        double w = std::exp(log_w);
        return power == 1 ? c * w : c * c * w;
    };
    const double lo = log_scale - 80.0 / model.m;
    const double hi = log_scale + 6.0;

    double err1 = 0.0;
    double err2 = 0.0;
    double first = detail::integrate_adaptive(
        [&](double u) { return weighted(u, 1); }, lo, hi, 1e-10, &err1);
    double second = detail::integrate_adaptive(
        [&](double u) { return weighted(u, 2); }, lo, hi, 1e-10, &err2);
    if (err1 > 1e-8 * first || err2 > 1e-8 * second) {
        throw numerical_error("ergodic statistics integration did not converge");
    }
    double variance = second - first * first;
    if (!(first > 0.0) || !(variance > 0.0)) {
        throw numerical_error("ergodic statistics are degenerate");
    }
    ErgodicStats stats;
    stats.c_bar = first;
    stats.sigma = std::sqrt(variance);
    stats.xi = stats.c_bar / stats.sigma;
    return stats;
}

} // namespace harq
