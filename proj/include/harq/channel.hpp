#pragma once

namespace harq {

// Block-fading channel whose per-attempt SNR is Gamma distributed with
// shape m and mean gamma_bar (Nakagami-m power fading). Construction
// validates m >= 0.5 and gamma_bar > 0.
struct ChannelModel {
    double m;
    double gamma_bar;

    ChannelModel(double shape, double mean_snr);
};

// Per-channel-use statistics of the instantaneous capacity C = log2(1+SNR):
// mean c_bar, standard deviation sigma, and their ratio xi = c_bar / sigma.
struct ErgodicStats {
    double c_bar;
    double sigma;
    double xi;
};

// log2(1 + gamma); domain gamma >= 0.
double mutual_information(double gamma);

// Density of the SNR at gamma (0 for gamma < 0). Unbounded at 0 when
// m < 1; the value +inf is returned there.
double snr_pdf(const ChannelModel& model, double gamma);

// P{SNR < x}. Regularized lower incomplete gamma P(m, m x / gamma_bar).
double snr_cdf(const ChannelModel& model, double x);

// Probability that a single attempt carrying 1/rho bits per channel use
// fails: P{C(SNR) rho < 1}. rho below 1e-3 would overflow 2^{1/rho};
// such attempts are certain failures and return 1.
double single_outage(const ChannelModel& model, double rho);

// Mean and standard deviation of C by adaptive quadrature on a log-SNR
// axis, 1e-8 relative accuracy. Throws numerical_error when the
// integrals fail to converge.
ErgodicStats ergodic_stats(const ChannelModel& model);

} // namespace harq
