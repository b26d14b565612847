#include "harq/special_math.hpp"

#include "harq/types.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace harq {

namespace {

// P(a, x) by power series, valid and fast for x < a + 1.
double lower_gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numerical_error("incomplete gamma series did not converge");
}

// Q(a, x) = 1 - P(a, x) by modified Lentz continued fraction, for
// x >= a + 1 where the fraction converges quickly.
double upper_gamma_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) <= std::numeric_limits<double>::epsilon()) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numerical_error("incomplete gamma continued fraction did not converge");
}

// Evaluates the degree-n Laguerre polynomial and the previous one at z.
void laguerre_pair(int n, double z, double& pn, double& pn1) {
    double p1 = 1.0;
    double p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
    }
    pn = p1;
    pn1 = p2;
}

QuadratureRule build_laguerre(int n) {
    QuadratureRule rule;
    rule.order = n;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            z = 3.0 / (1.0 + 2.4 * n);
        } else if (i == 1) {
            z += 15.0 / (1.0 + 2.5 * n);
        } else {
            double ai = i - 1;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - rule.nodes[i - 2]);
        }
        double pn = 0.0;
        double pn1 = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            laguerre_pair(n, z, pn, pn1);
            double deriv = n * (pn - pn1) / z;
            double z_prev = z;
            z = z_prev - pn / deriv;
            if (std::abs(z - z_prev) <= 1e-14 * std::max(1.0, z)) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw numerical_error("Laguerre root iteration stalled");
        }
        laguerre_pair(n, z, pn, pn1);
        double deriv = n * (pn - pn1) / z;
        rule.nodes[i] = z;
        rule.weights[i] = -1.0 / (deriv * n * pn1);
    }
    return rule;
}

QuadratureRule build_legendre(int n) {
    QuadratureRule rule;
    rule.order = n;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z_prev = z;
            z = z_prev - p1 / pp;
            if (std::abs(z - z_prev) <= 1e-15) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw numerical_error("Legendre root iteration stalled");
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

constexpr int max_rule_order = 64;

const QuadratureRule& cached_rule(int order, QuadratureRule (*builder)(int),
                                  const char* family) {
    if (order < 1 || order > max_rule_order) {
        throw std::invalid_argument(std::string(family) +
                                    " order out of supported range 1..64");
    }
    static std::mutex mutexes[2];
    static std::map<int, QuadratureRule> caches[2];
    int which = builder == &build_laguerre ? 0 : 1;
    std::scoped_lock lock(mutexes[which]);
    auto& cache = caches[which];
    auto it = cache.find(order);
    if (it == cache.end()) {
        it = cache.emplace(order, builder(order)).first;
    }
    return it->second;
}

// Iterative radix-2 complex FFT, in place. inverse=true applies the
// conjugate transform without the 1/n scale.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double angle = 2.0 * std::numbers::pi / static_cast<double>(len);
        if (!inverse) angle = -angle;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                auto w = std::polar(1.0, angle * static_cast<double>(k));
                auto u = a[i + k];
                auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

struct GkSegment {
    double a;
    double b;
    double value;
    double error;
};

// 15-point Kronrod extension of the 7-point Gauss rule (positive half).
constexpr double gk_nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double gk_weights[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
constexpr double g7_weights[4] = {0.1294849661688697, 0.2797053914892767,
                                  0.3818300505051189, 0.4179591836734694};

GkSegment gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double halfwidth = 0.5 * (b - a);
    double fv[8];
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        double x = halfwidth * gk_nodes[i];
        double lo = f(center - x);
        double hi = f(center + x);
        fv[i] = i == 7 ? lo : lo + hi;
        kronrod += gk_weights[i] * fv[i];
    }
    for (int i = 0; i < 4; ++i) {
        gauss += g7_weights[i] * fv[2 * i + 1];
    }
    GkSegment seg;
    seg.a = a;
    seg.b = b;
    seg.value = kronrod * halfwidth;
    double diff = (kronrod - gauss) * halfwidth;
    seg.error = std::abs(diff);
    return seg;
}

} // namespace

double DiscretizedDensity::total_mass() const {
    double sum = 0.0;
    for (double m : masses) sum += m;
    return sum;
}

double DiscretizedDensity::mean() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        sum += masses[i] * (grid_origin + static_cast<double>(i) * grid_step);
    }
    return sum;
}

double DiscretizedDensity::cdf_below(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double center = grid_origin + static_cast<double>(i) * grid_step;
        double left = center - 0.5 * grid_step;
        double right = center + 0.5 * grid_step;
        if (x >= right) {
            acc += masses[i];
        } else if (x > left) {
            acc += masses[i] * (x - left) / grid_step;
        } else {
            break;
        }
    }
    return acc;
}

double regularized_lower_gamma(double shape, double x) {
    if (!(shape > 0.0)) {
        throw std::domain_error("incomplete gamma requires shape > 0");
    }
    if (!(x >= 0.0)) {
        throw std::domain_error("incomplete gamma requires x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (x < shape + 1.0) return lower_gamma_series(shape, x);
    return 1.0 - upper_gamma_cf(shape, x);
}

double q_function(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

const QuadratureRule& gauss_laguerre_rule(int order) {
    return cached_rule(order, &build_laguerre, "Gauss-Laguerre");
}

const QuadratureRule& gauss_legendre_rule(int order) {
    return cached_rule(order, &build_legendre, "Gauss-Legendre");
}

DiscretizedDensity convolve_densities(const DiscretizedDensity& a,
                                      const DiscretizedDensity& b) {
    double step = a.grid_step;
    if (!(step > 0.0) ||
        std::abs(a.grid_step - b.grid_step) > 1e-12 * step) {
        throw std::invalid_argument("convolution requires matching grid steps");
    }
    DiscretizedDensity out;
    out.grid_step = step;
    out.grid_origin = a.grid_origin + b.grid_origin;
    out.masses = detail::convolve_masses(a.masses, b.masses);
    return out;
}

namespace detail {

std::vector<double> convolve_masses(const std::vector<double>& a,
                                    const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_n = a.size() + b.size() - 1;
    std::vector<double> out(out_n, 0.0);
    if (out_n < 1024) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                out[i + j] += a[i] * b[j];
            }
        }
        return out;
    }
    std::size_t n = 1;
    while (n < out_n) n <<= 1;
    std::vector<std::complex<double>> fa(n), fb(n);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    for (std::size_t i = 0; i < out_n; ++i) {
        // Masses are nonnegative; clip the FFT's rounding noise.
        out[i] = std::max(0.0, fa[i].real() / static_cast<double>(n));
    }
    return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double* abs_err_out) {
    auto worse = [](const GkSegment& x, const GkSegment& y) {
        return x.error < y.error;
    };
    std::priority_queue<GkSegment, std::vector<GkSegment>, decltype(worse)>
        queue(worse);
    queue.push(gk15(f, a, b));
    double total_value = queue.top().value;
    double total_error = queue.top().error;
    constexpr int max_segments = 4000;
    for (int n = 0; n < max_segments; ++n) {
        double target =
            std::max(rel_tol * std::abs(total_value), 1e-300);
        if (total_error <= target) {
            if (abs_err_out) *abs_err_out = total_error;
            return total_value;
        }
        GkSegment seg = queue.top();
        queue.pop();
        double mid = 0.5 * (seg.a + seg.b);
        GkSegment left = gk15(f, seg.a, mid);
        GkSegment right = gk15(f, mid, seg.b);
        total_value += left.value + right.value - seg.value;
        total_error += left.error + right.error - seg.error;
        queue.push(left);
        queue.push(right);
    }
    throw numerical_error("adaptive quadrature failed to reach tolerance");
}

} // namespace detail

} // namespace harq
