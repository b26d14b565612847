#pragma once

#include <functional>
#include <vector>

namespace harq {

// Nodes and weights of a fixed-order Gauss rule. Nodes are strictly
// increasing, weights strictly positive. Instances returned by the rule
// factories are immutable and safe to share across threads.
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Probability mass on a uniform grid: masses[i] sits at
// grid_origin + i * grid_step. Used as a discretized density carrier for
// sums of independent nonnegative variables.
struct DiscretizedDensity {
    double grid_origin = 0.0;
    double grid_step = 0.0;
    std::vector<double> masses;

    double total_mass() const;
    double mean() const;
    // P{X < x}. Bin i is treated as covering
    // [center - step/2, center + step/2) with its mass spread uniformly,
    // so the straddled bin contributes a linear fraction.
    double cdf_below(double x) const;
};

// Regularized lower incomplete gamma P(shape, x). Series expansion for
// x < shape + 1, continued fraction otherwise. shape > 0, x >= 0.
double regularized_lower_gamma(double shape, double x);

// Gaussian tail probability Q(x) = P{N(0,1) > x}.
double q_function(double x);

// Gauss-Laguerre rule for integrals of f(x) e^{-x} over (0, inf).
// Supported orders: 1..64. Roots are found by Newton iteration on the
// Laguerre recurrence to 1e-14 relative tolerance; rules are built once
// and cached.
const QuadratureRule& gauss_laguerre_rule(int order);

// Gauss-Legendre rule on [-1, 1]. Supported orders: 1..64, cached.
const QuadratureRule& gauss_legendre_rule(int order);

// Distribution of the sum of two independent variables given on grids with
// the same step. Grid origins add; masses convolve (FFT above the direct
// crossover size). Throws std::invalid_argument on a step mismatch.
DiscretizedDensity convolve_densities(const DiscretizedDensity& a,
                                      const DiscretizedDensity& b);

namespace detail {

// Globally adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b].
// Subdivides the interval with the worst local error estimate until the
// accumulated error drops below rel_tol * |result| (plus a tiny absolute
// floor). Throws numerical_error if the budget of subdivisions runs out.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol,
                          double* abs_err_out = nullptr);

// Linear convolution of two nonnegative mass vectors.
std::vector<double> convolve_masses(const std::vector<double>& a,
                                    const std::vector<double>& b);

} // namespace detail

} // namespace harq
