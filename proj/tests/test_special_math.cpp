#include <doctest.h>

#include "harq/special_math.hpp"
#include "harq/types.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace harq;

TEST_CASE("regularized lower incomplete gamma: pinned values") {
    CHECK(regularized_lower_gamma(1.0, 0.0) == 0.0);
    // P(1, x) = 1 - e^{-x}, so P(1, ln 2) = 1/2.
    CHECK(std::abs(regularized_lower_gamma(1.0, std::log(2.0)) - 0.5) <
          1e-12);
    CHECK(std::abs(regularized_lower_gamma(0.5, 2.0) -
                   testutil::gamma_p(0.5, 2.0)) < 1e-13);
    // P(0.5, 2) = erf(sqrt(2)) via the substitution t = u^2.
    const double by_quadrature = testutil::integrate(
        [](double u) { return 2.0 / std::sqrt(M_PI) * std::exp(-u * u); },
        0.0, std::sqrt(2.0), 1e-13);
    CHECK(std::abs(regularized_lower_gamma(0.5, 2.0) - by_quadrature) <
          1e-11);
}

TEST_CASE("regularized lower incomplete gamma: agrees with reference") {
    const double shapes[] = {0.5, 0.7, 1.0, 1.5, 2.0, 3.5, 8.0, 17.0, 40.0};
    const double offsets[] = {1e-8, 0.3, 1.0, 5.0, 50.0};
    for (double shape : shapes) {
        for (double off : offsets) {
            const double x = shape * off;
            if (x == 0.0) continue;
            const double got = regularized_lower_gamma(shape, x);
            const double want = testutil::gamma_p(shape, x);
            CHECK(std::abs(got - want) <=
                  1e-12 * std::max(1.0, std::abs(want)) + 1e-300);
        }
    }
}

TEST_CASE("regularized lower incomplete gamma: saturation and domain") {
    // Far in the tail the continued fraction must still terminate.
    CHECK(regularized_lower_gamma(1.0, 2.9e16) == 1.0);
    CHECK(regularized_lower_gamma(3.0, 1e12) == 1.0);
    CHECK(regularized_lower_gamma(2.0, 1.0) <
          regularized_lower_gamma(2.0, 2.0));
    CHECK_THROWS_AS((void)regularized_lower_gamma(0.0, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS((void)regularized_lower_gamma(1.0, -0.5),
                    std::domain_error);
}

TEST_CASE("gaussian tail function") {
    CHECK(q_function(0.0) == 0.5);
    CHECK(std::abs(q_function(1.0) - 0.15865525393145705) < 1e-12);
    CHECK(q_function(40.0) <= 1e-300);
    CHECK(q_function(-40.0) >= 1.0 - 1e-15);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> xs(-8.0, 8.0);
    for (int i = 0; i < 200; ++i) {
        const double x = xs(gen);
        CHECK(std::abs(q_function(x) + q_function(-x) - 1.0) < 1e-12);
        CHECK(std::abs(q_function(x) - testutil::q_function_ref(x)) <
              1e-14);
    }
}

TEST_CASE("gauss-laguerre rules: pinned low orders") {
    const QuadratureRule& one = gauss_laguerre_rule(1);
    REQUIRE(one.nodes.size() == 1);
    CHECK(std::abs(one.nodes[0] - 1.0) < 1e-12);
    CHECK(std::abs(one.weights[0] - 1.0) < 1e-12);

    const QuadratureRule& ten = gauss_laguerre_rule(10);
    double first_moment = 0.0;
    double mass = 0.0;
    for (int i = 0; i < 10; ++i) {
        first_moment += ten.weights[i] * ten.nodes[i];
        mass += ten.weights[i];
    }
    CHECK(std::abs(first_moment - 1.0) < 1e-12);
    CHECK(std::abs(mass - 1.0) < 1e-12);

    const QuadratureRule& forty = gauss_laguerre_rule(40);
    double tenth = 0.0;
    for (int i = 0; i < 40; ++i) {
        tenth += forty.weights[i] * std::pow(forty.nodes[i], 10);
    }
    CHECK(std::abs(tenth - 3628800.0) < 1e-8 * 3628800.0);
}

TEST_CASE("gauss-laguerre rules: factorial moments at every order") {
    for (int order = 1; order <= 64; ++order) {
        const QuadratureRule& rule = gauss_laguerre_rule(order);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(order));
        for (int i = 0; i < order; ++i) {
            CHECK(rule.weights[i] > 0.0);
            if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
        }
        // The rule integrates x^j e^{-x} exactly for j <= 2*order - 1.
        double factorial = 1.0;
        for (int j = 1; j <= order; ++j) {
            factorial *= j;
            double sum = 0.0;
            for (int i = 0; i < order; ++i) {
                sum += rule.weights[i] * std::pow(rule.nodes[i], j);
            }
            CHECK(std::abs(sum - factorial) <= 1e-8 * factorial);
        }
    }
    CHECK_THROWS_AS((void)gauss_laguerre_rule(0), std::invalid_argument);
    CHECK_THROWS_AS((void)gauss_laguerre_rule(65), std::invalid_argument);
}

TEST_CASE("gauss-legendre rules") {
    const QuadratureRule& one = gauss_legendre_rule(1);
    REQUIRE(one.nodes.size() == 1);
    CHECK(std::abs(one.nodes[0]) < 1e-15);
    CHECK(std::abs(one.weights[0] - 2.0) < 1e-14);

    for (int order : {2, 5, 10, 33, 64}) {
        const QuadratureRule& rule = gauss_legendre_rule(order);
        for (int i = 0; i < order; ++i) {
            CHECK(rule.weights[i] > 0.0);
            // Symmetry of nodes and weights about zero.
            CHECK(std::abs(rule.nodes[i] + rule.nodes[order - 1 - i]) <
                  1e-12);
            CHECK(std::abs(rule.weights[i] - rule.weights[order - 1 - i]) <
                  1e-12);
        }
        for (int j = 0; j <= 2 * order - 1; ++j) {
            double sum = 0.0;
            for (int i = 0; i < order; ++i) {
                sum += rule.weights[i] * std::pow(rule.nodes[i], j);
            }
            const double want = (j % 2 == 0) ? 2.0 / (j + 1) : 0.0;
            CHECK(std::abs(sum - want) < 1e-10);
        }
    }
    CHECK_THROWS_AS((void)gauss_legendre_rule(0), std::invalid_argument);
    CHECK_THROWS_AS((void)gauss_legendre_rule(65), std::invalid_argument);
}

TEST_CASE("discretized density accessors") {
    DiscretizedDensity d;
    d.grid_origin = 2.0;
    d.grid_step = 0.5;
    d.masses = {0.25, 0.5, 0.25};
    CHECK(std::abs(d.total_mass() - 1.0) < 1e-15);
    CHECK(std::abs(d.mean() - 2.5) < 1e-15);
    // Bin centers are 2.0, 2.5, 3.0; each bin spreads over +-step/2.
    CHECK(d.cdf_below(1.7) == 0.0);
    CHECK(std::abs(d.cdf_below(2.0) - 0.125) < 1e-15);
    CHECK(std::abs(d.cdf_below(2.25) - 0.25) < 1e-15);
    CHECK(std::abs(d.cdf_below(2.5) - 0.5) < 1e-15);
    CHECK(std::abs(d.cdf_below(3.25) - 1.0) < 1e-15);
    CHECK(d.cdf_below(7.0) == 1.0);
}

TEST_CASE("convolution: point mass is the identity, origins add") {
    DiscretizedDensity point;
    point.grid_origin = 0.4;
    point.grid_step = 0.1;
    point.masses = {1.0};

    DiscretizedDensity b;
    b.grid_origin = 0.7;
    b.grid_step = 0.1;
    b.masses = {0.2, 0.3, 0.5};

    const DiscretizedDensity c = convolve_densities(point, b);
    REQUIRE(c.masses.size() == 3);
    CHECK(std::abs(c.grid_origin - 1.1) < 1e-15);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(c.masses[i] - b.masses[i]) < 1e-12);
    }
}

TEST_CASE("convolution: algebraic properties") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto random_density = [&](std::size_t n, double origin) {
        DiscretizedDensity d;
        d.grid_origin = origin;
        d.grid_step = 0.01;
        d.masses.resize(n);
        double total = 0.0;
        for (double& v : d.masses) total += (v = unif(gen));
        for (double& v : d.masses) v /= total;
        return d;
    };
    const DiscretizedDensity a = random_density(37, 0.0);
    const DiscretizedDensity b = random_density(23, 0.2);
    const DiscretizedDensity c = random_density(12, 0.05);

    const DiscretizedDensity ab = convolve_densities(a, b);
    const DiscretizedDensity ba = convolve_densities(b, a);
    REQUIRE(ab.masses.size() == ba.masses.size());
    for (std::size_t i = 0; i < ab.masses.size(); ++i) {
        CHECK(std::abs(ab.masses[i] - ba.masses[i]) < 1e-9);
    }

    const DiscretizedDensity ab_c = convolve_densities(ab, c);
    const DiscretizedDensity a_bc = convolve_densities(a, convolve_densities(b, c));
    REQUIRE(ab_c.masses.size() == a_bc.masses.size());
    CHECK(std::abs(ab_c.grid_origin - a_bc.grid_origin) < 1e-12);
    for (std::size_t i = 0; i < ab_c.masses.size(); ++i) {
        CHECK(std::abs(ab_c.masses[i] - a_bc.masses[i]) < 1e-9);
    }

    CHECK(std::abs(ab.total_mass() - a.total_mass() * b.total_mass()) <
          1e-6);
    CHECK(std::abs(ab.mean() - (a.mean() + b.mean())) <= ab.grid_step);

    DiscretizedDensity mismatched = b;
    mismatched.grid_step = 0.02;
    CHECK_THROWS_AS((void)convolve_densities(a, mismatched),
                    std::invalid_argument);
}

TEST_CASE("convolution: exponential self-convolution hits the Erlang-2 median") {
    // Discretize Exp(1) by CDF differences and convolve with itself; the sum
    // is Gamma(2, 1) whose median is known through the inverse regularized
    // gamma.
    const double step = 1.0 / 512.0;
    const std::size_t bins = static_cast<std::size_t>(24.0 / step);
    DiscretizedDensity e;
    e.grid_origin = 0.5 * step;
    e.grid_step = step;
    e.masses.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double lo = i * step;
        const double hi = lo + step;
        e.masses[i] = std::exp(-lo) - std::exp(-hi);
    }
    CHECK(std::abs(e.total_mass() - 1.0) < 1e-6);

    const DiscretizedDensity erlang = convolve_densities(e, e);
    const double median = testutil::gamma_p_inv(2.0, 0.5);
    CHECK(std::abs(erlang.cdf_below(median) - 0.5) < 5e-3);
}

TEST_CASE("convolution: FFT path agrees with the direct sum") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto random_masses = [&](std::size_t n) {
        std::vector<double> v(n);
        double total = 0.0;
        for (double& x : v) total += (x = unif(gen));
        for (double& x : v) x /= total;
        return v;
    };
    // 700 + 701 output bins exceed the direct-evaluation crossover.
    DiscretizedDensity a;
    a.grid_origin = 0.0;
    a.grid_step = 0.001;
    a.masses = random_masses(700);
    DiscretizedDensity b = a;
    b.masses = random_masses(701);

    const DiscretizedDensity fast = convolve_densities(a, b);
    const std::vector<double> slow =
        testutil::convolve_direct(a.masses, b.masses);
    REQUIRE(fast.masses.size() == slow.size());
    for (std::size_t i = 0; i < slow.size(); ++i) {
        CHECK(std::abs(fast.masses[i] - slow[i]) < 1e-9);
    }

    const std::vector<double> small_direct =
        detail::convolve_masses({0.5, 0.5}, {0.25, 0.75});
    REQUIRE(small_direct.size() == 3);
    CHECK(std::abs(small_direct[0] - 0.125) < 1e-15);
    CHECK(std::abs(small_direct[1] - 0.5) < 1e-15);
    CHECK(std::abs(small_direct[2] - 0.375) < 1e-15);
}

TEST_CASE("adaptive gauss-kronrod integrator") {
    double err = 0.0;
    const double third = detail::integrate_adaptive(
        [](double x) { return x * x; }, 0.0, 1.0, 1e-10, &err);
    CHECK(std::abs(third - 1.0 / 3.0) < 1e-10);
    CHECK(err >= 0.0);
    CHECK(err < 1e-8);

    const double two = detail::integrate_adaptive(
        [](double x) { return std::sin(x); }, 0.0, M_PI, 1e-10);
    CHECK(std::abs(two - 2.0) < 1e-9);

    auto wiggly = [](double x) { return std::exp(-x) * std::cos(10.0 * x); };
    const double got = detail::integrate_adaptive(wiggly, 0.0, 6.0, 1e-10);
    const double want = testutil::integrate(wiggly, 0.0, 6.0, 1e-13);
    CHECK(std::abs(got - want) < 1e-9);
}
