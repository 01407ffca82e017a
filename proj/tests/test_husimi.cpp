#include <doctest.h>

#include <cmath>

#include "depi/husimi.hpp"
#include "depi/pmf.hpp"

using namespace depi;

namespace {
constexpr double kUmax = 40.0;
constexpr double kStep = kUmax / 512.0;
}  // namespace

TEST_CASE("vacuum profile is a bare exponential") {
    RadialDensity f = husimi_forward(make_delta(0), kUmax, kStep);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        double u = double(i) * f.step;
        CHECK(f.values[i] == doctest::Approx(std::exp(-u)).epsilon(1e-12));
    }
    // Trapezoid quadrature carries an O(step^2) error.
    CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("geometric profile is a scaled exponential") {
    double lambda = 1.0;
    RadialDensity f = husimi_forward(make_geometric(lambda), kUmax, kStep);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        double u = double(i) * f.step;
        double expect = std::exp(-u / (1.0 + lambda)) / (1.0 + lambda);
        CHECK(std::abs(f.values[i] - expect) <= 1e-9);
    }
}

TEST_CASE("profiles normalize") {
    for (const Pmf& x : {make_poisson(2.0), make_geometric(0.7), make_delta(3)}) {
        RadialDensity f = husimi_forward(x, kUmax, kStep);
        CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("tail guard rejects a slow-decaying state on a short window") {
    CHECK_THROWS_AS(husimi_forward(make_geometric(4.0), kUmax, kStep),
                    OracleResolutionError);
}

TEST_CASE("resolution guards") {
    CHECK_THROWS_AS(husimi_forward(make_delta(0), 40.0, 10.0),
                    OracleResolutionError);
    CHECK_THROWS_AS(husimi_forward(make_delta(0), -1.0, 0.1),
                    OracleResolutionError);
    // u_max far too short for the occupied levels.
    CHECK_THROWS_AS(husimi_forward(make_delta(30), 5.0, 0.01),
                    OracleResolutionError);
}

TEST_CASE("scaled convolution: documented cases") {
    Pmf d0 = make_delta(0);
    Pmf d1 = make_delta(1);
    for (double eta : {0.3, 0.5, 0.8}) {
        auto c = check_scaled_convolution(d0, d0, eta, kUmax, kStep);
        CHECK(c.max_abs_discrepancy <= 1e-6);
    }
    auto geo = check_scaled_convolution(make_geometric(1.0), d0, 0.5, kUmax, kStep);
    CHECK(geo.max_abs_discrepancy <= 1e-4);

    auto hom = check_scaled_convolution(d1, d1, 0.5, kUmax, kStep);
    CHECK(hom.max_abs_discrepancy <= 1e-3);
}

TEST_CASE("refinement convergence") {
    Pmf d1 = make_delta(1);
    auto coarse = check_scaled_convolution(d1, d1, 0.5, kUmax, kStep);
    auto fine = check_scaled_convolution(d1, d1, 0.5, kUmax, kStep / 2.0);
    CHECK(fine.grid_samples == 2 * coarse.grid_samples);
    CHECK(fine.max_abs_discrepancy * 2.0 <= coarse.max_abs_discrepancy);
}
