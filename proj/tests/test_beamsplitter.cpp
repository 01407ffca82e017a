#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "depi/beamsplitter.hpp"
#include "depi/harness.hpp"
#include "depi/pmf.hpp"
#include "depi/thinning.hpp"

using namespace depi;

namespace {

// Brute-force amplitude oracle: expand
//   (sqrt(eta) a - sqrt(1-eta) b)^n (sqrt(1-eta) a + sqrt(eta) b)^m
// by repeated polynomial multiplication over monomials a^i b^j, then attach
// the Fock normalization sqrt(p! q! / n! m!). Plain linear-domain arithmetic,
// independent of the kernel's log-domain path.
double amp_oracle(std::size_t p, std::size_t n, std::size_t m, double eta) {
    using Poly = std::map<std::pair<std::size_t, std::size_t>, double>;
    double root_t = std::sqrt(eta), root_r = std::sqrt(1.0 - eta);
    Poly acc{{{0, 0}, 1.0}};
    auto mul = [](const Poly& f, double ca, double cb) {
        Poly out;
        for (const auto& [key, coef] : f) {
            out[{key.first + 1, key.second}] += coef * ca;
            out[{key.first, key.second + 1}] += coef * cb;
        }
        return out;
    };
    for (std::size_t i = 0; i < n; ++i) acc = mul(acc, root_t, -root_r);
    for (std::size_t i = 0; i < m; ++i) acc = mul(acc, root_r, root_t);

    std::size_t q = n + m - p;
    auto it = acc.find({p, q});
    double coef = it == acc.end() ? 0.0 : it->second;
    auto lfact = [](std::size_t k) { return std::lgamma(double(k) + 1.0); };
    return coef * std::exp(0.5 * (lfact(p) + lfact(q) - lfact(n) - lfact(m)));
}

}  // namespace

TEST_CASE("amplitudes match the brute-force expansion") {
    for (double eta : {0.2, 0.5, 0.8}) {
        for (std::size_t n = 0; n <= 10; ++n) {
            for (std::size_t m = 0; n + m <= 14; ++m) {
                for (std::size_t p = 0; p <= n + m; ++p) {
                    double got = FockKernel::amplitude(p, n, m, eta);
                    double want = amp_oracle(p, n, m, eta);
                    CHECK(got == doctest::Approx(want).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("two-photon interference rows") {
    auto kernel = get_kernel(0.5, 8);
    const auto& hom = kernel->row(1, 1);
    CHECK(hom[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(hom[1] == doctest::Approx(0.0));
    CHECK(hom[2] == doctest::Approx(0.5).epsilon(1e-14));

    for (double eta : {0.3, 0.65}) {
        auto k = get_kernel(eta, 8);
        const auto& row = k->row(1, 1);
        CHECK(row[0] == doctest::Approx(2 * eta * (1 - eta)).epsilon(1e-13));
        CHECK(row[1] == doctest::Approx((2 * eta - 1) * (2 * eta - 1)).epsilon(1e-12));
        CHECK(row[2] == doctest::Approx(2 * eta * (1 - eta)).epsilon(1e-13));
    }
}

TEST_CASE("vacuum rows are binomial") {
    auto kernel = get_kernel(0.5, 8);
    const auto& row = kernel->row(3, 0);
    std::vector<double> expect = {0.125, 0.375, 0.375, 0.125};
    for (std::size_t p = 0; p < 4; ++p)
        CHECK(row[p] == doctest::Approx(expect[p]).epsilon(1e-13));
}

TEST_CASE("kernel invariants: stochastic rows and eta symmetry") {
    for (double eta : {0.25, 0.5, 0.75}) {
        auto k = get_kernel(eta, 30);
        auto k_flip = get_kernel(1.0 - eta, 30);
        for (std::size_t n = 0; n <= 30; ++n) {
            for (std::size_t m = 0; n + m <= 30; ++m) {
                const auto& row = k->row(n, m);
                const auto& flip = k_flip->row(m, n);
                double sum = 0.0;
                for (std::size_t p = 0; p < row.size(); ++p) {
                    sum += row[p];
                    CHECK(std::abs(row[p] - flip[p]) < 1e-12);
                }
                CHECK(std::abs(sum - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("kernel capacity errors") {
    CHECK_THROWS_AS(FockKernel(0.0, 10), ParameterError);
    CHECK_THROWS_AS(FockKernel(0.5, 100000), CapacityError);
    FockKernel small(0.5, 4);
    CHECK_THROWS_AS(small.row(3, 3), CapacityError);
}

TEST_CASE("vacuum reduction is thinning") {
    Pmf d0 = make_delta(0);
    for (std::uint64_t s = 0; s < 25; ++s) {
        Pmf x = sample_random_pmf(splitmix64(700 + s), 15, false);
        for (double eta : {0.1, 0.4, 0.5, 0.9}) {
            CHECK(total_variation(boxplus(x, d0, eta), thin(x, eta)) <= 1e-12);
            CHECK(total_variation(boxplus(d0, x, eta), thin(x, 1.0 - eta)) <= 1e-12);
        }
    }
}

TEST_CASE("boxplus endpoints and mean linearity") {
    Pmf x = make_poisson(1.5);
    Pmf y = make_geometric(0.7);
    CHECK(total_variation(boxplus(x, y, 1.0), x) == 0.0);
    CHECK(total_variation(boxplus(x, y, 0.0), y) == 0.0);
    for (double eta : {0.2, 0.5, 0.8}) {
        Pmf z = boxplus(x, y, eta);
        CHECK(mean(z) ==
              doctest::Approx(eta * mean(x) + (1 - eta) * mean(y)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(boxplus(x, y, 1.5), ParameterError);
}

TEST_CASE("commutativity under eta flip") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        Pmf x = sample_random_pmf(splitmix64(800 + s), 10, false);
        Pmf y = sample_random_pmf(splitmix64(900 + s), 10, false);
        for (double eta : {0.3, 0.5, 0.7})
            CHECK(total_variation(boxplus(x, y, eta), boxplus(y, x, 1.0 - eta)) <=
                  1e-10);
    }
}

TEST_CASE("geometric closure (thermal in, thermal out)") {
    for (double l1 : {0.5, 1.0}) {
        for (double l2 : {0.8, 2.0}) {
            for (double eta : {0.25, 0.5, 0.75}) {
                Pmf z = boxplus(make_geometric(l1), make_geometric(l2), eta);
                Pmf target = make_geometric(eta * l1 + (1 - eta) * l2);
                CHECK(total_variation(z, target) <= 1e-8);
            }
        }
    }
}

TEST_CASE("divergence from the thin-and-convolve addition") {
    Pmf d1 = make_delta(1);
    Pmf bs = boxplus(d1, d1, 0.5);
    Pmf yj = boxplus_yj(d1, d1, 0.5);
    CHECK(yj[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(yj[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(yj[2] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(total_variation(bs, yj) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(total_variation(bs, yj) > 1e-3);
}

TEST_CASE("yu-johnson addition: poisson closure and vacuum case") {
    for (double eta : {0.3, 0.6}) {
        Pmf z = boxplus_yj(make_poisson(1.2), make_poisson(2.0), eta);
        CHECK(total_variation(z, make_poisson(eta * 1.2 + (1 - eta) * 2.0)) <= 1e-9);
    }
    Pmf x = make_poisson(1.0);
    CHECK(total_variation(boxplus_yj(x, make_delta(0), 0.4), thin(x, 0.4)) <= 1e-12);
}

TEST_CASE("multi-input cascade") {
    Pmf a = make_poisson(0.8);
    Pmf b = make_geometric(1.2);
    Pmf c = make_bernoulli(0.6);

    // Two inputs reduce to the bivariate operation.
    Pmf two = boxplus_multi({a, b}, WeightVector({0.3, 0.7}));
    CHECK(total_variation(two, boxplus(a, b, 0.3)) <= 1e-12);

    // Equal thirds: the cascade folds with internal ratios 1/2 then 2/3.
    Pmf thirds = boxplus_multi({a, b, c}, WeightVector({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    Pmf nested = boxplus(boxplus(a, b, 0.5), c, 2.0 / 3.0);
    CHECK(total_variation(thirds, nested) <= 1e-12);

    // Zero weights are skipped.
    Pmf skip = boxplus_multi({a, b}, WeightVector({0.0, 1.0}));
    CHECK(total_variation(skip, b) == 0.0);

    // All point masses at zero stay there.
    Pmf zeros = boxplus_multi({make_delta(0), make_delta(0), make_delta(0)},
                              WeightVector({0.2, 0.3, 0.5}));
    CHECK(zeros[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(boxplus_multi({a}, WeightVector({0.5, 0.5})), ParameterError);
    CHECK_THROWS_AS(WeightVector({0.5, 0.4}), ParameterError);
    CHECK_THROWS_AS(WeightVector({-0.5, 1.5}), ParameterError);
}

TEST_CASE("multi-input permutation invariance") {
    std::vector<Pmf> xs = {make_poisson(0.5), make_bernoulli(0.4),
                           make_geometric(0.9), make_delta(1)};
    std::vector<double> w = {0.1, 0.2, 0.3, 0.4};
    Pmf base = boxplus_multi(xs, WeightVector(w));

    // A couple of fixed permutations of both lists simultaneously.
    std::vector<std::vector<std::size_t>> perms = {
        {3, 1, 0, 2}, {2, 3, 1, 0}, {1, 0, 3, 2}};
    for (const auto& perm : perms) {
        std::vector<Pmf> px;
        std::vector<double> pw;
        for (std::size_t i : perm) {
            px.push_back(xs[i]);
            pw.push_back(w[i]);
        }
        CHECK(total_variation(boxplus_multi(px, WeightVector(pw)), base) <= 1e-9);
    }

    // And a 3-input case.
    Pmf t1 = boxplus_multi({xs[0], xs[1], xs[2]}, WeightVector({0.5, 0.2, 0.3}));
    Pmf t2 = boxplus_multi({xs[2], xs[0], xs[1]}, WeightVector({0.3, 0.5, 0.2}));
    CHECK(total_variation(t1, t2) <= 1e-9);
}
