#include <doctest.h>

#include <cmath>

#include "depi/beamsplitter.hpp"
#include "depi/entropy_power.hpp"
#include "depi/harness.hpp"
#include "depi/pmf.hpp"
#include "depi/thinning.hpp"

using namespace depi;

TEST_CASE("linear epi checks") {
    // Geometric inputs saturate the bound.
    for (double eta : {0.3, 0.5, 0.7}) {
        auto r = check_linear_epi(make_geometric(1.5), make_geometric(1.5), eta);
        CHECK(std::abs(r.slack) <= 1e-8);
    }
    auto d = check_linear_epi(make_delta(0), make_delta(0), 0.5);
    CHECK(d.slack == 0.0);

    for (std::uint64_t s = 0; s < 50; ++s) {
        Pmf x = sample_random_pmf(splitmix64(2000 + s), 12, false);
        Pmf y = sample_random_pmf(splitmix64(3000 + s), 12, false);
        auto r = check_linear_epi(x, y, 0.4);
        CHECK(r.slack >= -(1e-9 + r.deficit_bound));
    }
}

TEST_CASE("vg epi checks") {
    for (double eta : {0.25, 0.5, 0.75}) {
        auto r = check_vg_epi(make_geometric(0.8), make_geometric(2.0), eta);
        CHECK(std::abs(r.slack) <= 1e-7);
    }
    // Vacuum second input reduces to the one-sided thinning statement.
    Pmf y = make_poisson(1.1);
    auto r = check_vg_epi(make_delta(0), y, 0.6);
    CHECK(r.slack >= -1e-9);
    CHECK(r.lhs == doctest::Approx(vg(thin(y, 0.4))).epsilon(1e-10));

    // Full pipeline on the exact two-photon output [1/2, 0, 1/2].
    auto hom = check_vg_epi(make_delta(1), make_delta(1), 0.5);
    Pmf interfered({0.5, 0.0, 0.5});
    CHECK(hom.lhs == doctest::Approx(vg(interfered)).epsilon(1e-12));
    CHECK(hom.rhs == 0.0);  // point masses carry zero entropy power
}

TEST_CASE("ve epi checks") {
    auto d = check_ve_epi(make_delta(0), make_delta(0), 0.5);
    CHECK(d.slack == 0.0);
    // No equality claim for geometric pairs here; just the guarantee.
    for (std::uint64_t s = 0; s < 50; ++s) {
        Pmf x = sample_random_pmf(splitmix64(4000 + s), 12, false);
        Pmf y = sample_random_pmf(splitmix64(5000 + s), 12, false);
        auto r = check_ve_epi(x, y, 0.7);
        CHECK(r.slack >= -(1e-9 + r.deficit_bound));
    }
}

TEST_CASE("thinning epi checks") {
    for (double eta : {0.2, 0.5, 0.8}) {
        auto g = check_thinning_epi(make_geometric(1.4), eta, ThinningEpiKind::vg);
        CHECK(std::abs(g.slack) <= 1e-8);
        auto p = check_thinning_epi(make_poisson(1.4), eta, ThinningEpiKind::vp);
        CHECK(std::abs(p.slack) <= 1e-8);
        CHECK(p.is_ulc_x);
    }
    auto d = check_thinning_epi(make_delta(4), 0.3, ThinningEpiKind::vg);
    CHECK(d.rhs == 0.0);
    CHECK(d.slack >= 0.0);
}

TEST_CASE("yu-johnson checks") {
    auto p = check_yj_vp_scaled(make_poisson(0.9), make_poisson(2.1), 0.35);
    CHECK(std::abs(p.slack) <= 1e-7);
    auto d = check_yj_vp_scaled(make_delta(0), make_delta(0), 0.5);
    CHECK(d.slack == 0.0);

    auto lin = check_yj_linear_ulc(make_binomial(5, 0.3), make_poisson(1.0), 0.5);
    CHECK(lin.is_ulc_x);
    CHECK(lin.is_ulc_y);
    CHECK(lin.slack >= -1e-9);
}

TEST_CASE("deficit bound") {
    CHECK(entropy_deficit_bound(0.0, 10) == 0.0);
    double d = 1e-10;
    CHECK(entropy_deficit_bound(d, 99) ==
          doctest::Approx(-d * std::log(d) + d * std::log(100.0)));
}

TEST_CASE("clt rows") {
    // Geometric fixed point.
    auto rows = run_clt(make_geometric(1.0), {1, 2, 4});
    for (const auto& r : rows) CHECK(r.entropy == doctest::Approx(eg(1.0)).epsilon(1e-7));

    // Degenerate base stays put.
    auto zero = run_clt(make_delta(0), {1, 3, 5});
    for (const auto& r : zero) {
        CHECK(r.entropy == 0.0);
        CHECK(r.tv_to_geometric == 0.0);
    }

    // Bernoulli base: TV decreasing, entropy nondecreasing on powers of two.
    auto bern = run_clt(make_bernoulli(0.7), {1, 2, 4, 8, 16});
    for (std::size_t i = 1; i < bern.size(); ++i) {
        CHECK(bern[i].tv_to_geometric < bern[i - 1].tv_to_geometric);
        CHECK(bern[i].entropy >= bern[i - 1].entropy - 1e-10);
    }
    CHECK_THROWS_AS(run_clt(make_delta(1), {0}), ParameterError);
}

TEST_CASE("small numbers demo") {
    auto rows = run_small_numbers_demo(0.4, {1, 2, 4, 8, 16});
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].tv_to_poisson < rows[i - 1].tv_to_poisson);

    auto zero = run_small_numbers_demo(0.0, {1, 2});
    for (const auto& r : zero) CHECK(r.tv_to_poisson == 0.0);
}

TEST_CASE("ulc projection") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        Pmf raw = sample_random_pmf(splitmix64(6000 + s), 12, false);
        CHECK(is_ulc(ulc_project(raw)));
        Pmf forced = sample_random_pmf(splitmix64(6000 + s), 12, true);
        CHECK(is_ulc(forced));
    }
    // Already-ULC inputs pass through unchanged.
    Pmf pois = make_poisson(1.2);
    CHECK(total_variation(ulc_project(pois), pois) <= 1e-12);
}

TEST_CASE("search determinism and report shape") {
    ExperimentConfig cfg;
    cfg.kind = InequalityKind::vg_epi;
    cfg.trials = 40;
    cfg.seed = 99;
    cfg.support_max = 8;

    SearchReport a = search_counterexamples(cfg);
    SearchReport b = search_counterexamples(cfg);
    CHECK(a.to_jsonl() == b.to_jsonl());
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.min_slack == b.min_slack);
    CHECK(a.exit_code == 0);
    CHECK(a.records.size() <= cfg.report_top);
    // Ranked ascending by slack.
    for (std::size_t i = 1; i < a.records.size(); ++i)
        CHECK(a.records[i - 1].slack <= a.records[i].slack);

    // A different seed changes the sampled inputs.
    cfg.seed = 100;
    CHECK(search_counterexamples(cfg).to_jsonl() != a.to_jsonl());
}

TEST_CASE("search on the falsified scaled conjecture finds negative slack") {
    ExperimentConfig cfg;
    cfg.kind = InequalityKind::yj_vp_scaled;
    cfg.trials = 400;
    cfg.seed = 7;
    cfg.support_max = 10;
    cfg.mode = SearchMode::perturbation_descent;
    SearchReport rep = search_counterexamples(cfg);
    CHECK(rep.min_slack < 0.0);
}

TEST_CASE("fixed-pair evaluation") {
    ExperimentConfig cfg;
    cfg.kind = InequalityKind::linear_epi;
    cfg.fixed_x = make_geometric(1.0);
    cfg.fixed_y = make_geometric(1.0);
    SearchReport rep = search_counterexamples(cfg);
    CHECK(rep.exit_code == 0);
    CHECK(std::abs(rep.min_slack) <= 1e-8);
}

TEST_CASE("config parsing") {
    auto cfg = ExperimentConfig::from_json(
        R"({"version":1,"kind":"ve_epi","trials":10,"seed":3,"support_max":6,
            "eta_grid":[0.5],"search_mode":"perturbation-descent"})");
    CHECK(cfg.kind == InequalityKind::ve_epi);
    CHECK(cfg.trials == 10);
    CHECK(cfg.eta_grid == std::vector<double>{0.5});
    CHECK(cfg.mode == SearchMode::perturbation_descent);

    CHECK_THROWS_AS(ExperimentConfig::from_json("{\"version\":2}"), ParameterError);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{}"), ParameterError);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json(R"({"version":1,"kind":"nope"})"),
        ParameterError);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json(R"({"version":1,"eta_grid":[1.5]})"),
        ParameterError);
    CHECK_THROWS_AS(ExperimentConfig::from_json("]["), ParameterError);
}

TEST_CASE("record serialization") {
    auto r = check_linear_epi(make_bernoulli(0.5), make_delta(0), 0.5);
    std::string json = r.to_json();
    CHECK(json.find("\"kind\":\"linear_epi\"") != std::string::npos);
    CHECK(json.find("\"slack\":") != std::string::npos);
    std::string csv = r.to_csv_row();
    CHECK(csv.rfind("linear_epi,0.5", 0) == 0);
}
