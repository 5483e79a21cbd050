#include <doctest.h>

#include <cmath>

#include "dyadrl/population.hpp"

using namespace dyadrl;

namespace {

bool identical(const DyadParams& a, const DyadParams& b) {
    auto eq = [](const OutcomeCoeffs& x, const OutcomeCoeffs& y) {
        return x.b0 == y.b0 && x.b1 == y.b1 && x.b2 == y.b2 && x.b3 == y.b3 && x.b4 == y.b4 &&
               x.t0 == y.t0 && x.t1 == y.t1 && x.t2 == y.t2;
    };
    return eq(a.adherence_am, b.adherence_am) && eq(a.adherence_pm, b.adherence_pm) &&
           eq(a.distress, b.distress) && a.relationship.b0 == b.relationship.b0 &&
           a.relationship.t0 == b.relationship.t0 && a.burden_aya.th1 == b.burden_aya.th1 &&
           a.burden_care.th0 == b.burden_care.th0;
}

}  // namespace

TEST_CASE("generate_population is deterministic in the seed") {
    PopulationConfig cfg;
    const auto a = generate_population(7, 3, cfg);
    const auto b = generate_population(7, 3, cfg);
    REQUIRE(a.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(identical(a[i], b[i]));
    const auto c = generate_population(8, 3, cfg);
    CHECK(!identical(a[0], c[0]));
}

TEST_CASE("truncation pins a negative-mean zero-spread mediator coefficient at zero") {
    PopulationConfig cfg;
    cfg.adherence_b2 = {-0.4, 0.0};
    for (const auto& d : generate_population(3, 10, cfg)) {
        CHECK(d.adherence_am.b2 == 0.0);
        CHECK(d.adherence_pm.b2 == 0.0);
    }
}

TEST_CASE("truncation rules hold for every generated dyad") {
    PopulationConfig cfg;
    cfg.adherence_b3 = {-0.1, 0.3};  // wide spread to exercise both sides
    cfg.relationship_b3 = {0.1, 0.3};
    for (const auto& d : generate_population(11, 200, cfg)) {
        CHECK(d.adherence_am.b2 >= 0.0);
        CHECK(d.adherence_pm.b2 >= 0.0);
        CHECK(d.adherence_am.b3 <= 0.0);
        CHECK(d.adherence_pm.b3 <= 0.0);
        CHECK(d.relationship.b3 <= 0.0);
        CHECK(d.burden_aya.th1 >= 0.0);
        CHECK(d.burden_aya.th1 < 1.0);
        CHECK(d.burden_care.th1 >= 0.0);
        CHECK(d.burden_care.th1 < 1.0);
        CHECK(d.adherence_am.b4 == 0.0);
        CHECK(d.adherence_pm.b4 == 0.0);
        CHECK(d.distress.b4 == 0.0);
    }
}

TEST_CASE("law of large numbers: empirical coefficient means match the config") {
    PopulationConfig cfg;
    const int n = 1000;
    const auto pop = generate_population(123, n, cfg);
    auto check_mean = [&](double want_mean, double sd, auto getter) {
        double mean = 0.0;
        for (const auto& d : pop) mean += getter(d);
        mean /= n;
        CHECK(std::abs(mean - want_mean) <= 3.0 * sd / std::sqrt(static_cast<double>(n)) + 1e-12);
    };
    check_mean(cfg.adherence_b0.mean, cfg.adherence_b0.sd,
               [](const DyadParams& d) { return d.adherence_am.b0; });
    check_mean(cfg.adherence_b1.mean, cfg.adherence_b1.sd,
               [](const DyadParams& d) { return d.adherence_pm.b1; });
    check_mean(cfg.distress_b1.mean, cfg.distress_b1.sd,
               [](const DyadParams& d) { return d.distress.b1; });
    check_mean(cfg.relationship_b1.mean, cfg.relationship_b1.sd,
               [](const DyadParams& d) { return d.relationship.b1; });
}

TEST_CASE("invalid configs are rejected") {
    PopulationConfig bad;
    bad.adherence_b0.sd = -1.0;
    CHECK_THROWS_AS(generate_population(1, 2, bad), ConfigError);

    PopulationConfig bad_theta;
    bad_theta.burden_aya_th1.mean = 1.2;
    CHECK_THROWS_AS(generate_population(1, 2, bad_theta), ConfigError);

    PopulationConfig bad_noise;
    bad_noise.distress_noise_sd = 0.0;
    CHECK_THROWS_AS(generate_population(1, 2, bad_noise), ConfigError);

    CHECK_THROWS_AS(generate_population(1, 0, PopulationConfig{}), ConfigError);
}

TEST_CASE("impute_treatment_effects: c_treat = 0 gives all-zero effects") {
    PopulationConfig cfg;
    auto pop = generate_population(5, 4, cfg);
    pop = impute_population(pop, 0.0, 17);
    for (const auto& d : pop) {
        CHECK(d.adherence_am.t0 == 0.0);
        CHECK(d.adherence_am.t1 == 0.0);
        CHECK(d.adherence_am.t2 == 0.0);
        CHECK(d.adherence_pm.t0 == 0.0);
        CHECK(d.distress.t0 == 0.0);
        CHECK(d.distress.t2 == 0.0);
        CHECK(d.relationship.t0 == 0.0);
        CHECK(d.relationship.t1 == 0.0);
    }
}

TEST_CASE("impute_treatment_effects: direct evaluation of the scaling rules") {
    DyadParams d;
    d.adherence_am.b1 = -0.5;
    d.adherence_pm.b1 = 0.2;
    d.distress.b1 = 0.4;
    d.relationship.b1 = 0.8;
    Rng rng(1);
    const DyadParams out = impute_treatment_effects(d, 0.3, B1Spreads{}, rng);
    CHECK(out.adherence_am.t0 == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(out.adherence_am.t1 == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(out.adherence_am.t2 == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK(out.adherence_pm.t0 == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(out.distress.t0 == doctest::Approx(-0.12).epsilon(1e-12));
    CHECK(out.distress.t1 == doctest::Approx(-0.12).epsilon(1e-12));
    CHECK(out.distress.t2 == doctest::Approx(0.12).epsilon(1e-12));

    Rng rng2(1);
    const DyadParams rel = impute_treatment_effects(d, 0.5, B1Spreads{}, rng2);
    CHECK(rel.relationship.t0 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rel.relationship.t1 == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("impute heterogeneity is skipped (with a warning) when b1 = 0") {
    DyadParams d;
    d.adherence_am.b1 = 0.0;
    d.adherence_pm.b1 = 0.3;
    d.distress.b1 = 0.3;
    d.relationship.b1 = 0.3;
    Rng rng(2);
    std::vector<std::string> warnings;
    B1Spreads spreads{0.1, 0.1, 0.1, 0.1};
    const DyadParams out = impute_treatment_effects(d, 0.4, spreads, rng, &warnings);
    CHECK(out.adherence_am.t0 == 0.0);  // scale is c * |b1| = 0, no heterogeneity
    CHECK(warnings.size() == 1);
}

TEST_CASE("imputed heterogeneity scales with the population spread of b1") {
    DyadParams d;
    d.adherence_am.b1 = 0.5;
    d.adherence_pm.b1 = 0.5;
    d.distress.b1 = 0.5;
    d.relationship.b1 = 0.5;
    const double c = 0.4;
    const B1Spreads spreads{0.2, 0.2, 0.2, 0.2};
    // sd of each tau draw should be |tau| * spread / |b1| = c * spread.
    const int n = 4000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng(seeds::derive(400, static_cast<std::uint64_t>(i)));
        const DyadParams out = impute_treatment_effects(d, c, spreads, rng);
        const double dev = out.adherence_am.t0 - c * 0.5;
        sum += dev;
        sum_sq += dev * dev;
    }
    const double want_sd = c * 0.2;
    const double var = sum_sq / n - (sum / n) * (sum / n);
    CHECK(std::abs(std::sqrt(var) - want_sd) < 0.1 * want_sd);
}

TEST_CASE("make_variant: vanilla is the identity") {
    PopulationConfig cfg;
    auto pop = generate_population(21, 5, cfg);
    const auto same = make_variant(pop, {VariantKind::Vanilla, 0.3, 0.3}, 21);
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(identical(pop[i], same[i]));
}

TEST_CASE("make_variant: no_mediator zeroes both mediator coefficients") {
    PopulationConfig cfg;
    auto pop = generate_population(22, 20, cfg);
    const auto cut = make_variant(pop, {VariantKind::NoMediator, 0.3, 0.3}, 22);
    for (const auto& d : cut) {
        CHECK(d.adherence_am.b2 == 0.0);
        CHECK(d.adherence_pm.b2 == 0.0);
        CHECK(d.adherence_am.b3 == 0.0);
        CHECK(d.adherence_pm.b3 == 0.0);
        CHECK(d.relationship.b3 == 0.0);
    }
}

TEST_CASE("make_variant: random_mediator with sd = 0 equals no_mediator") {
    PopulationConfig cfg;
    auto pop = generate_population(23, 10, cfg);
    const auto zero_sd = make_variant(pop, {VariantKind::RandomMediator, 0.3, 0.0}, 23);
    const auto no_med = make_variant(pop, {VariantKind::NoMediator, 0.3, 0.0}, 23);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        CHECK(zero_sd[i].adherence_am.b2 == no_med[i].adherence_am.b2);
        CHECK(zero_sd[i].adherence_pm.b2 == no_med[i].adherence_pm.b2);
        CHECK(zero_sd[i].relationship.b3 == no_med[i].relationship.b3);
    }
}

TEST_CASE("make_variant: direct_distress injects a negative distress coefficient") {
    PopulationConfig cfg;
    auto pop = generate_population(24, 10, cfg);
    const auto hit = make_variant(pop, {VariantKind::DirectDistressEffect, 0.3, 0.3}, 24);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        CHECK(hit[i].adherence_am.b3 ==
              doctest::Approx(pop[i].adherence_am.b3 - 0.3 * std::abs(pop[i].adherence_am.b1)));
        CHECK(hit[i].adherence_pm.b3 ==
              doctest::Approx(pop[i].adherence_pm.b3 - 0.3 * std::abs(pop[i].adherence_pm.b1)));
    }
}
