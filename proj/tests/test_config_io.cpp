#include <doctest.h>

#include <sstream>

#include "dyadrl/config.hpp"
#include "dyadrl/io.hpp"

using namespace dyadrl;

TEST_CASE("config parsing: sections, overrides, comments") {
    std::istringstream in(R"(
# comment line
[population]
n = 40
adherence_b0_mean = 0.9   ; trailing comment
adherence_b0_sd = 0.3
distress_noise_sd = 1.5

[environment]
mediator_gamma = 0.8

[calibration]
targets = 0.15, 0.5
tolerance = 0.02
n_eval = 123

[trial]
n_dyads = 10
n_runs = 77
algorithms = single, multi_surrogate

[variant]
kind = no_mediator
mediator_sd = 0.4

[collaborate]
n_dyads = 222
)");
    const EngineConfig cfg = parse_config(in);
    CHECK(cfg.testbed.population_size == 40);
    CHECK(cfg.testbed.population.adherence_b0.mean == 0.9);
    CHECK(cfg.testbed.population.adherence_b0.sd == 0.3);
    CHECK(cfg.testbed.population.distress_noise_sd == 1.5);
    CHECK(cfg.testbed.env.mediator_gamma == 0.8);
    CHECK(cfg.ste_targets == std::vector<double>{0.15, 0.5});
    CHECK(cfg.testbed.tolerance == 0.02);
    CHECK(cfg.testbed.n_eval == 123);
    CHECK(cfg.trial_n_dyads == 10);
    CHECK(cfg.trial_n_runs == 77);
    REQUIRE(cfg.algorithms.size() == 2);
    CHECK(cfg.algorithms[0] == Algorithm::SingleAgent);
    CHECK(cfg.algorithms[1] == Algorithm::MultiAgentSurrogate);
    CHECK(cfg.variant.kind == VariantKind::NoMediator);
    CHECK(cfg.variant.mediator_sd == 0.4);
    CHECK(cfg.collaborate_n_dyads == 222);
}

TEST_CASE("config parsing fails fast") {
    auto reject = [](const char* text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_config(in), ConfigError);
    };
    reject("[population]\nadherence_b0_typo = 1\n");      // unknown key
    reject("[nonsense]\nx = 1\n");                        // unknown section
    reject("x = 1\n");                                    // key outside section
    reject("[population]\nadherence_b0_mean 0.9\n");      // missing '='
    reject("[population]\nn = 1\n");                      // population too small
    reject("[population]\nadherence_b0_sd = -0.1\n");     // negative spread
    reject("[trial]\nalgorithms = frobnicate\n");         // unknown algorithm
    reject("[variant]\nkind = nope\n");                   // unknown variant
    reject("[trial]\nn_runs = twelve\n");                 // non-numeric
}

TEST_CASE("defaults survive an empty config") {
    std::istringstream in("");
    const EngineConfig cfg = parse_config(in);
    CHECK(cfg.testbed.population_size == 171);
    CHECK(cfg.ste_targets == std::vector<double>{0.15, 0.3, 0.5});
    CHECK(cfg.trial_n_dyads == 25);
    CHECK(cfg.testbed.env.mediator_gamma == 0.9);
    CHECK(cfg.variant.kind == VariantKind::Vanilla);
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(314);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.next_u64() % 8) - 4);
        CHECK(parse_double_exact(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(parse_double_exact("1e-3") == 1e-3);
    CHECK_THROWS_AS(parse_double_exact("12x"), ConfigError);
}

TEST_CASE("population files round-trip byte-identically") {
    PopulationConfig pcfg;
    Population pop;
    pop.dyads = generate_population(91, 7, pcfg);
    pop.dyads = calibrate_population_burdens(pop.dyads, 91);
    pop.dyads = impute_population(pop.dyads, 0.37, 91);
    pop.c_treat = 0.37;
    pop.ste_target = 0.3;
    pop.achieved_ste = 0.3123456789;
    pop.seed = 91;
    pop.env.mediator_gamma = 0.85;

    const std::string text = population_to_text(pop);
    std::istringstream in(text);
    const Population back = population_from_text(in);
    CHECK(back.c_treat == pop.c_treat);
    CHECK(back.ste_target == pop.ste_target);
    CHECK(back.achieved_ste == pop.achieved_ste);
    CHECK(back.seed == pop.seed);
    CHECK(back.env.mediator_gamma == pop.env.mediator_gamma);
    REQUIRE(back.dyads.size() == pop.dyads.size());
    CHECK(population_to_text(back) == text);  // exact round trip

    // Spot-check a few coefficients bit for bit.
    CHECK(back.dyads[3].adherence_am.b0 == pop.dyads[3].adherence_am.b0);
    CHECK(back.dyads[3].adherence_pm.t2 == pop.dyads[3].adherence_pm.t2);
    CHECK(back.dyads[5].burden_scaling.sd_care == pop.dyads[5].burden_scaling.sd_care);
    CHECK(back.dyads[6].relationship.t1 == pop.dyads[6].relationship.t1);
}

TEST_CASE("population files reject schema drift") {
    std::istringstream no_version("a,b\n1,2\n");
    CHECK_THROWS_AS(population_from_text(no_version), ConfigError);
    std::istringstream bad_header("# dyadrl-population v1\na,b\n1,2\n");
    CHECK_THROWS_AS(population_from_text(bad_header), ConfigError);
    std::istringstream empty("# dyadrl-population v1\n");
    CHECK_THROWS_AS(population_from_text(empty), ConfigError);
}

TEST_CASE("curve CSV uses the pinned header") {
    ImprovementCurve c;
    c.mean = {1.5, 2.5};
    c.sd = {0.25, 0.75};
    c.n_runs = 9;
    CHECK(curve_to_csv(c) ==
          "dyad_index,mean_improvement,sd,n_runs\n1,1.5,0.25,9\n2,2.5,0.75,9\n");
}

TEST_CASE("manifests are deterministic text") {
    Manifest m;
    m.command = "run";
    m.config_hash = to_hex(fnv1a("hello"));
    m.master_seed = 42;
    m.entries["zeta"] = "1";
    m.entries["alpha"] = "2";
    const std::string text = manifest_to_text(m);
    CHECK(text.find("artifact = dyadrl\n") == 0);
    CHECK(text.find("config_hash = ") != std::string::npos);
    // map ordering: alpha before zeta
    CHECK(text.find("alpha = 2") < text.find("zeta = 1"));
    CHECK(fnv1a("hello") != fnv1a("hellp"));
}
