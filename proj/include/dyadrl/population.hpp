#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dyadrl/errors.hpp"
#include "dyadrl/rng.hpp"

namespace dyadrl {

/// Coefficients of one sigmoid/linear outcome model:
/// baseline b0..b4 plus treatment main effect t0 and interactions t1, t2.
struct OutcomeCoeffs {
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0;
    double t0 = 0, t1 = 0, t2 = 0;
};

/// Weekly relationship model: b0..b3 baseline, t0 main treatment effect,
/// t1 burden-moderation interaction.
struct RelationshipCoeffs {
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0;
    double t0 = 0, t1 = 0;
};

/// Mean-reverting notification-burden process:
/// raw' = th0 + th1 raw + th2 a_own + th3 a_rel + N(0, noise_sd^2), floored at 0.
struct BurdenCoeffs {
    double th0 = 0.2;
    double th1 = 13.0 / 14.0;
    double th2 = 1.0;
    double th3 = 0.2;
    double noise_sd = 2.4;
};

/// Standardization statistics produced by burden calibration.
struct BurdenScaling {
    double mean_aya = 0.0;
    double sd_aya = 1.0;
    double mean_care = 0.0;
    double sd_care = 1.0;
};

/// Everything that defines one dyad's generative environment.
struct DyadParams {
    OutcomeCoeffs adherence_am;   // b4 = 0 by construction
    OutcomeCoeffs adherence_pm;   // b4 = 0 by construction
    OutcomeCoeffs distress;       // b4 = 0 by construction
    double distress_noise_sd = 1.0;
    RelationshipCoeffs relationship;
    BurdenCoeffs burden_aya;
    BurdenCoeffs burden_care;
    BurdenScaling burden_scaling;
    double mediator_multiplier = 1.0;
};

struct CoeffSpec {
    double mean = 0.0;
    double sd = 0.0;
};

/// Population-level distribution of every baseline coefficient. Each dyad is
/// drawn as mean + Gaussian deviation and then passed through the sign
/// truncations below. The defaults target a ~70% no-intervention adherence
/// rate, autocorrelations around 0.3, and mediator paths of moderate
/// strength; all of them are plain config values.
struct PopulationConfig {
    // Twice-daily adherence model (same spec for the AM and PM windows;
    // the two windows get independent draws per dyad). The intercept spread
    // carries most of the across-dyad heterogeneity that the STE
    // standardization divides by.
    // Intercepts are centered so the no-intervention process sits near a 70%
    // adherence rate, a 50% weekly relationship-quality rate, and mean-zero
    // distress once the autoregressive feedback settles.
    CoeffSpec adherence_b0{0.45, 1.4};
    CoeffSpec adherence_b1{0.3, 0.1};      // previous-slot adherence
    CoeffSpec adherence_b2{0.3, 0.3};      // relationship quality, floored at 0
    CoeffSpec adherence_b3{-0.08, 0.04};   // carepartner distress, capped at 0
    // Daily carepartner distress model. Distress is strongly persistent,
    // which is also what gives the daily intervention a worthwhile handle.
    CoeffSpec distress_b0{0.29, 0.3};
    CoeffSpec distress_b1{0.6, 0.1};
    CoeffSpec distress_b2{-0.2, 0.1};  // recent adherence
    CoeffSpec distress_b3{-0.3, 0.1};  // relationship quality
    double distress_noise_sd = 1.0;
    // Weekly relationship model; quality is sticky week over week, which is
    // what makes the weekly game worth timing well.
    CoeffSpec relationship_b0{-1.23, 0.4};
    CoeffSpec relationship_b1{0.3, 0.1};
    CoeffSpec relationship_b2{0.2, 0.15};   // weekly adherence average
    CoeffSpec relationship_b3{-0.55, 0.15};   // weekly distress average, capped at 0
    // Burden processes (constants of the environment by default).
    CoeffSpec burden_aya_th0{0.2, 0.0};
    CoeffSpec burden_aya_th1{13.0 / 14.0, 0.0};
    CoeffSpec burden_aya_th2{1.0, 0.0};
    CoeffSpec burden_aya_th3{0.2, 0.0};
    double burden_aya_noise_sd = 2.4;
    CoeffSpec burden_care_th0{0.2, 0.0};
    CoeffSpec burden_care_th1{6.0 / 7.0, 0.0};
    CoeffSpec burden_care_th2{1.0, 0.0};
    CoeffSpec burden_care_th3{0.2, 0.0};
    double burden_care_noise_sd = 2.4;

    double mediator_multiplier = 1.0;

    void validate() const;
};

inline void validate_spec(const CoeffSpec& s, const char* name) {
    if (!(s.sd >= 0.0) || !std::isfinite(s.sd) || !std::isfinite(s.mean))
        throw ConfigError(std::string("population config: invalid spread for ") + name);
}

inline void PopulationConfig::validate() const {
    validate_spec(adherence_b0, "adherence_b0");
    validate_spec(adherence_b1, "adherence_b1");
    validate_spec(adherence_b2, "adherence_b2");
    validate_spec(adherence_b3, "adherence_b3");
    validate_spec(distress_b0, "distress_b0");
    validate_spec(distress_b1, "distress_b1");
    validate_spec(distress_b2, "distress_b2");
    validate_spec(distress_b3, "distress_b3");
    validate_spec(relationship_b0, "relationship_b0");
    validate_spec(relationship_b1, "relationship_b1");
    validate_spec(relationship_b2, "relationship_b2");
    validate_spec(relationship_b3, "relationship_b3");
    validate_spec(burden_aya_th0, "burden_aya_th0");
    validate_spec(burden_aya_th1, "burden_aya_th1");
    validate_spec(burden_aya_th2, "burden_aya_th2");
    validate_spec(burden_aya_th3, "burden_aya_th3");
    validate_spec(burden_care_th0, "burden_care_th0");
    validate_spec(burden_care_th1, "burden_care_th1");
    validate_spec(burden_care_th2, "burden_care_th2");
    validate_spec(burden_care_th3, "burden_care_th3");
    if (!(distress_noise_sd > 0.0)) throw ConfigError("population config: distress_noise_sd must be > 0");
    if (!(burden_aya_noise_sd > 0.0) || !(burden_care_noise_sd > 0.0))
        throw ConfigError("population config: burden noise sd must be > 0");
    if (!(burden_aya_th1.mean >= 0.0 && burden_aya_th1.mean < 1.0) ||
        !(burden_care_th1.mean >= 0.0 && burden_care_th1.mean < 1.0))
        throw ConfigError("population config: burden th1 mean must lie in [0,1)");
    if (!(mediator_multiplier >= 0.0)) throw ConfigError("population config: mediator_multiplier must be >= 0");
}

namespace detail {

inline double draw(const CoeffSpec& s, Rng& rng) { return s.mean + s.sd * rng.gaussian(); }

inline double clamp_unit_interval(double x) {
    return std::min(std::max(x, 0.0), 1.0 - 1e-9);
}

}  // namespace detail

/// Draw one dyad's baseline coefficients. Treatment fields stay zero until
/// impute_treatment_effects fills them. Sign truncations: relationship
/// quality helps adherence (b2 >= 0), distress hurts adherence (b3 <= 0)
/// and hurts relationship quality (b3 <= 0); burden memory th1 in [0,1).
inline DyadParams draw_dyad(const PopulationConfig& cfg, Rng& rng) {
    DyadParams d;
    for (OutcomeCoeffs* adh : {&d.adherence_am, &d.adherence_pm}) {
        adh->b0 = detail::draw(cfg.adherence_b0, rng);
        adh->b1 = detail::draw(cfg.adherence_b1, rng);
        adh->b2 = std::max(0.0, detail::draw(cfg.adherence_b2, rng));
        adh->b3 = std::min(0.0, detail::draw(cfg.adherence_b3, rng));
        adh->b4 = 0.0;
    }
    d.distress.b0 = detail::draw(cfg.distress_b0, rng);
    // |b1| < 1 keeps the distress recursion stable over arbitrarily long
    // trajectories.
    d.distress.b1 = std::clamp(detail::draw(cfg.distress_b1, rng), -0.95, 0.95);
    d.distress.b2 = detail::draw(cfg.distress_b2, rng);
    d.distress.b3 = detail::draw(cfg.distress_b3, rng);
    d.distress.b4 = 0.0;
    d.distress_noise_sd = cfg.distress_noise_sd;
    d.relationship.b0 = detail::draw(cfg.relationship_b0, rng);
    d.relationship.b1 = detail::draw(cfg.relationship_b1, rng);
    d.relationship.b2 = detail::draw(cfg.relationship_b2, rng);
    d.relationship.b3 = std::min(0.0, detail::draw(cfg.relationship_b3, rng));
    d.burden_aya.th0 = detail::draw(cfg.burden_aya_th0, rng);
    d.burden_aya.th1 = detail::clamp_unit_interval(detail::draw(cfg.burden_aya_th1, rng));
    d.burden_aya.th2 = detail::draw(cfg.burden_aya_th2, rng);
    d.burden_aya.th3 = detail::draw(cfg.burden_aya_th3, rng);
    d.burden_aya.noise_sd = cfg.burden_aya_noise_sd;
    d.burden_care.th0 = detail::draw(cfg.burden_care_th0, rng);
    d.burden_care.th1 = detail::clamp_unit_interval(detail::draw(cfg.burden_care_th1, rng));
    d.burden_care.th2 = detail::draw(cfg.burden_care_th2, rng);
    d.burden_care.th3 = detail::draw(cfg.burden_care_th3, rng);
    d.burden_care.noise_sd = cfg.burden_care_noise_sd;
    d.mediator_multiplier = cfg.mediator_multiplier;
    return d;
}

/// Deterministic in `seed`: the same (seed, n, config) always yields the
/// same population.
inline std::vector<DyadParams> generate_population(std::uint64_t seed, int n,
                                                   const PopulationConfig& cfg) {
    if (n < 1) throw ConfigError("generate_population: n must be >= 1");
    cfg.validate();
    std::vector<DyadParams> pop;
    pop.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(seeds::derive(seeds::derive(seed, seeds::kPopulation), static_cast<std::uint64_t>(i)));
        pop.push_back(draw_dyad(cfg, rng));
    }
    return pop;
}

/// Population spreads of the autocorrelation coefficients, used to scale
/// per-dyad treatment-effect heterogeneity.
struct B1Spreads {
    double am = 0.0;
    double pm = 0.0;
    double care = 0.0;
    double rel = 0.0;
};

inline B1Spreads empirical_b1_spreads(const std::vector<DyadParams>& pop) {
    auto sd = [&](auto getter) {
        double mean = 0.0;
        for (const auto& d : pop) mean += getter(d);
        mean /= static_cast<double>(pop.size());
        double ss = 0.0;
        for (const auto& d : pop) {
            const double c = getter(d) - mean;
            ss += c * c;
        }
        return pop.size() > 1 ? std::sqrt(ss / static_cast<double>(pop.size() - 1)) : 0.0;
    };
    B1Spreads s;
    s.am = sd([](const DyadParams& d) { return d.adherence_am.b1; });
    s.pm = sd([](const DyadParams& d) { return d.adherence_pm.b1; });
    s.care = sd([](const DyadParams& d) { return d.distress.b1; });
    s.rel = sd([](const DyadParams& d) { return d.relationship.b1; });
    return s;
}

/// Fill the treatment-effect fields of one dyad at global scale `c_treat`.
///
/// Adherence, per window: t0 = C |b1|, t1 = C |b1| (good relationship
/// amplifies), t2 = -C |b1| (burden attenuates). Carepartner distress:
/// t0 = -C |b1| (intervention reduces distress), t1 = -C |b1|,
/// t2 = +C |b1| (burden attenuates the reduction). Relationship:
/// t0 = C |b1|, t1 = -C |b1| (burden attenuates the game effect).
///
/// Each effect then receives an additive Gaussian heterogeneity draw of
/// standard deviation |t| * spread(b1) / |b1|. When b1 = 0 that scale is
/// undefined, so heterogeneity is skipped for the window and a warning is
/// recorded. Draw counts are fixed, so streams stay aligned across dyads.
inline DyadParams impute_treatment_effects(const DyadParams& params, double c_treat,
                                           const B1Spreads& spreads, Rng& rng,
                                           std::vector<std::string>* warnings = nullptr) {
    if (!(c_treat >= 0.0)) throw ConfigError("impute_treatment_effects: c_treat must be >= 0");
    DyadParams out = params;

    auto warn = [&](const char* what) {
        if (warnings) warnings->emplace_back(what);
    };
    auto hetero = [&](double tau, double b1, double spread) {
        const double z = rng.gaussian();
        if (b1 == 0.0) return 0.0;
        return std::abs(tau) * spread / std::abs(b1) * z;
    };

    auto impute_window = [&](OutcomeCoeffs& adh, double spread, const char* name) {
        const double scale = c_treat * std::abs(adh.b1);
        adh.t0 = scale;
        adh.t1 = scale;
        adh.t2 = -scale;
        if (adh.b1 == 0.0) warn(name);
        adh.t0 += hetero(adh.t0, adh.b1, spread);
        adh.t1 += hetero(adh.t1, adh.b1, spread);
        adh.t2 += hetero(adh.t2, adh.b1, spread);
    };
    impute_window(out.adherence_am, spreads.am,
                  "impute: adherence AM b1 = 0, heterogeneity skipped");
    impute_window(out.adherence_pm, spreads.pm,
                  "impute: adherence PM b1 = 0, heterogeneity skipped");

    const double care_scale = c_treat * std::abs(out.distress.b1);
    out.distress.t0 = -care_scale;
    out.distress.t1 = -care_scale;
    out.distress.t2 = care_scale;
    if (out.distress.b1 == 0.0) warn("impute: distress b1 = 0, heterogeneity skipped");
    out.distress.t0 += hetero(out.distress.t0, out.distress.b1, spreads.care);
    out.distress.t1 += hetero(out.distress.t1, out.distress.b1, spreads.care);
    out.distress.t2 += hetero(out.distress.t2, out.distress.b1, spreads.care);

    const double rel_scale = c_treat * std::abs(out.relationship.b1);
    out.relationship.t0 = rel_scale;
    out.relationship.t1 = -rel_scale;
    if (out.relationship.b1 == 0.0) warn("impute: relationship b1 = 0, heterogeneity skipped");
    out.relationship.t0 += hetero(out.relationship.t0, out.relationship.b1, spreads.rel);
    out.relationship.t1 += hetero(out.relationship.t1, out.relationship.b1, spreads.rel);

    return out;
}

/// Impute the whole population, deriving the heterogeneity scales from the
/// empirical spread of the b1 coefficients across dyads.
inline std::vector<DyadParams> impute_population(const std::vector<DyadParams>& pop,
                                                 double c_treat, std::uint64_t seed,
                                                 std::vector<std::string>* warnings = nullptr) {
    const B1Spreads spreads = empirical_b1_spreads(pop);
    std::vector<DyadParams> out;
    out.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Rng rng(seeds::derive(seeds::derive(seed, seeds::kImputation), i));
        out.push_back(impute_treatment_effects(pop[i], c_treat, spreads, rng, warnings));
    }
    return out;
}

enum class VariantKind { Vanilla, NoMediator, DirectDistressEffect, RandomMediator };

/// A controlled modification of the environment used for ablations.
struct TestbedVariant {
    VariantKind kind = VariantKind::Vanilla;
    double c_treat = 0.0;       // scale for DirectDistressEffect injection
    double mediator_sd = 0.3;   // spread for RandomMediator draws

    static const char* name(VariantKind k) {
        switch (k) {
            case VariantKind::Vanilla: return "vanilla";
            case VariantKind::NoMediator: return "no_mediator";
            case VariantKind::DirectDistressEffect: return "direct_distress";
            case VariantKind::RandomMediator: return "random_mediator";
        }
        return "?";
    }
};

/// Coefficient surgery for testbed variants.
///  - NoMediator cuts every mediator path into adherence: relationship ->
///    adherence (adherence b2), distress -> adherence (adherence b3), and
///    distress -> relationship (relationship b3).
///  - DirectDistressEffect injects an extra, negative distress -> adherence
///    coefficient of magnitude c_treat |b1| per window.
///  - RandomMediator replaces the two mediator coefficients with
///    sign-unconstrained N(0, mediator_sd) draws.
inline std::vector<DyadParams> make_variant(const std::vector<DyadParams>& pop,
                                            const TestbedVariant& variant, std::uint64_t seed) {
    std::vector<DyadParams> out = pop;
    switch (variant.kind) {
        case VariantKind::Vanilla:
            break;
        case VariantKind::NoMediator:
            for (auto& d : out) {
                d.adherence_am.b2 = 0.0;
                d.adherence_pm.b2 = 0.0;
                d.adherence_am.b3 = 0.0;
                d.adherence_pm.b3 = 0.0;
                d.relationship.b3 = 0.0;
            }
            break;
        case VariantKind::DirectDistressEffect:
            for (auto& d : out) {
                d.adherence_am.b3 -= variant.c_treat * std::abs(d.adherence_am.b1);
                d.adherence_pm.b3 -= variant.c_treat * std::abs(d.adherence_pm.b1);
            }
            break;
        case VariantKind::RandomMediator:
            for (std::size_t i = 0; i < out.size(); ++i) {
                Rng rng(seeds::derive(seeds::derive(seed, seeds::kPopulation ^ 0xabcdULL), i));
                out[i].adherence_am.b2 = variant.mediator_sd * rng.gaussian();
                out[i].adherence_pm.b2 = variant.mediator_sd * rng.gaussian();
                out[i].relationship.b3 = variant.mediator_sd * rng.gaussian();
            }
            break;
    }
    return out;
}

}  // namespace dyadrl
