#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dyadrl/clock.hpp"
#include "dyadrl/errors.hpp"
#include "dyadrl/population.hpp"
#include "dyadrl/rng.hpp"

namespace dyadrl {

/// Logistic link, clamped so probabilities stay strictly inside (0, 1).
inline double sigmoid(double x) {
    x = std::min(std::max(x, -36.0), 36.0);
    return 1.0 / (1.0 + std::exp(-x));
}

/// Environment-level knobs shared by all dyads.
struct EnvParams {
    double mediator_gamma = 0.9;  // weight of the within-week exponential averages
    int burn_in_steps = 500;      // no-intervention steps used to draw initial conditions
};

enum class Role { Aya, Care };

/// Current state of one simulated dyad. Burdens are kept both raw (the value
/// the transition model evolves) and standardized (the value everything else
/// consumes). Week histories reset at week boundaries.
struct DyadState {
    double raw_b_aya = 0.0;
    double raw_b_care = 0.0;
    double b_aya = 0.0;   // standardized
    double b_care = 0.0;  // standardized
    int last_adherence = 0;
    double last_distress = 0.0;
    int rel_quality_prev_week = 0;
    int rel_action_this_week = 0;
    std::vector<int> week_adherence_hist;
    std::vector<double> week_distress_hist;
};

/// Exponentially weighted within-week averages: the most recent entry gets
/// weight gamma^0, the one before gamma^1, and so on. Empty history -> 0.
inline double weighted_week_average_int(const std::vector<int>& hist, double gamma) {
    double acc = 0.0;
    for (int x : hist) acc = gamma * acc + static_cast<double>(x);
    return acc;
}

inline double weighted_week_average(const std::vector<double>& hist, double gamma) {
    double acc = 0.0;
    for (double x : hist) acc = gamma * acc + x;
    return acc;
}

struct WeekMediators {
    double rbar_aya = 0.0;
    double rbar_care = 0.0;
};

inline WeekMediators week_mediators(const std::vector<int>& adherence_hist,
                                    const std::vector<double>& distress_hist, double gamma) {
    DYADRL_CHECK(gamma > 0.0 && gamma <= 1.0, "week_mediators: gamma must be in (0,1]");
    return {weighted_week_average_int(adherence_hist, gamma),
            weighted_week_average(distress_hist, gamma)};
}

/// One burden transition: raw' = th0 + th1 raw + th2 a_own + th3 a_rel + eta,
/// floored at zero. Updates the state's raw value and returns the
/// standardized one.
inline double transition_burden(Role role, DyadState& state, int a_own, int a_rel,
                                const DyadParams& params, Rng& rng) {
    const BurdenCoeffs& c = role == Role::Aya ? params.burden_aya : params.burden_care;
    double& raw = role == Role::Aya ? state.raw_b_aya : state.raw_b_care;
    double raw_next = c.th0 + c.th1 * raw + c.th2 * a_own + c.th3 * a_rel +
                      c.noise_sd * rng.gaussian();
    raw_next = std::max(0.0, raw_next);
    raw = raw_next;
    const BurdenScaling& s = params.burden_scaling;
    const double mean = role == Role::Aya ? s.mean_aya : s.mean_care;
    const double sd = role == Role::Aya ? s.sd_aya : s.sd_care;
    const double standardized = (raw_next - mean) / sd;
    if (role == Role::Aya)
        state.b_aya = standardized;
    else
        state.b_care = standardized;
    return standardized;
}

/// Adherence success probability for the given decision window.
/// The mediator multiplier scales the relationship -> adherence path.
inline double adherence_prob(const DyadState& state, int window, int a_aya,
                             const DyadParams& params) {
    const OutcomeCoeffs& c = window == 0 ? params.adherence_am : params.adherence_pm;
    const double m = params.mediator_multiplier;
    const double logit = c.b0 + c.b1 * state.last_adherence +
                         m * c.b2 * state.rel_quality_prev_week +
                         c.b3 * state.last_distress + c.b4 * state.b_aya +
                         c.t0 * a_aya + c.t1 * a_aya * state.rel_quality_prev_week +
                         c.t2 * a_aya * state.b_aya;
    return sigmoid(logit);
}

/// Daily carepartner distress update (linear model with Gaussian noise).
inline double distress_step(const DyadState& state, int a_care, const DyadParams& params,
                            Rng& rng) {
    const OutcomeCoeffs& c = params.distress;
    return c.b0 + c.b1 * state.last_distress + c.b2 * state.last_adherence +
           c.b3 * state.rel_quality_prev_week + c.b4 * state.b_care + c.t0 * a_care +
           c.t1 * a_care * state.rel_quality_prev_week + c.t2 * a_care * state.b_care +
           params.distress_noise_sd * rng.gaussian();
}

/// End-of-week relationship quality probability.
inline double relationship_prob(int rel_prev, double rbar_aya, double rbar_care, int a_rel,
                                double b_aya, double b_care, const DyadParams& params) {
    const RelationshipCoeffs& c = params.relationship;
    const double m = params.mediator_multiplier;
    const double logit = c.b0 + c.b1 * rel_prev + c.b2 * rbar_aya + m * c.b3 * rbar_care +
                         c.t0 * a_rel + c.t1 * a_rel * (b_care + b_aya);
    return sigmoid(logit);
}

/// What one env_step emits. Adherence every slot, distress at day starts,
/// relationship quality (plus the mediator averages that produced it) at
/// week ends.
struct StepOutcome {
    int adherence = 0;
    std::optional<double> distress;
    std::optional<int> relationship;
    std::optional<WeekMediators> mediators;
};

/// Advance one dyad by one decision time.
///
/// Slot order: (week start) record the relationship action and reset the
/// week histories; (day start) generate today's distress from yesterday's
/// state, then advance the carepartner burden; (every slot) draw adherence
/// with the current burden, then advance the AYA burden; (week end) sample
/// this week's relationship quality from the completed histories.
inline StepOutcome env_step(DyadState& state, const ClockIndex& clock, const ActionBundle& actions,
                            const DyadParams& params, const EnvParams& env, Rng& rng) {
    actions.validate(clock);
    StepOutcome out;

    if (clock.is_week_start()) {
        state.rel_action_this_week = *actions.a_rel;
        state.week_adherence_hist.clear();
        state.week_distress_hist.clear();
    }

    if (clock.is_day_start()) {
        const double distress = distress_step(state, *actions.a_care, params, rng);
        state.last_distress = distress;
        state.week_distress_hist.push_back(distress);
        DYADRL_CHECK(state.week_distress_hist.size() <= static_cast<std::size_t>(kDaysPerWeek),
                     "env_step: distress history overflow");
        transition_burden(Role::Care, state, *actions.a_care, state.rel_action_this_week, params,
                          rng);
        out.distress = distress;
    }

    const double p = adherence_prob(state, clock.window(), actions.a_aya, params);
    const int adherence = rng.bernoulli(p);
    state.last_adherence = adherence;
    state.week_adherence_hist.push_back(adherence);
    DYADRL_CHECK(state.week_adherence_hist.size() <= static_cast<std::size_t>(kSlotsPerWeek),
                 "env_step: adherence history overflow");
    out.adherence = adherence;

    transition_burden(Role::Aya, state, actions.a_aya, state.rel_action_this_week, params, rng);

    if (clock.is_week_end()) {
        const WeekMediators med =
            week_mediators(state.week_adherence_hist, state.week_distress_hist, env.mediator_gamma);
        const double p_rel =
            relationship_prob(state.rel_quality_prev_week, med.rbar_aya, med.rbar_care,
                              state.rel_action_this_week, state.b_aya, state.b_care, params);
        const int rel = rng.bernoulli(p_rel);
        state.rel_quality_prev_week = rel;
        out.relationship = rel;
        out.mediators = med;
    }

    return out;
}

/// Empirical mean/sd of each raw burden process over 10,000 transitions
/// under i.i.d. Bernoulli(0.5) actions (after a short burn-in), stored as
/// the dyad's standardization statistics.
inline DyadParams calibrate_burden_scaling(const DyadParams& params, Rng& rng) {
    constexpr int kBurnIn = 100;
    constexpr int kSamples = 10000;

    auto run = [&](const BurdenCoeffs& c) {
        double raw = 0.0;
        auto step = [&]() {
            const int a_own = rng.bernoulli(0.5);
            const int a_rel = rng.bernoulli(0.5);
            raw = std::max(0.0, c.th0 + c.th1 * raw + c.th2 * a_own + c.th3 * a_rel +
                                    c.noise_sd * rng.gaussian());
        };
        for (int i = 0; i < kBurnIn; ++i) step();
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < kSamples; ++i) {
            step();
            sum += raw;
            sum_sq += raw * raw;
        }
        const double mean = sum / kSamples;
        const double var = (sum_sq - kSamples * mean * mean) / (kSamples - 1);
        const double sd = std::sqrt(std::max(0.0, var));
        if (sd < 1e-9) throw CalibrationError("calibrate_burden_scaling: degenerate burden sd");
        return std::pair<double, double>{mean, sd};
    };

    DyadParams out = params;
    const auto [mean_aya, sd_aya] = run(params.burden_aya);
    const auto [mean_care, sd_care] = run(params.burden_care);
    out.burden_scaling = {mean_aya, sd_aya, mean_care, sd_care};
    return out;
}

inline std::vector<DyadParams> calibrate_population_burdens(const std::vector<DyadParams>& pop,
                                                            std::uint64_t seed) {
    std::vector<DyadParams> out;
    out.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Rng rng(seeds::derive(seeds::derive(seed, seeds::kCalibration), i));
        out.push_back(calibrate_burden_scaling(pop[i], rng));
    }
    return out;
}

/// Initial conditions for a fresh dyad: run `burn_in_steps` no-intervention
/// slots to land adherence and distress near their stationary joint
/// distribution, then reset the burdens to the calibration mean, draw the
/// week-zero relationship quality as Bernoulli(0.5), and clear histories.
inline DyadState init_dyad_state(const DyadParams& params, const EnvParams& env, Rng& rng) {
    DyadState state;
    state.raw_b_aya = params.burden_scaling.mean_aya;
    state.raw_b_care = params.burden_scaling.mean_care;
    state.rel_quality_prev_week = rng.bernoulli(0.5);

    ClockIndex clock;
    for (int i = 0; i < env.burn_in_steps; ++i) {
        env_step(state, clock, ActionBundle::at(clock, 0, 0, 0), params, env, rng);
        clock = clock.successor();
        if (clock.week > kWeeksPerTrial) clock.week = 1;
    }

    state.raw_b_aya = params.burden_scaling.mean_aya;
    state.raw_b_care = params.burden_scaling.mean_care;
    state.b_aya = 0.0;
    state.b_care = 0.0;
    state.rel_quality_prev_week = rng.bernoulli(0.5);
    state.rel_action_this_week = 0;
    state.week_adherence_hist.clear();
    state.week_distress_hist.clear();
    return state;
}

}  // namespace dyadrl
