#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyadrl/clock.hpp"
#include "dyadrl/env.hpp"
#include "dyadrl/features.hpp"
#include "dyadrl/rl_core.hpp"
#include "dyadrl/surrogate.hpp"

namespace dyadrl {

/// Joint intervention decision; slower components carry the prevailing value
/// at decision times where they cannot change.
struct JointAction {
    int aya = 0;
    int care = 0;
    int rel = 0;
};

/// A policy driving one simulated trial. Lives across dyads: learners keep
/// their datasets and parameters from one dyad to the next.
class TrialPolicy {
public:
    virtual ~TrialPolicy() = default;

    /// Decide the joint action for this slot. Called before env_step; slower
    /// components are only honored at their boundaries.
    virtual JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng& rng) = 0;

    /// Observe the applied action and the step's outcome. `before`/`after`
    /// bracket the env_step.
    virtual void on_step(const DyadObs& before, const DyadObs& after, const ClockIndex& clock,
                         const JointAction& applied, const StepOutcome& outcome) {
        (void)before;
        (void)after;
        (void)clock;
        (void)applied;
        (void)outcome;
    }
};

/// Independent Bernoulli delivery per component; the uniform random baseline
/// is the p = 0.5 special case. Draws happen only at decision boundaries.
class FixedProbPolicy : public TrialPolicy {
public:
    FixedProbPolicy(double p_aya, double p_care, double p_rel)
        : p_aya_(p_aya), p_care_(p_care), p_rel_(p_rel) {}

    JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng& rng) override {
        JointAction a{0, obs.a_care_day, obs.a_rel_week};
        if (clock.is_week_start()) a.rel = rng.bernoulli(p_rel_);
        if (clock.is_day_start()) a.care = rng.bernoulli(p_care_);
        a.aya = rng.bernoulli(p_aya_);
        return a;
    }

private:
    double p_aya_, p_care_, p_rel_;
};

inline std::unique_ptr<FixedProbPolicy> uniform_random_policy() {
    return std::make_unique<FixedProbPolicy>(0.5, 0.5, 0.5);
}

/// One flattened learner over the joint action space (40 features).
class SingleAgentPolicy : public TrialPolicy {
public:
    SingleAgentPolicy()
        : agent_(joint_interaction_features(kSingleStateDim), joint_action_set(), 0.5) {}

    JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng& rng) override {
        (void)clock;
        agent_.observe(build_features(AgentKind::Single, obs));
        agent_.rlsvi_step(rng);
        const Action a = agent_.act_greedy();
        pending_ = a;
        return {a[0], a[1], a[2]};
    }

    void on_step(const DyadObs&, const DyadObs&, const ClockIndex&, const JointAction&,
                 const StepOutcome& outcome) override {
        agent_.record(pending_, static_cast<double>(outcome.adherence));
    }

    const AgentState& agent() const { return agent_; }

private:
    AgentState agent_;
    Action pending_;
};

/// How one component of the multi-agent policy is driven: a learning agent
/// or a fixed randomization probability (used in collaboration experiments).
struct ComponentMode {
    bool learn = true;
    double fixed_prob = 0.5;

    static ComponentMode learner() { return {true, 0.5}; }
    static ComponentMode fixed(double p) { return {false, p}; }
};

/// The three-agent architecture: a relationship agent acting weekly, a
/// carepartner agent acting daily, and an AYA agent acting every slot.
/// With `use_surrogate` off the slower agents learn from naive adherence
/// aggregates; with it on they learn from the engineered surrogate rewards.
class MultiAgentPolicy : public TrialPolicy {
public:
    explicit MultiAgentPolicy(bool use_surrogate, ComponentMode aya = ComponentMode::learner(),
                              ComponentMode care = ComponentMode::learner(),
                              ComponentMode rel = ComponentMode::learner())
        : use_surrogate_(use_surrogate),
          aya_mode_(aya),
          care_mode_(care),
          rel_mode_(rel),
          aya_agent_(interaction_features(kAyaStateDim), binary_action_set(), 0.5),
          care_agent_(interaction_features(kCareStateDim), binary_action_set(), 0.5),
          rel_agent_(interaction_features(kRelStateDim), binary_action_set(), 0.0) {}

    JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng& rng) override {
        DyadObs view = obs;
        JointAction a{0, obs.a_care_day, obs.a_rel_week};
        if (clock.is_week_start()) {
            a.rel = component_decision(rel_agent_, rel_mode_, AgentKind::Rel, view, rng);
            view.a_rel_week = a.rel;
            week_cov_ = rel_surrogate_covariates(view.y_rel_last, view.b_aya_week_start, a.rel);
            rel_pending_ = rel_mode_.learn;
        }
        if (clock.is_day_start()) {
            a.care = component_decision(care_agent_, care_mode_, AgentKind::Care, view, rng);
            view.a_care_day = a.care;
            care_pending_ = care_mode_.learn;
        }
        a.aya = component_decision(aya_agent_, aya_mode_, AgentKind::Aya, view, rng);
        return a;
    }

    void on_step(const DyadObs& before, const DyadObs& after, const ClockIndex& clock,
                 const JointAction& applied, const StepOutcome& outcome) override {
        if (aya_mode_.learn)
            aya_agent_.record({applied.aya}, static_cast<double>(outcome.adherence));

        day_adherence_sum_ += outcome.adherence;
        week_adherence_sum_ += outcome.adherence;
        if (clock.is_day_start()) day_distress_ = *outcome.distress;

        const bool day_close = clock.slot == kSlotsPerDay;
        if (day_close) {
            // Next-day carepartner burden: already transitioned at the day
            // start. The trial's last day has no next morning, so fall back
            // to the burden the day started with.
            const double b_care_next =
                clock.is_trial_end() ? before.b_care_day_start : after.b_care;
            const Vec cov = care_surrogate_covariates(day_distress_, b_care_next,
                                                      before.y_rel_last, applied.care);
            if (care_pending_) {
                const double reward = use_surrogate_
                                          ? surrogate_.care_reward(cov)
                                          : day_adherence_sum_ / static_cast<double>(kSlotsPerDay);
                care_agent_.record({applied.care}, reward);
                care_pending_ = false;
            }
            if (use_surrogate_) week_care_covs_.push_back(cov);
            day_adherence_sum_ = 0;
        }

        if (clock.is_week_end()) {
            if (rel_pending_) {
                double reward;
                if (use_surrogate_) {
                    std::optional<SurrogateModel::RelLookahead> next;
                    if (clock.week < kWeeksPerTrial)
                        next = SurrogateModel::RelLookahead{*outcome.relationship, after.b_aya};
                    reward = surrogate_.rel_reward(week_cov_, next);
                } else {
                    reward = week_adherence_sum_ / static_cast<double>(kSlotsPerWeek);
                }
                rel_agent_.record({applied.rel}, reward);
                rel_pending_ = false;
            }
            if (use_surrogate_) {
                surrogate_.add_rel_row(week_cov_, static_cast<double>(week_adherence_sum_));
                for (const Vec& cov : week_care_covs_)
                    surrogate_.add_care_row(cov, static_cast<double>(*outcome.relationship));
                week_care_covs_.clear();
                surrogate_.update_coeffs();
            }
            week_adherence_sum_ = 0;
        }
    }

    const AgentState& aya_agent() const { return aya_agent_; }
    const AgentState& care_agent() const { return care_agent_; }
    const AgentState& rel_agent() const { return rel_agent_; }
    const SurrogateModel& surrogate() const { return surrogate_; }
    bool use_surrogate() const { return use_surrogate_; }

private:
    int component_decision(AgentState& agent, const ComponentMode& mode, AgentKind kind,
                           const DyadObs& view, Rng& rng) {
        if (!mode.learn) return rng.bernoulli(mode.fixed_prob);
        agent.observe(build_features(kind, view));
        agent.rlsvi_step(rng);
        return agent.act_greedy()[0];
    }

    bool use_surrogate_;
    ComponentMode aya_mode_, care_mode_, rel_mode_;
    AgentState aya_agent_;
    AgentState care_agent_;
    AgentState rel_agent_;
    SurrogateModel surrogate_;

    Vec week_cov_ = Vec(5, 0.0);
    std::vector<Vec> week_care_covs_;
    int day_adherence_sum_ = 0;
    int week_adherence_sum_ = 0;
    double day_distress_ = 0.0;
    bool care_pending_ = false;
    bool rel_pending_ = false;
};

/// Per-slot record of a simulated dyad.
struct SlotRecord {
    ClockIndex clock;
    JointAction applied;
    int adherence = 0;
};

struct DyadTrajectory {
    std::vector<SlotRecord> slots;
    std::vector<double> distress;
    std::vector<int> relationship;
    int adherence_total = 0;
};

/// Simulate one dyad for the full 14 weeks under `policy`, maintaining the
/// observation view the policy sees. Environment noise and policy noise
/// come from separate streams. Returns the dyad's total adherence; pass
/// `traj` to capture the full trajectory.
inline int run_dyad(const DyadParams& params, const EnvParams& env, TrialPolicy& policy,
                    Rng& env_rng, Rng& policy_rng, DyadTrajectory* traj = nullptr,
                    std::vector<std::uint8_t>* slot_adherence = nullptr) {
    if (traj) traj->slots.reserve(kSlotsPerTrial);
    if (slot_adherence) slot_adherence->reserve(kSlotsPerTrial);
    int total = 0;

    DyadState state = init_dyad_state(params, env, env_rng);
    DyadObs obs;
    obs.last_adherence = state.last_adherence;
    obs.last_distress = state.last_distress;
    obs.distress_prev_day = state.last_distress;
    obs.y_rel_last = state.rel_quality_prev_week;

    ClockIndex clock;
    for (int i = 0; i < kSlotsPerTrial; ++i, clock = clock.successor()) {
        if (clock.is_week_start()) {
            obs.b_aya_week_start = obs.b_aya;
            obs.b_care_week_start = obs.b_care;
        }
        if (clock.is_day_start()) {
            obs.b_care_day_start = obs.b_care;
            obs.distress_prev_day = obs.last_distress;
        }

        JointAction a = policy.decide(obs, clock, policy_rng);
        // Gate slower components to their decision boundaries.
        if (!clock.is_day_start()) a.care = obs.a_care_day;
        if (!clock.is_week_start()) a.rel = obs.a_rel_week;
        obs.a_care_day = a.care;
        obs.a_rel_week = a.rel;

        const DyadObs before = obs;
        const StepOutcome outcome =
            env_step(state, clock, ActionBundle::at(clock, a.aya, a.care, a.rel), params, env,
                     env_rng);

        obs.last_adherence = outcome.adherence;
        obs.b_aya = state.b_aya;
        obs.b_care = state.b_care;
        if (outcome.distress) {
            obs.last_distress = *outcome.distress;
            if (traj) traj->distress.push_back(*outcome.distress);
        }
        if (outcome.relationship) {
            obs.y_rel_last = *outcome.relationship;
            obs.ybar_aya_prev = outcome.mediators->rbar_aya;
            obs.ybar_care_prev = outcome.mediators->rbar_care;
            if (traj) traj->relationship.push_back(*outcome.relationship);
        }

        policy.on_step(before, obs, clock, a, outcome);
        if (traj) traj->slots.push_back({clock, a, outcome.adherence});
        if (slot_adherence) slot_adherence->push_back(static_cast<std::uint8_t>(outcome.adherence));
        total += outcome.adherence;
    }
    if (traj) traj->adherence_total = total;
    return total;
}

inline DyadTrajectory simulate_dyad(const DyadParams& params, const EnvParams& env,
                                    TrialPolicy& policy, Rng& env_rng, Rng& policy_rng) {
    DyadTrajectory traj;
    run_dyad(params, env, policy, env_rng, policy_rng, &traj);
    return traj;
}

/// Text snapshot of a policy's learned state (format version 1): theta and
/// perturbation per agent with dataset sizes, plus surrogate coefficients.
inline std::string snapshot(const MultiAgentPolicy& p) {
    std::ostringstream os;
    os.precision(17);
    os << "dyadrl-policy-snapshot v1 multi\n";
    auto dump = [&os](const char* name, const AgentState& a) {
        os << name << " rows=" << a.dataset().size() << " theta=";
        for (double v : a.theta) os << ' ' << v;
        os << " w=";
        for (double v : a.perturb_w) os << ' ' << v;
        os << '\n';
    };
    dump("aya", p.aya_agent());
    dump("care", p.care_agent());
    dump("rel", p.rel_agent());
    os << "beta_rel=";
    for (double v : p.surrogate().beta_rel()) os << ' ' << v;
    os << "\nbeta_care=";
    for (double v : p.surrogate().beta_care()) os << ' ' << v;
    os << '\n';
    return os.str();
}

}  // namespace dyadrl
