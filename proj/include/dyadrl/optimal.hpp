#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dyadrl/parallel.hpp"
#include "dyadrl/policies.hpp"

namespace dyadrl {

/// Equal-width binning of one numeric feature over an empirical range.
struct BinSpec {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 10;

    int index(double x) const {
        if (!(hi > lo)) return 0;
        const double t = (x - lo) / (hi - lo) * bins;
        return std::clamp(static_cast<int>(t), 0, bins - 1);
    }
};

inline constexpr int kNumericBins = 10;
inline constexpr int kJointActions = 8;

/// Greedy policy over a discretized six-feature state (intercept, previous
/// adherence, distress, AYA burden, carepartner burden, relationship
/// quality; the three numeric features binned). Produced by offline tabular
/// Q-learning on uniform-random-action data.
class TabularPolicy : public TrialPolicy {
public:
    BinSpec distress_bins{0, 1, kNumericBins};
    BinSpec b_aya_bins{0, 1, kNumericBins};
    BinSpec b_care_bins{0, 1, kNumericBins};
    std::vector<double> q;  // [n_states() * kJointActions]
    bool converged = false;
    int sweeps_used = 0;
    double fixed_point_residual = 0.0;  // sup-norm change of one post-convergence sweep

    static constexpr int n_states() { return 2 * 2 * kNumericBins * kNumericBins * kNumericBins; }

    int state_index(int adherence, double distress, double b_aya, double b_care, int rel) const {
        int idx = adherence;
        idx = idx * 2 + rel;
        idx = idx * kNumericBins + distress_bins.index(distress);
        idx = idx * kNumericBins + b_aya_bins.index(b_aya);
        idx = idx * kNumericBins + b_care_bins.index(b_care);
        return idx;
    }

    int state_index(const DyadObs& o) const {
        return state_index(o.last_adherence, o.last_distress, o.b_aya, o.b_care, o.y_rel_last);
    }

    /// Joint actions enumerated as (aya, care, rel) lexicographically;
    /// strict improvement keeps the smallest on ties.
    int best_joint(int state) const {
        const double* row = q.data() + static_cast<std::size_t>(state) * kJointActions;
        int best = 0;
        for (int a = 1; a < kJointActions; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    }

    JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng&) override {
        const int a = best_joint(state_index(obs));
        JointAction j{(a >> 2) & 1, obs.a_care_day, obs.a_rel_week};
        if (clock.is_day_start()) j.care = (a >> 1) & 1;
        if (clock.is_week_start()) j.rel = a & 1;
        return j;
    }
};

namespace detail {

struct RawStep {
    double distress, b_aya, b_care;
    std::uint8_t adherence, rel;
    std::uint8_t action;
    std::uint8_t reward;
    std::uint8_t terminal;
    double next_distress, next_b_aya, next_b_care;
    std::uint8_t next_adherence, next_rel;
};

/// Records the five Q features around a wrapped policy's steps.
class RecordingPolicy : public TrialPolicy {
public:
    RecordingPolicy(TrialPolicy& inner, std::vector<RawStep>& sink) : inner_(inner), sink_(sink) {}

    JointAction decide(const DyadObs& obs, const ClockIndex& clock, Rng& rng) override {
        return inner_.decide(obs, clock, rng);
    }

    void on_step(const DyadObs& before, const DyadObs& after, const ClockIndex& clock,
                 const JointAction& applied, const StepOutcome& outcome) override {
        inner_.on_step(before, after, clock, applied, outcome);
        RawStep s;
        s.distress = before.last_distress;
        s.b_aya = before.b_aya;
        s.b_care = before.b_care;
        s.adherence = static_cast<std::uint8_t>(before.last_adherence);
        s.rel = static_cast<std::uint8_t>(before.y_rel_last);
        s.action = static_cast<std::uint8_t>((applied.aya << 2) | (applied.care << 1) | applied.rel);
        s.reward = static_cast<std::uint8_t>(outcome.adherence);
        s.terminal = static_cast<std::uint8_t>(clock.is_trial_end());
        s.next_distress = after.last_distress;
        s.next_b_aya = after.b_aya;
        s.next_b_care = after.b_care;
        s.next_adherence = static_cast<std::uint8_t>(after.last_adherence);
        s.next_rel = static_cast<std::uint8_t>(after.y_rel_last);
        sink_.push_back(s);
    }

private:
    TrialPolicy& inner_;
    std::vector<RawStep>& sink_;
};

}  // namespace detail

struct OptimalPolicyConfig {
    int n_trajectories = 2000;  // dyad-trajectories of random-action data
    double discount = 0.95;
    double tolerance = 1e-6;
    int max_sweeps = 1000;
};

/// Offline tabular Q-learning against the empirical MDP of a uniform-random
/// dataset: value-iterate Q(s,a) = rbar(s,a) + gamma * sum_s' p(s'|s,a) V(s')
/// to a sup-norm fixed point. Unvisited state-actions keep Q = 0; trajectory
/// ends do not bootstrap.
inline TabularPolicy approx_optimal_policy(const std::vector<DyadParams>& pop,
                                           const EnvParams& env, std::uint64_t seed,
                                           const OptimalPolicyConfig& cfg = {}) {
    if (pop.empty()) throw ConfigError("approx_optimal_policy: empty population");
    if (cfg.n_trajectories < 1) throw ConfigError("approx_optimal_policy: empty dataset");

    std::vector<detail::RawStep> data;
    data.reserve(static_cast<std::size_t>(cfg.n_trajectories) * kSlotsPerTrial);
    Rng pick(seeds::derive(seed, seeds::kOptPolicy));
    FixedProbPolicy random_policy(0.5, 0.5, 0.5);
    detail::RecordingPolicy recorder(random_policy, data);
    for (int t = 0; t < cfg.n_trajectories; ++t) {
        const std::size_t dyad = static_cast<std::size_t>(pick.next_u64() % pop.size());
        Rng env_rng(seeds::derive(seeds::derive(seed, seeds::kEnvironment), t));
        Rng pol_rng(seeds::derive(seeds::derive(seed, seeds::kPolicy), t));
        run_dyad(pop[dyad], env, recorder, env_rng, pol_rng);
    }

    TabularPolicy policy;
    auto fit_bins = [&](auto getter) {
        double lo = getter(data.front()), hi = lo;
        for (const auto& s : data) {
            lo = std::min(lo, getter(s));
            hi = std::max(hi, getter(s));
        }
        return BinSpec{lo, hi, kNumericBins};
    };
    policy.distress_bins = fit_bins([](const detail::RawStep& s) { return s.distress; });
    policy.b_aya_bins = fit_bins([](const detail::RawStep& s) { return s.b_aya; });
    policy.b_care_bins = fit_bins([](const detail::RawStep& s) { return s.b_care; });

    const int n_sa = TabularPolicy::n_states() * kJointActions;
    std::vector<double> reward_sum(n_sa, 0.0);
    std::vector<std::int32_t> count(n_sa, 0);

    // (sa, s') pairs; s' = -1 marks trajectory ends (value 0, no bootstrap).
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(data.size());
    for (const auto& s : data) {
        const int si = policy.state_index(s.adherence, s.distress, s.b_aya, s.b_care, s.rel);
        const int sa = si * kJointActions + s.action;
        reward_sum[sa] += s.reward;
        ++count[sa];
        const int ni = s.terminal ? -1
                                  : policy.state_index(s.next_adherence, s.next_distress,
                                                       s.next_b_aya, s.next_b_care, s.next_rel);
        edges.emplace_back(sa, ni);
    }
    std::sort(edges.begin(), edges.end());

    // CSR over visited (s,a): successor states with multiplicities collapsed.
    std::vector<std::int32_t> row_start(n_sa + 1, 0);
    std::vector<std::int32_t> succ;
    std::vector<double> prob;
    succ.reserve(edges.size());
    prob.reserve(edges.size());
    {
        std::size_t i = 0;
        for (int sa = 0; sa < n_sa; ++sa) {
            row_start[sa] = static_cast<std::int32_t>(succ.size());
            while (i < edges.size() && edges[i].first == sa) {
                const std::int32_t target = edges[i].second;
                std::int32_t c = 0;
                while (i < edges.size() && edges[i].first == sa && edges[i].second == target) {
                    ++c;
                    ++i;
                }
                succ.push_back(target);
                prob.push_back(static_cast<double>(c) / count[sa]);
            }
        }
        row_start[n_sa] = static_cast<std::int32_t>(succ.size());
    }

    policy.q.assign(n_sa, 0.0);
    std::vector<double> value(TabularPolicy::n_states(), 0.0);
    auto bellman_sweep = [&]() {
        for (int s = 0; s < TabularPolicy::n_states(); ++s) {
            const double* row = policy.q.data() + static_cast<std::size_t>(s) * kJointActions;
            double best = row[0];
            for (int a = 1; a < kJointActions; ++a) best = std::max(best, row[a]);
            value[s] = best;
        }
        double max_change = 0.0;
        for (int sa = 0; sa < n_sa; ++sa) {
            if (count[sa] == 0) continue;
            double v = reward_sum[sa] / count[sa];
            for (std::int32_t k = row_start[sa]; k < row_start[sa + 1]; ++k)
                if (succ[k] >= 0) v += cfg.discount * prob[k] * value[succ[k]];
            max_change = std::max(max_change, std::abs(v - policy.q[sa]));
            policy.q[sa] = v;
        }
        return max_change;
    };
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        ++policy.sweeps_used;
        if (bellman_sweep() < cfg.tolerance) {
            policy.converged = true;
            break;
        }
    }
    // Fixed-point diagnostic: one more sweep must stay within tolerance.
    policy.fixed_point_residual = bellman_sweep();
    return policy;
}

/// Monte Carlo estimate of a policy's expected cumulative adherence on one
/// dyad. Stateless policies only (fresh rollouts share the policy object).
inline double mean_cumulative_adherence(const DyadParams& dyad, const EnvParams& env,
                                        TrialPolicy& policy, int n_eval, std::uint64_t seed) {
    double total = 0.0;
    for (int r = 0; r < n_eval; ++r) {
        Rng env_rng(seeds::derive(seeds::derive(seed, seeds::kEnvironment), r));
        Rng pol_rng(seeds::derive(seeds::derive(seed, seeds::kPolicy), r));
        total += run_dyad(dyad, env, policy, env_rng, pol_rng);
    }
    return total / n_eval;
}

struct SteResult {
    double ste = 0.0;
    double mean_gain = 0.0;       // numerator of the ratio
    double baseline_sd = 0.0;     // across-dyad sd of the no-intervention value
    std::vector<double> per_dyad_opt;
    std::vector<double> per_dyad_zero;
};

/// Standardized treatment effect of `opt_policy` against the always-zero
/// policy: mean across dyads of the per-dyad expected cumulative-adherence
/// gain, divided by the across-dyad standard deviation of the no-intervention
/// expectation. Dyad evaluations run in parallel; each (dyad, replicate)
/// owns a derived stream so results do not depend on scheduling.
inline SteResult compute_ste(const std::vector<DyadParams>& pop, const EnvParams& env,
                             TabularPolicy& opt_policy, int n_eval, std::uint64_t seed,
                             int jobs = 0) {
    if (pop.size() < 2) throw ConfigError("compute_ste: need at least two dyads");
    if (n_eval < 2) throw ConfigError("compute_ste: n_eval must be >= 2");

    SteResult res;
    res.per_dyad_opt.resize(pop.size());
    res.per_dyad_zero.resize(pop.size());
    parallel_for(pop.size(), jobs, [&](std::size_t e) {
        // Both policies see the same environment streams (every step consumes
        // a fixed number of draws, so this is true common random numbers):
        // identical policies then measure exactly zero gain.
        FixedProbPolicy zero(0.0, 0.0, 0.0);
        const std::uint64_t dyad_seed = seeds::derive(seeds::derive(seed, seeds::kEvaluation), e);
        res.per_dyad_opt[e] = mean_cumulative_adherence(pop[e], env, opt_policy, n_eval, dyad_seed);
        res.per_dyad_zero[e] = mean_cumulative_adherence(pop[e], env, zero, n_eval, dyad_seed);
    });

    double gain = 0.0, base_mean = 0.0;
    for (std::size_t e = 0; e < pop.size(); ++e) {
        gain += res.per_dyad_opt[e] - res.per_dyad_zero[e];
        base_mean += res.per_dyad_zero[e];
    }
    gain /= static_cast<double>(pop.size());
    base_mean /= static_cast<double>(pop.size());
    double ss = 0.0;
    for (double v : res.per_dyad_zero) ss += (v - base_mean) * (v - base_mean);
    const double sd = std::sqrt(ss / static_cast<double>(pop.size() - 1));
    if (sd < 1e-12)
        throw CalibrationError("compute_ste: zero across-dyad variance, STE undefined");
    res.mean_gain = gain;
    res.baseline_sd = sd;
    res.ste = gain / sd;
    return res;
}

}  // namespace dyadrl
