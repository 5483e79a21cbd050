#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dyadrl/optimal.hpp"
#include "dyadrl/parallel.hpp"
#include "dyadrl/policies.hpp"

namespace dyadrl {

enum class Algorithm {
    SingleAgent,
    MultiAgent,
    MultiAgentSurrogate,
    UniformRandom,
    FixedProb,
    OptimalApprox,
};

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::SingleAgent: return "single_agent";
        case Algorithm::MultiAgent: return "multi_agent";
        case Algorithm::MultiAgentSurrogate: return "multi_agent_surrogate";
        case Algorithm::UniformRandom: return "uniform_random";
        case Algorithm::FixedProb: return "fixed_prob";
        case Algorithm::OptimalApprox: return "optimal_approx";
    }
    return "?";
}

/// A calibrated population plus the metadata needed to reproduce and
/// sanity-check runs against it.
struct Population {
    std::vector<DyadParams> dyads;
    EnvParams env;
    double c_treat = 0.0;
    double ste_target = 0.0;
    double achieved_ste = 0.0;
    std::uint64_t seed = 0;
};

struct TrialConfig {
    Algorithm algorithm = Algorithm::UniformRandom;
    int n_dyads = 25;
    int n_runs = 1000;
    double ste_target = 0.0;  // 0 skips the calibration cross-check
    std::uint64_t master_seed = 0;
    double p_aya = 0.5, p_care = 0.5, p_rel = 0.5;  // FixedProb only
};

/// Outcomes of one simulated trial (one replication): per-dyad, per-slot
/// adherence plus the derived cumulative counts.
struct RunMetrics {
    std::vector<std::vector<std::uint8_t>> slot_adherence;  // [n_dyads][196]
    std::vector<int> per_dyad_total;

    int total() const {
        int t = 0;
        for (int v : per_dyad_total) t += v;
        return t;
    }

    /// Total adherence over the first k dyads (1-based k).
    int cumulative(int k) const {
        int t = 0;
        for (int i = 0; i < k; ++i) t += per_dyad_total[i];
        return t;
    }
};

inline std::unique_ptr<TrialPolicy> make_policy(const TrialConfig& cfg,
                                                const TabularPolicy* opt_policy) {
    switch (cfg.algorithm) {
        case Algorithm::SingleAgent: return std::make_unique<SingleAgentPolicy>();
        case Algorithm::MultiAgent: return std::make_unique<MultiAgentPolicy>(false);
        case Algorithm::MultiAgentSurrogate: return std::make_unique<MultiAgentPolicy>(true);
        case Algorithm::UniformRandom: return uniform_random_policy();
        case Algorithm::FixedProb:
            return std::make_unique<FixedProbPolicy>(cfg.p_aya, cfg.p_care, cfg.p_rel);
        case Algorithm::OptimalApprox: {
            DYADRL_CHECK(opt_policy != nullptr, "run_trial: OptimalApprox needs a fitted policy");
            auto p = std::make_unique<TabularPolicy>(*opt_policy);
            return p;
        }
    }
    throw ContractViolation("make_policy: unknown algorithm");
}

/// The dyad recruitment order of one run. Derived from the master seed and
/// run index only, so every algorithm sharing a master seed recruits the
/// same dyads (the variance-reduction pairing for improvement curves).
inline std::vector<std::size_t> dyad_sequence(std::uint64_t master_seed, int run_index,
                                              int n_dyads, std::size_t population_size) {
    Rng rng(seeds::derive(seeds::derive(master_seed, seeds::kDyadSequence),
                          static_cast<std::uint64_t>(run_index)));
    std::vector<std::size_t> seq(static_cast<std::size_t>(n_dyads));
    for (auto& s : seq) s = static_cast<std::size_t>(rng.next_u64() % population_size);
    return seq;
}

/// Policy-stream family of an algorithm. The naive and surrogate
/// multi-agent variants share one family: they see identical policy
/// streams, so their comparison is paired (and bit-identical when the
/// surrogate machinery is inert).
inline std::uint64_t stream_family(Algorithm a) {
    switch (a) {
        case Algorithm::SingleAgent: return 1;
        case Algorithm::MultiAgent: return 2;
        case Algorithm::MultiAgentSurrogate: return 2;
        case Algorithm::UniformRandom: return 3;
        case Algorithm::FixedProb: return 4;
        case Algorithm::OptimalApprox: return 5;
    }
    return 0;
}

/// Environment-stream family. Per-dyad environment streams derive from
/// (master seed, replication, dyad position), shared across the learning
/// algorithms so their head-to-head comparisons are paired; the
/// non-learning comparators keep independent environment noise, which is
/// the improvement-curve pairing contract (common dyad draws only).
inline std::uint64_t env_stream_family(Algorithm a) {
    switch (a) {
        case Algorithm::SingleAgent:
        case Algorithm::MultiAgent:
        case Algorithm::MultiAgentSurrogate: return 1;
        case Algorithm::UniformRandom: return 2;
        case Algorithm::FixedProb: return 3;
        case Algorithm::OptimalApprox: return 4;
    }
    return 0;
}

/// Simulate one trial: n_dyads recruited sequentially with replacement, the
/// policy carrying its state across dyads. Deterministic in
/// (master_seed, run_index, algorithm).
inline RunMetrics run_trial(const TrialConfig& cfg, const Population& pop, int run_index = 0,
                            const TabularPolicy* opt_policy = nullptr) {
    DYADRL_CHECK(cfg.n_dyads >= 1, "run_trial: n_dyads must be >= 1");
    if (pop.dyads.empty()) throw ConfigError("run_trial: empty population");
    if (cfg.ste_target > 0.0 && std::abs(pop.achieved_ste - cfg.ste_target) > 0.05)
        throw ConfigError("run_trial: population calibration does not match ste_target");

    const std::uint64_t cell_seed = seeds::derive(cfg.master_seed, stream_family(cfg.algorithm));
    const std::uint64_t run_seed = seeds::derive(cell_seed, static_cast<std::uint64_t>(run_index));
    const std::uint64_t env_seed =
        seeds::derive(seeds::derive(seeds::derive(cfg.master_seed, seeds::kEnvironment),
                                    env_stream_family(cfg.algorithm)),
                      static_cast<std::uint64_t>(run_index));
    Rng policy_rng(seeds::derive(run_seed, seeds::kPolicy));

    const std::vector<std::size_t> seq =
        dyad_sequence(cfg.master_seed, run_index, cfg.n_dyads, pop.dyads.size());

    std::unique_ptr<TrialPolicy> policy = make_policy(cfg, opt_policy);
    RunMetrics metrics;
    metrics.slot_adherence.resize(seq.size());
    metrics.per_dyad_total.reserve(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        Rng env_rng(seeds::derive(env_seed, static_cast<std::uint64_t>(k)));
        const int total = run_dyad(pop.dyads[seq[k]], pop.env, *policy, env_rng, policy_rng,
                                   nullptr, &metrics.slot_adherence[k]);
        metrics.per_dyad_total.push_back(total);
    }
    return metrics;
}

/// All replications of one experiment cell, parallelized over runs.
inline std::vector<RunMetrics> run_experiment(const TrialConfig& cfg, const Population& pop,
                                              int jobs = 0,
                                              const TabularPolicy* opt_policy = nullptr) {
    std::vector<RunMetrics> runs(static_cast<std::size_t>(cfg.n_runs));
    parallel_for(runs.size(), jobs,
                 [&](std::size_t r) { runs[r] = run_trial(cfg, pop, static_cast<int>(r), opt_policy); });
    return runs;
}

/// Pointwise mean and sample standard deviation (n-1) across runs of the
/// paired cumulative-adherence difference after each recruited dyad.
struct ImprovementCurve {
    std::vector<double> mean;
    std::vector<double> sd;
    int n_runs = 0;
};

inline ImprovementCurve cumulative_improvement(const std::vector<RunMetrics>& runs,
                                               const std::vector<RunMetrics>& baseline_runs) {
    DYADRL_CHECK(runs.size() == baseline_runs.size(),
                 "cumulative_improvement: run count mismatch");
    DYADRL_CHECK(!runs.empty(), "cumulative_improvement: no runs");
    const std::size_t n_dyads = runs.front().per_dyad_total.size();
    for (const auto& r : runs)
        DYADRL_CHECK(r.per_dyad_total.size() == n_dyads, "cumulative_improvement: ragged runs");
    for (const auto& r : baseline_runs)
        DYADRL_CHECK(r.per_dyad_total.size() == n_dyads, "cumulative_improvement: ragged baseline");

    ImprovementCurve curve;
    curve.n_runs = static_cast<int>(runs.size());
    curve.mean.resize(n_dyads, 0.0);
    curve.sd.resize(n_dyads, 0.0);
    std::vector<double> diffs(runs.size());
    for (std::size_t k = 0; k < n_dyads; ++k) {
        double mean = 0.0;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            diffs[r] = static_cast<double>(runs[r].cumulative(static_cast<int>(k) + 1)) -
                       static_cast<double>(baseline_runs[r].cumulative(static_cast<int>(k) + 1));
            mean += diffs[r];
        }
        mean /= static_cast<double>(runs.size());
        double ss = 0.0;
        for (double d : diffs) ss += (d - mean) * (d - mean);
        curve.mean[k] = mean;
        curve.sd[k] = runs.size() > 1
                          ? std::sqrt(ss / static_cast<double>(runs.size() - 1))
                          : 0.0;
    }
    return curve;
}

/// Summary statistics of end-of-trial adherence across runs.
struct EndOfTrialStats {
    double mean_total = 0.0;
    double sd_total = 0.0;
    int n_runs = 0;
};

inline EndOfTrialStats end_of_trial_stats(const std::vector<RunMetrics>& runs) {
    EndOfTrialStats s;
    s.n_runs = static_cast<int>(runs.size());
    if (runs.empty()) return s;
    for (const auto& r : runs) s.mean_total += r.total();
    s.mean_total /= static_cast<double>(runs.size());
    double ss = 0.0;
    for (const auto& r : runs) {
        const double d = r.total() - s.mean_total;
        ss += d * d;
    }
    s.sd_total = runs.size() > 1 ? std::sqrt(ss / static_cast<double>(runs.size() - 1)) : 0.0;
    return s;
}

/// Standard error of the difference between two across-run means.
inline double pooled_se(const EndOfTrialStats& a, const EndOfTrialStats& b) {
    return std::sqrt(a.sd_total * a.sd_total / a.n_runs + b.sd_total * b.sd_total / b.n_runs);
}

}  // namespace dyadrl
