#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dyadrl/errors.hpp"
#include "dyadrl/linalg.hpp"
#include "dyadrl/rng.hpp"

namespace dyadrl {

/// A discrete action, one binary entry per component the agent controls.
using Action = std::vector<int>;

/// Deterministic feature construction phi(state, action) -> R^dim.
struct FeatureMap {
    int dim = 0;
    std::function<Vec(const Vec&, const Action&)> eval;

    /// Optional closed form for max_a <phi(state, a), theta> over the
    /// agent's full action set. Interaction maps factor per action
    /// component, which turns the 2^k candidate scan into k hinge terms.
    std::function<double(const double* state, std::size_t state_dim, const Vec& theta)> max_value;

    Vec operator()(const Vec& state, const Action& action) const {
        Vec phi = eval(state, action);
        DYADRL_CHECK(static_cast<int>(phi.size()) == dim, "FeatureMap: wrong output length");
        return phi;
    }
};

struct GaussianPosterior {
    Vec mean;
    Mat covariance;
};

/// Residual tolerance scale for the normal-equation solves: relative to the
/// right-hand side so the check is meaningful for pooled datasets whose
/// Gram entries reach 1e6.
inline double rhs_scale(const Vec& rhs) {
    double scale = 1.0;
    for (double v : rhs) scale = std::max(scale, std::abs(v));
    return scale;
}

/// Bayesian ridge posterior for y = X b + noise with noise scale `sigma`,
/// prior b ~ N(prior_mean, I / lambda):
///   covariance = (X^T X / sigma^2 + lambda I)^{-1}
///   mean       = covariance (X^T y / sigma^2 + lambda prior_mean)
/// n = 0 rows collapses to the prior exactly.
inline GaussianPosterior ridge_posterior(const Mat& x, const Vec& y, double lambda, double sigma,
                                         const Vec& prior_mean) {
    DYADRL_CHECK(lambda > 0.0, "ridge_posterior: lambda must be > 0");
    DYADRL_CHECK(sigma > 0.0, "ridge_posterior: sigma must be > 0");
    DYADRL_CHECK(x.rows == y.size(), "ridge_posterior: X/y row mismatch");
    DYADRL_CHECK(x.cols == prior_mean.size(), "ridge_posterior: X/prior dim mismatch");

    const std::size_t d = x.cols;
    const double inv_s2 = 1.0 / (sigma * sigma);

    if (x.rows == 0) {  // prior-only posterior, exactly
        GaussianPosterior post;
        post.mean = prior_mean;
        post.covariance = Mat(d, d);
        for (std::size_t p = 0; p < d; ++p) post.covariance(p, p) = 1.0 / lambda;
        return post;
    }

    Mat precision(d, d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.a.data() + i * d;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p; q < d; ++q) precision(p, q) += row[p] * row[q] * inv_s2;
    }
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = 0; q < p; ++q) precision(p, q) = precision(q, p);
        precision(p, p) += lambda;
    }

    Vec rhs(d, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.a.data() + i * d;
        for (std::size_t p = 0; p < d; ++p) rhs[p] += row[p] * y[i] * inv_s2;
    }
    for (std::size_t p = 0; p < d; ++p) rhs[p] += lambda * prior_mean[p];

    const Mat l = cholesky(precision);
    GaussianPosterior post;
    post.mean = chol_solve(l, rhs);
    DYADRL_CHECK(max_abs_residual(precision, post.mean, rhs) < 1e-8 * rhs_scale(rhs),
                 "ridge_posterior: solve residual too large");
    post.covariance = chol_inverse(l);
    return post;
}

/// Argmax of <phi(state, a), theta> over a finite action set; ties break
/// toward the action that comes first (the sets below are enumerated in
/// lexicographic order, so that is the lexicographically smallest one).
inline Action greedy_action(const FeatureMap& features, const Vec& theta, const Vec& state,
                            const std::vector<Action>& action_set) {
    DYADRL_CHECK(!action_set.empty(), "greedy_action: empty action set");
    const Action* best = &action_set.front();
    double best_v = dot(features(state, *best), theta);
    for (std::size_t i = 1; i < action_set.size(); ++i) {
        const double v = dot(features(state, action_set[i]), theta);
        if (v > best_v) {
            best_v = v;
            best = &action_set[i];
        }
    }
    return *best;
}

inline std::vector<Action> binary_action_set() { return {{0}, {1}}; }

inline std::vector<Action> joint_action_set() {
    std::vector<Action> set;
    for (int a1 = 0; a1 <= 1; ++a1)
        for (int a2 = 0; a2 <= 1; ++a2)
            for (int a3 = 0; a3 <= 1; ++a3) set.push_back({a1, a2, a3});
    return set;
}

struct Transition {
    Vec state;
    Action action;
    double reward = 0.0;
};

/// One value-function learner: replay data, sampled parameter theta, and the
/// temporally correlated exploration perturbation.
///
/// The dataset follows the convention (s_i, a_i, r_i)_{i=1..n-1} + trailing
/// state s_n: a transition only enters the regression once its successor
/// state has been observed. `observe` registers the successor, `record`
/// appends the acted transition.
class AgentState {
public:
    FeatureMap features;
    std::vector<Action> action_set;
    double gamma = 0.5;
    double lambda = 0.75;
    double sigma = 0.5;

    Vec theta;
    Vec perturb_w;

    AgentState() = default;
    AgentState(FeatureMap f, std::vector<Action> actions, double discount, double lam = 0.75,
               double sig = 0.5)
        : features(std::move(f)),
          action_set(std::move(actions)),
          gamma(discount),
          lambda(lam),
          sigma(sig),
          theta(features.dim, 0.0),
          perturb_w(features.dim, 0.0),
          gram_(features.dim, features.dim) {
        DYADRL_CHECK(gamma >= 0.0 && gamma < 1.0, "AgentState: gamma must be in [0,1)");
    }

    const std::vector<Transition>& dataset() const { return dataset_; }
    std::size_t regression_rows() const { return complete_rows_; }
    const std::optional<Vec>& pending_state() const { return pending_state_; }

    /// Register the state the agent currently faces. Completes the previous
    /// transition (its successor is now known) and becomes the trailing state.
    void observe(Vec state) {
        DYADRL_CHECK(static_cast<int>(state.size()) == state_dim_or(state.size()),
                     "AgentState: inconsistent state length");
        if (complete_rows_ < dataset_.size()) complete_last_row(state);
        pending_state_ = std::move(state);
    }

    /// Append (trailing state, action, reward) to the dataset.
    void record(const Action& action, double reward) {
        DYADRL_CHECK(pending_state_.has_value(), "AgentState::record: no observed state");
        Vec phi = features(*pending_state_, action);
        phi_rows_.insert(phi_rows_.end(), phi.begin(), phi.end());
        rewards_.push_back(reward);
        dataset_.push_back({std::move(*pending_state_), action, reward});
        pending_state_.reset();
    }

    Action act_greedy() const {
        DYADRL_CHECK(pending_state_.has_value(), "AgentState::act_greedy: no observed state");
        return greedy_action(features, theta, *pending_state_, action_set);
    }

    /// Rebuild the incremental caches from `dataset()` + pending state.
    /// Used after bulk-loading transitions; produces bit-identical results
    /// to having streamed them through observe/record.
    void rebuild_caches() {
        const int d = features.dim;
        gram_ = Mat(d, d);
        phi_rows_.clear();
        next_rows_.clear();
        next_states_.clear();
        rewards_.clear();
        state_dim_ = 0;
        complete_rows_ = 0;
        std::vector<Transition> data = std::move(dataset_);
        dataset_.clear();
        std::optional<Vec> trailing = std::move(pending_state_);
        pending_state_.reset();
        for (auto& tr : data) {
            observe(std::move(tr.state));
            record(tr.action, tr.reward);
        }
        if (trailing) observe(std::move(*trailing));
    }

    /// One posterior-sampling update:
    ///   targets  y_i = r_i + gamma * max_a <phi(s_{i+1}, a), theta_old>
    ///   ridge    mean/precision with zero prior mean
    ///   sample   w' ~ N(gamma w, (1-gamma^2) Sigma),  theta' = mean + w'
    /// theta_old is the sampled theta from the previous call.
    void rlsvi_step(Rng& rng) {
        const std::size_t d = static_cast<std::size_t>(features.dim);
        const double inv_s2 = 1.0 / (sigma * sigma);

        Mat precision = gram_;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) precision(p, q) *= inv_s2;
            precision(p, p) += lambda;
        }

        Vec rhs(d, 0.0);
        for (std::size_t i = 0; i < complete_rows_; ++i) {
            const double y = rewards_[i] + gamma * best_next_value(i);
            const double* phi = phi_rows_.data() + i * d;
            for (std::size_t p = 0; p < d; ++p) rhs[p] += phi[p] * y;
        }
        for (std::size_t p = 0; p < d; ++p) rhs[p] *= inv_s2;

        const Mat l = cholesky(precision);
        Vec mean = chol_solve(l, rhs);
        DYADRL_CHECK(max_abs_residual(precision, mean, rhs) < 1e-8 * rhs_scale(rhs),
                     "rlsvi_step: solve residual too large");

        // z = L^{-T} eps ~ N(0, precision^{-1}) = N(0, Sigma).
        Vec eps(d);
        for (std::size_t p = 0; p < d; ++p) eps[p] = rng.gaussian();
        const Vec z = backward_solve_transposed(l, eps);
        const double scale = std::sqrt(1.0 - gamma * gamma);
        for (std::size_t p = 0; p < d; ++p) perturb_w[p] = gamma * perturb_w[p] + scale * z[p];
        for (std::size_t p = 0; p < d; ++p) theta[p] = mean[p] + perturb_w[p];
    }

    /// Posterior of the current regression, materialized (for diagnostics
    /// and distribution tests; rlsvi_step itself works in precision space).
    GaussianPosterior posterior() const {
        Mat x(complete_rows_, features.dim);
        Vec y(complete_rows_);
        const std::size_t d = static_cast<std::size_t>(features.dim);
        for (std::size_t i = 0; i < complete_rows_; ++i) {
            for (std::size_t p = 0; p < d; ++p) x(i, p) = phi_rows_[i * d + p];
            y[i] = rewards_[i] + gamma * best_next_value(i);
        }
        return ridge_posterior(x, y, lambda, sigma, Vec(d, 0.0));
    }

private:
    int state_dim_or(std::size_t fallback) const {
        if (!dataset_.empty()) return static_cast<int>(dataset_.front().state.size());
        if (pending_state_) return static_cast<int>(pending_state_->size());
        return static_cast<int>(fallback);
    }

    void complete_last_row(const Vec& successor) {
        const std::size_t d = static_cast<std::size_t>(features.dim);
        const std::size_t i = complete_rows_;
        const double* phi = phi_rows_.data() + i * d;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p; q < d; ++q) gram_(p, q) += phi[p] * phi[q];
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < p; ++q) gram_(p, q) = gram_(q, p);
        if (features.max_value) {
            if (state_dim_ == 0) state_dim_ = successor.size();
            next_states_.insert(next_states_.end(), successor.begin(), successor.end());
        } else {
            for (const Action& a : action_set) {
                Vec cand = features(successor, a);
                next_rows_.insert(next_rows_.end(), cand.begin(), cand.end());
            }
        }
        ++complete_rows_;
    }

    double best_next_value(std::size_t i) const {
        if (features.max_value)
            return features.max_value(next_states_.data() + i * state_dim_, state_dim_, theta);
        const std::size_t d = static_cast<std::size_t>(features.dim);
        const std::size_t n_cand = action_set.size();
        const double* cand = next_rows_.data() + i * n_cand * d;
        double best = dot(cand, theta.data(), d);
        for (std::size_t a = 1; a < n_cand; ++a) {
            const double v = dot(cand + a * d, theta.data(), d);
            if (v > best) best = v;
        }
        return best;
    }

    std::vector<Transition> dataset_;
    std::optional<Vec> pending_state_;

    // Incremental regression caches. gram_ covers completed rows only and is
    // accumulated in row order, so it matches a fresh rebuild bit for bit.
    // Successors are cached as candidate feature rows, or as raw states when
    // the map provides a closed-form max.
    Mat gram_;
    std::vector<double> phi_rows_;
    std::vector<double> next_rows_;
    std::vector<double> next_states_;
    std::vector<double> rewards_;
    std::size_t state_dim_ = 0;
    std::size_t complete_rows_ = 0;
};

}  // namespace dyadrl
