#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "dyadrl/linalg.hpp"
#include "dyadrl/rl_core.hpp"

namespace dyadrl {

inline constexpr double kAgentLambda = 0.75;
inline constexpr double kAgentSigma = 0.5;

/// Covariates of the weekly relationship surrogate:
/// (1, Y_rel_prev, B_aya_week_start, a_rel, a_rel * Y_rel_prev).
inline Vec rel_surrogate_covariates(int y_rel_prev, double b_aya_week_start, int a_rel) {
    return {1.0, static_cast<double>(y_rel_prev), b_aya_week_start, static_cast<double>(a_rel),
            static_cast<double>(a_rel * y_rel_prev)};
}

/// Covariates of the daily carepartner surrogate:
/// (1, distress_today, B_care_next_day, Y_rel_prev, a_care).
inline Vec care_surrogate_covariates(double distress_today, double b_care_next, int y_rel_prev,
                                     int a_care) {
    return {1.0, distress_today, b_care_next, static_cast<double>(y_rel_prev),
            static_cast<double>(a_care)};
}

/// Learned surrogate reward coefficients plus their accumulated regressions.
/// The relationship model predicts the weekly adherence sum; the carepartner
/// model predicts the end-of-week relationship quality (one row per day).
/// With no data the coefficients equal the prior means exactly.
class SurrogateModel {
public:
    static Vec rel_prior() { return {1.0, 1.0, -1.0, -1.0, 0.5}; }
    static Vec care_prior() { return {1.0, -1.0, -1.0, 1.0, -0.5}; }

    SurrogateModel() : beta_rel_(rel_prior()), beta_care_(care_prior()) {}

    const Vec& beta_rel() const { return beta_rel_; }
    const Vec& beta_care() const { return beta_care_; }
    std::size_t rel_rows() const { return rel_y_.size(); }
    std::size_t care_rows() const { return care_y_.size(); }

    void add_rel_row(const Vec& covariates, double weekly_adherence_sum) {
        DYADRL_CHECK(covariates.size() == 5, "surrogate: rel covariates must have length 5");
        rel_x_.insert(rel_x_.end(), covariates.begin(), covariates.end());
        rel_y_.push_back(weekly_adherence_sum);
    }

    void add_care_row(const Vec& covariates, double end_of_week_relationship) {
        DYADRL_CHECK(covariates.size() == 5, "surrogate: care covariates must have length 5");
        care_x_.insert(care_x_.end(), covariates.begin(), covariates.end());
        care_y_.push_back(end_of_week_relationship);
    }

    /// Refit both coefficient vectors to their posterior means.
    void update_coeffs() {
        beta_rel_ = fit(rel_x_, rel_y_, rel_prior());
        beta_care_ = fit(care_x_, care_y_, care_prior());
    }

    /// Weekly relationship surrogate reward: realized term plus a one-step
    /// greedy lookahead over next week's action. `next` is absent for the
    /// final week of the trial, which truncates the horizon to the realized
    /// term alone.
    struct RelLookahead {
        int y_rel_end = 0;           // relationship quality at this week's close
        double b_aya_next_week = 0;  // AYA burden at next week's first slot
    };
    double rel_reward(const Vec& week_covariates, const std::optional<RelLookahead>& next) const {
        double r = dot(week_covariates, beta_rel_);
        if (next) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a <= 1; ++a) {
                const Vec cov = rel_surrogate_covariates(next->y_rel_end, next->b_aya_next_week, a);
                best = std::max(best, dot(cov, beta_rel_));
            }
            r += best;
        }
        return r;
    }

    /// Daily carepartner surrogate reward.
    double care_reward(const Vec& day_covariates) const { return dot(day_covariates, beta_care_); }

private:
    static Vec fit(const std::vector<double>& x_flat, const std::vector<double>& y,
                   const Vec& prior) {
        Mat x(y.size(), 5);
        x.a = x_flat;
        return ridge_posterior(x, Vec(y.begin(), y.end()), kAgentLambda, kAgentSigma, prior).mean;
    }

    Vec beta_rel_;
    Vec beta_care_;
    std::vector<double> rel_x_;
    std::vector<double> rel_y_;
    std::vector<double> care_x_;
    std::vector<double> care_y_;
};

}  // namespace dyadrl
