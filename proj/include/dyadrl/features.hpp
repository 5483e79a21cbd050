#pragma once

#include <algorithm>
#include <vector>

#include "dyadrl/clock.hpp"
#include "dyadrl/env.hpp"
#include "dyadrl/rl_core.hpp"

namespace dyadrl {

/// Everything a policy is allowed to see at a decision time. Maintained by
/// the trajectory runner from env_step outcomes; fields hold the most recent
/// *observed* value (today's distress is not visible until tomorrow, this
/// week's relationship quality not until the week closes).
struct DyadObs {
    int last_adherence = 0;       // previous slot
    double last_distress = 0.0;   // most recent generated daily distress
    double distress_prev_day = 0.0;  // snapshot taken at day start (yesterday's value)
    double b_aya = 0.0;           // standardized burdens at the current slot
    double b_care = 0.0;
    int y_rel_last = 0;           // relationship quality of the last completed week
    int a_rel_week = 0;           // prevailing relationship action
    int a_care_day = 0;           // prevailing carepartner action
    double ybar_aya_prev = 0.0;   // weighted weekly averages of the previous week
    double ybar_care_prev = 0.0;
    double b_aya_week_start = 0.0;   // burdens captured at the current week's first slot
    double b_care_week_start = 0.0;
    double b_care_day_start = 0.0;   // carepartner burden captured at the day's first slot
};

enum class AgentKind { Aya, Care, Rel, Single };

/// Agent-specific state vectors.
///   AYA    (4): previous adherence, AYA burden, relationship quality,
///               relationship action
///   CARE   (4): previous-day distress, carepartner burden, relationship
///               quality, relationship action
///   REL    (5): relationship quality, week-start burdens (both roles),
///               previous week's weighted adherence / distress averages
///   Single (9): previous-day distress, relationship quality, previous
///               adherence, both weekly averages, both burdens, prevailing
///               carepartner and relationship actions
inline Vec build_features(AgentKind kind, const DyadObs& o) {
    switch (kind) {
        case AgentKind::Aya:
            return {static_cast<double>(o.last_adherence), o.b_aya,
                    static_cast<double>(o.y_rel_last), static_cast<double>(o.a_rel_week)};
        case AgentKind::Care:
            return {o.distress_prev_day, o.b_care, static_cast<double>(o.y_rel_last),
                    static_cast<double>(o.a_rel_week)};
        case AgentKind::Rel:
            return {static_cast<double>(o.y_rel_last), o.b_aya_week_start, o.b_care_week_start,
                    o.ybar_aya_prev, o.ybar_care_prev};
        case AgentKind::Single:
            return {o.distress_prev_day,
                    static_cast<double>(o.y_rel_last),
                    static_cast<double>(o.last_adherence),
                    o.ybar_aya_prev,
                    o.ybar_care_prev,
                    o.b_aya,
                    o.b_care,
                    static_cast<double>(o.a_care_day),
                    static_cast<double>(o.a_rel_week)};
    }
    return {};
}

/// phi(s, a) = (1, s, a, s * a) for a single binary action.
inline FeatureMap interaction_features(int state_dim) {
    FeatureMap f;
    f.dim = 1 + 2 * state_dim + 1;
    f.eval = [state_dim](const Vec& s, const Action& a) {
        DYADRL_CHECK(static_cast<int>(s.size()) == state_dim, "feature map: bad state length");
        DYADRL_CHECK(a.size() == 1, "feature map: expected one action component");
        Vec phi;
        phi.reserve(static_cast<std::size_t>(2 * state_dim + 2));
        phi.push_back(1.0);
        phi.insert(phi.end(), s.begin(), s.end());
        const double av = static_cast<double>(a[0]);
        phi.push_back(av);
        for (double v : s) phi.push_back(v * av);
        return phi;
    };
    // max over a in {0,1}: base(s) + max(0, action term).
    f.max_value = [](const double* s, std::size_t sd, const Vec& theta) {
        double base = theta[0];
        for (std::size_t k = 0; k < sd; ++k) base += theta[1 + k] * s[k];
        double act = theta[1 + sd];
        for (std::size_t k = 0; k < sd; ++k) act += theta[2 + sd + k] * s[k];
        return base + std::max(0.0, act);
    };
    return f;
}

/// phi(s, a) = (1, s, a1, a2, a3, s*a1, s*a2, s*a3) for the joint action.
inline FeatureMap joint_interaction_features(int state_dim) {
    FeatureMap f;
    f.dim = 1 + state_dim + 3 + 3 * state_dim;
    f.eval = [state_dim](const Vec& s, const Action& a) {
        DYADRL_CHECK(static_cast<int>(s.size()) == state_dim, "feature map: bad state length");
        DYADRL_CHECK(a.size() == 3, "feature map: expected three action components");
        Vec phi;
        phi.reserve(static_cast<std::size_t>(4 * state_dim + 4));
        phi.push_back(1.0);
        phi.insert(phi.end(), s.begin(), s.end());
        for (int c = 0; c < 3; ++c) phi.push_back(static_cast<double>(a[c]));
        for (int c = 0; c < 3; ++c) {
            const double av = static_cast<double>(a[c]);
            for (double v : s) phi.push_back(v * av);
        }
        return phi;
    };
    // The action components contribute additively, so the max over {0,1}^3
    // is the base term plus one hinge per component.
    f.max_value = [](const double* s, std::size_t sd, const Vec& theta) {
        double value = theta[0];
        for (std::size_t k = 0; k < sd; ++k) value += theta[1 + k] * s[k];
        for (std::size_t j = 0; j < 3; ++j) {
            double g = theta[1 + sd + j];
            const double* block = theta.data() + 1 + sd + 3 + j * sd;
            for (std::size_t k = 0; k < sd; ++k) g += block[k] * s[k];
            value += std::max(0.0, g);
        }
        return value;
    };
    return f;
}

inline constexpr int kAyaStateDim = 4;
inline constexpr int kCareStateDim = 4;
inline constexpr int kRelStateDim = 5;
inline constexpr int kSingleStateDim = 9;

inline constexpr int kAyaFeatureDim = 10;
inline constexpr int kCareFeatureDim = 10;
inline constexpr int kRelFeatureDim = 12;
inline constexpr int kSingleFeatureDim = 40;

}  // namespace dyadrl
