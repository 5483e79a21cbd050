#pragma once

#include <optional>

#include "dyadrl/errors.hpp"

namespace dyadrl {

inline constexpr int kWeeksPerTrial = 14;
inline constexpr int kDaysPerWeek = 7;
inline constexpr int kSlotsPerDay = 2;
inline constexpr int kSlotsPerWeek = kDaysPerWeek * kSlotsPerDay;
inline constexpr int kSlotsPerTrial = kWeeksPerTrial * kSlotsPerWeek;  // 196

/// Position of a decision time within the 14-week trial:
/// week 1..14, day 1..7, slot 1 (AM) or 2 (PM).
struct ClockIndex {
    int week = 1;
    int day = 1;
    int slot = 1;

    bool is_week_start() const { return day == 1 && slot == 1; }
    bool is_day_start() const { return slot == 1; }
    bool is_week_end() const { return day == kDaysPerWeek && slot == kSlotsPerDay; }
    bool is_trial_end() const { return week == kWeeksPerTrial && is_week_end(); }

    /// Decision-window indicator: 0 for AM, 1 for PM.
    int window() const { return slot == 1 ? 0 : 1; }

    /// Zero-based linear index in [0, 196).
    int linear() const {
        return (week - 1) * kSlotsPerWeek + (day - 1) * kSlotsPerDay + (slot - 1);
    }

    static ClockIndex from_linear(int idx) {
        DYADRL_CHECK(idx >= 0 && idx < kSlotsPerTrial, "ClockIndex: linear index out of range");
        return {idx / kSlotsPerWeek + 1, (idx % kSlotsPerWeek) / kSlotsPerDay + 1,
                idx % kSlotsPerDay + 1};
    }

    /// Next decision time, wrapping slot -> day -> week. Past the trial end
    /// the clock keeps counting weeks; callers stop at kSlotsPerTrial.
    ClockIndex successor() const {
        ClockIndex n = *this;
        if (++n.slot > kSlotsPerDay) {
            n.slot = 1;
            if (++n.day > kDaysPerWeek) {
                n.day = 1;
                ++n.week;
            }
        }
        return n;
    }

    ClockIndex predecessor() const {
        ClockIndex p = *this;
        if (--p.slot < 1) {
            p.slot = kSlotsPerDay;
            if (--p.day < 1) {
                p.day = kDaysPerWeek;
                --p.week;
            }
        }
        return p;
    }

    bool operator==(const ClockIndex&) const = default;
};

/// Binary decisions valid at one decision time. The carepartner action
/// exists only at day starts, the relationship action only at week starts.
struct ActionBundle {
    int a_aya = 0;
    std::optional<int> a_care;
    std::optional<int> a_rel;

    void validate(const ClockIndex& clock) const {
        DYADRL_CHECK(a_aya == 0 || a_aya == 1, "ActionBundle: a_aya must be binary");
        DYADRL_CHECK(a_care.has_value() == clock.is_day_start(),
                     "ActionBundle: a_care present iff slot = 1");
        DYADRL_CHECK(a_rel.has_value() == clock.is_week_start(),
                     "ActionBundle: a_rel present iff day = 1 and slot = 1");
        if (a_care) DYADRL_CHECK(*a_care == 0 || *a_care == 1, "ActionBundle: a_care binary");
        if (a_rel) DYADRL_CHECK(*a_rel == 0 || *a_rel == 1, "ActionBundle: a_rel binary");
    }

    /// Bundle for `clock` from prevailing per-component values.
    static ActionBundle at(const ClockIndex& clock, int aya, int care, int rel) {
        ActionBundle b;
        b.a_aya = aya;
        if (clock.is_day_start()) b.a_care = care;
        if (clock.is_week_start()) b.a_rel = rel;
        return b;
    }
};

}  // namespace dyadrl
