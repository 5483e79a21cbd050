#include <doctest.h>

#include <cmath>

#include "dyadrl/features.hpp"
#include "dyadrl/rng.hpp"

using namespace dyadrl;

TEST_CASE("state vectors have the documented lengths") {
    DyadObs o;
    CHECK(build_features(AgentKind::Aya, o).size() == kAyaStateDim);
    CHECK(build_features(AgentKind::Care, o).size() == kCareStateDim);
    CHECK(build_features(AgentKind::Rel, o).size() == kRelStateDim);
    CHECK(build_features(AgentKind::Single, o).size() == kSingleStateDim);
}

TEST_CASE("feature maps have dims 10 / 10 / 12 / 40") {
    CHECK(interaction_features(kAyaStateDim).dim == kAyaFeatureDim);
    CHECK(interaction_features(kCareStateDim).dim == kCareFeatureDim);
    CHECK(interaction_features(kRelStateDim).dim == kRelFeatureDim);
    CHECK(joint_interaction_features(kSingleStateDim).dim == kSingleFeatureDim);

    const FeatureMap f = interaction_features(kAyaStateDim);
    const Vec phi = f({1.0, 2.0, 3.0, 4.0}, {1});
    CHECK(phi == Vec{1.0, 1.0, 2.0, 3.0, 4.0, 1.0, 1.0, 2.0, 3.0, 4.0});
    const Vec phi0 = f({1.0, 2.0, 3.0, 4.0}, {0});
    CHECK(phi0 == Vec{1.0, 1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("joint feature layout is (1, s, a1, a2, a3, s a1, s a2, s a3)") {
    const FeatureMap f = joint_interaction_features(2);
    const Vec phi = f({2.0, 3.0}, {1, 0, 1});
    CHECK(phi == Vec{1.0, 2.0, 3.0, 1.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 2.0, 3.0});
}

TEST_CASE("first-decision features take the documented initial values") {
    DyadObs o;  // default-initialized = initial observation state
    const Vec aya = build_features(AgentKind::Aya, o);
    CHECK(aya == Vec{0.0, 0.0, 0.0, 0.0});
    const Vec rel = build_features(AgentKind::Rel, o);
    CHECK(rel == Vec{0.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("closed-form max matches action-set enumeration") {
    Rng rng(606);
    for (int trial = 0; trial < 200; ++trial) {
        const int sd = 1 + static_cast<int>(rng.next_u64() % 9);
        Vec s(static_cast<std::size_t>(sd));
        for (auto& v : s) v = rng.gaussian();

        const FeatureMap f2 = interaction_features(sd);
        Vec theta2(static_cast<std::size_t>(f2.dim));
        for (auto& v : theta2) v = rng.gaussian();
        double best2 = -1e300;
        for (const Action& a : binary_action_set()) best2 = std::max(best2, dot(f2(s, a), theta2));
        CHECK(f2.max_value(s.data(), s.size(), theta2) ==
              doctest::Approx(best2).epsilon(1e-12));

        const FeatureMap f8 = joint_interaction_features(sd);
        Vec theta8(static_cast<std::size_t>(f8.dim));
        for (auto& v : theta8) v = rng.gaussian();
        double best8 = -1e300;
        for (const Action& a : joint_action_set()) best8 = std::max(best8, dot(f8(s, a), theta8));
        CHECK(f8.max_value(s.data(), s.size(), theta8) ==
              doctest::Approx(best8).epsilon(1e-12));
    }
}

TEST_CASE("feature vectors pull the right observation fields") {
    DyadObs o;
    o.last_adherence = 1;
    o.b_aya = 0.7;
    o.y_rel_last = 1;
    o.a_rel_week = 1;
    o.distress_prev_day = -0.4;
    o.b_care = 0.2;
    o.ybar_aya_prev = 5.5;
    o.ybar_care_prev = -1.5;
    o.b_aya_week_start = 0.3;
    o.b_care_week_start = 0.1;
    o.a_care_day = 1;
    o.last_distress = 9.9;  // must not leak into any feature vector

    CHECK(build_features(AgentKind::Aya, o) == Vec{1.0, 0.7, 1.0, 1.0});
    CHECK(build_features(AgentKind::Care, o) == Vec{-0.4, 0.2, 1.0, 1.0});
    CHECK(build_features(AgentKind::Rel, o) == Vec{1.0, 0.3, 0.1, 5.5, -1.5});
    CHECK(build_features(AgentKind::Single, o) ==
          Vec{-0.4, 1.0, 1.0, 5.5, -1.5, 0.7, 0.2, 1.0, 1.0});
}
