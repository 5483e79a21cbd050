#include <doctest.h>

#include <cmath>

#include "dyadrl/rl_core.hpp"
#include "oracles.hpp"

using namespace dyadrl;

namespace {

FeatureMap intercept_action_features() {
    FeatureMap f;
    f.dim = 2;
    f.eval = [](const Vec&, const Action& a) { return Vec{1.0, static_cast<double>(a[0])}; };
    return f;
}

}  // namespace

TEST_CASE("ridge_posterior with no data returns the prior") {
    Mat x(0, 3);
    const Vec prior{1.0, -2.0, 0.5};
    const GaussianPosterior post = ridge_posterior(x, {}, 2.0, 0.5, prior);
    for (int i = 0; i < 3; ++i) {
        CHECK(post.mean[i] == doctest::Approx(prior[i]).epsilon(1e-12));
        CHECK(post.covariance(i, i) == doctest::Approx(0.5).epsilon(1e-12));
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(post.covariance(i, j)) < 1e-12);
    }
}

TEST_CASE("ridge_posterior hand example: X=[[1]], y=[1], sigma=1, lambda=1") {
    Mat x(1, 1);
    x(0, 0) = 1.0;
    const GaussianPosterior post = ridge_posterior(x, {1.0}, 1.0, 1.0, {0.0});
    CHECK(post.mean[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ridge_posterior matches an independent normal-equation solve") {
    Rng rng(314159);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = rng.next_u64() % 21;
        const std::size_t d = 1 + rng.next_u64() % 8;
        Mat x(n, d);
        for (auto& v : x.a) v = rng.gaussian();
        Vec y(n);
        for (auto& v : y) v = rng.gaussian();
        Vec prior(d);
        for (auto& v : prior) v = rng.gaussian();
        const double lambda = 0.25 + rng.uniform() * 2.0;
        const double sigma = 0.3 + rng.uniform();

        const GaussianPosterior post = ridge_posterior(x, y, lambda, sigma, prior);
        const Vec oracle = oracles::ridge_mean_by_normal_equations(x, y, lambda, sigma, prior);
        for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(post.mean[i] - oracle[i]) < 1e-10);

        // Covariance must be symmetric and SPD (Cholesky succeeds).
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                CHECK(std::abs(post.covariance(i, j) - post.covariance(j, i)) < 1e-10);
        CHECK_NOTHROW(cholesky(post.covariance));
    }
}

TEST_CASE("large lambda shrinks the mean toward the prior") {
    Rng rng(99);
    Mat x(12, 4);
    for (auto& v : x.a) v = rng.gaussian();
    Vec y(12);
    for (auto& v : y) v = 3.0 + rng.gaussian();
    const Vec prior{-1.0, 2.0, 0.0, 1.0};

    double prev = 1e300;
    for (double lambda : {1.0, 10.0, 1000.0}) {
        const GaussianPosterior post = ridge_posterior(x, y, lambda, 0.5, prior);
        double dist = 0.0;
        for (int i = 0; i < 4; ++i) dist += (post.mean[i] - prior[i]) * (post.mean[i] - prior[i]);
        CHECK(dist < prev);
        prev = dist;
    }
}

TEST_CASE("greedy_action tie-breaks toward the smallest action") {
    const FeatureMap f = intercept_action_features();
    CHECK(greedy_action(f, {0.0, 0.0}, {}, binary_action_set()) == Action{0});
    CHECK(greedy_action(f, {0.0, 1.0}, {}, binary_action_set()) == Action{1});

    FeatureMap joint;
    joint.dim = 4;
    joint.eval = [](const Vec&, const Action& a) {
        return Vec{1.0, static_cast<double>(a[0]), static_cast<double>(a[1]),
                   static_cast<double>(a[2])};
    };
    CHECK(greedy_action(joint, {5.0, 0.0, 0.0, 0.0}, {}, joint_action_set()) ==
          Action{0, 0, 0});
    CHECK_THROWS_AS(greedy_action(joint, {0, 0, 0, 0}, {}, {}), ContractViolation);
}

TEST_CASE("greedy_action agrees with brute-force enumeration and is scale invariant") {
    Rng rng(2718);
    FeatureMap joint;
    joint.dim = 4;
    joint.eval = [](const Vec& s, const Action& a) {
        return Vec{s[0], static_cast<double>(a[0]) * s[0], static_cast<double>(a[1]),
                   static_cast<double>(a[2]) - static_cast<double>(a[0] * a[1])};
    };
    const auto actions = joint_action_set();
    for (int trial = 0; trial < 50; ++trial) {
        Vec theta(4), s{1.0 + rng.gaussian()};
        for (auto& v : theta) v = rng.gaussian();

        const Action fast = greedy_action(joint, theta, s, actions);
        const Action* best = nullptr;
        double best_v = -1e300;
        for (const Action& a : actions) {
            const double v = dot(joint(s, a), theta);
            if (v > best_v) {
                best_v = v;
                best = &a;
            }
        }
        CHECK(fast == *best);

        Vec scaled = theta;
        for (auto& v : scaled) v *= 7.5;
        CHECK(greedy_action(joint, scaled, s, actions) == fast);
    }
}

TEST_CASE("rlsvi with gamma = 0 and no data samples from the prior") {
    const int n_draws = 4000;
    Vec sum(2, 0.0), sum_sq(2, 0.0);
    Rng rng(31);
    for (int i = 0; i < n_draws; ++i) {
        AgentState agent(intercept_action_features(), binary_action_set(), 0.0, 0.75, 0.5);
        agent.rlsvi_step(rng);
        for (int p = 0; p < 2; ++p) {
            CHECK(agent.theta[p] == agent.perturb_w[p]);  // mean is zero
            sum[p] += agent.theta[p];
            sum_sq[p] += agent.theta[p] * agent.theta[p];
        }
    }
    for (int p = 0; p < 2; ++p) {
        const double mean = sum[p] / n_draws;
        const double var = sum_sq[p] / n_draws - mean * mean;
        const double want_var = 1.0 / 0.75;
        CHECK(std::abs(mean) < 4.0 * std::sqrt(want_var / n_draws));
        CHECK(std::abs(var - want_var) < 0.15 * want_var);
    }
}

TEST_CASE("rlsvi with gamma = 0 regresses on raw rewards") {
    AgentState agent(intercept_action_features(), binary_action_set(), 0.0, 0.75, 0.5);
    Rng rng(8);
    const double rewards[] = {1.0, 0.0, 1.0, 1.0, 0.0, 1.0};
    for (double r : rewards) {
        agent.observe({0.0});
        agent.record({1}, r);
    }
    agent.observe({0.0});
    agent.rlsvi_step(rng);

    Mat x(6, 2);
    Vec y(6);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = 1.0;
        y[i] = rewards[i];
    }
    const Vec oracle = oracles::ridge_mean_by_normal_equations(x, y, 0.75, 0.5, {0.0, 0.0});
    // theta = mean + w, so theta - w recovers the regression mean.
    for (int p = 0; p < 2; ++p)
        CHECK(agent.theta[p] - agent.perturb_w[p] == doctest::Approx(oracle[p]).epsilon(1e-9));
}

TEST_CASE("rlsvi targets bootstrap through the stored theta") {
    // Two transitions; gamma = 0.5. After forcing theta to a known value,
    // targets must be r_i + gamma * max_a <phi(s_{i+1}, a), theta>.
    AgentState agent(intercept_action_features(), binary_action_set(), 0.5, 0.75, 0.5);
    agent.observe({0.0});
    agent.record({0}, 1.0);
    agent.observe({0.0});
    agent.record({1}, 0.0);
    agent.observe({0.0});
    agent.theta = {1.0, 2.0};  // max over a in {0,1}: <(1,a), theta> = 3

    Rng rng(77);
    AgentState copy = agent;
    copy.rlsvi_step(rng);

    Mat x(2, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 0.0;
    x(1, 0) = 1.0;
    x(1, 1) = 1.0;
    const Vec y{1.0 + 0.5 * 3.0, 0.0 + 0.5 * 3.0};
    const Vec oracle = oracles::ridge_mean_by_normal_equations(x, y, 0.75, 0.5, {0.0, 0.0});
    for (int p = 0; p < 2; ++p)
        CHECK(copy.theta[p] - copy.perturb_w[p] == doctest::Approx(oracle[p]).epsilon(1e-9));
}

TEST_CASE("perturbation draw tracks gamma * w_old with variance (1-gamma^2) Sigma") {
    AgentState base(intercept_action_features(), binary_action_set(), 0.5, 0.75, 0.5);
    Rng data_rng(5);
    for (int i = 0; i < 20; ++i) {
        base.observe({0.0});
        base.record({data_rng.bernoulli(0.5)}, data_rng.uniform());
    }
    base.observe({0.0});
    base.perturb_w = {0.8, -0.4};
    base.theta = {0.1, 0.2};

    const GaussianPosterior post = base.posterior();
    const int n_draws = 4000;
    Vec sum(2, 0.0), sum_sq(2, 0.0);
    Rng rng(1234);
    for (int i = 0; i < n_draws; ++i) {
        AgentState a = base;
        a.rlsvi_step(rng);
        for (int p = 0; p < 2; ++p) {
            sum[p] += a.perturb_w[p];
            sum_sq[p] += a.perturb_w[p] * a.perturb_w[p];
        }
    }
    for (int p = 0; p < 2; ++p) {
        const double want_mean = 0.5 * base.perturb_w[p];
        const double want_var = (1.0 - 0.25) * post.covariance(p, p);
        const double mean = sum[p] / n_draws;
        const double var = sum_sq[p] / n_draws - mean * mean;
        CHECK(std::abs(mean - want_mean) < 3.5 * std::sqrt(want_var / n_draws));
        CHECK(std::abs(var - want_var) < 0.12 * want_var);
    }
}

TEST_CASE("rlsvi output does not depend on how the dataset was stored") {
    Rng data_rng(90);
    AgentState streamed(intercept_action_features(), binary_action_set(), 0.5, 0.75, 0.5);
    std::vector<Transition> transitions;
    for (int i = 0; i < 15; ++i) {
        const Vec s{data_rng.gaussian()};
        const Action a{data_rng.bernoulli(0.5)};
        const double r = data_rng.uniform();
        streamed.observe(s);
        streamed.record(a, r);
        transitions.push_back({s, a, r});
    }
    const Vec trailing{data_rng.gaussian()};
    streamed.observe(trailing);

    AgentState rebuilt(intercept_action_features(), binary_action_set(), 0.5, 0.75, 0.5);
    for (const auto& t : transitions) {
        rebuilt.observe(t.state);
        rebuilt.record(t.action, t.reward);
    }
    rebuilt.observe(trailing);
    rebuilt.rebuild_caches();

    Rng rng_a(555), rng_b(555);
    streamed.rlsvi_step(rng_a);
    rebuilt.rlsvi_step(rng_b);
    for (std::size_t p = 0; p < streamed.theta.size(); ++p) {
        CHECK(streamed.theta[p] == rebuilt.theta[p]);
        CHECK(streamed.perturb_w[p] == rebuilt.perturb_w[p]);
    }
}
