#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "entinav/sim.hpp"

using namespace entinav;

namespace {

WorldGeometry open_world(double half = 50.0) {
    WorldGeometry w;
    w.bounds = {-half, -half, half, half};
    return w;
}

AgentState agent(int id, Vec2 pos, Vec2 vel, Vec2 goal, double radius = 0.25) {
    AgentState a;
    a.id = id;
    a.position = pos;
    a.current_velocity = vel;
    a.preferred_velocity = vel;
    a.goal = goal;
    a.radius = radius;
    return a;
}

} // namespace

TEST_CASE("group preferred velocity blends goal and centroid directions") {
    AgentState a = agent(0, {0, 0}, {0, 0}, {10, 0});

    SECTION("at the centroid the goal direction wins for any cohesion") {
        for (double c : {0.0, 0.3, 1.0}) {
            const Vec2 v = group_preferred_velocity(a, a.position, c, 1.5);
            CHECK(v.x == Catch::Approx(1.5));
            CHECK(v.y == Catch::Approx(0.0));
        }
    }
    SECTION("zero cohesion degenerates to the goal direction") {
        const Vec2 v = group_preferred_velocity(a, {0.0, 5.0}, 0.0, 1.5);
        CHECK(v.x == Catch::Approx(1.5));
        CHECK(v.y == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("full cohesion points at the centroid") {
        const Vec2 v = group_preferred_velocity(a, {0.0, 5.0}, 1.0, 1.5);
        CHECK(v.x == Catch::Approx(0.0).margin(1e-12));
        CHECK(v.y == Catch::Approx(1.5));
    }
    SECTION("arrived and at centroid yields zero") {
        AgentState b = agent(1, {2, 2}, {0, 0}, {2, 2});
        const Vec2 v = group_preferred_velocity(b, {2, 2}, 0.7, 1.5);
        CHECK(norm(v) == 0.0);
    }
    SECTION("opposing unit directions cancel back to the goal direction") {
        // goal east, centroid west, cohesion 0.5: the blend cancels exactly
        const Vec2 v = group_preferred_velocity(a, {-5.0, 0.0}, 0.5, 1.5);
        CHECK(v.x == Catch::Approx(1.5));
        CHECK(v.y == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("lone agent prediction extends the current velocity") {
    CrowdState crowd;
    crowd.agents.push_back(agent(3, {1.0, 2.0}, {0.8, -0.4}, {0, 0}));
    std::map<int, MotionParams> params{{3, MotionParams{}}};
    const Prediction pred = predict(crowd, params, open_world(), 2.0, 0.1);
    REQUIRE(pred.tracks.count(3) == 1);
    const auto& track = pred.tracks.at(3);
    REQUIRE(static_cast<int>(track.positions.size()) == 20);
    const Vec2 last = track.positions.back();
    CHECK(last.x == Catch::Approx(1.0 + 2.0 * 0.8).margin(1e-9));
    CHECK(last.y == Catch::Approx(2.0 - 2.0 * 0.4).margin(1e-9));
}

TEST_CASE("same-model prediction equals the simulation rollout exactly") {
    // a small crossing crowd rolled 5 s ahead by both code paths
    CrowdState crowd;
    std::map<int, MotionParams> params;
    std::set<int> ids;
    std::map<int, Vec2> goals;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 6; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const Vec2 g{-p.x + u(rng) * 0.2, -p.y + u(rng) * 0.2};
        crowd.agents.push_back(agent(i, p, {0, 0}, g));
        params[i] = MotionParams{};
        ids.insert(i);
        goals[i] = g;
    }
    const WorldGeometry world = open_world();
    const Prediction pred = predict(crowd, params, world, 5.0, 0.1, &goals);

    CrowdState sim = crowd;
    for (int k = 0; k < 50; ++k) {
        sim = crowd_substep(sim, params, world, 0.1, ids);
        for (const AgentState& a : sim.agents) {
            const Vec2 predicted = pred.tracks.at(a.id).positions[k];
            CHECK(std::abs(predicted.x - a.position.x) <= 1e-12);
            CHECK(std::abs(predicted.y - a.position.y) <= 1e-12);
        }
    }
}

TEST_CASE("head-on pair prediction keeps them separated") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {-4, 0}, {1.5, 0}, {4, 0}, 0.3));
    crowd.agents.push_back(agent(1, {4, 0}, {-1.5, 0}, {-4, 0}, 0.3));
    std::map<int, MotionParams> params{{0, MotionParams{}}, {1, MotionParams{}}};
    std::map<int, Vec2> goals{{0, {4, 0}}, {1, {-4, 0}}};
    const Prediction pred = predict(crowd, params, open_world(), 6.0, 0.1, &goals);
    // rollout distance oracle over the prediction
    for (int k = 0; k < pred.steps(); ++k) {
        const double d =
            distance(pred.tracks.at(0).positions[k], pred.tracks.at(1).positions[k]);
        CHECK(d >= 0.3 + 0.3 - 1e-9);
    }
}

TEST_CASE("prediction rejects bad horizons") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {0, 0}, {1, 0}, {5, 0}));
    std::map<int, MotionParams> params{{0, MotionParams{}}};
    CHECK_THROWS_AS(predict(crowd, params, open_world(), 0.0), input_error);
    CHECK_THROWS_AS(predict(crowd, params, open_world(), -1.0), input_error);
}

TEST_CASE("crowd steps conserve agent count and ids") {
    CrowdState crowd;
    std::map<int, MotionParams> params;
    std::set<int> ids;
    for (int i = 0; i < 10; ++i) {
        crowd.agents.push_back(agent(i * 7, {static_cast<double>(i), 0.0}, {0, 0},
                                     {static_cast<double>(i), 5.0}));
        params[i * 7] = MotionParams{};
        ids.insert(i * 7);
    }
    const CrowdState next = crowd_substep(crowd, params, open_world(), 0.1, ids);
    REQUIRE(next.agents.size() == crowd.agents.size());
    for (std::size_t i = 0; i < next.agents.size(); ++i)
        CHECK(next.agents[i].id == crowd.agents[i].id);
    CHECK(next.time == Catch::Approx(crowd.time + 0.1));
}

TEST_CASE("higher cohesion never loosens a walking group") {
    // open-field group walk at three cohesion levels, fixed seeds; steady-state
    // mean member-to-centroid distance must be monotone non-increasing
    const WorldGeometry world = open_world(60.0);
    auto mean_spread = [&](double cohesion, unsigned seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        CrowdState crowd;
        std::map<int, MotionParams> params;
        for (int i = 0; i < 5; ++i) {
            const Vec2 p{-20.0 + u(rng), u(rng)};
            crowd.agents.push_back(agent(i, p, {0, 0}, {40.0, 0.0}));
            MotionParams mp;
            mp.group_cohesion = cohesion;
            params[i] = mp;
        }
        double acc = 0.0;
        int samples = 0;
        for (int step = 0; step < 250; ++step) {
            Vec2 centroid{0, 0};
            for (const AgentState& a : crowd.agents) centroid += a.position;
            centroid = centroid / 5.0;
            CrowdState work = crowd;
            for (AgentState& a : work.agents)
                a.preferred_velocity = group_preferred_velocity(a, centroid, cohesion, 1.5);
            const RvoStepResult res = rvo_step(work, params, world, 0.1);
            CrowdState next;
            next.time = work.time + 0.1;
            for (const AgentState& a : work.agents)
                next.agents.push_back(integrate(a, res.velocities.at(a.id), 0.1));
            crowd = next;
            if (step >= 150) {
                Vec2 c{0, 0};
                for (const AgentState& a : crowd.agents) c += a.position;
                c = c / 5.0;
                for (const AgentState& a : crowd.agents) acc += distance(a.position, c);
                samples += 5;
            }
        }
        return acc / samples;
    };

    for (unsigned seed : {1u, 2u, 3u}) {
        const double loose = mean_spread(0.1, seed);
        const double mid = mean_spread(0.5, seed);
        const double tight = mean_spread(1.0, seed);
        CHECK(mid <= loose + 0.05);
        CHECK(tight <= mid + 0.05);
    }
}
