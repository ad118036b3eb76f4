#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "entinav/rvo.hpp"
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

double min_pairwise_gap(const CrowdState& crowd) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < crowd.agents.size(); ++i)
        for (std::size_t j = i + 1; j < crowd.agents.size(); ++j) {
            const AgentState& a = crowd.agents[i];
            const AgentState& b = crowd.agents[j];
            worst = std::min(worst,
                             distance(a.position, b.position) - a.radius - b.radius);
        }
    return worst;
}

} // namespace

TEST_CASE("single agent keeps its preferred velocity") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {0, 0}, {0, 0}, {10, 0}));
    crowd.agents[0].preferred_velocity = {1.5, 0.0};
    std::map<int, MotionParams> params{{0, MotionParams{}}};
    const auto res = rvo_step(crowd, params, open_world(), 0.1);
    CHECK(res.velocities.at(0).x == Catch::Approx(1.5).margin(1e-12));
    CHECK(res.velocities.at(0).y == Catch::Approx(0.0).margin(1e-12));
    CHECK(res.infeasible_ids.empty());
}

TEST_CASE("head-on pair resolves into mirror velocities") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {-2, 0}, {1.5, 0}, {10, 0}, 0.5));
    crowd.agents.push_back(agent(1, {2, 0}, {-1.5, 0}, {-10, 0}, 0.5));
    crowd.agents[0].preferred_velocity = {1.5, 0.0};
    crowd.agents[1].preferred_velocity = {-1.5, 0.0};
    std::map<int, MotionParams> params{{0, MotionParams{}}, {1, MotionParams{}}};
    const auto res = rvo_step(crowd, params, open_world(), 0.1);
    const Vec2 va = res.velocities.at(0);
    const Vec2 vb = res.velocities.at(1);
    CHECK(norm(va) == Catch::Approx(norm(vb)).margin(1e-9));
    CHECK(va.x == Catch::Approx(-vb.x).margin(1e-9));
    CHECK(va.y == Catch::Approx(-vb.y).margin(1e-9));
    CHECK(norm(va) > 0.1); // neither agent stalls
}

TEST_CASE("velocities never exceed the speed cap") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {0, 0}, {0, 0}, {30, 0}));
    crowd.agents[0].preferred_velocity = {10.0, 3.0}; // beyond any cap
    std::map<int, MotionParams> params{{0, MotionParams{}}};
    const auto res = rvo_step(crowd, params, open_world(), 0.1);
    CHECK(norm(res.velocities.at(0)) <= kSpeedCapFactor * params[0].pref_speed + 1e-9);
}

TEST_CASE("results are independent of agent ordering") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    CrowdState crowd;
    std::map<int, MotionParams> params;
    for (int i = 0; i < 12; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const Vec2 g{u(rng), u(rng)};
        AgentState a = agent(i, p, unit(g - p) * 1.5, g);
        a.preferred_velocity = unit(g - p) * 1.5;
        crowd.agents.push_back(a);
        params[i] = MotionParams{};
    }
    const auto res1 = rvo_step(crowd, params, open_world(), 0.1);

    CrowdState shuffled = crowd;
    std::shuffle(shuffled.agents.begin(), shuffled.agents.end(), rng);
    const auto res2 = rvo_step(shuffled, params, open_world(), 0.1);
    for (int i = 0; i < 12; ++i) {
        CHECK(res1.velocities.at(i).x == res2.velocities.at(i).x);
        CHECK(res1.velocities.at(i).y == res2.velocities.at(i).y);
    }
}

TEST_CASE("thread count does not change results") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    CrowdState crowd;
    std::map<int, MotionParams> params;
    for (int i = 0; i < 16; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const Vec2 g{-p.x, -p.y};
        AgentState a = agent(i, p, unit(g - p) * 1.2, g);
        a.preferred_velocity = unit(g - p) * 1.2;
        crowd.agents.push_back(a);
        params[i] = MotionParams{};
    }
    RvoOptions serial;
    serial.threads = 1;
    RvoOptions parallel;
    parallel.threads = 4;
    const auto res1 = rvo_step(crowd, params, open_world(), 0.1, serial);
    const auto res2 = rvo_step(crowd, params, open_world(), 0.1, parallel);
    for (int i = 0; i < 16; ++i) {
        CHECK(res1.velocities.at(i).x == res2.velocities.at(i).x);
        CHECK(res1.velocities.at(i).y == res2.velocities.at(i).y);
    }
}

TEST_CASE("circle of 8 crossing agents never penetrate") {
    CrowdState crowd;
    std::map<int, MotionParams> params;
    std::set<int> ids;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (int i = 0; i < 8; ++i) {
        const double ang = 2.0 * M_PI * i / 8.0;
        const Vec2 p{5.0 * std::cos(ang) + jitter(rng), 5.0 * std::sin(ang) + jitter(rng)};
        const Vec2 g{-5.0 * std::cos(ang), -5.0 * std::sin(ang)};
        crowd.agents.push_back(agent(i, p, {0, 0}, g));
        params[i] = MotionParams{};
        ids.insert(i);
    }
    const WorldGeometry world = open_world(15.0);

    double worst_gap = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 600; ++step) {
        crowd = crowd_substep(crowd, params, world, 0.1, ids);
        worst_gap = std::min(worst_gap, min_pairwise_gap(crowd));
    }
    CHECK(worst_gap >= -1e-6);
    for (const AgentState& a : crowd.agents)
        CHECK(distance(a.position, a.goal) < 1.0); // everyone got through
}

TEST_CASE("agents respect a wall obstacle") {
    WorldGeometry world = open_world(20.0);
    world.obstacles.push_back({{-0.5, -10.0}, {0.5, -10.0}, {0.5, 10.0}, {-0.5, 10.0}});
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {-5, 0}, {1.5, 0}, {5, 0}));
    std::map<int, MotionParams> params{{0, MotionParams{}}};
    std::set<int> ids{0};
    double worst = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 100; ++step) {
        crowd = crowd_substep(crowd, params, world, 0.1, ids);
        worst = std::min(worst,
                         point_polygon_clearance(crowd.agents[0].position, world.obstacles[0]));
    }
    // personal-space radius is what the avoidance model protects
    CHECK(worst >= params[0].radius - 0.05);
}

TEST_CASE("fully blocked agents fall back to least penetration and are flagged") {
    CrowdState crowd;
    // target agent boxed in by four overlapping neighbors
    crowd.agents.push_back(agent(0, {0, 0}, {0, 0}, {10, 0}, 0.4));
    crowd.agents.push_back(agent(1, {0.5, 0.0}, {0, 0}, {0.6, 0}, 0.4));
    crowd.agents.push_back(agent(2, {-0.5, 0.0}, {0, 0}, {-0.6, 0}, 0.4));
    crowd.agents.push_back(agent(3, {0.0, 0.5}, {0, 0}, {0, 0.6}, 0.4));
    crowd.agents.push_back(agent(4, {0.0, -0.5}, {0, 0}, {0, -0.6}, 0.4));
    crowd.agents[0].preferred_velocity = {1.5, 0.0};
    std::map<int, MotionParams> params;
    for (int i = 0; i < 5; ++i) params[i] = MotionParams{};
    const auto res = rvo_step(crowd, params, open_world(), 0.1);
    CHECK(std::find(res.infeasible_ids.begin(), res.infeasible_ids.end(), 0) !=
          res.infeasible_ids.end());
    CHECK(std::isfinite(res.velocities.at(0).x));
}

TEST_CASE("pedestrians shy away from a repulsion disc") {
    CrowdState crowd;
    crowd.agents.push_back(agent(0, {-6, 0}, {1.5, 0}, {6, 0}));
    crowd.agents[0].preferred_velocity = {1.5, 0.0};
    std::map<int, MotionParams> params{{0, MotionParams{}}};
    RvoOptions opts;
    opts.group_disc = RepulsionDisc{{0.0, 0.0}, 2.0};

    std::set<int> ids{0};
    SubstepOptions sub;
    sub.rvo = opts;
    double min_center_dist = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 250; ++step) {
        crowd = crowd_substep(crowd, params, open_world(20.0), 0.1, ids, nullptr, sub);
        min_center_dist = std::min(min_center_dist, norm(crowd.agents[0].position));
    }
    CHECK(min_center_dist >= 2.0 + params[0].radius - 0.15);
    CHECK(distance(crowd.agents[0].position, crowd.agents[0].goal) < 0.5);
}
