#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "entinav/core.hpp"

using namespace entinav;

TEST_CASE("integrate advances position by velocity * dt") {
    AgentState a;
    a.position = {0.0, 0.0};
    AgentState b = integrate(a, {1.0, 0.0}, 0.1);
    CHECK(b.position.x == Catch::Approx(0.1));
    CHECK(b.position.y == Catch::Approx(0.0));
    CHECK(b.current_velocity.x == 1.0);

    a.position = {2.0, 3.0};
    b = integrate(a, {-1.0, 2.0}, 0.5);
    CHECK(b.position.x == Catch::Approx(1.5));
    CHECK(b.position.y == Catch::Approx(4.0));
}

TEST_CASE("integrate with zero velocity keeps the position") {
    AgentState a;
    a.position = {4.2, -1.0};
    const AgentState b = integrate(a, {0.0, 0.0}, 0.7);
    CHECK(b.position == a.position);
}

TEST_CASE("integrate rejects bad input") {
    AgentState a;
    CHECK_THROWS_AS(integrate(a, {1.0, 0.0}, 0.0), input_error);
    CHECK_THROWS_AS(integrate(a, {1.0, 0.0}, -0.1), input_error);
    CHECK_THROWS_AS(integrate(a, {std::nan(""), 0.0}, 0.1), input_error);
}

TEST_CASE("integrate leaves other fields untouched") {
    AgentState a;
    a.id = 7;
    a.kind = AgentKind::robot;
    a.radius = 0.4;
    a.goal = {9.0, 9.0};
    const AgentState b = integrate(a, {1.0, 1.0}, 0.1);
    CHECK(b.id == 7);
    CHECK(b.kind == AgentKind::robot);
    CHECK(b.radius == 0.4);
    CHECK(b.goal == a.goal);
}

namespace {

CrowdState make_crowd(const std::vector<Vec2>& positions) {
    CrowdState crowd;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        AgentState a;
        a.id = static_cast<int>(i);
        a.position = positions[i];
        crowd.agents.push_back(a);
    }
    return crowd;
}

// independent oracle: full pairwise scan + stable sort by (distance, id)
std::vector<int> brute_force_neighbors(const CrowdState& crowd, int id, double dist,
                                       int max_n) {
    const AgentState& self = crowd.at(id);
    std::vector<std::pair<double, int>> all;
    for (const AgentState& a : crowd.agents)
        if (a.id != id && distance(a.position, self.position) <= dist)
            all.emplace_back(distance(a.position, self.position), a.id);
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    for (const auto& [d, i] : all) {
        if (static_cast<int>(out.size()) >= max_n) break;
        out.push_back(i);
    }
    return out;
}

} // namespace

TEST_CASE("neighbors: lone agent has none") {
    const CrowdState crowd = make_crowd({{0.0, 0.0}});
    CHECK(neighbors(crowd, 0, 5.0, 10).empty());
}

TEST_CASE("neighbors: threshold excludes the far agent") {
    const CrowdState crowd = make_crowd({{0.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}});
    const auto n = neighbors(crowd, 0, 3.0, 10);
    REQUIRE(n.size() == 1);
    CHECK(n[0] == 1);
}

TEST_CASE("neighbors: truncation keeps the 10 closest of 12") {
    std::vector<Vec2> pos{{0.0, 0.0}};
    for (int i = 1; i <= 12; ++i) pos.push_back({0.1 * i, 0.0});
    const CrowdState crowd = make_crowd(pos);
    const auto got = neighbors(crowd, 0, 5.0, 10);
    const auto expect = brute_force_neighbors(crowd, 0, 5.0, 10);
    CHECK(got == expect);
    CHECK(got.size() == 10);
    CHECK(got.front() == 1);
    CHECK(got.back() == 10);
}

TEST_CASE("neighbors: unknown id raises not_found") {
    const CrowdState crowd = make_crowd({{0.0, 0.0}});
    CHECK_THROWS_AS(neighbors(crowd, 99, 5.0, 10), not_found_error);
}

TEST_CASE("neighbors matches the brute-force oracle on random crowds") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec2> pos;
        for (int i = 0; i < 25; ++i) pos.push_back({u(rng), u(rng)});
        const CrowdState crowd = make_crowd(pos);
        for (int id = 0; id < 25; id += 5)
            CHECK(neighbors(crowd, id, 6.0, 7) == brute_force_neighbors(crowd, id, 6.0, 7));
    }
}

TEST_CASE("neighbor membership is symmetric when unbounded") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    std::vector<Vec2> pos;
    for (int i = 0; i < 30; ++i) pos.push_back({u(rng), u(rng)});
    const CrowdState crowd = make_crowd(pos);
    for (int i = 0; i < 30; ++i) {
        for (int j : neighbors(crowd, i, 5.0, 1000)) {
            const auto back = neighbors(crowd, j, 5.0, 1000);
            CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
    }
}

TEST_CASE("default parameter records satisfy their bounds") {
    CHECK_NOTHROW(MotionParams{}.validate());
    CHECK_NOTHROW(GroupParams::defaults().validate());
    CHECK_NOTHROW(GroupParams::minima().validate());
    CHECK_NOTHROW(GroupParams::maxima().validate());
    CHECK(MotionParams{}.max_neighbors == 10);
    CHECK(MotionParams{}.planning_horizon == 3.0);
}

TEST_CASE("out-of-bound group params name the field") {
    GroupParams gp;
    gp.pref_speed = 3.0;
    try {
        gp.validate("robots.params.");
        FAIL("expected bound violation");
    } catch (const bound_violation_error& e) {
        CHECK(e.field == "robots.params.pref_speed");
    }
}
