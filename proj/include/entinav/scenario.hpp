#ifndef ENTINAV_SCENARIO_HPP
#define ENTINAV_SCENARIO_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/edm.hpp"
#include "entinav/geometry.hpp"
#include "entinav/nav.hpp"
#include "entinav/sim.hpp"

namespace entinav {

enum class ScenarioMode { surveillance, intervention, baseline };

inline const char* to_string(ScenarioMode m) {
    switch (m) {
        case ScenarioMode::surveillance: return "surveillance";
        case ScenarioMode::intervention: return "intervention";
        default: return "baseline";
    }
}

struct PedestrianSpec {
    Vec2 start;
    Vec2 goal;
    double radius = 0.25; // physical collision radius
    std::optional<MotionParams> params;
};

struct RobotGroupSpec {
    std::vector<Vec2> starts;
    std::vector<std::vector<Vec2>> goals; // waypoints per robot
    int size = 3;
    double radius = 0.25; // physical collision radius
    RobotDynamics dynamics;
    std::optional<GroupParams> params; // nominal profile override
};

/// A complete run definition: world, agents, zones, invisibility setting and
/// run controls.
struct Scenario {
    WorldGeometry world;
    std::vector<PedestrianSpec> pedestrians;
    RobotGroupSpec robots;
    std::vector<Polygon> zones;
    InvisibilitySetting invisibility;
    double dt = 0.1;
    double duration = 30.0;
    std::uint64_t seed = 0;
    ScenarioMode mode = ScenarioMode::baseline;

    double start_jitter = 0.0;         // m, uniform per-agent start offset
    double reaction_multiplier = 3.0;  // perceived-disc growth at zero invisibility
    double intervention_horizon = 6.0; // s, zone-entry look-ahead
    MotionParams pedestrian_defaults;

    void validate() const {
        world.validate();
        if (!(dt > 0.0)) throw validation_error("dt must be positive");
        if (!(duration > 0.0)) throw validation_error("duration must be positive");
        if (!(start_jitter >= 0.0)) throw validation_error("start_jitter must be >= 0");
        if (!(reaction_multiplier >= 1.0))
            throw validation_error("reaction_multiplier must be >= 1");
        if (!(intervention_horizon > 0.0))
            throw validation_error("intervention_horizon must be positive");
        invisibility.validate();
        pedestrian_defaults.validate();

        auto check_point = [&](const Vec2& p, const std::string& path) {
            if (!finite(p)) throw validation_error(path + " must be finite");
            if (!world.bounds.contains(p))
                throw validation_error(path + " lies outside world bounds");
            for (std::size_t i = 0; i < world.obstacles.size(); ++i)
                if (point_in_polygon(p, world.obstacles[i]))
                    throw validation_error(path + " lies inside obstacle " + std::to_string(i));
        };
        for (std::size_t i = 0; i < pedestrians.size(); ++i) {
            const std::string base = "pedestrians[" + std::to_string(i) + "]";
            check_point(pedestrians[i].start, base + ".start");
            check_point(pedestrians[i].goal, base + ".goal");
            if (!(pedestrians[i].radius > 0.0))
                throw validation_error(base + ".radius must be positive");
            if (pedestrians[i].params) pedestrians[i].params->validate();
        }
        if (robots.starts.size() != robots.goals.size())
            throw validation_error("robots.starts and robots.goals must have equal length");
        if (!robots.starts.empty() &&
            robots.size != static_cast<int>(robots.starts.size()))
            throw validation_error("robots.size inconsistent with robots.starts");
        for (std::size_t i = 0; i < robots.starts.size(); ++i) {
            check_point(robots.starts[i], "robots.starts[" + std::to_string(i) + "]");
            if (robots.goals[i].empty())
                throw validation_error("robots.goals[" + std::to_string(i) + "] must not be empty");
            for (std::size_t j = 0; j < robots.goals[i].size(); ++j)
                check_point(robots.goals[i][j],
                            "robots.goals[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        }
        if (!(robots.radius > 0.0)) throw validation_error("robots.radius must be positive");
        robots.dynamics.validate();
        if (robots.params) robots.params->validate("robots.params.");
        for (std::size_t z = 0; z < zones.size(); ++z)
            if (!polygon_is_simple(zones[z]))
                throw validation_error("zones[" + std::to_string(z) +
                                       "] is not a simple polygon");
        if (mode == ScenarioMode::intervention && zones.empty())
            throw validation_error("intervention scenarios need at least one zone");
    }
};

/// Counters of one scenario run (plus its paired baseline, when present).
struct RunReport {
    int intrusions_baseline = 0;
    int intrusions_ours = 0;
    int intrusions_avoided = 0;
    double additional_time_pct = 0.0;
    double mean_step_time_us = 0.0;
    int collisions = 0;
    int uncovered_entries = 0;
};

/// Number of distinct pedestrians whose position is strictly inside the zone
/// at any frame (boundary-exclusive).
inline int count_intrusions(const std::vector<Trajectory>& trajectories, const Polygon& zone) {
    if (zone.size() < 3 || std::abs(polygon_area(zone)) <= 1e-12)
        throw input_error("degenerate zone polygon");
    if (!polygon_is_simple(zone)) throw input_error("zone polygon must be simple");
    int count = 0;
    for (const Trajectory& t : trajectories) {
        if (t.kind != AgentKind::pedestrian) continue;
        for (const TrajectorySample& s : t.samples) {
            if (point_in_polygon(s.position, zone)) {
                ++count;
                break;
            }
        }
    }
    return count;
}

/// Percent extra time relative to the baseline.
inline double compute_overhead(double time_ours, double time_baseline) {
    if (!(time_baseline > 0.0)) throw input_error("baseline time must be positive");
    return 100.0 * (time_ours - time_baseline) / time_baseline;
}

} // namespace entinav

#endif
