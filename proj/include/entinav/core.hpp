#ifndef ENTINAV_CORE_HPP
#define ENTINAV_CORE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "entinav/errors.hpp"
#include "entinav/geometry.hpp"

namespace entinav {

enum class AgentKind { pedestrian, robot };

inline const char* to_string(AgentKind k) {
    return k == AgentKind::pedestrian ? "pedestrian" : "robot";
}

/// Hard cap on an agent's speed, as a multiple of its preferred speed.
inline constexpr double kSpeedCapFactor = 1.5;

/// Full state of one agent: position, current velocity, preferred velocity,
/// plus the collision radius and goal used to derive the preferred velocity.
struct AgentState {
    int id = 0;
    AgentKind kind = AgentKind::pedestrian;
    Vec2 position;
    Vec2 current_velocity;
    Vec2 preferred_velocity;
    double radius = 0.25;
    Vec2 goal;
};

/// Per-agent motion model parameters. neighbor_dist, radius (personal
/// space), pref_speed and group_cohesion are the four analyzed group
/// parameters; max_neighbors and planning_horizon stay at their defaults.
struct MotionParams {
    double neighbor_dist = 5.0;    // m
    int max_neighbors = 10;
    double planning_horizon = 3.0; // s
    double radius = 0.7;           // m, personal space
    double pref_speed = 1.5;       // m/s
    double group_cohesion = 0.5;   // [0, 1]

    void validate() const {
        if (!(neighbor_dist > 0.0) || !(planning_horizon > 0.0) || !(radius > 0.0) ||
            !(pref_speed > 0.0))
            throw input_error("motion parameters must be positive");
        if (max_neighbors < 1) throw input_error("max_neighbors must be >= 1");
        if (!(group_cohesion >= 0.0 && group_cohesion <= 1.0))
            throw input_error("group_cohesion must lie in [0, 1]");
    }
};

/// The four analyzed group parameters with their study bounds.
struct GroupParams {
    double neighbor_dist = 5.0;
    double radius = 0.7;
    double pref_speed = 1.5;
    double group_cohesion = 0.5;

    static GroupParams minima() { return {3.0, 0.3, 1.2, 0.1}; }
    static GroupParams maxima() { return {10.0, 2.0, 2.2, 1.0}; }
    static GroupParams defaults() { return {}; }

    /// Throws bound_violation_error naming the offending field. field_prefix
    /// is prepended to the name for path-style messages.
    void validate(const std::string& field_prefix = "") const {
        const GroupParams lo = minima();
        const GroupParams hi = maxima();
        auto check = [&](double v, double a, double b, const char* name) {
            if (!(v >= a && v <= b))
                throw bound_violation_error(field_prefix + name,
                                            field_prefix + name + " = " + std::to_string(v) +
                                                " outside [" + std::to_string(a) + ", " +
                                                std::to_string(b) + "]");
        };
        check(neighbor_dist, lo.neighbor_dist, hi.neighbor_dist, "neighbor_dist");
        check(radius, lo.radius, hi.radius, "radius");
        check(pref_speed, lo.pref_speed, hi.pref_speed, "pref_speed");
        check(group_cohesion, lo.group_cohesion, hi.group_cohesion, "group_cohesion");
    }

    /// Clamp every field into its bound.
    GroupParams clamped() const {
        const GroupParams lo = minima();
        const GroupParams hi = maxima();
        return {std::clamp(neighbor_dist, lo.neighbor_dist, hi.neighbor_dist),
                std::clamp(radius, lo.radius, hi.radius),
                std::clamp(pref_speed, lo.pref_speed, hi.pref_speed),
                std::clamp(group_cohesion, lo.group_cohesion, hi.group_cohesion)};
    }

    /// Merge into a full parameter record, leaving the non-analyzed fields.
    MotionParams apply_to(MotionParams p) const {
        p.neighbor_dist = neighbor_dist;
        p.radius = radius;
        p.pref_speed = pref_speed;
        p.group_cohesion = group_cohesion;
        return p;
    }
};

struct WorldGeometry {
    Rect bounds{0.0, 0.0, 20.0, 20.0};
    std::vector<Polygon> obstacles;

    void validate() const {
        if (!(bounds.width() > 0.0 && bounds.height() > 0.0))
            throw validation_error("world bounds must have positive extent");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            if (!polygon_is_simple(obstacles[i]))
                throw validation_error("obstacle " + std::to_string(i) +
                                       " is not a simple polygon");
            for (const Vec2& v : obstacles[i])
                if (!bounds.contains(v))
                    throw validation_error("obstacle " + std::to_string(i) +
                                           " extends outside world bounds");
        }
    }
};

struct CrowdState {
    std::vector<AgentState> agents;
    double time = 0.0;

    const AgentState* find(int id) const {
        for (const AgentState& a : agents)
            if (a.id == id) return &a;
        return nullptr;
    }
    AgentState* find(int id) {
        for (AgentState& a : agents)
            if (a.id == id) return &a;
        return nullptr;
    }
    const AgentState& at(int id) const {
        const AgentState* a = find(id);
        if (!a) throw not_found_error("unknown agent id " + std::to_string(id));
        return *a;
    }
};

struct Group {
    std::vector<int> member_ids;
    MotionParams params;

    void validate(const CrowdState& crowd) const {
        if (member_ids.empty()) throw input_error("group must not be empty");
        for (int id : member_ids) crowd.at(id);
        params.validate();
    }
};

/// One explicit Euler step. Returns a copy with advanced position and the
/// new velocity; all other fields unchanged.
inline AgentState integrate(const AgentState& state, const Vec2& new_velocity, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw input_error("dt must be positive and finite");
    if (!finite(new_velocity) || !finite(state.position))
        throw input_error("integrate requires finite position and velocity");
    AgentState next = state;
    next.position = state.position + new_velocity * dt;
    next.current_velocity = new_velocity;
    return next;
}

/// Ids of agents within neighbor_dist (center distance) of the query agent,
/// excluding itself, closest first, ties by ascending id, at most
/// max_neighbors entries.
inline std::vector<int> neighbors(const CrowdState& crowd, int agent_id, double neighbor_dist,
                                  int max_neighbors) {
    const AgentState& self = crowd.at(agent_id);
    std::vector<std::pair<double, int>> cand;
    for (const AgentState& a : crowd.agents) {
        if (a.id == agent_id) continue;
        const double d = distance(a.position, self.position);
        if (d <= neighbor_dist) cand.emplace_back(d, a.id);
    }
    std::sort(cand.begin(), cand.end());
    if (max_neighbors >= 0 && cand.size() > static_cast<std::size_t>(max_neighbors))
        cand.resize(static_cast<std::size_t>(max_neighbors));
    std::vector<int> ids;
    ids.reserve(cand.size());
    for (const auto& [d, id] : cand) ids.push_back(id);
    return ids;
}

} // namespace entinav

#endif
