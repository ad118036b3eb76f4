#ifndef ENTINAV_SIM_HPP
#define ENTINAV_SIM_HPP

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/rvo.hpp"

namespace entinav {

struct TrajectorySample {
    int frame = 0;
    Vec2 position;
};

/// A time-ordered track of one agent at a uniform frame interval.
struct Trajectory {
    int agent_id = 0;
    AgentKind kind = AgentKind::pedestrian;
    std::vector<TrajectorySample> samples;

    void validate() const {
        if (samples.empty()) return;
        if (samples.front().frame < 0) throw validation_error("frames must be non-negative");
        int step = 0;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const int d = samples[i].frame - samples[i - 1].frame;
            if (d <= 0) throw validation_error("frames must be strictly increasing");
            if (step == 0)
                step = d;
            else if (d != step)
                throw validation_error("frame interval must be uniform");
        }
    }
};

struct PredictedTrack {
    double radius = 0.25;
    std::vector<Vec2> positions; // at t+dt, t+2dt, ...
};

struct Prediction {
    double dt = 0.1;
    double horizon = 0.0;
    std::map<int, PredictedTrack> tracks;

    int steps() const { return static_cast<int>(std::lround(horizon / dt)); }
};

/// Preferred velocity of a group member: a cohesion-weighted blend of the
/// goal direction and the direction toward the group centroid, scaled to
/// pref_speed. Falls back to the pure goal direction when the blend cancels
/// or the agent sits at the centroid.
inline Vec2 group_preferred_velocity(const AgentState& agent, const Vec2& group_centroid,
                                     double cohesion, double pref_speed) {
    if (!(cohesion >= 0.0 && cohesion <= 1.0)) throw input_error("cohesion must lie in [0, 1]");
    if (!(pref_speed > 0.0)) throw input_error("pref_speed must be positive");
    const Vec2 to_goal = unit(agent.goal - agent.position);
    const Vec2 to_centroid = unit(group_centroid - agent.position);
    const Vec2 blend = (1.0 - cohesion) * to_goal + cohesion * to_centroid;
    if (norm(group_centroid - agent.position) <= 1e-9 || norm(blend) <= 1e-9)
        return pref_speed * to_goal;
    return pref_speed * unit(blend);
}

struct SubstepOptions {
    RvoOptions rvo;
    double arrival_tol = 0.25; // m; goal-directed agents stop inside this
};

/// Fills in each agent's preferred velocity. Agents listed in goal_directed
/// head for their goal at pref_speed (zero inside the arrival tolerance);
/// all others keep their current velocity (constant-velocity extension).
inline void set_preferred_velocities(CrowdState& crowd,
                                     const std::map<int, MotionParams>& params,
                                     const std::set<int>& goal_directed, double arrival_tol) {
    for (AgentState& a : crowd.agents) {
        if (goal_directed.count(a.id)) {
            const auto it = params.find(a.id);
            if (it == params.end())
                throw not_found_error("no motion parameters for agent " + std::to_string(a.id));
            const Vec2 to_goal = a.goal - a.position;
            a.preferred_velocity = norm(to_goal) <= arrival_tol
                                       ? Vec2{0.0, 0.0}
                                       : it->second.pref_speed * unit(to_goal);
        } else {
            a.preferred_velocity = a.current_velocity;
        }
    }
}

/// Advances the crowd by one step: preferred velocities, one reciprocal
/// avoidance solve on the snapshot, then Euler integration. Entries in
/// `overrides` (robot commands) replace the solved velocity for that agent.
inline CrowdState crowd_substep(const CrowdState& crowd,
                                const std::map<int, MotionParams>& params,
                                const WorldGeometry& world, double dt,
                                const std::set<int>& goal_directed,
                                const std::map<int, Vec2>* overrides = nullptr,
                                const SubstepOptions& opts = SubstepOptions{},
                                RvoStepResult* report = nullptr) {
    CrowdState work = crowd;
    set_preferred_velocities(work, params, goal_directed, opts.arrival_tol);
    RvoStepResult res = rvo_step(work, params, world, dt, opts.rvo);
    CrowdState next;
    next.time = crowd.time + dt;
    next.agents.reserve(work.agents.size());
    for (const AgentState& a : work.agents) {
        Vec2 v = res.velocities.at(a.id);
        if (overrides) {
            const auto it = overrides->find(a.id);
            if (it != overrides->end()) v = it->second;
        }
        next.agents.push_back(integrate(a, v, dt));
    }
    if (report) *report = std::move(res);
    return next;
}

/// Rolls the avoidance model forward horizon/dt steps. Agents in
/// known_goals walk toward those goals; the rest extend their current
/// velocity. Identical to the simulation loop when the parameters and goals
/// match.
inline Prediction predict(const CrowdState& crowd, const std::map<int, MotionParams>& params,
                          const WorldGeometry& world, double horizon, double dt = 0.1,
                          const std::map<int, Vec2>* known_goals = nullptr,
                          const SubstepOptions& opts = SubstepOptions{}) {
    if (!(horizon > 0.0)) throw input_error("horizon must be positive");
    if (!(dt > 0.0)) throw input_error("dt must be positive");
    Prediction pred;
    pred.dt = dt;
    pred.horizon = horizon;
    const int steps = pred.steps();

    CrowdState state = crowd;
    std::set<int> goal_directed;
    for (AgentState& a : state.agents) {
        if (known_goals) {
            const auto it = known_goals->find(a.id);
            if (it != known_goals->end()) {
                a.goal = it->second;
                goal_directed.insert(a.id);
                continue;
            }
        }
        // no known goal: extend the current heading far ahead for bookkeeping
        a.goal = a.position + unit(a.current_velocity) * 1e4;
    }
    for (const AgentState& a : state.agents) {
        pred.tracks[a.id].radius = a.radius;
        pred.tracks[a.id].positions.reserve(steps);
    }
    for (int k = 0; k < steps; ++k) {
        state = crowd_substep(state, params, world, dt, goal_directed, nullptr, opts);
        for (const AgentState& a : state.agents) pred.tracks[a.id].positions.push_back(a.position);
    }
    return pred;
}

} // namespace entinav

#endif
