#ifndef ENTINAV_ENGINE_HPP
#define ENTINAV_ENGINE_HPP

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/edm.hpp"
#include "entinav/nav.hpp"
#include "entinav/scenario.hpp"
#include "entinav/sim.hpp"

namespace entinav {

/// Everything a finished run produced: full trajectories, safety counters,
/// arrival time and planning-time statistics.
struct SimResult {
    std::vector<Trajectory> trajectories;
    int collisions = 0;          // distinct penetrating pairs over the run
    int uncovered_entries = 0;   // distinct pedestrians left unserved
    int infeasible_steps = 0;    // avoidance fallback activations
    double robot_arrival_time = 0.0; // last robot's first arrival at its final goal
    bool all_robots_arrived = false;
    double mean_step_time_us = 0.0;  // planning (prediction + commands) per step
    int frames = 0;
};

/// How robots are driven each step.
enum class RobotPolicy {
    plain,        // fixed nominal invisibility, no reaction to zone threats
    surveillance, // same, but waypoint loops wrap around
    intervention  // zone-threat blocking under the s_min bound
};

inline RobotPolicy policy_for(ScenarioMode mode) {
    switch (mode) {
        case ScenarioMode::surveillance: return RobotPolicy::surveillance;
        case ScenarioMode::intervention: return RobotPolicy::intervention;
        default: return RobotPolicy::plain;
    }
}

/// Runs a scenario under the given robot policy. Deterministic for a fixed
/// seed: randomness is only used for the optional start jitter.
inline SimResult run_scenario(const Scenario& sc, RobotPolicy policy,
                              const EntitativityMapping& mapping = EntitativityMapping::study()) {
    sc.validate();
    if (policy == RobotPolicy::intervention && sc.zones.empty())
        throw validation_error("intervention run requires zones");

    const double dt = sc.dt;
    const int steps = static_cast<int>(std::lround(sc.duration / dt));
    const double arrival_tol = 0.25;

    // --- build the crowd: pedestrians first, then robots -------------------
    std::mt19937_64 rng(sc.seed);
    auto jitter = [&](const Vec2& p) {
        if (sc.start_jitter <= 0.0) return p;
        std::uniform_real_distribution<double> u(-sc.start_jitter, sc.start_jitter);
        const double dx = u(rng);
        const double dy = u(rng);
        Vec2 q{p.x + dx, p.y + dy};
        q.x = std::clamp(q.x, sc.world.bounds.xmin + 0.1, sc.world.bounds.xmax - 0.1);
        q.y = std::clamp(q.y, sc.world.bounds.ymin + 0.1, sc.world.bounds.ymax - 0.1);
        return q;
    };

    CrowdState crowd;
    std::map<int, MotionParams> params;
    std::set<int> ped_ids;
    std::map<int, Vec2> ped_goals;
    int next_id = 0;
    for (const PedestrianSpec& ps : sc.pedestrians) {
        AgentState a;
        a.id = next_id++;
        a.kind = AgentKind::pedestrian;
        a.position = jitter(ps.start);
        a.goal = ps.goal;
        a.radius = ps.radius;
        crowd.agents.push_back(a);
        params[a.id] = ps.params.value_or(sc.pedestrian_defaults);
        ped_ids.insert(a.id);
        ped_goals[a.id] = ps.goal;
    }

    const double s_fixed = sc.invisibility.s;
    const GroupParams nominal_gp =
        params_for_entitativity(mapping, target_entitativity(mapping, s_fixed));
    Group robot_group;
    NavContext nav;
    std::vector<std::vector<Vec2>> waypoints = sc.robots.goals;
    std::vector<std::size_t> wp_index(waypoints.size(), 0);
    std::vector<double> arrival_time(waypoints.size(), -1.0);
    for (std::size_t r = 0; r < sc.robots.starts.size(); ++r) {
        AgentState a;
        a.id = next_id++;
        a.kind = AgentKind::robot;
        a.position = jitter(sc.robots.starts[r]);
        a.goal = waypoints[r][0];
        a.radius = sc.robots.radius;
        crowd.agents.push_back(a);
        MotionParams mp = sc.robots.params ? sc.robots.params->apply_to(MotionParams{})
                                           : nominal_gp.apply_to(MotionParams{});
        params[a.id] = mp;
        robot_group.member_ids.push_back(a.id);
        RobotDynamics dyn = sc.robots.dynamics;
        dyn.heading = std::atan2(a.goal.y - a.position.y, a.goal.x - a.position.x);
        nav.dynamics[a.id] = dyn;
    }
    robot_group.params = nominal_gp.apply_to(MotionParams{});
    const bool have_robots = !robot_group.member_ids.empty();

    Roadmap roadmap;
    if (have_robots) roadmap = build_roadmap(sc.world, sc.robots.radius, 0.5);
    nav.roadmap = &roadmap;
    nav.mapping = &mapping;
    nav.dt = dt;
    const double pred_horizon =
        policy == RobotPolicy::intervention
            ? std::max(nav.gvo.horizon, sc.intervention_horizon)
            : nav.gvo.horizon;

    // --- run ----------------------------------------------------------------
    std::map<int, std::vector<Vec2>> tracks;
    auto record = [&](const CrowdState& c) {
        for (const AgentState& a : c.agents) tracks[a.id].push_back(a.position);
    };
    record(crowd);

    SimResult result;
    std::set<std::pair<int, int>> collided;
    std::set<int> uncovered_peds;
    double planning_time_us = 0.0;
    int planning_steps = 0;

    auto count_collisions = [&](const CrowdState& c) {
        for (std::size_t i = 0; i < c.agents.size(); ++i)
            for (std::size_t j = i + 1; j < c.agents.size(); ++j) {
                const AgentState& a = c.agents[i];
                const AgentState& b = c.agents[j];
                if (distance(a.position, b.position) < a.radius + b.radius - 1e-6)
                    collided.insert({a.id, b.id});
            }
    };
    count_collisions(crowd);

    for (int step = 0; step < steps; ++step) {
        std::map<int, Vec2> overrides;
        RvoOptions rvo_opts;

        if (have_robots) {
            const auto t0 = std::chrono::steady_clock::now();

            // point each robot at its current waypoint, advancing on arrival
            for (std::size_t r = 0; r < robot_group.member_ids.size(); ++r) {
                AgentState& robot = *crowd.find(robot_group.member_ids[r]);
                if (distance(robot.position, waypoints[r][wp_index[r]]) <= arrival_tol) {
                    if (wp_index[r] + 1 < waypoints[r].size()) {
                        ++wp_index[r];
                    } else if (policy == RobotPolicy::surveillance && waypoints[r].size() > 1) {
                        wp_index[r] = 0;
                    } else if (arrival_time[r] < 0.0) {
                        arrival_time[r] = crowd.time;
                    }
                }
                robot.goal = waypoints[r][wp_index[r]];
            }

            // predict pedestrians with the motion model, robots by constant
            // velocity, over the longer of the planning and threat horizons
            CrowdState peds_only;
            peds_only.time = crowd.time;
            for (const AgentState& a : crowd.agents)
                if (a.kind == AgentKind::pedestrian) peds_only.agents.push_back(a);
            Prediction pred = predict(peds_only, params, sc.world, pred_horizon, dt, &ped_goals);
            for (int rid : robot_group.member_ids) {
                const AgentState& robot = crowd.at(rid);
                PredictedTrack track;
                track.radius = robot.radius;
                track.positions.reserve(pred.steps());
                for (int k = 1; k <= pred.steps(); ++k)
                    track.positions.push_back(robot.position + robot.current_velocity * (k * dt));
                pred.tracks[rid] = std::move(track);
            }

            std::vector<InterventionCommand> commands;
            if (policy == RobotPolicy::intervention) {
                InterventionStepResult ir =
                    intervention_step(robot_group, crowd, nav, sc.zones,
                                      sc.invisibility.s_min, pred, sc.intervention_horizon);
                commands = std::move(ir.commands);
                for (int pid : ir.uncovered_ids) uncovered_peds.insert(pid);
            } else {
                commands = invisible_nav_step(robot_group, crowd, nav, s_fixed, pred);
            }

            double s_group = 1.0;
            for (const InterventionCommand& cmd : commands) {
                overrides[cmd.robot_id] = cmd.velocity;
                params[cmd.robot_id] = cmd.applied_params.apply_to(params[cmd.robot_id]);
                nav.dynamics[cmd.robot_id].heading += cmd.control.turn_rate * dt;
                crowd.find(cmd.robot_id)->goal = cmd.goal;
                s_group = std::min(s_group, cmd.invisibility_used);
                if (!cmd.safe) ++result.infeasible_steps;
            }

            // pedestrians keep clear of the perceived robot group
            Vec2 centroid{0.0, 0.0};
            double bound_radius = 0.0;
            for (int rid : robot_group.member_ids) centroid += crowd.at(rid).position;
            centroid = centroid / static_cast<double>(robot_group.member_ids.size());
            for (int rid : robot_group.member_ids) {
                const AgentState& robot = crowd.at(rid);
                bound_radius =
                    std::max(bound_radius, distance(robot.position, centroid) + robot.radius);
            }
            const double growth = 1.0 + (sc.reaction_multiplier - 1.0) * (1.0 - s_group);
            rvo_opts.group_disc = RepulsionDisc{centroid, bound_radius * growth};

            planning_time_us += std::chrono::duration<double, std::micro>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
            ++planning_steps;
        }

        SubstepOptions sub;
        sub.rvo = rvo_opts;
        sub.arrival_tol = arrival_tol;
        std::set<int> goal_directed = ped_ids;
        for (int rid : robot_group.member_ids) goal_directed.insert(rid);
        RvoStepResult step_report;
        crowd = crowd_substep(crowd, params, sc.world, dt, goal_directed,
                              have_robots ? &overrides : nullptr, sub, &step_report);
        record(crowd);
        count_collisions(crowd);
    }

    // --- collect ------------------------------------------------------------
    for (const AgentState& a : crowd.agents) {
        Trajectory t;
        t.agent_id = a.id;
        t.kind = a.kind;
        const std::vector<Vec2>& pos = tracks[a.id];
        t.samples.reserve(pos.size());
        for (std::size_t f = 0; f < pos.size(); ++f)
            t.samples.push_back({static_cast<int>(f), pos[f]});
        result.trajectories.push_back(std::move(t));
    }
    result.collisions = static_cast<int>(collided.size());
    result.uncovered_entries = static_cast<int>(uncovered_peds.size());
    result.frames = steps + 1;
    result.mean_step_time_us = planning_steps > 0 ? planning_time_us / planning_steps : 0.0;
    result.all_robots_arrived = have_robots;
    result.robot_arrival_time = 0.0;
    for (std::size_t r = 0; r < arrival_time.size(); ++r) {
        if (arrival_time[r] < 0.0) {
            result.all_robots_arrived = false;
            result.robot_arrival_time = sc.duration;
            break;
        }
        result.robot_arrival_time = std::max(result.robot_arrival_time, arrival_time[r]);
    }
    return result;
}

/// Distinct pedestrians entering any zone.
inline int count_zone_intrusions(const SimResult& res, const std::vector<Polygon>& zones) {
    std::set<int> intruders;
    for (const Polygon& zone : zones) {
        for (const Trajectory& t : res.trajectories) {
            if (t.kind != AgentKind::pedestrian) continue;
            for (const TrajectorySample& s : t.samples) {
                if (point_in_polygon(s.position, zone)) {
                    intruders.insert(t.agent_id);
                    break;
                }
            }
        }
    }
    return static_cast<int>(intruders.size());
}

struct ScenarioRun {
    SimResult result;
    RunReport report;
    SimResult baseline; // populated for paired intervention runs
};

/// A plain single-arm run (mode baseline or any fixed-s scenario).
inline ScenarioRun run_baseline(const Scenario& sc,
                                const EntitativityMapping& mapping = EntitativityMapping::study()) {
    ScenarioRun run;
    run.result = run_scenario(sc, RobotPolicy::plain, mapping);
    const int intr = count_zone_intrusions(run.result, sc.zones);
    run.report.intrusions_baseline = intr;
    run.report.intrusions_ours = intr;
    run.report.collisions = run.result.collisions;
    run.report.mean_step_time_us = run.result.mean_step_time_us;
    return run;
}

/// Patrol run at the scenario's fixed invisibility (full invisibility by
/// default). Robots cycle their waypoint loops for the whole duration.
inline ScenarioRun run_surveillance(const Scenario& sc,
                                    const EntitativityMapping& mapping =
                                        EntitativityMapping::study()) {
    if (sc.mode != ScenarioMode::surveillance)
        throw validation_error("run_surveillance requires mode = surveillance");
    ScenarioRun run;
    run.result = run_scenario(sc, RobotPolicy::surveillance, mapping);
    const int intr = count_zone_intrusions(run.result, sc.zones);
    run.report.intrusions_baseline = intr;
    run.report.intrusions_ours = intr;
    run.report.collisions = run.result.collisions;
    run.report.mean_step_time_us = run.result.mean_step_time_us;
    return run;
}

/// Paired intervention run: the same scenario and seed once with zone-threat
/// blocking and once with plain navigation, reporting intrusions for both
/// arms, the goal-arrival overhead and safety counters.
inline ScenarioRun run_intervention(const Scenario& sc,
                                    const EntitativityMapping& mapping =
                                        EntitativityMapping::study()) {
    if (sc.mode != ScenarioMode::intervention)
        throw validation_error("run_intervention requires mode = intervention");
    ScenarioRun run;
    run.result = run_scenario(sc, RobotPolicy::intervention, mapping);
    Scenario base_sc = sc;
    base_sc.invisibility.mode = InvisibilityMode::fixed_s;
    base_sc.invisibility.s = 1.0; // matches the intervention arm's idle profile
    run.baseline = run_scenario(base_sc, RobotPolicy::plain, mapping);

    run.report.intrusions_ours = count_zone_intrusions(run.result, sc.zones);
    run.report.intrusions_baseline = count_zone_intrusions(run.baseline, sc.zones);
    run.report.intrusions_avoided =
        run.report.intrusions_baseline - run.report.intrusions_ours;
    run.report.additional_time_pct =
        run.baseline.robot_arrival_time > 0.0
            ? compute_overhead(run.result.robot_arrival_time, run.baseline.robot_arrival_time)
            : 0.0;
    run.report.mean_step_time_us = run.result.mean_step_time_us;
    run.report.collisions = run.result.collisions;
    run.report.uncovered_entries = run.result.uncovered_entries;
    return run;
}

} // namespace entinav

#endif
