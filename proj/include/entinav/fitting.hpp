#ifndef ENTINAV_FITTING_HPP
#define ENTINAV_FITTING_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/sim.hpp"

namespace entinav {

struct FitOptions {
    double lambda = 0.1;   // prior weight, in box-normalized units
    int window = 20;       // frames used from the end of the trajectory
    int sweeps = 3;        // coordinate-descent passes
    int coarse_points = 11;
    int refine_iters = 12; // ternary-search steps around the coarse optimum
};

namespace detail {

inline std::optional<Vec2> position_at_frame(const Trajectory& t, int frame) {
    for (const TrajectorySample& s : t.samples)
        if (s.frame == frame) return s.position;
    return std::nullopt;
}

/// Sum of squared deviations between the observed window and a rollout of
/// the avoidance model at the candidate parameters. Context agents replay
/// their observed tracks; velocities entering the avoidance solve use
/// backward differences, matching the simulator's snapshot semantics.
inline double rollout_error(const Trajectory& observed, const std::vector<Trajectory>& context,
                            const WorldGeometry& world, const MotionParams& candidate,
                            double frame_dt, std::optional<Vec2> lead_position = std::nullopt) {
    const auto& obs = observed.samples;
    const int frame_step = obs.size() >= 2 ? obs[1].frame - obs[0].frame : 1;
    const double dt = frame_dt * frame_step;

    AgentState agent;
    agent.id = observed.agent_id;
    agent.kind = AgentKind::pedestrian;
    agent.position = obs[0].position;
    agent.current_velocity = lead_position ? (obs[0].position - *lead_position) / dt
                                           : (obs[1].position - obs[0].position) / dt;
    agent.radius = candidate.radius;
    // goal: the observed displacement direction, extended far past the window
    const Vec2 disp = obs.back().position - obs.front().position;
    agent.goal = obs[0].position + unit(disp) * 100.0;

    std::map<int, MotionParams> params;
    params[agent.id] = candidate;
    MotionParams context_params; // defaults for replayed agents
    double err = 0.0;
    for (std::size_t t = 1; t < obs.size(); ++t) {
        CrowdState crowd;
        crowd.agents.push_back(agent);
        for (const Trajectory& other : context) {
            if (other.agent_id == observed.agent_id) continue;
            const int frame_now = obs[t - 1].frame;
            const auto p_now = position_at_frame(other, frame_now);
            if (!p_now) continue;
            const auto p_prev = position_at_frame(other, frame_now - frame_step);
            const auto p_next = position_at_frame(other, obs[t].frame);
            AgentState o;
            o.id = other.agent_id;
            o.kind = other.kind;
            o.position = *p_now;
            if (p_prev)
                o.current_velocity = (*p_now - *p_prev) / dt;
            else if (p_next)
                o.current_velocity = (*p_next - *p_now) / dt;
            o.radius = context_params.radius;
            o.goal = o.position + o.current_velocity * 100.0;
            crowd.agents.push_back(o);
            params.emplace(o.id, context_params);
        }
        crowd.agents[0].preferred_velocity =
            candidate.pref_speed * unit(agent.goal - crowd.agents[0].position);
        const RvoStepResult res = rvo_step(crowd, params, world, dt);
        agent = integrate(crowd.agents[0], res.velocities.at(agent.id), dt);
        err += norm_sq(agent.position - obs[t].position);
    }
    return err;
}

} // namespace detail

/// Maximum-a-posteriori fit of the four analyzed parameters from an observed
/// trajectory window: squared rollout error plus a quadratic pull toward the
/// prior in box-normalized units, minimized by coordinate descent over the
/// parameter box. Deterministic given its inputs.
inline MotionParams fit_agent_params(const Trajectory& observed,
                                     const std::vector<Trajectory>& context,
                                     const WorldGeometry& world, const MotionParams& prior,
                                     double frame_dt = 0.1, const FitOptions& opts = FitOptions{}) {
    observed.validate();
    if (observed.samples.size() < 5)
        throw data_error("fit window needs at least 5 samples, got " +
                         std::to_string(observed.samples.size()));
    Trajectory window = observed;
    std::optional<Vec2> lead;
    if (static_cast<int>(window.samples.size()) > opts.window) {
        const std::size_t cut = window.samples.size() - opts.window;
        lead = window.samples[cut - 1].position; // incoming velocity at the window start
        window.samples.erase(window.samples.begin(), window.samples.begin() + cut);
    }

    const GroupParams lo = GroupParams::minima();
    const GroupParams hi = GroupParams::maxima();
    const double lows[4] = {lo.neighbor_dist, lo.radius, lo.pref_speed, lo.group_cohesion};
    const double highs[4] = {hi.neighbor_dist, hi.radius, hi.pref_speed, hi.group_cohesion};
    const double prior_v[4] = {prior.neighbor_dist, prior.radius, prior.pref_speed,
                               prior.group_cohesion};
    double theta[4] = {prior_v[0], prior_v[1], prior_v[2], prior_v[3]};

    auto objective = [&](const double th[4]) {
        MotionParams mp = prior;
        mp.neighbor_dist = th[0];
        mp.radius = th[1];
        mp.pref_speed = th[2];
        mp.group_cohesion = th[3];
        double penalty = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double z = (th[k] - prior_v[k]) / (highs[k] - lows[k]);
            penalty += z * z;
        }
        return detail::rollout_error(window, context, world, mp, frame_dt, lead) +
               opts.lambda * penalty;
    };

    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
        for (int k = 0; k < 4; ++k) {
            double trial[4] = {theta[0], theta[1], theta[2], theta[3]};
            // coarse grid
            double best_v = theta[k];
            double best_j = objective(theta);
            const double step = (highs[k] - lows[k]) / (opts.coarse_points - 1);
            for (int g = 0; g < opts.coarse_points; ++g) {
                trial[k] = lows[k] + g * step;
                const double j = objective(trial);
                if (j < best_j) {
                    best_j = j;
                    best_v = trial[k];
                }
            }
            // ternary refinement around the coarse optimum
            double a = std::max(lows[k], best_v - step);
            double b = std::min(highs[k], best_v + step);
            for (int it = 0; it < opts.refine_iters; ++it) {
                const double m1 = a + (b - a) / 3.0;
                const double m2 = b - (b - a) / 3.0;
                trial[k] = m1;
                const double j1 = objective(trial);
                trial[k] = m2;
                const double j2 = objective(trial);
                if (j1 < j2)
                    b = m2;
                else
                    a = m1;
            }
            trial[k] = 0.5 * (a + b);
            if (objective(trial) < best_j) best_v = trial[k];
            theta[k] = best_v;
        }
    }

    MotionParams out = prior;
    out.neighbor_dist = theta[0];
    out.radius = theta[1];
    out.pref_speed = theta[2];
    out.group_cohesion = theta[3];
    return out;
}

} // namespace entinav

#endif
