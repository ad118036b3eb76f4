#ifndef ENTINAV_RVO_HPP
#define ENTINAV_RVO_HPP

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/geometry.hpp"

namespace entinav {

/// Half-plane constraint on velocity. Feasible velocities v satisfy
/// det(direction, point - v) <= 0 (the left side of the directed line).
struct VelocityConstraint {
    Vec2 point;
    Vec2 direction;
};

/// Encode a.v <= b (a unit) in the directed-line form above.
inline VelocityConstraint half_plane(const Vec2& a, double b) {
    return {a * b, perp(a)};
}

namespace detail {

inline constexpr double kRvoEps = 1e-10;

/// 1-D sub-problem: optimum on the boundary of constraint `index`, subject
/// to all earlier constraints and the speed disc. Returns false when empty.
inline bool solve_on_line(const std::vector<VelocityConstraint>& lines, std::size_t index,
                          double radius, const Vec2& opt, bool direction_opt, Vec2& result) {
    const Vec2& p = lines[index].point;
    const Vec2& d = lines[index].direction;
    const double dot_pd = dot(p, d);
    const double discriminant = dot_pd * dot_pd + radius * radius - norm_sq(p);
    if (discriminant < 0.0) return false; // line misses the speed disc
    const double sqrt_disc = std::sqrt(discriminant);
    double t_left = -dot_pd - sqrt_disc;
    double t_right = -dot_pd + sqrt_disc;

    for (std::size_t i = 0; i < index; ++i) {
        const double denom = det(d, lines[i].direction);
        const double num = det(lines[i].direction, p - lines[i].point);
        if (std::abs(denom) <= kRvoEps) {
            if (num < 0.0) return false; // parallel and fully outside
            continue;
        }
        const double t = num / denom;
        if (denom >= 0.0)
            t_right = std::min(t_right, t);
        else
            t_left = std::max(t_left, t);
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        result = dot(opt, d) > 0.0 ? p + t_right * d : p + t_left * d;
    } else {
        const double t = dot(d, opt - p);
        if (t < t_left)
            result = p + t_left * d;
        else if (t > t_right)
            result = p + t_right * d;
        else
            result = p + t * d;
    }
    return true;
}

/// Incremental 2-D linear program: velocity closest to `opt` within the
/// speed disc and all half-planes. Returns the index of the first
/// unsatisfiable constraint, or lines.size() on success.
inline std::size_t solve_2d(const std::vector<VelocityConstraint>& lines, double radius,
                            const Vec2& opt, bool direction_opt, Vec2& result) {
    if (direction_opt) {
        result = opt * radius; // opt is a unit direction
    } else if (norm_sq(opt) > radius * radius) {
        result = unit(opt) * radius;
    } else {
        result = opt;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > 0.0) {
            const Vec2 saved = result;
            if (!solve_on_line(lines, i, radius, opt, direction_opt, result)) {
                result = saved;
                return i;
            }
        }
    }
    return lines.size();
}

/// Infeasible fallback: progressively minimize the worst violation of the
/// relaxable constraints while keeping the first `hard_count` hard.
inline void solve_least_penetration(const std::vector<VelocityConstraint>& lines,
                                    std::size_t hard_count, std::size_t first_bad,
                                    double radius, Vec2& result) {
    double dist = 0.0;
    for (std::size_t i = first_bad; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) <= dist) continue;
        std::vector<VelocityConstraint> projected(lines.begin(),
                                                  lines.begin() + static_cast<long>(hard_count));
        for (std::size_t j = hard_count; j < i; ++j) {
            VelocityConstraint line;
            const double determinant = det(lines[i].direction, lines[j].direction);
            if (std::abs(determinant) <= kRvoEps) {
                if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
                line.point = 0.5 * (lines[i].point + lines[j].point);
            } else {
                line.point = lines[i].point +
                             (det(lines[j].direction, lines[i].point - lines[j].point) /
                              determinant) *
                                 lines[i].direction;
            }
            line.direction = unit(lines[j].direction - lines[i].direction);
            projected.push_back(line);
        }
        const Vec2 saved = result;
        if (solve_2d(projected, radius, perp(lines[i].direction) * -1.0, true, result) <
            projected.size()) {
            result = saved; // keep previous best on numerical failure
        }
        dist = det(lines[i].direction, lines[i].point - result);
    }
}

} // namespace detail

/// An additional repulsion disc pedestrians keep clear of (the perceived
/// robot group). Applied to pedestrians only.
struct RepulsionDisc {
    Vec2 center;
    double radius = 0.0;
};

struct RvoOptions {
    double speed_cap_factor = kSpeedCapFactor;
    /// Horizon for static obstacle constraints; falls back to the agent's
    /// planning horizon when unset.
    std::optional<double> obstacle_horizon;
    std::optional<RepulsionDisc> group_disc;
    /// Worker threads; 0 = decide from ENTINAV_THREADS (default 1).
    int threads = 0;
    /// Tiny fixed rotation of the preferred velocity, applied only while
    /// social constraints are active. Exactly symmetric encounters otherwise
    /// stall head-on; a shared turning convention resolves them while keeping
    /// mirror symmetry (rotations commute).
    double symmetry_bias = 0.01; // rad
};

struct RvoStepResult {
    std::map<int, Vec2> velocities;
    std::vector<int> infeasible_ids; // agents that needed the fallback
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ENTINAV_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
        if (v == 0 && env[0] == '0')
            return std::max(1u, std::thread::hardware_concurrency());
    }
    return 1;
}

namespace detail {

/// Conservative wall constraint: do not close the clearance gap toward the
/// nearest point of the segment faster than the horizon allows.
inline void add_segment_constraint(std::vector<VelocityConstraint>& lines, const Vec2& pos,
                                   double radius, const Vec2& a, const Vec2& b, double horizon,
                                   double dt, double reach) {
    const Vec2 c = closest_point_on_segment(pos, a, b);
    const Vec2 w = c - pos;
    const double d = norm(w);
    if (d > reach) return;
    const Vec2 n = d > kRvoEps ? w / d : Vec2{1.0, 0.0};
    const double gap = d - radius;
    const double tau = gap >= 0.0 ? horizon : dt; // escape penetration within a step
    lines.push_back(half_plane(n, gap / tau));
}

/// Reciprocal velocity-obstacle half-plane for one neighbor, half
/// responsibility. responsibility = 1 gives full (non-reciprocal) avoidance.
inline VelocityConstraint orca_line(const AgentState& self, double self_radius,
                                    const Vec2& other_pos, const Vec2& other_vel,
                                    double other_radius, double horizon, double dt,
                                    double responsibility) {
    const Vec2 rel_pos = other_pos - self.position;
    const Vec2 rel_vel = self.current_velocity - other_vel;
    const double dist_sq = norm_sq(rel_pos);
    const double combined = self_radius + other_radius;
    const double combined_sq = combined * combined;

    VelocityConstraint line;
    Vec2 u;
    if (dist_sq > combined_sq) {
        const double inv_horizon = 1.0 / horizon;
        const Vec2 w = rel_vel - inv_horizon * rel_pos; // from cutoff center
        const double w_len_sq = norm_sq(w);
        const double dot1 = dot(w, rel_pos);
        if (dot1 < 0.0 && dot1 * dot1 > combined_sq * w_len_sq) {
            // closest to the cutoff arc
            const double w_len = std::sqrt(w_len_sq);
            const Vec2 unit_w = w / w_len;
            line.direction = {unit_w.y, -unit_w.x};
            u = (combined * inv_horizon - w_len) * unit_w;
        } else {
            // closest to a cone leg
            const double leg = std::sqrt(dist_sq - combined_sq);
            if (det(rel_pos, w) > 0.0) {
                line.direction = Vec2{rel_pos.x * leg - rel_pos.y * combined,
                                      rel_pos.x * combined + rel_pos.y * leg} /
                                 dist_sq;
            } else {
                line.direction = Vec2{rel_pos.x * leg + rel_pos.y * combined,
                                      -rel_pos.x * combined + rel_pos.y * leg} /
                                 dist_sq * -1.0;
            }
            u = dot(rel_vel, line.direction) * line.direction - rel_vel;
        }
    } else {
        // already penetrating: push apart within one step
        const double inv_dt = 1.0 / dt;
        const Vec2 w = rel_vel - inv_dt * rel_pos;
        const double w_len = norm(w);
        const Vec2 unit_w = w_len > kRvoEps ? w / w_len : Vec2{0.0, 1.0};
        line.direction = {unit_w.y, -unit_w.x};
        u = (combined * inv_dt - w_len) * unit_w;
    }
    line.point = self.current_velocity + responsibility * u;
    return line;
}

} // namespace detail

/// One reciprocal-avoidance step. For every agent, picks the velocity
/// closest to its preferred velocity that is collision-free against its
/// neighbor set and nearby obstacle boundaries over the planning horizon,
/// under the agent's speed cap. All velocities are computed from the same
/// input snapshot; evaluation order never matters.
inline RvoStepResult rvo_step(const CrowdState& crowd, const std::map<int, MotionParams>& params,
                              const WorldGeometry& world, double dt,
                              const RvoOptions& opts = RvoOptions{}) {
    if (!(dt > 0.0)) throw input_error("dt must be positive");
    const std::size_t n = crowd.agents.size();
    for (const AgentState& a : crowd.agents)
        if (params.find(a.id) == params.end())
            throw not_found_error("no motion parameters for agent " + std::to_string(a.id));
    std::vector<Vec2> out(n);
    std::vector<char> infeasible(n, 0);

    auto compute = [&](std::size_t idx) {
        const AgentState& self = crowd.agents[idx];
        const MotionParams& mp = params.find(self.id)->second;
        const double speed_cap = opts.speed_cap_factor * mp.pref_speed;
        const double obst_horizon = opts.obstacle_horizon.value_or(mp.planning_horizon);
        // reach: farthest an obstacle can matter given the cap and horizon
        const double reach = mp.radius + speed_cap * obst_horizon;

        std::vector<VelocityConstraint> lines;
        // world walls and obstacle edges first; these stay hard in the fallback
        const Rect& b = world.bounds;
        const Vec2 corners[4] = {{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax},
                                 {b.xmin, b.ymax}};
        for (int k = 0; k < 4; ++k)
            detail::add_segment_constraint(lines, self.position, mp.radius, corners[k],
                                           corners[(k + 1) % 4], obst_horizon, dt, reach);
        for (const Polygon& poly : world.obstacles)
            for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
                detail::add_segment_constraint(lines, self.position, mp.radius, poly[j], poly[i],
                                               obst_horizon, dt, reach);
        const std::size_t hard_count = lines.size();

        if (opts.group_disc && self.kind == AgentKind::pedestrian) {
            const Vec2 w = opts.group_disc->center - self.position;
            const double d = norm(w);
            if (d <= reach + opts.group_disc->radius && d > detail::kRvoEps) {
                // the perceived group acts as a static disc the pedestrian
                // takes full responsibility for avoiding
                lines.push_back(detail::orca_line(self, mp.radius, opts.group_disc->center,
                                                  {0.0, 0.0}, opts.group_disc->radius,
                                                  mp.planning_horizon, dt, 1.0));
            }
        }

        for (int nb_id : neighbors(crowd, self.id, mp.neighbor_dist, mp.max_neighbors)) {
            const AgentState& other = crowd.at(nb_id);
            const auto oit = params.find(nb_id);
            const double other_radius = oit != params.end() ? oit->second.radius : other.radius;
            lines.push_back(detail::orca_line(self, mp.radius, other.position,
                                              other.current_velocity, other_radius,
                                              mp.planning_horizon, dt, 0.5));
        }

        Vec2 opt = self.preferred_velocity;
        if (lines.size() > hard_count && opts.symmetry_bias != 0.0) {
            const double c = std::cos(opts.symmetry_bias);
            const double s = std::sin(opts.symmetry_bias);
            opt = {c * opt.x - s * opt.y, s * opt.x + c * opt.y};
        }
        Vec2 v;
        const std::size_t fail = detail::solve_2d(lines, speed_cap, opt, false, v);
        if (fail < lines.size()) {
            detail::solve_least_penetration(lines, hard_count, fail, speed_cap, v);
            infeasible[idx] = 1;
        }
        out[idx] = v;
    };

    const int threads = resolve_thread_count(opts.threads);
    if (threads <= 1 || n < 8) {
        for (std::size_t i = 0; i < n; ++i) compute(i);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) compute(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    RvoStepResult result;
    for (std::size_t i = 0; i < n; ++i) {
        result.velocities[crowd.agents[i].id] = out[i];
        if (infeasible[i]) result.infeasible_ids.push_back(crowd.agents[i].id);
    }
    std::sort(result.infeasible_ids.begin(), result.infeasible_ids.end());
    return result;
}

} // namespace entinav

#endif
