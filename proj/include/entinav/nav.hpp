#ifndef ENTINAV_NAV_HPP
#define ENTINAV_NAV_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <vector>

#include "entinav/core.hpp"
#include "entinav/edm.hpp"
#include "entinav/geometry.hpp"
#include "entinav/sim.hpp"

namespace entinav {

/// Differential-drive limits. The robot cannot rotate in place: any nonzero
/// turn rate requires at least v_min forward speed.
struct RobotDynamics {
    double v_max = 2.2;     // m/s
    double v_min = 0.1;     // m/s, floor while moving/turning
    double omega_max = 1.5; // rad/s
    double heading = 0.0;   // rad, current orientation

    void validate() const {
        if (!(v_max >= v_min && v_min >= 0.0)) throw input_error("need v_max >= v_min >= 0");
        if (!(omega_max > 0.0)) throw input_error("omega_max must be positive");
    }
};

struct RoadmapEdge {
    int to = 0;
    double length = 0.0;
};

/// Uniform-grid roadmap with 8-connected collision-free edges.
struct Roadmap {
    std::vector<Vec2> nodes;
    std::vector<std::vector<RoadmapEdge>> adjacency;
    std::vector<std::pair<int, int>> edges; // unique undirected pairs, i < j
    double spacing = 0.5;
    double clearance = 0.25;
    WorldGeometry world;
};

namespace detail {

inline bool node_free(const Vec2& p, const WorldGeometry& world, double clearance) {
    if (!world.bounds.contains(p)) return false;
    for (const Polygon& poly : world.obstacles) {
        if (point_in_polygon(p, poly, 0.0)) return false;
        if (point_polygon_clearance(p, poly) < clearance) return false;
    }
    return true;
}

inline bool segment_free(const Vec2& a, const Vec2& b, const WorldGeometry& world,
                         double clearance) {
    for (const Polygon& poly : world.obstacles)
        if (segment_polygon_clearance(a, b, poly) < clearance) return false;
    return true;
}

} // namespace detail

inline Roadmap build_roadmap(const WorldGeometry& world, double clearance, double spacing = 0.5) {
    if (!(clearance > 0.0)) throw input_error("clearance must be positive");
    if (!(spacing > 0.0)) throw input_error("spacing must be positive");
    world.validate();

    Roadmap rm;
    rm.spacing = spacing;
    rm.clearance = clearance;
    rm.world = world;

    const int nx = static_cast<int>(std::floor(world.bounds.width() / spacing + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(world.bounds.height() / spacing + 1e-9)) + 1;
    std::vector<int> node_index(static_cast<std::size_t>(nx) * ny, -1);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Vec2 p{world.bounds.xmin + ix * spacing, world.bounds.ymin + iy * spacing};
            if (detail::node_free(p, world, clearance)) {
                node_index[static_cast<std::size_t>(iy) * nx + ix] =
                    static_cast<int>(rm.nodes.size());
                rm.nodes.push_back(p);
            }
        }
    }
    if (rm.nodes.empty()) throw world_error("no collision-free roadmap nodes");

    rm.adjacency.resize(rm.nodes.size());
    const int offsets[8][2] = {{1, 0},  {0, 1},  {1, 1},  {-1, 1},
                               {-1, 0}, {0, -1}, {-1, -1}, {1, -1}};
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int a = node_index[static_cast<std::size_t>(iy) * nx + ix];
            if (a < 0) continue;
            for (const auto& off : offsets) {
                const int jx = ix + off[0];
                const int jy = iy + off[1];
                if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                const int b = node_index[static_cast<std::size_t>(jy) * nx + jx];
                if (b < 0 || b <= a) continue; // each pair once
                if (!detail::segment_free(rm.nodes[a], rm.nodes[b], world, clearance)) continue;
                const double len = distance(rm.nodes[a], rm.nodes[b]);
                rm.adjacency[a].push_back({b, len});
                rm.adjacency[b].push_back({a, len});
                rm.edges.emplace_back(a, b);
            }
        }
    }
    for (auto& adj : rm.adjacency)
        std::sort(adj.begin(), adj.end(),
                  [](const RoadmapEdge& x, const RoadmapEdge& y) { return x.to < y.to; });
    return rm;
}

/// Dijkstra shortest path by edge length, deterministic tie-breaking by node
/// index. Empty result when unreachable.
inline std::vector<int> shortest_path(const Roadmap& rm, int from, int to) {
    const std::size_t n = rm.nodes.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> prev(n, -1);
    std::vector<char> done(n, 0);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[from] = 0.0;
    open.emplace(0.0, from);
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (u == to) break;
        for (const RoadmapEdge& e : rm.adjacency[u]) {
            const double nd = d + e.length;
            if (nd < dist[e.to] - 1e-15) {
                dist[e.to] = nd;
                prev[e.to] = u;
                open.emplace(nd, e.to);
            }
        }
    }
    if (!done[to]) return {};
    std::vector<int> path;
    for (int v = to; v != -1; v = prev[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

namespace detail {

/// Nearest node with a collision-free straight connection to p, or -1.
inline int connect_node(const Roadmap& rm, const Vec2& p) {
    std::vector<std::pair<double, int>> order;
    order.reserve(rm.nodes.size());
    for (std::size_t i = 0; i < rm.nodes.size(); ++i)
        order.emplace_back(distance(p, rm.nodes[i]), static_cast<int>(i));
    std::sort(order.begin(), order.end());
    for (const auto& [d, i] : order)
        if (segment_free(p, rm.nodes[i], rm.world, rm.clearance)) return i;
    return -1;
}

} // namespace detail

/// Preferred velocity from the global planner: straight shot when clear,
/// otherwise toward the next waypoint of the shortest roadmap path.
inline Vec2 global_preferred_velocity(const AgentState& robot, const Roadmap& rm,
                                      const Vec2& goal, double pref_speed) {
    if (!(pref_speed > 0.0)) throw input_error("pref_speed must be positive");
    const Vec2 to_goal = goal - robot.position;
    if (norm(to_goal) <= 1e-9) return {0.0, 0.0};
    if (detail::segment_free(robot.position, goal, rm.world, rm.clearance))
        return pref_speed * unit(to_goal);

    const int entry = detail::connect_node(rm, robot.position);
    const int exit = detail::connect_node(rm, goal);
    if (entry < 0 || exit < 0) throw plan_error("no roadmap access to start or goal");
    const std::vector<int> path = shortest_path(rm, entry, exit);
    if (path.empty()) throw plan_error("goal unreachable on roadmap");

    Vec2 waypoint = rm.nodes[path.front()];
    if (path.size() > 1 && distance(robot.position, waypoint) <= 0.25 * rm.spacing)
        waypoint = rm.nodes[path[1]];
    return pref_speed * unit(waypoint - robot.position);
}

struct Control {
    double speed = 0.0;     // m/s
    double turn_rate = 0.0; // rad/s
};

struct GvoConfig {
    int n_speeds = 11;
    int n_turns = 21;
    double horizon = 3.0;       // s, rollout length
    double safety_margin = 0.1; // m, extra clearance around predicted discs
};

struct GvoResult {
    Control control;
    Vec2 velocity;   // after one step at the chosen control
    bool safe = true;
    double clearance = 0.0; // worst rollout clearance of the chosen control
};

namespace detail {

/// Position after t seconds of constant (speed, turn rate) from pose
/// (p, heading).
inline Vec2 arc_position(const Vec2& p, double heading, const Control& c, double t) {
    if (std::abs(c.turn_rate) < 1e-9)
        return p + c.speed * t * Vec2{std::cos(heading), std::sin(heading)};
    const double th = heading + c.turn_rate * t;
    return {p.x + c.speed / c.turn_rate * (std::sin(th) - std::sin(heading)),
            p.y - c.speed / c.turn_rate * (std::cos(th) - std::cos(heading))};
}

/// Worst clearance of a control rollout against predicted discs, obstacles
/// and the world boundary.
inline double rollout_clearance(const AgentState& robot, double heading, const Control& c,
                                const Prediction& pred, const WorldGeometry& world, double dt,
                                int steps, double margin) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= steps; ++k) {
        const Vec2 p = arc_position(robot.position, heading, c, k * dt);
        const double keep = robot.radius + margin;
        const Rect& b = world.bounds;
        worst = std::min({worst, p.x - b.xmin - keep, b.xmax - p.x - keep, p.y - b.ymin - keep,
                          b.ymax - p.y - keep});
        for (const Polygon& poly : world.obstacles) {
            const double d = point_in_polygon(p, poly, 0.0)
                                 ? -keep
                                 : point_polygon_clearance(p, poly) - keep;
            worst = std::min(worst, d);
        }
        for (const auto& [id, track] : pred.tracks) {
            if (id == robot.id) continue;
            if (track.positions.empty()) continue;
            const Vec2 q = track.positions[std::min<std::size_t>(k - 1,
                                                                 track.positions.size() - 1)];
            worst = std::min(worst, distance(p, q) - track.radius - keep);
        }
        if (worst < -10.0) break; // hopeless, stop early
    }
    return worst;
}

} // namespace detail

/// Samples a deterministic grid of (speed, turn rate) controls, rolls each
/// forward against the prediction and obstacles, discards colliding ones and
/// returns the feasible control whose one-step velocity is closest to the
/// preferred velocity (clearance as tie-break). When every control collides,
/// returns the least-penetrating one flagged unsafe.
inline GvoResult gvo_select(const AgentState& robot, const RobotDynamics& dynamics,
                            const Vec2& preferred, const Prediction& prediction,
                            const WorldGeometry& world, double dt,
                            const GvoConfig& cfg = GvoConfig{}) {
    dynamics.validate();
    if (!(dt > 0.0)) throw input_error("dt must be positive");
    if (prediction.horizon + 1e-9 < cfg.horizon)
        throw input_error("prediction horizon shorter than planning horizon");
    if (norm(preferred) <= 1e-12) return {Control{0.0, 0.0}, Vec2{0.0, 0.0}, true, 0.0};

    const int steps = static_cast<int>(std::lround(cfg.horizon / dt));
    const double dv = cfg.n_speeds > 1 ? (dynamics.v_max - dynamics.v_min) / (cfg.n_speeds - 1)
                                       : 0.0;
    const double dw = cfg.n_turns > 1 ? 2.0 * dynamics.omega_max / (cfg.n_turns - 1) : 0.0;

    bool have_feasible = false;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_clear = -std::numeric_limits<double>::infinity();
    GvoResult best;
    for (int i = 0; i < cfg.n_speeds; ++i) {
        for (int j = 0; j < cfg.n_turns; ++j) {
            const Control c{dynamics.v_min + i * dv, -dynamics.omega_max + j * dw};
            const double heading1 = dynamics.heading + c.turn_rate * dt;
            const Vec2 v = c.speed * Vec2{std::cos(heading1), std::sin(heading1)};
            const double obj = norm_sq(v - preferred);
            const double clear = detail::rollout_clearance(robot, dynamics.heading, c,
                                                           prediction, world, dt, steps,
                                                           cfg.safety_margin);
            const bool feasible = clear >= 0.0;
            bool take = false;
            if (feasible && !have_feasible) {
                take = true;
            } else if (feasible == have_feasible) {
                if (have_feasible)
                    take = obj < best_obj - 1e-12 ||
                           (obj <= best_obj + 1e-12 && clear > best_clear + 1e-12);
                else
                    take = clear > best_clear + 1e-12 ||
                           (clear >= best_clear - 1e-12 && obj < best_obj - 1e-12);
            }
            if (take) {
                have_feasible = have_feasible || feasible;
                best_obj = obj;
                best_clear = clear;
                best = {c, v, feasible, clear};
            }
        }
    }
    return best;
}

/// One per-robot navigation command. Plain surveillance commands carry the
/// robot's own goal; intervention commands may redirect it to a blocking
/// position.
struct InterventionCommand {
    int robot_id = 0;
    Vec2 goal;
    Vec2 velocity;
    GroupParams applied_params;
    double invisibility_used = 1.0;
    Control control;
    bool safe = true;
};

/// Shared navigation context: prebuilt roadmap, mapping, per-robot dynamics.
struct NavContext {
    const Roadmap* roadmap = nullptr;
    const EntitativityMapping* mapping = nullptr;
    GvoConfig gvo;
    double dt = 0.1;
    std::map<int, RobotDynamics> dynamics;
};

namespace detail {

inline Vec2 cohesion_blend(const Vec2& goal_dir, const Vec2& position, const Vec2& centroid,
                           double cohesion, double pref_speed) {
    const Vec2 to_centroid = unit(centroid - position);
    const Vec2 blend = (1.0 - cohesion) * goal_dir + cohesion * to_centroid;
    if (norm(centroid - position) <= 1e-9 || norm(blend) <= 1e-9)
        return pref_speed * goal_dir;
    return pref_speed * unit(blend);
}

inline InterventionCommand command_for(const AgentState& robot, const Vec2& goal,
                                       const Vec2& centroid, const GroupParams& gp,
                                       double s_used, const CrowdState&, const NavContext& ctx,
                                       const Prediction& prediction) {
    const Roadmap& rm = *ctx.roadmap;
    const Vec2 v_global = global_preferred_velocity(robot, rm, goal, gp.pref_speed);
    Vec2 preferred{0.0, 0.0};
    if (norm(v_global) > 1e-12)
        preferred = cohesion_blend(unit(v_global), robot.position, centroid, gp.group_cohesion,
                                   gp.pref_speed);
    const GvoResult gvo = gvo_select(robot, ctx.dynamics.at(robot.id), preferred, prediction,
                                     rm.world, ctx.dt, ctx.gvo);
    InterventionCommand cmd;
    cmd.robot_id = robot.id;
    cmd.goal = goal;
    cmd.velocity = gvo.velocity;
    cmd.applied_params = gp;
    cmd.invisibility_used = s_used;
    cmd.control = gvo.control;
    cmd.safe = gvo.safe;
    return cmd;
}

} // namespace detail

/// Socially-invisible group navigation at invisibility level s: derives the
/// group parameters realizing the target entitativity, blends goal and
/// cohesion directions, and picks dynamically feasible controls.
inline std::vector<InterventionCommand>
invisible_nav_step(const Group& robots, const CrowdState& crowd, const NavContext& ctx,
                   double s, const Prediction& prediction) {
    if (!(s >= 0.0 && s <= 1.0)) throw input_error("s must lie in [0, 1]");
    const EntitativityMapping& mapping = *ctx.mapping;
    const GroupParams gp = params_for_entitativity(mapping, target_entitativity(mapping, s));

    std::vector<int> ids = robots.member_ids;
    std::sort(ids.begin(), ids.end());
    Vec2 centroid{0.0, 0.0};
    for (int id : ids) centroid += crowd.at(id).position;
    centroid = centroid / static_cast<double>(ids.size());

    std::vector<InterventionCommand> commands;
    commands.reserve(ids.size());
    for (int id : ids) {
        const AgentState& robot = crowd.at(id);
        commands.push_back(
            detail::command_for(robot, robot.goal, centroid, gp, s, crowd, ctx, prediction));
    }
    return commands;
}

/// A pedestrian predicted to enter a restricted zone.
struct ZoneThreat {
    int pedestrian_id = 0;
    double entry_time = 0.0; // s from now
    Vec2 entry_point;        // on the zone boundary
    Vec2 approach_dir;       // unit, pointing into the zone
    int zone_index = 0;
};

struct InterventionStepResult {
    std::vector<InterventionCommand> commands;
    std::vector<ZoneThreat> threats;
    std::vector<int> uncovered_ids; // pedestrians whose entry no robot serves
    double s_used = 1.0;

    int uncovered_entries() const { return static_cast<int>(uncovered_ids.size()); }
};

namespace detail {

/// First boundary crossing of segment a->b into the polygon, as a fraction
/// of the segment. Requires b strictly inside and a not inside.
inline double first_crossing(const Vec2& a, const Vec2& b, const Polygon& poly) {
    double best = 1.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& q1 = poly[j];
        const Vec2& q2 = poly[i];
        const Vec2 r = b - a;
        const Vec2 s = q2 - q1;
        const double denom = det(r, s);
        if (std::abs(denom) < 1e-15) continue;
        const double t = det(q1 - a, s) / denom;
        const double u = det(q1 - a, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= -1e-12 && u <= 1.0 + 1e-12) best = std::min(best, t);
    }
    return best;
}

} // namespace detail

/// Scans a prediction for zone entries within the horizon.
inline std::vector<ZoneThreat> detect_zone_threats(const CrowdState& crowd,
                                                   const Prediction& prediction,
                                                   const std::vector<Polygon>& zones,
                                                   double horizon) {
    std::vector<ZoneThreat> threats;
    for (const AgentState& a : crowd.agents) {
        if (a.kind != AgentKind::pedestrian) continue;
        const auto it = prediction.tracks.find(a.id);
        if (it == prediction.tracks.end()) continue;
        const std::vector<Vec2>& track = it->second.positions;

        ZoneThreat best;
        bool found = false;
        for (std::size_t z = 0; z < zones.size(); ++z) {
            const Polygon& zone = zones[z];
            if (point_in_polygon(a.position, zone)) {
                best = {a.id, 0.0, a.position, unit(a.current_velocity), static_cast<int>(z)};
                found = true;
                break;
            }
            Vec2 prev = a.position;
            for (std::size_t k = 0; k < track.size(); ++k) {
                const Vec2 cur = track[k];
                if (point_in_polygon(cur, zone) && !point_in_polygon(prev, zone)) {
                    const double frac = detail::first_crossing(prev, cur, zone);
                    const double t_e = (static_cast<double>(k) + frac) * prediction.dt;
                    if (t_e <= horizon && (!found || t_e < best.entry_time)) {
                        best = {a.id, t_e, prev + (cur - prev) * frac, unit(cur - prev),
                                static_cast<int>(z)};
                        found = true;
                    }
                    break; // first entry into this zone
                }
                prev = cur;
            }
        }
        if (found && best.entry_time <= horizon) threats.push_back(best);
    }
    std::sort(threats.begin(), threats.end(), [](const ZoneThreat& a, const ZoneThreat& b) {
        return a.entry_time != b.entry_time ? a.entry_time < b.entry_time
                                            : a.pedestrian_id < b.pedestrian_id;
    });
    return threats;
}

/// Dynamic intervention: urgency from the earliest predicted zone entry sets
/// the invisibility actually used (never below s_min), threatened entries
/// are served greedily by the nearest free robot, and unassigned robots keep
/// surveying at full invisibility.
inline InterventionStepResult
intervention_step(const Group& robots, const CrowdState& crowd, const NavContext& ctx,
                  const std::vector<Polygon>& zones, double s_min, const Prediction& prediction,
                  double horizon) {
    if (!(s_min >= 0.0 && s_min <= 1.0)) throw input_error("s_min must lie in [0, 1]");
    if (zones.empty()) throw input_error("intervention requires at least one zone");
    if (!(horizon > 0.0)) throw input_error("horizon must be positive");

    InterventionStepResult result;
    result.threats = detect_zone_threats(crowd, prediction, zones, horizon);
    if (result.threats.empty()) {
        result.commands = invisible_nav_step(robots, crowd, ctx, 1.0, prediction);
        result.s_used = 1.0;
        return result;
    }

    double urgency = 0.0;
    for (const ZoneThreat& t : result.threats)
        urgency = std::max(urgency, std::clamp(1.0 - t.entry_time / horizon, 0.0, 1.0));
    const double s_used = std::max(s_min, 1.0 - urgency);
    result.s_used = s_used;

    const EntitativityMapping& mapping = *ctx.mapping;
    const GroupParams gp_active =
        params_for_entitativity(mapping, target_entitativity(mapping, s_used));
    const GroupParams gp_idle =
        params_for_entitativity(mapping, target_entitativity(mapping, 1.0));

    std::vector<int> ids = robots.member_ids;
    std::sort(ids.begin(), ids.end());
    Vec2 centroid{0.0, 0.0};
    for (int id : ids) centroid += crowd.at(id).position;
    centroid = centroid / static_cast<double>(ids.size());

    // greedy assignment: most urgent entry first, nearest free robot
    std::map<int, const ZoneThreat*> assignment;
    std::vector<int> free_ids = ids;
    for (const ZoneThreat& t : result.threats) {
        if (free_ids.empty()) {
            result.uncovered_ids.push_back(t.pedestrian_id);
            continue;
        }
        int best_id = free_ids.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (int id : free_ids) {
            const double d = distance(crowd.at(id).position, t.entry_point);
            if (d < best_d - 1e-12) {
                best_d = d;
                best_id = id;
            }
        }
        assignment[best_id] = &t;
        free_ids.erase(std::find(free_ids.begin(), free_ids.end(), best_id));
    }

    for (int id : ids) {
        const AgentState& robot = crowd.at(id);
        const auto it = assignment.find(id);
        if (it != assignment.end()) {
            const ZoneThreat& t = *it->second;
            const Vec2 block_goal = t.entry_point - t.approach_dir * (robot.radius + 0.5);
            result.commands.push_back(detail::command_for(robot, block_goal, centroid, gp_active,
                                                          s_used, crowd, ctx, prediction));
        } else {
            result.commands.push_back(detail::command_for(robot, robot.goal, centroid, gp_idle,
                                                          1.0, crowd, ctx, prediction));
        }
    }
    return result;
}

} // namespace entinav

#endif
