#ifndef ENTINAV_IO_HPP
#define ENTINAV_IO_HPP

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entinav/core.hpp"
#include "entinav/scenario.hpp"
#include "entinav/sim.hpp"
#include "entinav/study.hpp"

namespace entinav {

namespace detail {

inline std::string format_double(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw parse_error("trailing characters in number '" + s + "'", line_no);
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception&) {
        throw parse_error("expected a number, got '" + s + "'", line_no);
    }
}

inline int parse_int(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw parse_error("trailing characters in integer '" + s + "'", line_no);
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception&) {
        throw parse_error("expected an integer, got '" + s + "'", line_no);
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write file: " + path);
    out << content;
}

} // namespace detail

// --- trajectory TSV ----------------------------------------------------------

inline constexpr const char* kTrajectoryHeader = "frame\tagent_id\tkind\tx\ty";

/// Tab-separated trajectory table, frame-major, sorted by (frame, agent_id).
inline std::string trajectories_to_tsv(const std::vector<Trajectory>& trajectories) {
    struct Row {
        int frame;
        int id;
        AgentKind kind;
        Vec2 p;
    };
    std::vector<Row> rows;
    for (const Trajectory& t : trajectories)
        for (const TrajectorySample& s : t.samples)
            rows.push_back({s.frame, t.agent_id, t.kind, s.position});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    std::string out = kTrajectoryHeader;
    out += '\n';
    for (const Row& r : rows) {
        out += std::to_string(r.frame);
        out += '\t';
        out += std::to_string(r.id);
        out += '\t';
        out += to_string(r.kind);
        out += '\t';
        out += detail::format_double(r.p.x);
        out += '\t';
        out += detail::format_double(r.p.y);
        out += '\n';
    }
    return out;
}

inline std::vector<Trajectory> trajectories_from_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw parse_error("empty trajectory file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryHeader)
        throw parse_error("expected header '" + std::string(kTrajectoryHeader) + "'", 1);

    std::map<int, Trajectory> by_id;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = detail::split(line, '\t');
        if (cols.size() != 5) throw parse_error("expected 5 tab-separated columns", line_no);
        const int frame = detail::parse_int(cols[0], line_no);
        if (frame < 0) throw parse_error("frame must be non-negative", line_no);
        const int id = detail::parse_int(cols[1], line_no);
        AgentKind kind;
        if (cols[2] == "pedestrian")
            kind = AgentKind::pedestrian;
        else if (cols[2] == "robot")
            kind = AgentKind::robot;
        else
            throw parse_error("unknown agent kind '" + cols[2] + "'", line_no);
        const double x = detail::parse_number(cols[3], line_no);
        const double y = detail::parse_number(cols[4], line_no);
        Trajectory& t = by_id[id];
        t.agent_id = id;
        t.kind = kind;
        t.samples.push_back({frame, {x, y}});
    }
    std::vector<Trajectory> out;
    for (auto& [id, t] : by_id) {
        std::sort(t.samples.begin(), t.samples.end(),
                  [](const TrajectorySample& a, const TrajectorySample& b) {
                      return a.frame < b.frame;
                  });
        t.validate();
        out.push_back(std::move(t));
    }
    return out;
}

inline void write_trajectories(const std::string& path, const std::vector<Trajectory>& t) {
    detail::write_file(path, trajectories_to_tsv(t));
}
inline std::vector<Trajectory> read_trajectories(const std::string& path) {
    return trajectories_from_tsv(detail::read_file(path));
}

// --- 4x4 matrix text ---------------------------------------------------------

/// Row-major decimal text, one row per line, space-separated, full precision.
inline std::string matrix_to_text(const Eigen::Matrix4d& m) {
    std::string out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (c) out += ' ';
            out += detail::format_double(m(r, c), "%.17g");
        }
        out += '\n';
    }
    return out;
}

inline Eigen::Matrix4d matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) vals.push_back(detail::parse_number(tok, 0));
    if (vals.size() != 16)
        throw parse_error("expected 16 numbers for a 4x4 matrix, got " +
                          std::to_string(vals.size()));
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = vals[static_cast<std::size_t>(r) * 4 + c];
    return m;
}

inline void write_matrix(const std::string& path, const Eigen::Matrix4d& m) {
    detail::write_file(path, matrix_to_text(m));
}
inline Eigen::Matrix4d read_matrix(const std::string& path) {
    return matrix_from_text(detail::read_file(path));
}

// --- study responses CSV -----------------------------------------------------

inline constexpr const char* kStudyHeader =
    "participant_id,pair_id,varied_param,level,friendliness,creepiness,comfort,unnerving";

inline std::vector<StudyResponse> study_responses_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw parse_error("empty study file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kStudyHeader)
        throw parse_error("expected header '" + std::string(kStudyHeader) + "'", 1);

    std::vector<StudyResponse> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = detail::split(line, ',');
        if (cols.size() != 8) throw parse_error("expected 8 comma-separated columns", line_no);
        StudyResponse r;
        r.participant_id = detail::parse_int(cols[0], line_no);
        r.pair_id = detail::parse_int(cols[1], line_no);
        if (cols[2] == "neighbor_dist")
            r.varied_param = GpField::neighbor_dist;
        else if (cols[2] == "radius")
            r.varied_param = GpField::radius;
        else if (cols[2] == "pref_speed")
            r.varied_param = GpField::pref_speed;
        else if (cols[2] == "group_cohesion")
            r.varied_param = GpField::group_cohesion;
        else
            throw parse_error("unknown varied_param '" + cols[2] + "'", line_no);
        if (cols[3] == "min")
            r.level = GpLevel::min;
        else if (cols[3] == "max")
            r.level = GpLevel::max;
        else
            throw parse_error("unknown level '" + cols[3] + "'", line_no);
        for (int k = 0; k < 4; ++k) r.ratings[k] = detail::parse_number(cols[4 + k], line_no);
        try {
            r.validate();
        } catch (const validation_error& e) {
            throw parse_error(e.what(), line_no);
        }
        out.push_back(r);
    }
    return out;
}

inline std::string study_responses_to_csv(const std::vector<StudyResponse>& responses) {
    std::string out = kStudyHeader;
    out += '\n';
    for (const StudyResponse& r : responses) {
        out += std::to_string(r.participant_id);
        out += ',';
        out += std::to_string(r.pair_id);
        out += ',';
        out += to_string(r.varied_param);
        out += ',';
        out += to_string(r.level);
        for (double v : r.ratings) {
            out += ',';
            out += detail::format_double(v, "%.17g");
        }
        out += '\n';
    }
    return out;
}

inline std::vector<StudyResponse> read_study_responses(const std::string& path) {
    return study_responses_from_csv(detail::read_file(path));
}

// --- run report --------------------------------------------------------------

inline std::string report_to_text(const RunReport& r) {
    std::string out;
    out += "intrusions_baseline " + std::to_string(r.intrusions_baseline) + "\n";
    out += "intrusions_ours " + std::to_string(r.intrusions_ours) + "\n";
    out += "intrusions_avoided " + std::to_string(r.intrusions_avoided) + "\n";
    out += "additional_time_pct " + detail::format_double(r.additional_time_pct) + "\n";
    out += "mean_step_time_us " + detail::format_double(r.mean_step_time_us, "%.3f") + "\n";
    out += "collisions " + std::to_string(r.collisions) + "\n";
    out += "uncovered_entries " + std::to_string(r.uncovered_entries) + "\n";
    return out;
}

inline RunReport report_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> kv;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto pos = line.find(' ');
        if (pos == std::string::npos) throw parse_error("expected 'key value'", line_no);
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw parse_error(std::string("missing report key ") + key);
        return it->second;
    };
    RunReport r;
    r.intrusions_baseline = detail::parse_int(need("intrusions_baseline"), 0);
    r.intrusions_ours = detail::parse_int(need("intrusions_ours"), 0);
    r.intrusions_avoided = detail::parse_int(need("intrusions_avoided"), 0);
    r.additional_time_pct = detail::parse_number(need("additional_time_pct"), 0);
    r.mean_step_time_us = detail::parse_number(need("mean_step_time_us"), 0);
    r.collisions = detail::parse_int(need("collisions"), 0);
    r.uncovered_entries = detail::parse_int(need("uncovered_entries"), 0);
    return r;
}

inline void write_report(const std::string& path, const RunReport& r) {
    detail::write_file(path, report_to_text(r));
}
inline RunReport read_report(const std::string& path) {
    return report_from_text(detail::read_file(path));
}

// --- per-frame plot table ------------------------------------------------------

/// Wide per-frame table for external plotting: one column pair per agent,
/// empty cells where an agent has no sample.
inline std::string plot_data_from_trajectories(const std::vector<Trajectory>& trajectories) {
    std::vector<const Trajectory*> sorted;
    for (const Trajectory& t : trajectories) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(),
              [](const Trajectory* a, const Trajectory* b) { return a->agent_id < b->agent_id; });
    int max_frame = -1;
    for (const Trajectory* t : sorted)
        if (!t->samples.empty()) max_frame = std::max(max_frame, t->samples.back().frame);

    std::string out = "frame";
    for (const Trajectory* t : sorted) {
        const std::string id = std::to_string(t->agent_id);
        out += "\ta" + id + "_x\ta" + id + "_y";
    }
    out += '\n';
    for (int f = 0; f <= max_frame; ++f) {
        out += std::to_string(f);
        for (const Trajectory* t : sorted) {
            const TrajectorySample* found = nullptr;
            for (const TrajectorySample& s : t->samples)
                if (s.frame == f) {
                    found = &s;
                    break;
                }
            if (found) {
                out += '\t';
                out += detail::format_double(found->position.x);
                out += '\t';
                out += detail::format_double(found->position.y);
            } else {
                out += "\t\t";
            }
        }
        out += '\n';
    }
    return out;
}

// --- scenario JSON -------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

inline void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw validation_error("unknown field " + path + key);
    }
}

inline Vec2 json_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw validation_error(path + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Polygon json_polygon(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() < 3)
        throw validation_error(path + " must list at least 3 vertices");
    Polygon poly;
    for (std::size_t i = 0; i < j.size(); ++i)
        poly.push_back(json_point(j[i], path + "[" + std::to_string(i) + "]"));
    return poly;
}

inline double json_number(const json& obj, const char* key, double fallback,
                          const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw validation_error(path + key + " must be a number");
    return obj[key].get<double>();
}

inline MotionParams json_motion_params(const json& j, MotionParams base,
                                       const std::string& path) {
    require_keys(j, {"neighbor_dist", "max_neighbors", "planning_horizon", "radius",
                     "pref_speed", "group_cohesion"}, path);
    base.neighbor_dist = json_number(j, "neighbor_dist", base.neighbor_dist, path);
    if (j.contains("max_neighbors")) {
        if (!j["max_neighbors"].is_number_integer())
            throw validation_error(path + "max_neighbors must be an integer");
        base.max_neighbors = j["max_neighbors"].get<int>();
    }
    base.planning_horizon = json_number(j, "planning_horizon", base.planning_horizon, path);
    base.radius = json_number(j, "radius", base.radius, path);
    base.pref_speed = json_number(j, "pref_speed", base.pref_speed, path);
    base.group_cohesion = json_number(j, "group_cohesion", base.group_cohesion, path);
    base.validate();
    // the four analyzed fields additionally respect the study bounds
    GroupParams gp{base.neighbor_dist, base.radius, base.pref_speed, base.group_cohesion};
    gp.validate(path);
    return base;
}

} // namespace detail

/// Parses and validates a scenario from structured text (JSON). Syntax
/// errors carry the line; semantic problems carry the field path.
inline Scenario parse_scenario(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(e.what(), detail::line_of_byte(text, e.byte));
    }
    if (!j.is_object()) throw validation_error("scenario must be a JSON object");
    detail::require_keys(j,
                         {"world", "pedestrians", "robots", "zones", "invisibility", "dt",
                          "duration", "seed", "mode", "start_jitter", "reaction_multiplier",
                          "intervention_horizon", "pedestrian_defaults"},
                         "");

    Scenario sc;
    if (!j.contains("world") || !j["world"].is_object())
        throw validation_error("world must be an object with bounds");
    detail::require_keys(j["world"], {"bounds", "obstacles"}, "world.");
    {
        const json& w = j["world"];
        if (!w.contains("bounds") || !w["bounds"].is_array() || w["bounds"].size() != 4)
            throw validation_error("world.bounds must be [xmin, ymin, xmax, ymax]");
        sc.world.bounds = {w["bounds"][0].get<double>(), w["bounds"][1].get<double>(),
                           w["bounds"][2].get<double>(), w["bounds"][3].get<double>()};
        if (w.contains("obstacles"))
            for (std::size_t i = 0; i < w["obstacles"].size(); ++i)
                sc.world.obstacles.push_back(detail::json_polygon(
                    w["obstacles"][i], "world.obstacles[" + std::to_string(i) + "]"));
    }

    if (j.contains("pedestrians")) {
        if (!j["pedestrians"].is_array()) throw validation_error("pedestrians must be an array");
        for (std::size_t i = 0; i < j["pedestrians"].size(); ++i) {
            const json& p = j["pedestrians"][i];
            const std::string path = "pedestrians[" + std::to_string(i) + "].";
            detail::require_keys(p, {"start", "goal", "radius", "params"}, path);
            PedestrianSpec ps;
            if (!p.contains("start") || !p.contains("goal"))
                throw validation_error(path + "start and goal are required");
            ps.start = detail::json_point(p["start"], path + "start");
            ps.goal = detail::json_point(p["goal"], path + "goal");
            ps.radius = detail::json_number(p, "radius", ps.radius, path);
            if (p.contains("params"))
                ps.params = detail::json_motion_params(p["params"], MotionParams{}, path + "params.");
            sc.pedestrians.push_back(ps);
        }
    }

    if (j.contains("robots")) {
        const json& r = j["robots"];
        const std::string path = "robots.";
        detail::require_keys(r, {"starts", "goals", "size", "radius", "dynamics", "params"},
                             path);
        if (r.contains("starts"))
            for (std::size_t i = 0; i < r["starts"].size(); ++i)
                sc.robots.starts.push_back(detail::json_point(
                    r["starts"][i], path + "starts[" + std::to_string(i) + "]"));
        if (r.contains("goals")) {
            for (std::size_t i = 0; i < r["goals"].size(); ++i) {
                const json& g = r["goals"][i];
                const std::string gpath = path + "goals[" + std::to_string(i) + "]";
                std::vector<Vec2> wp;
                if (!g.is_array() || g.empty()) throw validation_error(gpath + " must be a list");
                if (g[0].is_number()) {
                    wp.push_back(detail::json_point(g, gpath)); // single goal shorthand
                } else {
                    for (std::size_t k = 0; k < g.size(); ++k)
                        wp.push_back(detail::json_point(g[k],
                                                        gpath + "[" + std::to_string(k) + "]"));
                }
                sc.robots.goals.push_back(std::move(wp));
            }
        }
        sc.robots.size = static_cast<int>(sc.robots.starts.size());
        if (r.contains("size")) {
            if (!r["size"].is_number_integer())
                throw validation_error(path + "size must be an integer");
            sc.robots.size = r["size"].get<int>();
        }
        sc.robots.radius = detail::json_number(r, "radius", sc.robots.radius, path);
        if (r.contains("dynamics")) {
            const json& d = r["dynamics"];
            detail::require_keys(d, {"v_max", "v_min", "omega_max"}, path + "dynamics.");
            sc.robots.dynamics.v_max =
                detail::json_number(d, "v_max", sc.robots.dynamics.v_max, path + "dynamics.");
            sc.robots.dynamics.v_min =
                detail::json_number(d, "v_min", sc.robots.dynamics.v_min, path + "dynamics.");
            sc.robots.dynamics.omega_max = detail::json_number(d, "omega_max",
                                                               sc.robots.dynamics.omega_max,
                                                               path + "dynamics.");
        }
        if (r.contains("params")) {
            const json& p = r["params"];
            detail::require_keys(p, {"neighbor_dist", "radius", "pref_speed", "group_cohesion"},
                                 path + "params.");
            GroupParams gp;
            gp.neighbor_dist =
                detail::json_number(p, "neighbor_dist", gp.neighbor_dist, path + "params.");
            gp.radius = detail::json_number(p, "radius", gp.radius, path + "params.");
            gp.pref_speed = detail::json_number(p, "pref_speed", gp.pref_speed, path + "params.");
            gp.group_cohesion =
                detail::json_number(p, "group_cohesion", gp.group_cohesion, path + "params.");
            gp.validate(path + "params.");
            sc.robots.params = gp;
        }
    }

    if (j.contains("zones"))
        for (std::size_t i = 0; i < j["zones"].size(); ++i)
            sc.zones.push_back(
                detail::json_polygon(j["zones"][i], "zones[" + std::to_string(i) + "]"));

    if (j.contains("invisibility")) {
        const json& v = j["invisibility"];
        detail::require_keys(v, {"mode", "s", "s_min"}, "invisibility.");
        if (v.contains("mode")) {
            const std::string m = v["mode"].get<std::string>();
            if (m == "fixed_s")
                sc.invisibility.mode = InvisibilityMode::fixed_s;
            else if (m == "lower_bound")
                sc.invisibility.mode = InvisibilityMode::lower_bound;
            else
                throw validation_error("invisibility.mode must be fixed_s or lower_bound");
        }
        sc.invisibility.s = detail::json_number(v, "s", sc.invisibility.s, "invisibility.");
        sc.invisibility.s_min =
            detail::json_number(v, "s_min", sc.invisibility.s_min, "invisibility.");
    }

    sc.dt = detail::json_number(j, "dt", sc.dt, "");
    sc.duration = detail::json_number(j, "duration", sc.duration, "");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw validation_error("seed must be an integer");
        sc.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("mode")) {
        const std::string m = j["mode"].get<std::string>();
        if (m == "surveillance")
            sc.mode = ScenarioMode::surveillance;
        else if (m == "intervention")
            sc.mode = ScenarioMode::intervention;
        else if (m == "baseline")
            sc.mode = ScenarioMode::baseline;
        else
            throw validation_error("mode must be surveillance, intervention or baseline");
    }
    sc.start_jitter = detail::json_number(j, "start_jitter", sc.start_jitter, "");
    sc.reaction_multiplier =
        detail::json_number(j, "reaction_multiplier", sc.reaction_multiplier, "");
    sc.intervention_horizon =
        detail::json_number(j, "intervention_horizon", sc.intervention_horizon, "");
    if (j.contains("pedestrian_defaults"))
        sc.pedestrian_defaults = detail::json_motion_params(j["pedestrian_defaults"],
                                                            MotionParams{},
                                                            "pedestrian_defaults.");

    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    return parse_scenario(detail::read_file(path));
}

} // namespace entinav

#endif
