#ifndef ENTINAV_GEOMETRY_HPP
#define ENTINAV_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "entinav/errors.hpp"

namespace entinav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// 2-D cross product (z component of the 3-D cross).
inline double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm_sq(const Vec2& v) { return v.x * v.x + v.y * v.y; }
inline double norm(const Vec2& v) { return std::sqrt(norm_sq(v)); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
/// Unit vector; the zero vector maps to zero.
inline Vec2 unit(const Vec2& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec2{0.0, 0.0};
}
/// 90-degree counter-clockwise rotation.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(const Vec2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

using Polygon = std::vector<Vec2>;

inline double polygon_area(const Polygon& poly) {
    double a = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        a += det(poly[j], poly[i]);
    return 0.5 * a;
}

/// Distance from point to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = norm_sq(ab);
    if (len_sq <= 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return distance(p, a + ab * t);
}

/// Closest point on segment [a, b] to p.
inline Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = norm_sq(ab);
    if (len_sq <= 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return a + ab * t;
}

inline bool point_on_polygon_boundary(const Vec2& p, const Polygon& poly, double eps = 1e-9) {
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        if (point_segment_distance(p, poly[j], poly[i]) <= eps) return true;
    return false;
}

/// Even-odd point-in-polygon test (pnpoly). Points on the boundary are
/// excluded explicitly, so "strictly inside" is well defined.
inline bool point_in_polygon(const Vec2& p, const Polygon& poly, double boundary_eps = 1e-9) {
    if (poly.size() < 3) throw input_error("polygon needs at least 3 vertices");
    if (point_on_polygon_boundary(p, poly, boundary_eps)) return false;
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y) &&
            p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            inside = !inside;
    }
    return inside;
}

/// Proper + collinear-overlap segment intersection test.
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double v = det(b - a, c - a);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    auto on_seg = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return std::min(a.x, b.x) - 1e-12 <= c.x && c.x <= std::max(a.x, b.x) + 1e-12 &&
               std::min(a.y, b.y) - 1e-12 <= c.y && c.y <= std::max(a.y, b.y) + 1e-12;
    };
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(p1, p2, q1)) return true;
    if (o2 == 0 && on_seg(p1, p2, q2)) return true;
    if (o3 == 0 && on_seg(q1, q2, p1)) return true;
    if (o4 == 0 && on_seg(q1, q2, p2)) return true;
    return false;
}

inline double segment_segment_distance(const Vec2& p1, const Vec2& p2,
                                        const Vec2& q1, const Vec2& q2) {
    if (segments_intersect(p1, p2, q1, q2)) return 0.0;
    return std::min(std::min(point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2)),
                    std::min(point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)));
}

/// Distance from a point to the polygon boundary; 0 if inside.
inline double point_polygon_clearance(const Vec2& p, const Polygon& poly) {
    if (point_in_polygon(p, poly, 0.0)) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        d = std::min(d, point_segment_distance(p, poly[j], poly[i]));
    return d;
}

/// Distance from segment [a, b] to a polygon; 0 if the segment touches or
/// enters it.
inline double segment_polygon_clearance(const Vec2& a, const Vec2& b, const Polygon& poly) {
    if (point_in_polygon(a, poly, 0.0) || point_in_polygon(b, poly, 0.0)) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        d = std::min(d, segment_segment_distance(a, b, poly[j], poly[i]));
    return d;
}

/// Closest point on the polygon boundary to p.
inline Vec2 closest_point_on_polygon(const Vec2& p, const Polygon& poly) {
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_pt = poly.empty() ? p : poly.front();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 c = closest_point_on_segment(p, poly[j], poly[i]);
        const double d = distance(p, c);
        if (d < best) {
            best = d;
            best_pt = c;
        }
    }
    return best_pt;
}

/// Checks for self-intersection between non-adjacent edges.
inline bool polygon_is_simple(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (shared vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

} // namespace entinav

#endif
