// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HELPS_GEOMETRY_HPP
#define HELPS_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace helps {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    friend bool operator==(const Rect&, const Rect&) = default;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool valid() const { return x1 > x0 && y1 > y0; }

    bool contains(Vec2 p, double eps = kGeomEps) const {
        return p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps;
    }
    bool contains_strict(Vec2 p, double eps = kGeomEps) const {
        return p.x > x0 + eps && p.x < x1 - eps && p.y > y0 + eps && p.y < y1 - eps;
    }
    bool contains(const Rect& r, double eps = kGeomEps) const {
        return r.x0 >= x0 - eps && r.x1 <= x1 + eps && r.y0 >= y0 - eps && r.y1 <= y1 + eps;
    }
    /// Overlap with positive area.
    bool overlaps(const Rect& r, double eps = kGeomEps) const {
        return std::min(x1, r.x1) - std::max(x0, r.x0) > eps &&
               std::min(y1, r.y1) - std::max(y0, r.y0) > eps;
    }
    double overlap_area(const Rect& r) const {
        const double w = std::min(x1, r.x1) - std::max(x0, r.x0);
        const double h = std::min(y1, r.y1) - std::max(y0, r.y0);
        return (w > 0.0 && h > 0.0) ? w * h : 0.0;
    }
    Rect intersect(const Rect& r) const {
        return {std::max(x0, r.x0), std::max(y0, r.y0), std::min(x1, r.x1), std::min(y1, r.y1)};
    }
    /// Euclidean distance from p to the rectangle (0 inside).
    double distance_to(Vec2 p) const {
        const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
        const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
        return std::hypot(dx, dy);
    }
};

using Polyline = std::vector<Vec2>;

double polyline_length(std::span<const Vec2> line);

/// Point at arc length s (clamped to [0, length]) and the tangent heading there.
struct PolylinePoint {
    Vec2 point;
    double heading = 0.0;
};
PolylinePoint polyline_at(std::span<const Vec2> line, double s);

/// Arc length of the orthogonal projection of p onto the polyline.
double polyline_project(std::span<const Vec2> line, Vec2 p);

/// Sub-path between arc lengths s0 and s1 (either order, direction preserved).
Polyline polyline_slice(std::span<const Vec2> line, double s0, double s1);

/// Nearest point on a segment.
Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p);

/// Angle wrapped to [-pi, pi).
double wrap_angle(double a);
/// Heading normalized to [0, 2pi).
double normalize_heading(double a);
/// Bearing (math convention, counter-clockwise from +x) from a to b.
inline double bearing(Vec2 from, Vec2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

/// Parameter interval [t_in, t_out] of segment a->b inside the closed rectangle,
/// clipped to [0, 1]; nullopt when the segment misses the rectangle.
std::optional<std::pair<double, double>> clip_segment(Vec2 a, Vec2 b, const Rect& r);

/// Transversal crossings of the rectangle boundary by the segment, as parameters in (0, 1).
/// Endpoints lying on the boundary count as inside; grazing contacts do not count.
std::vector<double> boundary_crossings(Vec2 a, Vec2 b, const Rect& r);

/// Distance along a ray from origin until it first touches the rectangle (0 when inside).
std::optional<double> ray_hit_distance(Vec2 origin, double heading, const Rect& r, double max_range);

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
bool polyline_self_intersects(std::span<const Vec2> line);

}  // namespace helps

#endif  // HELPS_GEOMETRY_HPP
