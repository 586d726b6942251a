// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/geometry.hpp"

#include <algorithm>
#include <limits>

namespace helps {

double polyline_length(std::span<const Vec2> line) {
    double total = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
    return total;
}

PolylinePoint polyline_at(std::span<const Vec2> line, double s) {
    if (line.empty()) return {};
    if (line.size() == 1) return {line.front(), 0.0};
    double heading = 0.0;
    double acc = 0.0;
    s = std::max(0.0, s);
    for (std::size_t i = 1; i < line.size(); ++i) {
        const Vec2 a = line[i - 1];
        const Vec2 b = line[i];
        const double len = distance(a, b);
        if (len <= kGeomEps) continue;
        heading = normalize_heading(bearing(a, b));
        // A point exactly on a vertex takes the heading of the outgoing segment,
        // except at the final vertex.
        if (s < acc + len || i + 1 == line.size()) {
            const double u = std::clamp((s - acc) / len, 0.0, 1.0);
            return {a + (b - a) * u, heading};
        }
        acc += len;
    }
    return {line.back(), heading};
}

Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 d = b - a;
    const double len2 = d.dot(d);
    if (len2 <= 0.0) return a;
    const double u = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
    return a + d * u;
}

double polyline_project(std::span<const Vec2> line, Vec2 p) {
    if (line.size() < 2) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i) {
        const Vec2 q = closest_point_on_segment(line[i - 1], line[i], p);
        const double d = distance(q, p);
        if (d < best - kGeomEps) {
            best = d;
            best_s = acc + distance(line[i - 1], q);
        }
        acc += distance(line[i - 1], line[i]);
    }
    return best_s;
}

Polyline polyline_slice(std::span<const Vec2> line, double s0, double s1) {
    if (s0 > s1) {
        Polyline out = polyline_slice(line, s1, s0);
        std::reverse(out.begin(), out.end());
        return out;
    }
    Polyline out;
    out.push_back(polyline_at(line, s0).point);
    double acc = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i) {
        acc += distance(line[i - 1], line[i]);
        if (acc > s0 + kGeomEps && acc < s1 - kGeomEps) out.push_back(line[i]);
    }
    const Vec2 end = polyline_at(line, s1).point;
    if (distance(end, out.back()) > kGeomEps || out.size() == 1) out.push_back(end);
    return out;
}

double wrap_angle(double a) {
    double w = std::fmod(a + kPi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w - kPi;
}

double normalize_heading(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

std::optional<std::pair<double, double>> clip_segment(Vec2 a, Vec2 b, const Rect& r) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return std::nullopt;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, t);
        } else {
            t1 = std::min(t1, t);
        }
        if (t0 > t1) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

std::vector<double> boundary_crossings(Vec2 a, Vec2 b, const Rect& r) {
    std::vector<double> out;
    const double len = distance(a, b);
    if (len <= kGeomEps) return out;
    const auto clip = clip_segment(a, b, r);
    if (!clip) return out;
    const auto [t_in, t_out] = *clip;
    // Corner grazes and travel along a wall are not crossings.
    if ((t_out - t_in) * len <= 1e-7) return out;
    const double t_eps = 1e-9 / len;
    if (t_in > t_eps) out.push_back(t_in);
    if (t_out < 1.0 - t_eps) out.push_back(t_out);
    return out;
}

std::optional<double> ray_hit_distance(Vec2 origin, double heading, const Rect& r, double max_range) {
    const Vec2 end = origin + Vec2{std::cos(heading), std::sin(heading)} * max_range;
    const auto clip = clip_segment(origin, end, r);
    if (!clip) return std::nullopt;
    return clip->first * max_range;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = (b - a).cross(c - a);
    if (std::abs(v) <= 1e-12) return 0;
    return v > 0.0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - kGeomEps <= p.x && p.x <= std::max(a.x, b.x) + kGeomEps &&
           std::min(a.y, b.y) - kGeomEps <= p.y && p.y <= std::max(a.y, b.y) + kGeomEps;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool polyline_self_intersects(std::span<const Vec2> line) {
    const std::size_t n = line.size();
    if (n < 4) return false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 2; j + 1 < n; ++j) {
            // Closed loops share the first and last vertex; that is not a crossing.
            if (i == 0 && j + 2 == n && line.front() == line.back()) continue;
            if (segments_intersect(line[i], line[i + 1], line[j], line[j + 1])) return true;
        }
    }
    return false;
}

}  // namespace helps
