#include "pgam/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pgam::geom {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

void project(std::span<const Vec2> poly, const Vec2& axis, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& p : poly) {
        double d = p.dot(axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
}

bool separated_along_edges(std::span<const Vec2> a, std::span<const Vec2> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        Vec2 e = a[(i + 1) % a.size()] - a[i];
        Vec2 axis(-e.y(), e.x());
        if (axis.squaredNorm() == 0) continue;
        double alo, ahi, blo, bhi;
        project(a, axis, alo, ahi);
        project(b, axis, blo, bhi);
        if (ahi < blo || bhi < alo) return true;
    }
    return false;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.squaredNorm();
    double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + t * ab - p).norm();
}

}  // namespace

Polygon oriented_rect(const Vec2& center, double heading, double half_length, double half_width) {
    Vec2 u(std::cos(heading), std::sin(heading));
    Vec2 v(-u.y(), u.x());
    return {center + u * half_length + v * half_width, center - u * half_length + v * half_width,
            center - u * half_length - v * half_width, center + u * half_length - v * half_width};
}

Polygon parallelogram(const Vec2& origin, const Vec2& edge_u, const Vec2& edge_v) {
    return {origin, origin + edge_u, origin + edge_u + edge_v, origin + edge_v};
}

Polygon to_polygon(const Rect& r) {
    return {r.min, Vec2(r.max.x(), r.min.y()), r.max, Vec2(r.min.x(), r.max.y())};
}

bool convex_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
    return !separated_along_edges(a, b) && !separated_along_edges(b, a);
}

bool point_in_convex(std::span<const Vec2> poly, const Vec2& p) {
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        double c = cross(poly[(i + 1) % poly.size()] - poly[i], p - poly[i]);
        if (c > 0) pos = true;
        if (c < 0) neg = true;
        if (pos && neg) return false;
    }
    return true;
}

double distance_to_convex(std::span<const Vec2> poly, const Vec2& p) {
    if (point_in_convex(poly, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

double max_distance_to_vertices(std::span<const Vec2> poly, const Vec2& p) {
    double best = 0;
    for (const auto& v : poly) best = std::max(best, (v - p).norm());
    return best;
}

bool line_rect(const Vec2& origin, const Vec2& dir, const Rect& r, Interval& out) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) {
        if (std::abs(dir[k]) < 1e-15) {
            if (origin[k] < r.min[k] || origin[k] > r.max[k]) return false;
            continue;
        }
        double t0 = (r.min[k] - origin[k]) / dir[k];
        double t1 = (r.max[k] - origin[k]) / dir[k];
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    }
    if (lo > hi) return false;
    out = {lo, hi};
    return true;
}

bool line_circle(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius, Interval& out) {
    Vec2 oc = origin - center;
    double b = oc.dot(dir);
    double c = oc.squaredNorm() - radius * radius;
    double disc = b * b - c;
    if (disc < 0) return false;
    double root = std::sqrt(disc);
    out = {-b - root, -b + root};
    return true;
}

void merge_intervals(std::vector<Interval>& iv) {
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const auto& i : iv) {
        if (!merged.empty() && i.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, i.hi);
        } else {
            merged.push_back(i);
        }
    }
    iv = std::move(merged);
}

}  // namespace pgam::geom
