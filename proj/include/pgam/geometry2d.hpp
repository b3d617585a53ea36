#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pgam::geom {

using Vec2 = Eigen::Vector2d;
using Polygon = std::vector<Vec2>;  // convex, counter-clockwise or clockwise

struct Rect {  // axis-aligned
    Vec2 min;
    Vec2 max;
};

struct Interval {
    double lo;
    double hi;
};

Polygon oriented_rect(const Vec2& center, double heading, double half_length, double half_width);
Polygon parallelogram(const Vec2& origin, const Vec2& edge_u, const Vec2& edge_v);
Polygon to_polygon(const Rect& r);

// Separating-axis test for two convex polygons. Touching counts as intersecting.
bool convex_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

bool point_in_convex(std::span<const Vec2> poly, const Vec2& p);
double distance_to_convex(std::span<const Vec2> poly, const Vec2& p);
double max_distance_to_vertices(std::span<const Vec2> poly, const Vec2& p);

// Chord of the line origin + s·dir (dir unit) through a shape, as an s-interval.
bool line_rect(const Vec2& origin, const Vec2& dir, const Rect& r, Interval& out);
bool line_circle(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius, Interval& out);

// Merges overlapping intervals in place, sorted by lo.
void merge_intervals(std::vector<Interval>& iv);

}  // namespace pgam::geom
