#include "pgam/task_evaluators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pgam {

using geom::Vec2;

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::success_unstable: return "success_unstable";
        case Outcome::failure: return "failure";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// IK availability

void IkScenario::validate() const {
    if (!(reach_min >= 0 && reach_min < reach_max)) throw std::invalid_argument("ik: need 0 <= reach_min < reach_max");
    if (!(heading_half_angle > 0 && heading_half_angle <= kPi)) throw std::invalid_argument("ik: heading_half_angle must be in (0, 180] degrees");
    if (!(footprint_length > 0 && footprint_width > 0)) throw std::invalid_argument("ik: footprint dimensions must be positive");
    for (const auto& o : obstacles) {
        if (!(o.min.x() <= o.max.x() && o.min.y() <= o.max.y())) throw std::invalid_argument("ik: obstacle min must be <= max");
    }
}

IkEvaluator::IkEvaluator(IkScenario scenario) : s_(std::move(scenario)) { s_.validate(); }

Pose IkEvaluator::perturbed_base(const ErrorVector& e) const {
    return compose(compose(s_.object_in_world, invert(to_pose(e))), s_.base_in_object);
}

bool IkEvaluator::footprint_collides(const Pose& base) const {
    Eigen::Matrix3d r = base.rotation_matrix();
    double heading = std::atan2(r(1, 0), r(0, 0));
    auto footprint = geom::oriented_rect(base.translation().head<2>(), heading, s_.footprint_length / 2, s_.footprint_width / 2);
    for (const auto& obstacle : s_.obstacles) {
        if (geom::convex_intersect(footprint, geom::to_polygon(obstacle))) return true;
    }
    return false;
}

Outcome IkEvaluator::evaluate(const ErrorVector& e) const {
    Pose base = perturbed_base(e);
    if (footprint_collides(base)) return Outcome::failure;

    Vec2 to_object = s_.object_in_world.translation().head<2>() - base.translation().head<2>();
    double reach = to_object.norm();
    if (reach < s_.reach_min || reach > s_.reach_max) return Outcome::failure;

    Eigen::Matrix3d r = base.rotation_matrix();
    double heading = std::atan2(r(1, 0), r(0, 0));
    double bearing = std::atan2(to_object.y(), to_object.x());
    if (std::abs(angle_diff(bearing, heading)) > s_.heading_half_angle) return Outcome::failure;
    return Outcome::success;
}

bool IkEvaluator::executable(const Pose& estimated_object) const {
    return !footprint_collides(compose(estimated_object, s_.base_in_object));
}

// ---------------------------------------------------------------------------
// Grasp success

double section_height(const Section& s) {
    return std::visit([](const auto& sec) { return sec.height; }, s);
}

void GraspScenario::validate() const {
    if (!(opening_width > 0)) throw std::invalid_argument("grasp: opening_width must be > 0");
    if (!(finger_length > 0 && finger_thickness > 0 && palm_depth > 0)) throw std::invalid_argument("grasp: finger and palm dimensions must be > 0");
    if (!(min_finger_overlap >= 0 && min_finger_overlap <= finger_length)) throw std::invalid_argument("grasp: min_finger_overlap must be in [0, finger_length]");
    if (!(friction_half_angle > 0 && friction_half_angle < kPi / 2)) throw std::invalid_argument("grasp: friction_half_angle must be in (0, 90) degrees");
    if (!(stability_offset_max >= 0)) throw std::invalid_argument("grasp: stability_offset_max must be >= 0");
    std::visit(
        [](const auto& sec) {
            using T = std::decay_t<decltype(sec)>;
            if (!(sec.height > 0)) throw std::invalid_argument("grasp: section height must be > 0");
            if constexpr (std::is_same_v<T, BoxSection>) {
                if (!(sec.width > 0 && sec.depth > 0)) throw std::invalid_argument("grasp: box dimensions must be > 0");
            } else if constexpr (std::is_same_v<T, CylinderSection>) {
                if (!(sec.radius > 0)) throw std::invalid_argument("grasp: cylinder radius must be > 0");
            } else if constexpr (std::is_same_v<T, AnnulusSection>) {
                if (!(sec.r_in >= 0 && sec.r_in < sec.r_out)) throw std::invalid_argument("grasp: annulus needs 0 <= r_in < r_out");
            } else {
                if (!(sec.radius > 0 && sec.handle_width > 0 && sec.handle_extent > 0)) throw std::invalid_argument("grasp: mug dimensions must be > 0");
            }
        },
        section);
}

Pose GraspScenario::top_down(const Eigen::Vector2d& xy, double depth, double height, double closing_yaw) {
    Eigen::Vector3d y(std::cos(closing_yaw), std::sin(closing_yaw), 0);
    Eigen::Vector3d z(0, 0, -1);
    Eigen::Matrix3d r;
    r.col(0) = y.cross(z);
    r.col(1) = y;
    r.col(2) = z;
    return {Eigen::Quaterniond(r), Eigen::Vector3d(xy.x(), xy.y(), height / 2 - depth)};
}

GraspEvaluator::GraspEvaluator(GraspScenario scenario) : s_(std::move(scenario)) { s_.validate(); }

Pose GraspEvaluator::perturbed_grasp(const ErrorVector& e) const {
    return compose(invert(to_pose(e)), s_.grasp_in_object);
}

namespace {

geom::Rect mug_handle(const MugSection& m) {
    return {Vec2(0, -m.handle_width / 2), Vec2(m.radius + m.handle_extent, m.handle_width / 2)};
}

geom::Rect box_rect(const BoxSection& b) { return {Vec2(-b.width / 2, -b.depth / 2), Vec2(b.width / 2, b.depth / 2)}; }

Vec2 rect_face_normal(const geom::Rect& r, const Vec2& p) {
    Vec2 center = (r.min + r.max) / 2;
    Vec2 half = (r.max - r.min) / 2;
    Vec2 q = p - center;
    double dx = std::abs(q.x()) - half.x();
    double dy = std::abs(q.y()) - half.y();
    if (dx >= dy) return Vec2(q.x() >= 0 ? 1 : -1, 0);
    return Vec2(0, q.y() >= 0 ? 1 : -1);
}

}  // namespace

bool GraspEvaluator::polygon_hits_section(std::span<const Vec2> poly) const {
    const Vec2 origin = Vec2::Zero();
    return std::visit(
        [&](const auto& sec) -> bool {
            using T = std::decay_t<decltype(sec)>;
            if constexpr (std::is_same_v<T, BoxSection>) {
                return geom::convex_intersect(poly, geom::to_polygon(box_rect(sec)));
            } else if constexpr (std::is_same_v<T, CylinderSection>) {
                return geom::distance_to_convex(poly, origin) <= sec.radius;
            } else if constexpr (std::is_same_v<T, AnnulusSection>) {
                return geom::distance_to_convex(poly, origin) <= sec.r_out && geom::max_distance_to_vertices(poly, origin) >= sec.r_in;
            } else {
                return geom::distance_to_convex(poly, origin) <= sec.radius ||
                       geom::convex_intersect(poly, geom::to_polygon(mug_handle(sec)));
            }
        },
        s_.section);
}

std::vector<geom::Interval> GraspEvaluator::chord(const Vec2& origin, const Vec2& dir) const {
    std::vector<geom::Interval> out;
    geom::Interval iv{};
    std::visit(
        [&](const auto& sec) {
            using T = std::decay_t<decltype(sec)>;
            if constexpr (std::is_same_v<T, BoxSection>) {
                if (geom::line_rect(origin, dir, box_rect(sec), iv)) out.push_back(iv);
            } else if constexpr (std::is_same_v<T, CylinderSection>) {
                if (geom::line_circle(origin, dir, Vec2::Zero(), sec.radius, iv)) out.push_back(iv);
            } else if constexpr (std::is_same_v<T, AnnulusSection>) {
                if (!geom::line_circle(origin, dir, Vec2::Zero(), sec.r_out, iv)) return;
                geom::Interval inner{};
                if (sec.r_in > 0 && geom::line_circle(origin, dir, Vec2::Zero(), sec.r_in, inner)) {
                    out.push_back({iv.lo, inner.lo});
                    out.push_back({inner.hi, iv.hi});
                } else {
                    out.push_back(iv);
                }
            } else {
                if (geom::line_circle(origin, dir, Vec2::Zero(), sec.radius, iv)) out.push_back(iv);
                if (geom::line_rect(origin, dir, mug_handle(sec), iv)) out.push_back(iv);
                geom::merge_intervals(out);
            }
        },
        s_.section);
    return out;
}

Vec2 GraspEvaluator::outward_normal(const Vec2& p) const {
    return std::visit(
        [&](const auto& sec) -> Vec2 {
            using T = std::decay_t<decltype(sec)>;
            if constexpr (std::is_same_v<T, BoxSection>) {
                return rect_face_normal(box_rect(sec), p);
            } else if constexpr (std::is_same_v<T, CylinderSection>) {
                return p.normalized();
            } else if constexpr (std::is_same_v<T, AnnulusSection>) {
                double r = p.norm();
                return std::abs(r - sec.r_out) <= std::abs(r - sec.r_in) ? Vec2(p / r) : Vec2(-p / r);
            } else {
                if (p.norm() > sec.radius + 1e-9) return rect_face_normal(mug_handle(sec), p);
                return p.normalized();
            }
        },
        s_.section);
}

Outcome GraspEvaluator::evaluate(const ErrorVector& e) const {
    const Pose g = perturbed_grasp(e);
    const Eigen::Matrix3d r = g.rotation_matrix();
    const Eigen::Vector3d p = g.translation();
    const Eigen::Vector3d width_axis = r.col(0);
    const Eigen::Vector3d closing = r.col(1);
    const Eigen::Vector3d approach = r.col(2);

    const double h = section_height(s_.section);
    const double floor_z = -h / 2;
    const double top_z = h / 2;
    const double half_open = s_.opening_width / 2;
    const double half_depth = s_.palm_depth / 2;

    if (approach.z() >= -1e-9) return Outcome::failure;  // approaching from below the horizon

    // Fingertips must stay above the support plane.
    const Eigen::Vector3d tip_pos = p + closing * half_open;
    const Eigen::Vector3d tip_neg = p - closing * half_open;
    double lowest_tip = std::min(tip_pos.z(), tip_neg.z()) - std::abs(width_axis.z()) * half_depth;
    if (lowest_tip < floor_z) return Outcome::failure;

    // Vertical finger/object overlap sets the closing plane.
    double overlap_lo = std::max(floor_z, p.z());
    double overlap_hi = std::min(top_z, p.z() - approach.z() * s_.finger_length);
    if (overlap_hi - overlap_lo < s_.min_finger_overlap) return Outcome::failure;
    const double contact_z = (overlap_lo + overlap_hi) / 2;

    const Vec2 closing_xy = closing.head<2>();
    const Vec2 width_xy = width_axis.head<2>();

    // Palm, if it reaches below the top of the object.
    const Eigen::Vector3d palm = p - approach * s_.finger_length;
    const double palm_reach = half_open + s_.finger_thickness;
    double palm_low = palm.z() - std::abs(closing.z()) * palm_reach - std::abs(width_axis.z()) * half_depth;
    if (palm_low < top_z) {
        Vec2 corner = palm.head<2>() - closing_xy * palm_reach - width_xy * half_depth;
        auto footprint = geom::parallelogram(corner, closing_xy * 2 * palm_reach, width_xy * s_.palm_depth);
        if (polygon_hits_section(footprint)) return Outcome::failure;
    }

    // Finger cross-sections at the closing plane, open pose.
    auto at_contact_height = [&](const Eigen::Vector3d& tip) -> Vec2 {
        double s = (contact_z - tip.z()) / (-approach.z());
        return (tip - approach * s).head<2>();
    };
    const Vec2 finger_pos = at_contact_height(tip_pos);
    const Vec2 finger_neg = at_contact_height(tip_neg);
    auto finger_pos_poly = geom::parallelogram(finger_pos - width_xy * half_depth, closing_xy * s_.finger_thickness, width_xy * s_.palm_depth);
    auto finger_neg_poly = geom::parallelogram(finger_neg - width_xy * half_depth, -closing_xy * s_.finger_thickness, width_xy * s_.palm_depth);
    if (polygon_hits_section(finger_pos_poly) || polygon_hits_section(finger_neg_poly)) return Outcome::failure;

    // Close along the projected closing line until both fingers touch.
    const Vec2 span = finger_pos - finger_neg;
    const double half_span = span.norm() / 2;
    if (half_span < 1e-9) return Outcome::failure;
    const Vec2 dir = span / (2 * half_span);
    const Vec2 mid = (finger_pos + finger_neg) / 2;

    double contact_hi = -std::numeric_limits<double>::infinity();
    double contact_lo = std::numeric_limits<double>::infinity();
    for (const auto& iv : chord(mid, dir)) {
        if (iv.hi <= -half_span || iv.lo >= half_span) continue;
        contact_hi = std::max(contact_hi, std::min(iv.hi, half_span));
        contact_lo = std::min(contact_lo, std::max(iv.lo, -half_span));
    }
    if (!(contact_hi > contact_lo)) return Outcome::failure;  // nothing enclosed
    if (contact_hi - contact_lo > s_.opening_width) return Outcome::failure;

    const Vec2 p_hi = mid + dir * contact_hi;
    const Vec2 p_lo = mid + dir * contact_lo;
    const Vec2 n_hi = outward_normal(p_hi);
    const Vec2 n_lo = outward_normal(p_lo);

    // Antipodal check against the 3D closing axis, so tilt counts against friction.
    const double cos_friction = std::cos(s_.friction_half_angle);
    if (n_hi.dot(closing_xy) < cos_friction) return Outcome::failure;
    if (-n_lo.dot(closing_xy) < cos_friction) return Outcome::failure;

    const Vec2 contact_mid = (p_hi + p_lo) / 2;
    if (contact_mid.norm() > s_.stability_offset_max) return Outcome::success_unstable;
    return Outcome::success;
}

}  // namespace pgam
