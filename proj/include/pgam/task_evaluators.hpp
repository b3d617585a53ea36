#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pgam/geometry2d.hpp"
#include "pgam/se3.hpp"

namespace pgam {

enum class Outcome { success, success_unstable, failure };

inline bool is_success(Outcome o) { return o != Outcome::failure; }
std::string_view to_string(Outcome o);

// P(task | Ô, ε) as a deterministic three-valued predicate over object-frame errors.
// Implementations must be pure: precompute calls evaluate() from many threads.
class TaskEvaluator {
public:
    virtual ~TaskEvaluator() = default;

    virtual Outcome evaluate(const ErrorVector& e) const = 0;
    virtual std::string name() const = 0;

    // Whether the robot can act on an estimated object pose at all, before
    // knowing the true error (e.g. the planned base pose is collision-free).
    virtual bool executable(const Pose& /*estimated_object*/) const { return true; }
};

// ---------------------------------------------------------------------------
// Mobile-base IK availability (planar reachability model).

struct IkScenario {
    Pose object_in_world;  // true object pose; obstacles live in the world frame
    Pose base_in_object;   // selected base pose relative to the object
    double reach_min = 0.4;
    double reach_max = 0.8;
    double heading_half_angle = deg2rad(30);
    std::vector<geom::Rect> obstacles;
    double footprint_length = 0.5;  // along base heading
    double footprint_width = 0.5;

    void validate() const;
};

class IkEvaluator final : public TaskEvaluator {
public:
    explicit IkEvaluator(IkScenario scenario);

    Outcome evaluate(const ErrorVector& e) const override;
    std::string name() const override { return "ik_availability"; }
    bool executable(const Pose& estimated_object) const override;

    const IkScenario& scenario() const { return s_; }

    // Base pose in the world when the object frame is off by e.
    Pose perturbed_base(const ErrorVector& e) const;
    bool footprint_collides(const Pose& base_in_world) const;

private:
    IkScenario s_;
};

// ---------------------------------------------------------------------------
// Parallel-jaw grasp success (quasi-static 2.5D model).
//
// Object frame: origin at the center of mass, z up, the section spans
// z in [-h/2, h/2] and rests on a support plane at z = -h/2.
// Gripper frame: origin at the fingertip midpoint, +z is the approach
// direction (palm to fingertips), +y the closing axis, x spans the finger
// width (palm_depth).

struct BoxSection {
    double width;   // along object x
    double depth;   // along object y
    double height;
};
struct CylinderSection {
    double radius;
    double height;
};
struct AnnulusSection {
    double r_in;
    double r_out;
    double height;
};
struct MugSection {  // solid cylinder with a rectangular handle toward +x
    double radius;
    double height;
    double handle_width;
    double handle_extent;
};
using Section = std::variant<BoxSection, CylinderSection, AnnulusSection, MugSection>;

double section_height(const Section& s);

struct GraspScenario {
    Pose grasp_in_object;
    double opening_width = 0.085;
    double finger_length = 0.04;
    double finger_thickness = 0.01;
    double palm_depth = 0.02;
    double min_finger_overlap = 0.008;
    Section section = BoxSection{0.06, 0.16, 0.21};
    double friction_half_angle = 0.4636476090008061;  // atan(0.5)
    double stability_offset_max = 0.03;

    void validate() const;

    // Top-down grasp with the fingertips `depth` below the section top,
    // closing axis at `closing_yaw` in the object's xy plane.
    static Pose top_down(const Eigen::Vector2d& xy, double depth, double section_height, double closing_yaw);
};

class GraspEvaluator final : public TaskEvaluator {
public:
    explicit GraspEvaluator(GraspScenario scenario);

    Outcome evaluate(const ErrorVector& e) const override;
    std::string name() const override { return "grasp_success"; }

    const GraspScenario& scenario() const { return s_; }

    Pose perturbed_grasp(const ErrorVector& e) const;

private:
    bool polygon_hits_section(std::span<const geom::Vec2> poly) const;
    std::vector<geom::Interval> chord(const geom::Vec2& origin, const geom::Vec2& dir) const;
    geom::Vec2 outward_normal(const geom::Vec2& p) const;

    GraspScenario s_;
};

}  // namespace pgam
