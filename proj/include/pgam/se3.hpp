#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pgam {

// Rigid transform: unit quaternion rotation plus translation in meters.
class Pose {
public:
    Pose() = default;
    Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);

    static Pose identity() { return {}; }
    static Pose from_translation(const Eigen::Vector3d& t);
    static Pose from_matrix(const Eigen::Matrix4d& m);

    const Eigen::Quaterniond& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }
    Eigen::Matrix4d matrix() const;

    Eigen::Vector3d transform_point(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

private:
    Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
    Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);

// Rotation angle (radians) of a⁻¹·b plus translation gap, for tolerance checks.
double rotation_gap(const Pose& a, const Pose& b);
double translation_gap(const Pose& a, const Pose& b);

// Object-frame error chart: translation in meters plus fixed-axis X-Y-Z Euler
// angles (R = Rz·Ry·Rx), angles in (−π, π].
struct ErrorVector {
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    Eigen::Vector3d r = Eigen::Vector3d::Zero();

    static ErrorVector zero() { return {}; }
    static ErrorVector from_array(const double (&v)[6]);

    double operator[](int axis) const { return axis < 3 ? t[axis] : r[axis - 3]; }
    double& operator[](int axis) { return axis < 3 ? t[axis] : r[axis - 3]; }

    // |pitch| within 1e-6 of π/2; roll and yaw are then not separable.
    bool near_gimbal_lock() const;

    bool operator==(const ErrorVector&) const = default;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGimbalTolerance = 1e-6;

double deg2rad(double deg);
double rad2deg(double rad);

// Wraps to (−π, π].
double wrap_angle(double a);

// Signed shortest angular difference a − b, in (−π, π].
double angle_diff(double a, double b);

Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& r);
Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& m);

Pose to_pose(const ErrorVector& e);
ErrorVector from_pose(const Pose& p);

// ε = estimate⁻¹ · candidate, expressed in the error chart.
ErrorVector error_of(const Pose& estimate, const Pose& candidate);

// Inverse of error_of in its second argument: estimate · ε.
Pose apply_error(const Pose& estimate, const ErrorVector& e);

inline constexpr double kDefaultLambda = 0.01;  // meters per radian

// ‖Δt‖₂ + λ·‖wrapped Δr‖₂. Axis-separable, so nearest-cell search on a
// regular grid reduces to per-axis rounding.
double distance(const ErrorVector& a, const ErrorVector& b, double lambda = kDefaultLambda);

}  // namespace pgam
