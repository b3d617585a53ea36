#include "pgam/se3.hpp"

#include <cmath>

namespace pgam {

Pose::Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

Pose Pose::from_translation(const Eigen::Vector3d& t) { return {Eigen::Quaterniond::Identity(), t}; }

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
    Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
    return {Eigen::Quaterniond(r), m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d Pose::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_matrix();
    m.topRightCorner<3, 1>() = translation_;
    return m;
}

Pose compose(const Pose& a, const Pose& b) {
    return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

Pose invert(const Pose& p) {
    Eigen::Quaterniond inv = p.rotation().conjugate();
    return {inv, -(inv * p.translation())};
}

double rotation_gap(const Pose& a, const Pose& b) {
    return a.rotation().angularDistance(b.rotation());
}

double translation_gap(const Pose& a, const Pose& b) {
    return (a.translation() - b.translation()).norm();
}

ErrorVector ErrorVector::from_array(const double (&v)[6]) {
    ErrorVector e;
    for (int i = 0; i < 6; ++i) e[i] = v[i];
    return e;
}

bool ErrorVector::near_gimbal_lock() const {
    return std::abs(std::abs(r.y()) - kPi / 2) <= kGimbalTolerance;
}

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

double wrap_angle(double a) {
    if (a > -kPi && a <= kPi) return a;
    double w = std::remainder(a, 2 * kPi);
    if (w <= -kPi) w += 2 * kPi;
    return w;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& r) {
    return (Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& m) {
    double cos_pitch = std::hypot(m(0, 0), m(1, 0));
    double pitch = std::atan2(-m(2, 0), cos_pitch);
    double roll = 0.0;
    double yaw = 0.0;
    if (cos_pitch > 1e-12) {
        roll = std::atan2(m(2, 1), m(2, 2));
        yaw = std::atan2(m(1, 0), m(0, 0));
    } else {
        // Gimbal lock: only yaw − roll (or yaw + roll) is observable; put it all in yaw.
        yaw = std::atan2(-m(0, 1), m(1, 1));
    }
    return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

Pose to_pose(const ErrorVector& e) { return {Eigen::Quaterniond(euler_to_matrix(e.r)), e.t}; }

ErrorVector from_pose(const Pose& p) {
    ErrorVector e;
    e.t = p.translation();
    e.r = matrix_to_euler(p.rotation_matrix());
    return e;
}

ErrorVector error_of(const Pose& estimate, const Pose& candidate) {
    return from_pose(compose(invert(estimate), candidate));
}

Pose apply_error(const Pose& estimate, const ErrorVector& e) { return compose(estimate, to_pose(e)); }

double distance(const ErrorVector& a, const ErrorVector& b, double lambda) {
    Eigen::Vector3d dr(angle_diff(a.r.x(), b.r.x()), angle_diff(a.r.y(), b.r.y()), angle_diff(a.r.z(), b.r.z()));
    return (a.t - b.t).norm() + lambda * dr.norm();
}

}  // namespace pgam
