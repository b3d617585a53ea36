#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pgam/se3.hpp"

using namespace pgam;

namespace {

double max_abs(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) { return (a - b).cwiseAbs().maxCoeff(); }

bool near_identity(const Pose& p, double tol) {
    return rotation_gap(p, Pose::identity()) < tol && p.translation().norm() < tol;
}

}  // namespace

TEST_CASE("compose with identity and inverse") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        Pose p = oracle::random_pose(rng);
        Pose q = compose(Pose::identity(), p);
        CHECK(rotation_gap(q, p) < 1e-9);
        CHECK(translation_gap(q, p) < 1e-12);
        CHECK(near_identity(compose(p, invert(p)), 1e-9));
        CHECK(std::abs(compose(p, p).rotation().norm() - 1) < 1e-9);
    }
}

TEST_CASE("three-link chain matches 4x4 matrix product") {
    std::mt19937_64 rng(2);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        Pose wc = oracle::random_pose(rng), co = oracle::random_pose(rng), ot = oracle::random_pose(rng);
        Pose wt = compose(compose(wc, co), ot);
        Eigen::Matrix4d expect = oracle::homogeneous(wc) * oracle::homogeneous(co) * oracle::homogeneous(ot);
        worst = std::max(worst, max_abs(oracle::homogeneous(wt), expect));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("composition is associative") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        Pose a = oracle::random_pose(rng), b = oracle::random_pose(rng), c = oracle::random_pose(rng);
        Pose l = compose(compose(a, b), c), r = compose(a, compose(b, c));
        CHECK(rotation_gap(l, r) < 1e-9);
        CHECK(translation_gap(l, r) < 1e-9);
    }
}

TEST_CASE("invert") {
    CHECK(near_identity(invert(Pose::identity()), 1e-15));
    Pose t = invert(Pose::from_translation({1, 2, 3}));
    CHECK(t.translation().isApprox(Eigen::Vector3d(-1, -2, -3)));
    CHECK(rotation_gap(t, Pose::identity()) == 0);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        Pose p = oracle::random_pose(rng);
        CHECK(rotation_gap(invert(invert(p)), p) < 1e-9);
        CHECK(translation_gap(invert(invert(p)), p) < 1e-9);
    }
}

TEST_CASE("quaternion normalized on construction") {
    Pose p(Eigen::Quaterniond(2, 0, 0, 0), Eigen::Vector3d::Zero());
    CHECK(std::abs(p.rotation().norm() - 1) < 1e-15);
}

TEST_CASE("euler chart matches Rz*Ry*Rx product") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng) / 2, c = u(rng);
        worst = std::max(worst, (euler_to_matrix({a, b, c}) - oracle::rot_xyz(a, b, c)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("error_of basics") {
    std::mt19937_64 rng(6);
    Pose p = oracle::random_pose(rng);
    ErrorVector z = error_of(p, p);
    CHECK(z.t.norm() < 1e-12);
    CHECK(z.r.norm() < 1e-9);

    ErrorVector e = error_of(Pose::identity(), Pose::from_translation({0.01, 0, 0}));
    CHECK(e.t.isApprox(Eigen::Vector3d(0.01, 0, 0)));
    CHECK(e.r.norm() == 0);
    CHECK_FALSE(e.near_gimbal_lock());
}

TEST_CASE("apply_error and error_of are mutual inverses") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-kPi, kPi), pitch(-kPi / 2 + 1e-3, kPi / 2 - 1e-3), t(-0.5, 0.5);
    for (int i = 0; i < 1000; ++i) {
        Pose est = oracle::random_pose(rng);
        ErrorVector e;
        e.t = {t(rng), t(rng), t(rng)};
        e.r = {u(rng), pitch(rng), u(rng)};
        ErrorVector back = error_of(est, apply_error(est, e));
        CHECK((back.t - e.t).norm() < 1e-9);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(angle_diff(back.r[k], e.r[k])) < 1e-9);

        Pose cand = oracle::random_pose(rng);
        Pose again = apply_error(est, error_of(est, cand));
        CHECK(rotation_gap(again, cand) < 1e-9);
        CHECK(translation_gap(again, cand) < 1e-9);
    }
}

TEST_CASE("apply_error matches matrix oracle") {
    std::mt19937_64 rng(8);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        Pose est = oracle::random_pose(rng);
        ErrorVector e = oracle::random_error(rng, 0.3, kPi);
        worst = std::max(worst, max_abs(oracle::homogeneous(apply_error(est, e)), oracle::homogeneous(est) * oracle::chart(e)));
    }
    CHECK(worst < 1e-9);
    Pose p = oracle::random_pose(rng);
    CHECK(rotation_gap(apply_error(p, ErrorVector::zero()), p) < 1e-12);
    ErrorVector e{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}};
    CHECK(max_abs(oracle::homogeneous(apply_error(Pose::identity(), e)), oracle::chart(e)) < 1e-12);
}

TEST_CASE("gimbal lock is flagged, not fatal") {
    ErrorVector e = from_pose(to_pose(ErrorVector{{0, 0, 0}, {0.3, kPi / 2, 0.2}}));
    CHECK(e.near_gimbal_lock());
    // The pose is still reproduced even though roll and yaw are merged.
    CHECK(rotation_gap(to_pose(e), to_pose(ErrorVector{{0, 0, 0}, {0.3, kPi / 2, 0.2}})) < 1e-6);
}

TEST_CASE("angles wrap to (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    ErrorVector e = from_pose(to_pose(ErrorVector{{0, 0, 0}, {0, 0, 3 * kPi / 2}}));
    CHECK(e.r.z() == doctest::Approx(-kPi / 2));
}

TEST_CASE("distance") {
    ErrorVector z;
    ErrorVector t{{0.03, 0.04, 0}, {0, 0, 0}};
    CHECK(distance(t, z, 0.01) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(distance(t, t, 0.01) == 0);

    std::mt19937_64 rng(9);
    for (int i = 0; i < 10000; ++i) {
        ErrorVector a = oracle::random_error(rng, 0.1, kPi), b = oracle::random_error(rng, 0.1, kPi),
                    c = oracle::random_error(rng, 0.1, kPi);
        double lambda = std::uniform_real_distribution<double>(1e-3, 1.0)(rng);
        CHECK(distance(a, b, lambda) == distance(b, a, lambda));
        CHECK(distance(a, c, lambda) <= distance(a, b, lambda) + distance(b, c, lambda) + 1e-12);
        CHECK(distance(a, b, lambda) == doctest::Approx(oracle::chart_distance(a, b, lambda)).epsilon(1e-12));
    }
}
