#include "oracles.hpp"

#include <texive/orientation.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace texive;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const Vec3 kField(30, 0, 40);

std::vector<SensorSample> static_window(const Eigen::Quaterniond& q, int n = 10) {
    std::vector<SensorSample> w(n);
    for (int i = 0; i < n; ++i) {
        w[i].t_ms = i * 50;
        w[i].accel = q.conjugate() * Vec3(0, 0, kGravity);
        w[i].mag = q.conjugate() * kField;
    }
    return w;
}

double angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
    return Eigen::AngleAxisd(a.conjugate() * b).angle();
}

} // namespace

TEST(Euler, RoundTrip) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> yaw(-3.1, 3.1), pitch(-1.5, 1.5), roll(-3.1, 3.1);
    for (int i = 0; i < 500; ++i) {
        const EulerAngles e{pitch(rng), roll(rng), yaw(rng)};
        const auto back = to_euler(from_euler(e));
        EXPECT_NEAR(back.pitch, e.pitch, 1e-9);
        EXPECT_NEAR(back.roll, e.roll, 1e-9);
        EXPECT_NEAR(back.yaw, e.yaw, 1e-9);
    }
}

TEST(Euler, AxisConventions) {
    // Positive yaw turns body x from north towards east.
    const Vec3 x = rotate(from_euler({0, 0, 90 * kDeg}), Vec3::UnitX());
    EXPECT_NEAR(x.y(), 1.0, 1e-12);
    // Positive pitch raises the nose: body x gains an upward (negative down) part.
    const Vec3 n = rotate(from_euler({30 * kDeg, 0, 0}), Vec3::UnitX());
    EXPECT_LT(n.z(), 0.0);
}

TEST(Rotation, MatchesRodriguesAndPreservesLength) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const std::array<long double, 3> axis = {nd(rng), nd(rng), nd(rng)};
        const double angle = 3 * nd(rng);
        const Vec3 ax = Vec3(double(axis[0]), double(axis[1]), double(axis[2])).normalized();
        const Eigen::Quaterniond q(Eigen::AngleAxisd(angle, ax));
        const Vec3 v(nd(rng), nd(rng), nd(rng));
        const Vec3 r = rotate(q, v);
        const auto want = oracle::rodrigues(axis, angle).apply({v.x(), v.y(), v.z()});
        EXPECT_NEAR(r.norm(), v.norm(), 1e-12);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(r[k], static_cast<double>(want[k]), 1e-12);
    }
}

TEST(ExpMap, SmallAndLargeAngles) {
    const auto tiny = detail::exp_map(Vec3(1e-12, 0, 0));
    EXPECT_NEAR(tiny.norm(), 1.0, 1e-15);
    const auto big = detail::exp_map(Vec3(0, 0, std::numbers::pi / 2));
    EXPECT_NEAR(rotate(big, Vec3::UnitX()).y(), 1.0, 1e-12);
}

TEST(EkfInit, RecoversTiltAndHeading) {
    for (const EulerAngles e : {EulerAngles{0, 0, 0}, EulerAngles{40 * kDeg, -20 * kDeg, 100 * kDeg},
                                EulerAngles{-60 * kDeg, 150 * kDeg, -45 * kDeg}}) {
        const auto q = from_euler(e);
        const auto st = ekf_init(static_window(q));
        EXPECT_LT(angle_between(st.q, q), 1e-9);
    }
}

TEST(EkfInit, FlatPhoneIsIdentity) {
    const auto st = ekf_init(static_window(Eigen::Quaterniond::Identity()));
    const auto e = to_euler(st.q);
    EXPECT_NEAR(e.pitch, 0, 1e-12);
    EXPECT_NEAR(e.roll, 0, 1e-12);
    EXPECT_NEAR(e.yaw, 0, 1e-12);
}

TEST(EkfInit, Errors) {
    auto w = static_window(Eigen::Quaterniond::Identity());
    EXPECT_THROW(ekf_init(std::span(w).first(5)), Error);  // 250 ms
    for (auto& s : w) s.gyro = Vec3(0.5, 0, 0);
    try {
        ekf_init(w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotStatic);
    }
}

TEST(EkfStep, RejectsNonIncreasingTime) {
    OrientationState st;
    st.t_ms = 100;
    SensorSample s;
    s.t_ms = 100;
    try {
        ekf_step(st, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonIncreasingTime);
    }
}

TEST(EkfStep, StaticConvergenceFromTenDegrees) {
    OrientationState st;
    st.q = from_euler({10 * kDeg, -10 * kDeg, 0});
    st.P = Eigen::Matrix3d::Identity() * EkfConfig{}.init_attitude_var;
    SensorSample s;
    s.accel = Vec3(0, 0, kGravity);
    s.mag = kField;
    for (int i = 1; i <= 100; ++i) {
        s.t_ms = i * 50;
        st = ekf_step(st, s);
    }
    const auto e = to_euler(st.q);
    EXPECT_LT(std::abs(e.pitch), 0.5 * kDeg);
    EXPECT_LT(std::abs(e.roll), 0.5 * kDeg);
}

TEST(EkfStep, QuaternionStaysUnit) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd(0, 2);
    OrientationState st;
    SensorSample s;
    for (int i = 1; i <= 20000; ++i) {
        s.t_ms = i * 50;
        s.gyro = Vec3(nd(rng), nd(rng), nd(rng));
        s.accel = Vec3(nd(rng), nd(rng), kGravity + nd(rng));
        s.mag = Vec3(30, nd(rng), 40);
        st = ekf_step(st, s);
        ASSERT_NEAR(st.q.norm(), 1.0, 1e-12);
        ASSERT_TRUE(st.P.allFinite());
    }
}

TEST(EkfStep, TracksYawRotationFromGyro) {
    const double rate = 30 * kDeg;  // rad/s about the down axis
    OrientationState st = ekf_init(static_window(Eigen::Quaterniond::Identity()));
    Eigen::Quaterniond truth = Eigen::Quaterniond::Identity();
    for (int i = 1; i <= 40; ++i) {
        truth = truth * detail::exp_map(Vec3(0, 0, rate * 0.05));
        SensorSample s;
        s.t_ms = st.t_ms + 50;
        s.gyro = Vec3(0, 0, rate);
        s.accel = truth.conjugate() * Vec3(0, 0, kGravity);
        s.mag = truth.conjugate() * kField;
        st = ekf_step(st, s);
    }
    EXPECT_LT(angle_between(st.q, truth), 0.2 * kDeg);
    EXPECT_NEAR(to_euler(st.q).yaw, 60 * kDeg, 0.2 * kDeg);
}

TEST(Efc, StaticSampleHasNoLinearAcceleration) {
    const auto q = from_euler({25 * kDeg, 70 * kDeg, -130 * kDeg});
    const auto w = static_window(q);
    const auto st = ekf_init(w);
    const auto efc = to_efc(st, w.back());
    EXPECT_LT(efc.linear_accel.norm(), 1e-9);
    EXPECT_NEAR(efc.mag.x(), 30, 1e-9);
    EXPECT_NEAR(efc.mag.y(), 0, 1e-9);
    EXPECT_NEAR(efc.mag.z(), 40, 1e-9);
}

TEST(Tilt, FromAccel) {
    const auto e = tilt_from_accel(from_euler({0.3, -0.4, 1.0}).conjugate() * Vec3(0, 0, kGravity));
    EXPECT_NEAR(e.pitch, 0.3, 1e-12);
    EXPECT_NEAR(e.roll, -0.4, 1e-12);
}

TEST(Tilt, RolledNinetyDegrees) {
    const Vec3 a(0, kGravity, 0);
    const auto e = tilt_from_accel(a);
    EXPECT_NEAR(e.roll, std::numbers::pi / 2, 1e-6);
    EXPECT_NEAR(e.pitch, 0, 1e-12);
    // The same attitude must map the reading back onto earth-frame gravity.
    const Vec3 g = rotate(from_euler(e), a);
    EXPECT_NEAR((g - Vec3(0, 0, kGravity)).norm(), 0, 1e-9);
}
